#pragma once

// Dirichlet finite-difference grids on an interval or a rectangle with
// staggered (face-centred) fluxes. Gradient and divergence are exact
// negative adjoints under the h-weighted inner products.

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace dnspde {

class DirichletGrid {
public:
    static DirichletGrid interval(double length, int nodes);
    static DirichletGrid rectangle(double length_x, double length_y, int nodes_x, int nodes_y);

    [[nodiscard]] int dimension() const noexcept { return dim_; }
    [[nodiscard]] int nodes(int axis) const { return n_.at(static_cast<std::size_t>(axis)); }
    [[nodiscard]] double extent(int axis) const { return len_.at(static_cast<std::size_t>(axis)); }
    [[nodiscard]] double spacing(int axis) const { return h_.at(static_cast<std::size_t>(axis)); }

    [[nodiscard]] std::size_t node_count() const noexcept;
    /// Faces normal to `axis`: (n_axis + 1) times the node count of the other axis.
    [[nodiscard]] std::size_t face_count(int axis) const;
    /// h_x (1D) or h_x h_y (2D): the weight of every node and face.
    [[nodiscard]] double cell_volume() const noexcept;
    /// Position of interior node `index` along `axis`, index in [0, n).
    [[nodiscard]] double coordinate(int axis, int index) const;

    /// Eigenvalue of -Delta_h for the 1D sine mode k on `axis` (1 <= k <= n).
    [[nodiscard]] double axis_eigenvalue(int axis, int k) const;
    /// Largest eigenvalue of -Delta_h (closed form).
    [[nodiscard]] double lambda_max() const;
    /// Smallest eigenvalue of -Delta_h (closed form).
    [[nodiscard]] double lambda_min() const;

    friend bool operator==(const DirichletGrid&, const DirichletGrid&) = default;

private:
    DirichletGrid() = default;

    int dim_ = 1;
    std::array<int, 2> n_{1, 1};
    std::array<double, 2> len_{1.0, 1.0};
    std::array<double, 2> h_{1.0, 1.0};
};

/// One value per interior node, row-major with axis 0 slowest.
class GridField {
public:
    explicit GridField(const DirichletGrid& grid);
    GridField(const DirichletGrid& grid, std::vector<double> values);

    [[nodiscard]] const DirichletGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::span<double> values() noexcept { return values_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    GridField& operator+=(const GridField& other);
    GridField& operator-=(const GridField& other);
    GridField& operator*=(double factor);

    [[nodiscard]] bool all_finite() const noexcept;

private:
    DirichletGrid grid_;
    std::vector<double> values_;
};

GridField operator+(GridField a, const GridField& b);
GridField operator-(GridField a, const GridField& b);
GridField operator*(double c, GridField a);

/// Face-centred vector field. Component `a` lives on the faces normal to
/// axis a; the layout of component 0 is (n_x + 1) x n_y and of component 1
/// n_x x (n_y + 1), both row-major.
class FluxField {
public:
    explicit FluxField(const DirichletGrid& grid);

    [[nodiscard]] const DirichletGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::span<double> component(int axis);
    [[nodiscard]] std::span<const double> component(int axis) const;
    [[nodiscard]] int dimension() const noexcept { return grid_.dimension(); }

    FluxField& operator+=(const FluxField& other);
    FluxField& operator-=(const FluxField& other);
    FluxField& operator*=(double factor);

private:
    DirichletGrid grid_;
    std::array<std::vector<double>, 2> comp_;
};

/// h-weighted inner products and norms.
[[nodiscard]] double inner(const GridField& a, const GridField& b);
[[nodiscard]] double inner(const FluxField& a, const FluxField& b);
[[nodiscard]] double norm(const GridField& a);
[[nodiscard]] double norm(const FluxField& a);

/// Forward differences onto faces with zero ghost values outside the domain.
[[nodiscard]] FluxField gradient(const DirichletGrid& grid, const GridField& u);
/// Negative adjoint of `gradient`.
[[nodiscard]] FluxField gradient(const GridField& u);
[[nodiscard]] GridField divergence(const DirichletGrid& grid, const FluxField& f);
[[nodiscard]] GridField divergence(const FluxField& f);
/// Classical 3-point / 5-point Dirichlet Laplacian, applied directly.
[[nodiscard]] GridField laplacian_stencil(const GridField& u);

/// Raw-buffer kernels used by the time steppers; no allocation.
void gradient_into(const DirichletGrid& grid, std::span<const double> u, std::array<std::span<double>, 2> faces);
void divergence_into(const DirichletGrid& grid, std::array<std::span<const double>, 2> faces, std::span<double> out);

struct CgResult {
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Solves (I - shift * Delta_h) x = rhs by Jacobi-preconditioned conjugate
/// gradients; `x` holds the initial guess on entry. shift >= 0.
CgResult solve_shifted_laplacian(const DirichletGrid& grid, double shift, std::span<const double> rhs,
                                 std::span<double> x, double rel_tol = 1e-12, int max_iter = 10000);

/// (I - delta Delta_h)^{-m} u by m successive SPD solves.
[[nodiscard]] GridField laplacian_resolvent(const DirichletGrid& grid, double delta, int m, const GridField& u);
/// ||(I - Delta_h)^{-m} f||, a discrete stand-in for a negative Sobolev norm.
[[nodiscard]] double dual_norm_v0(const DirichletGrid& grid, const GridField& f, int m = 2);

/// h-orthonormal discrete sine mode with per-axis indices (k_x, k_y); k_y is
/// ignored in 1D.
[[nodiscard]] GridField sine_mode(const DirichletGrid& grid, int kx, int ky = 1);

struct ModeIndex {
    int kx = 1;
    int ky = 1;
    double eigenvalue = 0.0;
};

/// The first `count` sine modes ordered by eigenvalue, ties broken by (kx, ky).
[[nodiscard]] std::vector<ModeIndex> modes_by_eigenvalue(const DirichletGrid& grid, int count);

struct SpectralBounds {
    double lambda_max = 0.0;
    double power_iteration_estimate = 0.0;
    int iterations = 0;
};

/// Closed-form top eigenvalue of -Delta_h together with a power-iteration
/// estimate for cross-checking.
[[nodiscard]] SpectralBounds spectral_bounds(const DirichletGrid& grid, int max_iter = 20000);

void write_grid_field(std::ostream& out, const GridField& u);
[[nodiscard]] GridField read_grid_field(std::istream& in);
void save_grid_field(const std::filesystem::path& file, const GridField& u);
[[nodiscard]] GridField load_grid_field(const std::filesystem::path& file);

} // namespace dnspde
