#include "dnspde/grid.hpp"
#include "dnspde/errors.hpp"
#include "dnspde/format.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

namespace dnspde {

namespace {

void require_same_grid(const DirichletGrid& a, const DirichletGrid& b, const char* what)
{
    if (!(a == b)) {
        throw ShapeMismatch(std::string(what) + ": fields live on different grids");
    }
}

} // namespace

DirichletGrid DirichletGrid::interval(double length, int nodes)
{
    if (!(length > 0.0) || !std::isfinite(length)) {
        throw InvalidArgument("grid extent must be positive");
    }
    if (nodes < 3) {
        throw InvalidArgument("grid needs at least 3 interior nodes per axis");
    }
    DirichletGrid g;
    g.dim_ = 1;
    g.n_ = {nodes, 1};
    g.len_ = {length, 1.0};
    g.h_ = {length / (nodes + 1), 1.0};
    return g;
}

DirichletGrid DirichletGrid::rectangle(double length_x, double length_y, int nodes_x, int nodes_y)
{
    DirichletGrid g = interval(length_x, nodes_x);
    const DirichletGrid gy = interval(length_y, nodes_y);
    g.dim_ = 2;
    g.n_[1] = nodes_y;
    g.len_[1] = length_y;
    g.h_[1] = gy.h_[0];
    return g;
}

std::size_t DirichletGrid::node_count() const noexcept
{
    return static_cast<std::size_t>(n_[0]) * static_cast<std::size_t>(n_[1]);
}

std::size_t DirichletGrid::face_count(int axis) const
{
    if (axis < 0 || axis >= dim_) {
        return 0;
    }
    if (axis == 0) {
        return static_cast<std::size_t>(n_[0] + 1) * static_cast<std::size_t>(n_[1]);
    }
    return static_cast<std::size_t>(n_[0]) * static_cast<std::size_t>(n_[1] + 1);
}

double DirichletGrid::cell_volume() const noexcept
{
    return dim_ == 1 ? h_[0] : h_[0] * h_[1];
}

double DirichletGrid::coordinate(int axis, int index) const
{
    return (index + 1) * spacing(axis);
}

double DirichletGrid::axis_eigenvalue(int axis, int k) const
{
    const double h = spacing(axis);
    const double s = std::sin(std::numbers::pi * k * h / (2.0 * extent(axis)));
    return 4.0 / (h * h) * s * s;
}

double DirichletGrid::lambda_max() const
{
    double sum = axis_eigenvalue(0, n_[0]);
    if (dim_ == 2) {
        sum += axis_eigenvalue(1, n_[1]);
    }
    return sum;
}

double DirichletGrid::lambda_min() const
{
    double sum = axis_eigenvalue(0, 1);
    if (dim_ == 2) {
        sum += axis_eigenvalue(1, 1);
    }
    return sum;
}

GridField::GridField(const DirichletGrid& grid) : grid_(grid), values_(grid.node_count(), 0.0) {}

GridField::GridField(const DirichletGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values))
{
    if (values_.size() != grid_.node_count()) {
        throw ShapeMismatch("grid field has " + std::to_string(values_.size()) + " values, grid has "
                            + std::to_string(grid_.node_count()) + " nodes");
    }
}

GridField& GridField::operator+=(const GridField& other)
{
    require_same_grid(grid_, other.grid_, "GridField +=");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        values_[i] += other.values_[i];
    }
    return *this;
}

GridField& GridField::operator-=(const GridField& other)
{
    require_same_grid(grid_, other.grid_, "GridField -=");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        values_[i] -= other.values_[i];
    }
    return *this;
}

GridField& GridField::operator*=(double factor)
{
    for (double& v : values_) {
        v *= factor;
    }
    return *this;
}

bool GridField::all_finite() const noexcept
{
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

GridField operator+(GridField a, const GridField& b) { return a += b; }
GridField operator-(GridField a, const GridField& b) { return a -= b; }
GridField operator*(double c, GridField a) { return a *= c; }

FluxField::FluxField(const DirichletGrid& grid) : grid_(grid)
{
    for (int a = 0; a < grid.dimension(); ++a) {
        comp_[static_cast<std::size_t>(a)].assign(grid.face_count(a), 0.0);
    }
}

std::span<double> FluxField::component(int axis) { return comp_.at(static_cast<std::size_t>(axis)); }

std::span<const double> FluxField::component(int axis) const
{
    return comp_.at(static_cast<std::size_t>(axis));
}

FluxField& FluxField::operator+=(const FluxField& other)
{
    require_same_grid(grid_, other.grid_, "FluxField +=");
    for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t i = 0; i < comp_[a].size(); ++i) {
            comp_[a][i] += other.comp_[a][i];
        }
    }
    return *this;
}

FluxField& FluxField::operator-=(const FluxField& other)
{
    require_same_grid(grid_, other.grid_, "FluxField -=");
    for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t i = 0; i < comp_[a].size(); ++i) {
            comp_[a][i] -= other.comp_[a][i];
        }
    }
    return *this;
}

FluxField& FluxField::operator*=(double factor)
{
    for (auto& c : comp_) {
        for (double& v : c) {
            v *= factor;
        }
    }
    return *this;
}

double inner(const GridField& a, const GridField& b)
{
    require_same_grid(a.grid(), b.grid(), "inner");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return a.grid().cell_volume() * s;
}

double inner(const FluxField& a, const FluxField& b)
{
    require_same_grid(a.grid(), b.grid(), "inner");
    double s = 0.0;
    for (int axis = 0; axis < a.dimension(); ++axis) {
        const auto ca = a.component(axis);
        const auto cb = b.component(axis);
        for (std::size_t i = 0; i < ca.size(); ++i) {
            s += ca[i] * cb[i];
        }
    }
    return a.grid().cell_volume() * s;
}

double norm(const GridField& a) { return std::sqrt(inner(a, a)); }
double norm(const FluxField& a) { return std::sqrt(inner(a, a)); }

void gradient_into(const DirichletGrid& grid, std::span<const double> u, std::array<std::span<double>, 2> faces)
{
    const int nx = grid.nodes(0);
    const int ny = grid.dimension() == 2 ? grid.nodes(1) : 1;
    const double inv_hx = 1.0 / grid.spacing(0);
    const auto at = [&](int ix, int iy) {
        return (ix < 0 || ix >= nx || iy < 0 || iy >= ny) ? 0.0 : u[static_cast<std::size_t>(ix * ny + iy)];
    };
    for (int ix = 0; ix <= nx; ++ix) {
        for (int iy = 0; iy < ny; ++iy) {
            faces[0][static_cast<std::size_t>(ix * ny + iy)] = (at(ix, iy) - at(ix - 1, iy)) * inv_hx;
        }
    }
    if (grid.dimension() == 2) {
        const double inv_hy = 1.0 / grid.spacing(1);
        for (int ix = 0; ix < nx; ++ix) {
            for (int iy = 0; iy <= ny; ++iy) {
                faces[1][static_cast<std::size_t>(ix * (ny + 1) + iy)] = (at(ix, iy) - at(ix, iy - 1)) * inv_hy;
            }
        }
    }
}

void divergence_into(const DirichletGrid& grid, std::array<std::span<const double>, 2> faces, std::span<double> out)
{
    const int nx = grid.nodes(0);
    const int ny = grid.dimension() == 2 ? grid.nodes(1) : 1;
    const double inv_hx = 1.0 / grid.spacing(0);
    for (int ix = 0; ix < nx; ++ix) {
        for (int iy = 0; iy < ny; ++iy) {
            out[static_cast<std::size_t>(ix * ny + iy)] =
                (faces[0][static_cast<std::size_t>((ix + 1) * ny + iy)] - faces[0][static_cast<std::size_t>(ix * ny + iy)])
                * inv_hx;
        }
    }
    if (grid.dimension() == 2) {
        const double inv_hy = 1.0 / grid.spacing(1);
        for (int ix = 0; ix < nx; ++ix) {
            for (int iy = 0; iy < ny; ++iy) {
                const auto f = static_cast<std::size_t>(ix * (ny + 1) + iy);
                out[static_cast<std::size_t>(ix * ny + iy)] += (faces[1][f + 1] - faces[1][f]) * inv_hy;
            }
        }
    }
}

FluxField gradient(const DirichletGrid& grid, const GridField& u)
{
    require_same_grid(grid, u.grid(), "gradient");
    FluxField f(grid);
    gradient_into(grid, u.values(), {f.component(0), grid.dimension() == 2 ? f.component(1) : std::span<double>{}});
    return f;
}

FluxField gradient(const GridField& u) { return gradient(u.grid(), u); }

GridField divergence(const DirichletGrid& grid, const FluxField& f)
{
    require_same_grid(grid, f.grid(), "divergence");
    GridField out(grid);
    divergence_into(grid,
                    {f.component(0), grid.dimension() == 2 ? f.component(1) : std::span<const double>{}},
                    out.values());
    return out;
}

GridField divergence(const FluxField& f) { return divergence(f.grid(), f); }

namespace {

// y = (I - shift * Delta_h) x with the direct stencil
void apply_shifted(const DirichletGrid& grid, double shift, std::span<const double> x, std::span<double> y)
{
    const int nx = grid.nodes(0);
    const int ny = grid.dimension() == 2 ? grid.nodes(1) : 1;
    const double cx = 1.0 / (grid.spacing(0) * grid.spacing(0));
    const double cy = grid.dimension() == 2 ? 1.0 / (grid.spacing(1) * grid.spacing(1)) : 0.0;
    for (int ix = 0; ix < nx; ++ix) {
        for (int iy = 0; iy < ny; ++iy) {
            const auto i = static_cast<std::size_t>(ix * ny + iy);
            const double c = x[i];
            const double left = ix > 0 ? x[i - static_cast<std::size_t>(ny)] : 0.0;
            const double right = ix + 1 < nx ? x[i + static_cast<std::size_t>(ny)] : 0.0;
            double lap = (left - 2.0 * c + right) * cx;
            if (grid.dimension() == 2) {
                const double down = iy > 0 ? x[i - 1] : 0.0;
                const double up = iy + 1 < ny ? x[i + 1] : 0.0;
                lap += (down - 2.0 * c + up) * cy;
            }
            y[i] = c - shift * lap;
        }
    }
}

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

} // namespace

GridField laplacian_stencil(const GridField& u)
{
    const auto& grid = u.grid();
    GridField out(grid);
    const int nx = grid.nodes(0);
    const int ny = grid.dimension() == 2 ? grid.nodes(1) : 1;
    const auto at = [&](int ix, int iy) {
        return (ix < 0 || ix >= nx || iy < 0 || iy >= ny) ? 0.0 : u[static_cast<std::size_t>(ix * ny + iy)];
    };
    const double hx = grid.spacing(0);
    for (int ix = 0; ix < nx; ++ix) {
        for (int iy = 0; iy < ny; ++iy) {
            double lap = (at(ix - 1, iy) - 2.0 * at(ix, iy) + at(ix + 1, iy)) / (hx * hx);
            if (grid.dimension() == 2) {
                const double hy = grid.spacing(1);
                lap += (at(ix, iy - 1) - 2.0 * at(ix, iy) + at(ix, iy + 1)) / (hy * hy);
            }
            out[static_cast<std::size_t>(ix * ny + iy)] = lap;
        }
    }
    return out;
}

CgResult solve_shifted_laplacian(const DirichletGrid& grid, double shift, std::span<const double> rhs,
                                 std::span<double> x, double rel_tol, int max_iter)
{
    if (!(shift >= 0.0)) {
        throw InvalidArgument("shifted Laplacian solve needs shift >= 0");
    }
    const std::size_t n = grid.node_count();
    if (rhs.size() != n || x.size() != n) {
        throw ShapeMismatch("shifted Laplacian solve: vector length differs from node count");
    }
    double diag = 1.0 + shift * 2.0 / (grid.spacing(0) * grid.spacing(0));
    if (grid.dimension() == 2) {
        diag += shift * 2.0 / (grid.spacing(1) * grid.spacing(1));
    }
    const double rhs_norm = std::sqrt(dot(rhs, rhs));
    if (rhs_norm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        return {};
    }
    std::vector<double> r(n);
    std::vector<double> z(n);
    std::vector<double> p(n);
    std::vector<double> q(n);
    apply_shifted(grid, shift, x, q);
    for (std::size_t i = 0; i < n; ++i) {
        r[i] = rhs[i] - q[i];
        z[i] = r[i] / diag;
    }
    p = z;
    double rz = dot(r, z);
    CgResult result;
    for (int it = 0; it <= max_iter; ++it) {
        result.iterations = it;
        result.relative_residual = std::sqrt(dot(r, r)) / rhs_norm;
        if (result.relative_residual <= rel_tol) {
            return result;
        }
        apply_shifted(grid, shift, p, q);
        const double pq = dot(p, q);
        if (!(pq > 0.0)) {
            throw ConvergenceError("conjugate gradients broke down: operator is not SPD");
        }
        const double alpha = rz / pq;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
            z[i] = r[i] / diag;
        }
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = z[i] + beta * p[i];
        }
    }
    throw ConvergenceError("conjugate gradients did not converge in " + std::to_string(max_iter) + " iterations");
}

GridField laplacian_resolvent(const DirichletGrid& grid, double delta, int m, const GridField& u)
{
    require_same_grid(grid, u.grid(), "laplacian_resolvent");
    if (!(delta >= 0.0)) {
        throw InvalidArgument("laplacian_resolvent needs delta >= 0");
    }
    if (m < 1) {
        throw InvalidArgument("laplacian_resolvent needs m >= 1");
    }
    GridField current = u;
    if (delta == 0.0) {
        return current;
    }
    for (int k = 0; k < m; ++k) {
        GridField next = current;
        solve_shifted_laplacian(grid, delta, current.values(), next.values());
        current = std::move(next);
    }
    return current;
}

double dual_norm_v0(const DirichletGrid& grid, const GridField& f, int m)
{
    return norm(laplacian_resolvent(grid, 1.0, m, f));
}

GridField sine_mode(const DirichletGrid& grid, int kx, int ky)
{
    if (kx < 1 || kx > grid.nodes(0) || (grid.dimension() == 2 && (ky < 1 || ky > grid.nodes(1)))) {
        throw InvalidArgument("sine mode index out of range for the grid");
    }
    GridField e(grid);
    const int nx = grid.nodes(0);
    const int ny = grid.dimension() == 2 ? grid.nodes(1) : 1;
    const double lx = grid.extent(0);
    const double ly = grid.extent(1);
    for (int ix = 0; ix < nx; ++ix) {
        double v = std::sqrt(2.0 / lx) * std::sin(std::numbers::pi * kx * grid.coordinate(0, ix) / lx);
        for (int iy = 0; iy < ny; ++iy) {
            double w = v;
            if (grid.dimension() == 2) {
                w *= std::sqrt(2.0 / ly) * std::sin(std::numbers::pi * ky * grid.coordinate(1, iy) / ly);
            }
            e[static_cast<std::size_t>(ix * ny + iy)] = w;
        }
    }
    return e;
}

std::vector<ModeIndex> modes_by_eigenvalue(const DirichletGrid& grid, int count)
{
    if (count < 0 || static_cast<std::size_t>(count) > grid.node_count()) {
        throw InvalidArgument("requested " + std::to_string(count) + " modes but the grid has only "
                              + std::to_string(grid.node_count()));
    }
    std::vector<ModeIndex> all;
    const int ny = grid.dimension() == 2 ? grid.nodes(1) : 1;
    for (int kx = 1; kx <= grid.nodes(0); ++kx) {
        for (int ky = 1; ky <= ny; ++ky) {
            double ev = grid.axis_eigenvalue(0, kx);
            if (grid.dimension() == 2) {
                ev += grid.axis_eigenvalue(1, ky);
            }
            all.push_back({kx, ky, ev});
        }
    }
    std::stable_sort(all.begin(), all.end(), [](const ModeIndex& a, const ModeIndex& b) {
        if (a.eigenvalue != b.eigenvalue) {
            return a.eigenvalue < b.eigenvalue;
        }
        return a.kx != b.kx ? a.kx < b.kx : a.ky < b.ky;
    });
    all.resize(static_cast<std::size_t>(count));
    return all;
}

SpectralBounds spectral_bounds(const DirichletGrid& grid, int max_iter)
{
    SpectralBounds out;
    out.lambda_max = grid.lambda_max();
    // Start from the checkerboard, which is dominated by the top modes.
    const std::size_t n = grid.node_count();
    const int ny = grid.dimension() == 2 ? grid.nodes(1) : 1;
    std::vector<double> x(n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int ix = static_cast<int>(i) / ny;
        const int iy = static_cast<int>(i) % ny;
        x[i] = ((ix + iy) % 2 == 0 ? 1.0 : -1.0) * (1.0 + 1e-3 * std::sin(0.7 * static_cast<double>(i)));
    }
    double estimate = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        const double nx2 = std::sqrt(dot(x, x));
        for (double& v : x) {
            v /= nx2;
        }
        apply_shifted(grid, 1.0, x, y); // (I - Delta) x
        const double rayleigh = dot(x, y) - 1.0;
        out.iterations = it;
        if (std::abs(rayleigh - estimate) <= 1e-14 * std::abs(rayleigh)) {
            estimate = rayleigh;
            break;
        }
        estimate = rayleigh;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = y[i] - x[i];
        }
    }
    out.power_iteration_estimate = estimate;
    return out;
}

void write_grid_field(std::ostream& out, const GridField& u)
{
    const auto& g = u.grid();
    out << "# gridfield dim=" << g.dimension() << " extents=" << format_double(g.extent(0));
    if (g.dimension() == 2) {
        out << ',' << format_double(g.extent(1));
    }
    out << " nodes=" << g.nodes(0);
    if (g.dimension() == 2) {
        out << ',' << g.nodes(1);
    }
    out << '\n';
    for (double v : u.values()) {
        out << format_double(v) << '\n';
    }
}

GridField read_grid_field(std::istream& in)
{
    std::string header;
    if (!std::getline(in, header) || header.rfind("# gridfield", 0) != 0) {
        throw InvalidArgument("grid field file must start with a '# gridfield' header");
    }
    int dim = 0;
    std::vector<double> extents;
    std::vector<int> nodes;
    std::istringstream fields(header.substr(11));
    std::string token;
    while (fields >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) {
            throw InvalidArgument("malformed grid field header token '" + token + "'");
        }
        const std::string key = token.substr(0, eq);
        std::istringstream list(token.substr(eq + 1));
        std::string item;
        while (std::getline(list, item, ',')) {
            if (key == "dim") {
                dim = std::stoi(item);
            } else if (key == "extents") {
                extents.push_back(std::stod(item));
            } else if (key == "nodes") {
                nodes.push_back(std::stoi(item));
            } else {
                throw InvalidArgument("unknown grid field header key '" + key + "'");
            }
        }
    }
    if (dim < 1 || dim > 2 || extents.size() != static_cast<std::size_t>(dim)
        || nodes.size() != static_cast<std::size_t>(dim)) {
        throw InvalidArgument("grid field header is inconsistent");
    }
    const DirichletGrid grid = dim == 1 ? DirichletGrid::interval(extents[0], nodes[0])
                                        : DirichletGrid::rectangle(extents[0], extents[1], nodes[0], nodes[1]);
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        values.push_back(std::stod(line));
    }
    return GridField(grid, std::move(values));
}

void save_grid_field(const std::filesystem::path& file, const GridField& u)
{
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw InvalidArgument("cannot write " + file.string());
    }
    write_grid_field(out, u);
}

GridField load_grid_field(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in) {
        throw InvalidArgument("cannot open " + file.string());
    }
    return read_grid_field(in);
}

} // namespace dnspde
