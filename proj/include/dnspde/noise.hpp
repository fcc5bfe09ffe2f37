#pragma once

// Truncated cylindrical Wiener process on the discrete Dirichlet sine basis
// and the Hilbert-Schmidt diffusion coefficient
//     B(u) dW = sum_k b_k sigma(u) * e_k dW_k.

#include "dnspde/grid.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dnspde {

enum class GainKind {
    Constant,      ///< sigma(u) = level (additive noise when level = 1)
    ClippedLinear, ///< sigma(u) = clamp(offset + slope u, -cap, cap)
    BoundedSmooth, ///< sigma(u) = offset + amplitude tanh(u)
};

std::string to_string(GainKind kind);

/// Scalar Lipschitz gain applied pointwise to the state.
class Gain {
public:
    static Gain constant(double level = 1.0);
    static Gain clipped_linear(double offset, double slope, double cap);
    static Gain bounded_smooth(double offset, double amplitude);

    [[nodiscard]] GainKind kind() const noexcept { return kind_; }
    [[nodiscard]] double operator()(double u) const noexcept;
    [[nodiscard]] double lipschitz() const noexcept;
    /// sup_u |sigma(u)|, +inf for unbounded gains.
    [[nodiscard]] double sup_norm() const noexcept;
    [[nodiscard]] bool is_additive() const noexcept { return kind_ == GainKind::Constant; }
    [[nodiscard]] std::string describe() const;

private:
    Gain(GainKind kind, double a, double b, double c) : kind_(kind), a_(a), b_(b), c_(c) {}

    GainKind kind_;
    double a_;
    double b_;
    double c_;
};

/// Discrete sine modes spanning the truncated noise space, ordered by
/// eigenvalue of -Delta_h.
class ModeBasis {
public:
    ModeBasis(const DirichletGrid& grid, int count);

    [[nodiscard]] const DirichletGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] int count() const noexcept { return static_cast<int>(modes_.size()); }
    [[nodiscard]] const ModeIndex& mode(int k) const { return modes_.at(static_cast<std::size_t>(k)); }
    [[nodiscard]] std::span<const double> values(int k) const;
    /// max over nodes of sum_k b_k^2 e_k(x)^2
    [[nodiscard]] double weighted_sup(std::span<const double> amplitudes) const;

private:
    DirichletGrid grid_;
    std::vector<ModeIndex> modes_;
    std::vector<double> table_; // count x node_count
};

class NoiseModel {
public:
    NoiseModel(std::vector<double> amplitudes, Gain gain, double declared_bound);

    static NoiseModel none(int mode_count = 1);
    static NoiseModel additive(std::vector<double> amplitudes, double declared_bound);
    /// b_k = c k^{-q}, k = 1..K
    static std::vector<double> power_law(int K, double c, double q);

    [[nodiscard]] int mode_count() const noexcept { return static_cast<int>(amplitudes_.size()); }
    [[nodiscard]] std::span<const double> amplitudes() const noexcept { return amplitudes_; }
    [[nodiscard]] const Gain& gain() const noexcept { return gain_; }
    [[nodiscard]] double declared_bound() const noexcept { return bound_; }
    [[nodiscard]] bool is_additive() const noexcept { return gain_.is_additive(); }
    [[nodiscard]] bool is_zero() const noexcept;

    /// A constant N_B that provably satisfies the growth and Lipschitz
    /// bounds for this model on `basis`.
    [[nodiscard]] double certified_bound(const ModeBasis& basis) const;

    [[nodiscard]] NoiseModel with_amplitudes(std::vector<double> amplitudes) const;
    [[nodiscard]] NoiseModel with_declared_bound(double bound) const;

private:
    std::vector<double> amplitudes_;
    Gain gain_;
    double bound_;
};

struct PathSeed {
    std::uint64_t master_seed = 0;
    std::uint64_t path_index = 0;

    friend bool operator==(const PathSeed&, const PathSeed&) = default;
};

/// n_steps x K Brownian increments, row-major by step.
class IncrementTable {
public:
    IncrementTable(int n_steps, int K) : n_(n_steps), k_(K), data_(static_cast<std::size_t>(n_steps) * K, 0.0) {}

    [[nodiscard]] int steps() const noexcept { return n_; }
    [[nodiscard]] int modes() const noexcept { return k_; }
    [[nodiscard]] double operator()(int step, int mode) const { return data_[index(step, mode)]; }
    double& operator()(int step, int mode) { return data_[index(step, mode)]; }
    [[nodiscard]] std::span<const double> row(int step) const;
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

    friend bool operator==(const IncrementTable&, const IncrementTable&) = default;

private:
    [[nodiscard]] std::size_t index(int step, int mode) const
    {
        return static_cast<std::size_t>(step) * static_cast<std::size_t>(k_) + static_cast<std::size_t>(mode);
    }

    int n_;
    int k_;
    std::vector<double> data_;
};

/// Standard normal deviate from the counter-based stream keyed by `seed`
/// and the 3-word counter.
[[nodiscard]] double counter_normal(const PathSeed& seed, std::uint32_t a, std::uint32_t b, std::uint32_t c);

/// Independent N(0, dt) increments, reproducible bitwise from the seed.
///
/// When n_steps is a power of two the path is built by Brownian-bridge
/// refinement of W on [0, n_steps dt], with one counter per (mode, level,
/// node). Paths on 2^L and 2^{L+1} steps over the same horizon then share
/// the same Brownian motion. Other step counts draw one counter per
/// (mode, step).
[[nodiscard]] IncrementTable sample_increments(const PathSeed& seed, int n_steps, double dt, int K);

/// Checksum of the Brownian values W_k(T) = sum of increments, rounded to
/// 10 significant digits so that coupled refinements agree.
[[nodiscard]] std::uint64_t increment_checksum(const IncrementTable& table);

/// sum_k b_k sigma(u) * e_k dw_k
[[nodiscard]] GridField apply_b(const NoiseModel& model, const ModeBasis& basis, const GridField& u,
                                std::span<const double> dw);
[[nodiscard]] GridField apply_b(const NoiseModel& model, const GridField& u, std::span<const double> dw);
void apply_b_into(const NoiseModel& model, const ModeBasis& basis, std::span<const double> u,
                  std::span<const double> dw, std::span<double> out);

/// (sum_k b_k^2 ||sigma(u) * e_k||^2)^{1/2}
[[nodiscard]] double hs_norm(const NoiseModel& model, const ModeBasis& basis, const GridField& u);
[[nodiscard]] double hs_norm(const NoiseModel& model, const GridField& u);
[[nodiscard]] double hs_norm_sq(const NoiseModel& model, const ModeBasis& basis, std::span<const double> u);
/// ||B(u) - B(v)||_HS
[[nodiscard]] double hs_distance(const NoiseModel& model, const ModeBasis& basis, const GridField& u,
                                 const GridField& v);

/// b_k -> b_k (1 + delta alpha_k)^{-m}, alpha_k the eigenvalue of mode k.
[[nodiscard]] NoiseModel smooth_noise(const NoiseModel& model, double delta, int m, const DirichletGrid& grid);

struct NoiseBoundCheck {
    bool passed = true;
    double worst_growth_ratio = 0.0;    // max ||B(x)|| / (1 + ||x||)
    double worst_lipschitz_ratio = 0.0; // max ||B(x)-B(y)|| / ||x-y||
    double declared = 0.0;
};

/// Samples random states and checks both HS bounds against the declared N_B.
[[nodiscard]] NoiseBoundCheck check_noise_bounds(const NoiseModel& model, const ModeBasis& basis, int samples,
                                                 std::uint64_t seed = 1);

} // namespace dnspde
