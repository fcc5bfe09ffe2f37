#include "dnspde/noise.hpp"
#include "dnspde/errors.hpp"
#include "dnspde/format.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace dnspde {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Philox4x32-10 (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key)
{
    constexpr std::uint32_t kM0 = 0xD2511F53U;
    constexpr std::uint32_t kM1 = 0xCD9E8D57U;
    constexpr std::uint32_t kW0 = 0x9E3779B9U;
    constexpr std::uint32_t kW1 = 0xBB67AE85U;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        key[0] += kW0;
        key[1] += kW1;
    }
    return ctr;
}

double to_open_unit(std::uint32_t hi, std::uint32_t lo)
{
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

constexpr std::uint32_t kDirectLevel = 0xFFFFFFFFU;
constexpr std::uint32_t kStreamTag = 0x6E6F6973U; // "nois"

} // namespace

double counter_normal(const PathSeed& seed, std::uint32_t a, std::uint32_t b, std::uint32_t c)
{
    const std::uint64_t k = splitmix64(seed.master_seed) ^ splitmix64(seed.path_index + 0x632BE59BD9B4E019ULL);
    const auto out = philox4x32({a, b, c, kStreamTag},
                                {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)});
    const double u1 = to_open_unit(out[0], out[1]);
    const double u2 = to_open_unit(out[2], out[3]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::string to_string(GainKind kind)
{
    switch (kind) {
    case GainKind::Constant: return "constant";
    case GainKind::ClippedLinear: return "clipped_linear";
    case GainKind::BoundedSmooth: return "bounded_smooth";
    }
    return "unknown";
}

Gain Gain::constant(double level)
{
    if (!std::isfinite(level)) {
        throw InvalidArgument("constant gain must be finite");
    }
    return Gain(GainKind::Constant, level, 0.0, 0.0);
}

Gain Gain::clipped_linear(double offset, double slope, double cap)
{
    if (!std::isfinite(offset) || !std::isfinite(slope) || !(cap > 0.0)) {
        throw InvalidArgument("clipped-linear gain needs finite offset/slope and a positive cap");
    }
    return Gain(GainKind::ClippedLinear, offset, slope, cap);
}

Gain Gain::bounded_smooth(double offset, double amplitude)
{
    if (!std::isfinite(offset) || !std::isfinite(amplitude)) {
        throw InvalidArgument("bounded-smooth gain needs finite parameters");
    }
    return Gain(GainKind::BoundedSmooth, offset, amplitude, 0.0);
}

double Gain::operator()(double u) const noexcept
{
    switch (kind_) {
    case GainKind::Constant: return a_;
    case GainKind::ClippedLinear: return std::clamp(a_ + b_ * u, -c_, c_);
    case GainKind::BoundedSmooth: return a_ + b_ * std::tanh(u);
    }
    return 0.0;
}

double Gain::lipschitz() const noexcept
{
    return kind_ == GainKind::Constant ? 0.0 : std::abs(b_);
}

double Gain::sup_norm() const noexcept
{
    switch (kind_) {
    case GainKind::Constant: return std::abs(a_);
    case GainKind::ClippedLinear: return c_;
    case GainKind::BoundedSmooth: return std::abs(a_) + std::abs(b_);
    }
    return std::numeric_limits<double>::infinity();
}

std::string Gain::describe() const
{
    std::ostringstream out;
    out << to_string(kind_);
    switch (kind_) {
    case GainKind::Constant: out << "(" << a_ << ")"; break;
    case GainKind::ClippedLinear: out << "(offset=" << a_ << ", slope=" << b_ << ", cap=" << c_ << ")"; break;
    case GainKind::BoundedSmooth: out << "(offset=" << a_ << ", amplitude=" << b_ << ")"; break;
    }
    return out.str();
}

ModeBasis::ModeBasis(const DirichletGrid& grid, int count) : grid_(grid), modes_(modes_by_eigenvalue(grid, count))
{
    const std::size_t n = grid.node_count();
    table_.resize(modes_.size() * n);
    for (std::size_t k = 0; k < modes_.size(); ++k) {
        const GridField e = sine_mode(grid, modes_[k].kx, modes_[k].ky);
        std::copy(e.values().begin(), e.values().end(), table_.begin() + static_cast<std::ptrdiff_t>(k * n));
    }
}

std::span<const double> ModeBasis::values(int k) const
{
    const std::size_t n = grid_.node_count();
    return std::span<const double>(table_).subspan(static_cast<std::size_t>(k) * n, n);
}

double ModeBasis::weighted_sup(std::span<const double> amplitudes) const
{
    if (static_cast<int>(amplitudes.size()) > count()) {
        throw ShapeMismatch("more amplitudes than basis modes");
    }
    double best = 0.0;
    for (std::size_t i = 0; i < grid_.node_count(); ++i) {
        double w = 0.0;
        for (std::size_t k = 0; k < amplitudes.size(); ++k) {
            const double e = values(static_cast<int>(k))[i];
            w += amplitudes[k] * amplitudes[k] * e * e;
        }
        best = std::max(best, w);
    }
    return best;
}

NoiseModel::NoiseModel(std::vector<double> amplitudes, Gain gain, double declared_bound)
    : amplitudes_(std::move(amplitudes)), gain_(gain), bound_(declared_bound)
{
    if (amplitudes_.empty()) {
        throw InvalidArgument("noise model needs at least one mode");
    }
    for (double b : amplitudes_) {
        if (!std::isfinite(b)) {
            throw InvalidArgument("noise amplitudes must be finite");
        }
    }
    if (!(declared_bound >= 0.0) || !std::isfinite(declared_bound)) {
        throw InvalidArgument("declared N_B must be finite and nonnegative");
    }
}

NoiseModel NoiseModel::none(int mode_count)
{
    return NoiseModel(std::vector<double>(static_cast<std::size_t>(std::max(1, mode_count)), 0.0), Gain::constant(1.0),
                      0.0);
}

NoiseModel NoiseModel::additive(std::vector<double> amplitudes, double declared_bound)
{
    return NoiseModel(std::move(amplitudes), Gain::constant(1.0), declared_bound);
}

std::vector<double> NoiseModel::power_law(int K, double c, double q)
{
    if (K < 1) {
        throw InvalidArgument("mode count must be positive");
    }
    std::vector<double> b(static_cast<std::size_t>(K));
    for (int k = 1; k <= K; ++k) {
        b[static_cast<std::size_t>(k - 1)] = c * std::pow(static_cast<double>(k), -q);
    }
    return b;
}

bool NoiseModel::is_zero() const noexcept
{
    return std::all_of(amplitudes_.begin(), amplitudes_.end(), [](double b) { return b == 0.0; })
        || (gain_.is_additive() && gain_(0.0) == 0.0);
}

double NoiseModel::certified_bound(const ModeBasis& basis) const
{
    const double root_w = std::sqrt(basis.weighted_sup(amplitudes_));
    const auto& g = basis.grid();
    const double root_vol = std::sqrt(g.cell_volume() * static_cast<double>(g.node_count()));
    const double lip = gain_.lipschitz();
    const double affine = std::max(std::abs(gain_(0.0)) * root_vol, lip);
    const double growth = std::min(affine, gain_.sup_norm() * root_vol);
    return root_w * std::max(growth, lip);
}

NoiseModel NoiseModel::with_amplitudes(std::vector<double> amplitudes) const
{
    return NoiseModel(std::move(amplitudes), gain_, bound_);
}

NoiseModel NoiseModel::with_declared_bound(double bound) const
{
    return NoiseModel(amplitudes_, gain_, bound);
}

std::span<const double> IncrementTable::row(int step) const
{
    return std::span<const double>(data_).subspan(index(step, 0), static_cast<std::size_t>(k_));
}

IncrementTable sample_increments(const PathSeed& seed, int n_steps, double dt, int K)
{
    if (n_steps < 0 || !(dt >= 0.0) || !std::isfinite(dt) || K < 1) {
        throw InvalidArgument("sample_increments needs n_steps >= 0, dt >= 0 and K >= 1");
    }
    IncrementTable table(n_steps, K);
    if (n_steps == 0 || dt == 0.0) {
        return table;
    }
    const auto n = static_cast<unsigned>(n_steps);
    if (std::has_single_bit(n)) {
        const int levels = std::countr_zero(n);
        const double horizon = dt * n_steps;
        std::vector<double> w(n + 1);
        for (int k = 0; k < K; ++k) {
            const auto mode = static_cast<std::uint32_t>(k);
            w[0] = 0.0;
            w[n] = std::sqrt(horizon) * counter_normal(seed, mode, 0, 0);
            for (int level = 1; level <= levels; ++level) {
                const unsigned stride = n >> level;
                const double sd = std::sqrt(horizon / std::ldexp(1.0, level + 1));
                for (unsigned i = stride; i < n; i += 2 * stride) {
                    w[i] = 0.5 * (w[i - stride] + w[i + stride])
                         + sd * counter_normal(seed, mode, static_cast<std::uint32_t>(level), i / stride);
                }
            }
            for (int s = 0; s < n_steps; ++s) {
                table(s, k) = w[static_cast<std::size_t>(s) + 1] - w[static_cast<std::size_t>(s)];
            }
        }
        return table;
    }
    const double sd = std::sqrt(dt);
    for (int s = 0; s < n_steps; ++s) {
        for (int k = 0; k < K; ++k) {
            table(s, k) = sd * counter_normal(seed, static_cast<std::uint32_t>(k), kDirectLevel,
                                              static_cast<std::uint32_t>(s));
        }
    }
    return table;
}

std::uint64_t increment_checksum(const IncrementTable& table)
{
    std::uint64_t hash = fnv1a("increments");
    for (int k = 0; k < table.modes(); ++k) {
        double total = 0.0;
        for (int s = 0; s < table.steps(); ++s) {
            total += table(s, k);
        }
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.9e;", total);
        hash = fnv1a(buf, hash);
    }
    return hash;
}

void apply_b_into(const NoiseModel& model, const ModeBasis& basis, std::span<const double> u,
                  std::span<const double> dw, std::span<double> out)
{
    const int K = model.mode_count();
    if (K > basis.count()) {
        throw ShapeMismatch("noise model uses " + std::to_string(K) + " modes but the basis has "
                            + std::to_string(basis.count()));
    }
    if (static_cast<int>(dw.size()) != K) {
        throw ShapeMismatch("increment vector length differs from the mode count");
    }
    const std::size_t n = basis.grid().node_count();
    if (u.size() != n || out.size() != n) {
        throw ShapeMismatch("apply_b: state does not live on the basis grid");
    }
    std::fill(out.begin(), out.end(), 0.0);
    const auto amps = model.amplitudes();
    for (int k = 0; k < K; ++k) {
        const double c = amps[static_cast<std::size_t>(k)] * dw[static_cast<std::size_t>(k)];
        if (c == 0.0) {
            continue;
        }
        const auto e = basis.values(k);
        for (std::size_t i = 0; i < n; ++i) {
            out[i] += c * e[i];
        }
    }
    const Gain& g = model.gain();
    for (std::size_t i = 0; i < n; ++i) {
        out[i] *= g(u[i]);
    }
}

GridField apply_b(const NoiseModel& model, const ModeBasis& basis, const GridField& u, std::span<const double> dw)
{
    if (!(u.grid() == basis.grid())) {
        throw ShapeMismatch("apply_b: state and basis grids differ");
    }
    GridField out(u.grid());
    apply_b_into(model, basis, u.values(), dw, out.values());
    return out;
}

GridField apply_b(const NoiseModel& model, const GridField& u, std::span<const double> dw)
{
    if (model.mode_count() > static_cast<int>(u.grid().node_count())) {
        throw InvalidArgument("noise uses " + std::to_string(model.mode_count())
                              + " modes but the grid only supports " + std::to_string(u.grid().node_count()));
    }
    return apply_b(model, ModeBasis(u.grid(), model.mode_count()), u, dw);
}

double hs_norm_sq(const NoiseModel& model, const ModeBasis& basis, std::span<const double> u)
{
    const int K = model.mode_count();
    if (K > basis.count()) {
        throw ShapeMismatch("noise model uses more modes than the basis");
    }
    const auto amps = model.amplitudes();
    const Gain& g = model.gain();
    double total = 0.0;
    for (int k = 0; k < K; ++k) {
        const double b = amps[static_cast<std::size_t>(k)];
        if (b == 0.0) {
            continue;
        }
        const auto e = basis.values(k);
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double v = g(u[i]) * e[i];
            s += v * v;
        }
        total += b * b * s;
    }
    return total * basis.grid().cell_volume();
}

double hs_norm(const NoiseModel& model, const ModeBasis& basis, const GridField& u)
{
    return std::sqrt(hs_norm_sq(model, basis, u.values()));
}

double hs_norm(const NoiseModel& model, const GridField& u)
{
    return hs_norm(model, ModeBasis(u.grid(), model.mode_count()), u);
}

double hs_distance(const NoiseModel& model, const ModeBasis& basis, const GridField& u, const GridField& v)
{
    const auto amps = model.amplitudes();
    const Gain& g = model.gain();
    double total = 0.0;
    for (int k = 0; k < model.mode_count(); ++k) {
        const auto e = basis.values(k);
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double d = (g(u[i]) - g(v[i])) * e[i];
            s += d * d;
        }
        total += amps[static_cast<std::size_t>(k)] * amps[static_cast<std::size_t>(k)] * s;
    }
    return std::sqrt(total * basis.grid().cell_volume());
}

NoiseModel smooth_noise(const NoiseModel& model, double delta, int m, const DirichletGrid& grid)
{
    if (!(delta >= 0.0) || m < 1) {
        throw InvalidArgument("smooth_noise needs delta >= 0 and m >= 1");
    }
    const auto modes = modes_by_eigenvalue(grid, model.mode_count());
    std::vector<double> b(model.amplitudes().begin(), model.amplitudes().end());
    if (delta == 0.0) {
        return model.with_amplitudes(std::move(b));
    }
    for (std::size_t k = 0; k < b.size(); ++k) {
        b[k] *= std::pow(1.0 + delta * modes[k].eigenvalue, -m);
    }
    return model.with_amplitudes(std::move(b));
}

NoiseBoundCheck check_noise_bounds(const NoiseModel& model, const ModeBasis& basis, int samples, std::uint64_t seed)
{
    NoiseBoundCheck check;
    check.declared = model.declared_bound();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> log_scale(-2.0, 2.0);
    const auto& grid = basis.grid();
    const auto draw = [&] {
        GridField x(grid);
        const double s = std::pow(10.0, log_scale(rng));
        for (double& v : x.values()) {
            v = s * gauss(rng);
        }
        return x;
    };
    for (int i = 0; i < samples; ++i) {
        const GridField x = draw();
        GridField y = draw();
        if (i % 2 == 1) {
            // nearby pairs probe the local slope of the gain
            y = x;
            for (double& v : y.values()) {
                v += 1e-3 * gauss(rng);
            }
        }
        check.worst_growth_ratio = std::max(check.worst_growth_ratio, hs_norm(model, basis, x) / (1.0 + norm(x)));
        const double d = norm(x - y);
        if (d > 0.0) {
            check.worst_lipschitz_ratio = std::max(check.worst_lipschitz_ratio, hs_distance(model, basis, x, y) / d);
        }
    }
    const double slack = 1.0 + 1e-12;
    check.passed = check.worst_growth_ratio <= check.declared * slack
                && check.worst_lipschitz_ratio <= check.declared * slack;
    return check;
}

} // namespace dnspde
