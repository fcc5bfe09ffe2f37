#include "dnspde/convex.hpp"
#include "dnspde/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace dnspde {

namespace {

double norm2(std::span<const double> x)
{
    double s = 0.0;
    for (double v : x) {
        s += v * v;
    }
    return std::sqrt(s);
}

void check_point(const Potential& P, std::span<const double> x)
{
    if (static_cast<int>(x.size()) != P.dimension()) {
        throw ShapeMismatch("point of dimension " + std::to_string(x.size())
                            + " passed to a potential of dimension " + std::to_string(P.dimension()));
    }
    for (double v : x) {
        if (!std::isfinite(v)) {
            throw InvalidArgument("non-finite point");
        }
    }
}

template <class ScalarMap>
Point apply_structure(const Potential& P, std::span<const double> x, ScalarMap&& map)
{
    Point out(x.size(), 0.0);
    if (P.structure() == Structure::Separable) {
        for (std::size_t a = 0; a < x.size(); ++a) {
            out[a] = map(P.profile(static_cast<int>(a)), x[a]);
        }
        return out;
    }
    if (x.size() == 1) {
        out[0] = map(P.profile(), x[0]);
        return out;
    }
    // radial: act on the radius, keep the direction
    const double r = norm2(x);
    if (r == 0.0) {
        return out;
    }
    const double scaled = map(P.profile(), r) / r;
    for (std::size_t a = 0; a < x.size(); ++a) {
        out[a] = scaled * x[a];
    }
    return out;
}

} // namespace

Potential::Potential(Arity arity, Structure structure, std::vector<ScalarProfile> profiles,
                     double symmetry_bound)
    : arity_(arity), structure_(structure), profiles_(std::move(profiles)), symmetry_bound_(symmetry_bound)
{
    if (!(symmetry_bound_ >= 1.0)) {
        throw InvalidArgument("symmetry bound must be at least 1");
    }
}

Potential Potential::scalar(ScalarProfile profile, double symmetry_bound)
{
    return Potential(Arity::Scalar, Structure::Radial, {std::move(profile)}, symmetry_bound);
}

Potential Potential::radial(int dimension, ScalarProfile profile, double symmetry_bound)
{
    if (dimension < 1) {
        throw InvalidArgument("vector potential needs dimension >= 1");
    }
    if (!profile.is_even()) {
        throw InvalidArgument("radial potential needs an even profile, got " + profile.describe());
    }
    std::vector<ScalarProfile> profiles(static_cast<std::size_t>(dimension), profile);
    return Potential(Arity::Vector, Structure::Radial, std::move(profiles), symmetry_bound);
}

Potential Potential::separable(std::vector<ScalarProfile> components, double symmetry_bound)
{
    if (components.empty()) {
        throw InvalidArgument("separable potential needs at least one component");
    }
    return Potential(Arity::Vector, Structure::Separable, std::move(components), symmetry_bound);
}

bool Potential::has_closed_forms() const noexcept
{
    return std::all_of(profiles_.begin(), profiles_.end(), [](const ScalarProfile& p) {
        return p.has_closed_resolvent() && p.has_closed_conjugate();
    });
}

std::string Potential::describe() const
{
    std::ostringstream out;
    if (arity_ == Arity::Scalar) {
        out << "scalar " << profiles_.front().describe();
    } else if (structure_ == Structure::Radial) {
        out << "radial[d=" << dimension() << "] " << profiles_.front().describe();
    } else {
        out << "separable[";
        for (std::size_t a = 0; a < profiles_.size(); ++a) {
            out << (a ? ", " : "") << profiles_[a].describe();
        }
        out << "]";
    }
    if (offset_ != 0.0) {
        out << " + " << offset_;
    }
    return out.str();
}

const ScalarProfile& Potential::profile(int component) const
{
    if (structure_ == Structure::Separable) {
        return profiles_.at(static_cast<std::size_t>(component));
    }
    return profiles_.front();
}

Potential Potential::shifted(double offset) const
{
    Potential copy = *this;
    copy.offset_ += offset;
    return copy;
}

Point MonotoneGraph::minimal_section(std::span<const double> x) const
{
    check_point(potential_, x);
    return apply_structure(potential_, x, [](const ScalarProfile& p, double v) { return p.minimal_section(v); });
}

double eval_potential(const Potential& P, std::span<const double> x)
{
    check_point(P, x);
    double value = P.offset();
    if (P.structure() == Structure::Separable) {
        for (std::size_t a = 0; a < x.size(); ++a) {
            value += P.profile(static_cast<int>(a)).value(x[a]);
        }
        return value;
    }
    return value + P.profile().value(x.size() == 1 ? x[0] : norm2(x));
}

double eval_potential(const Potential& P, double x)
{
    return eval_potential(P, std::span<const double>(&x, 1));
}

Point resolvent(const MonotoneGraph& G, YosidaParam lam, std::span<const double> x)
{
    check_point(G.potential(), x);
    const double lambda = lam.value();
    return apply_structure(G.potential(), x,
                           [lambda](const ScalarProfile& p, double v) { return p.resolvent(lambda, v); });
}

Point resolvent_bisection(const MonotoneGraph& G, YosidaParam lam, std::span<const double> x)
{
    check_point(G.potential(), x);
    const double lambda = lam.value();
    return apply_structure(G.potential(), x, [lambda](const ScalarProfile& p, double v) {
        return p.resolvent_bisection(lambda, v);
    });
}

Point yosida(const MonotoneGraph& G, YosidaParam lam, std::span<const double> x)
{
    Point r = resolvent(G, lam, x);
    for (std::size_t a = 0; a < r.size(); ++a) {
        r[a] = (x[a] - r[a]) / lam.value();
    }
    return r;
}

double moreau_envelope(const Potential& P, YosidaParam lam, std::span<const double> x)
{
    const MonotoneGraph G(P);
    const Point r = resolvent(G, lam, x);
    double dist2 = 0.0;
    for (std::size_t a = 0; a < r.size(); ++a) {
        dist2 += (x[a] - r[a]) * (x[a] - r[a]);
    }
    return eval_potential(P, r) + dist2 / (2.0 * lam.value());
}

namespace {

template <class ScalarConjugate>
double conjugate_impl(const Potential& P, std::span<const double> y, ScalarConjugate&& conj)
{
    check_point(P, y);
    double value = -P.offset();
    if (P.structure() == Structure::Separable) {
        for (std::size_t a = 0; a < y.size(); ++a) {
            value += conj(P.profile(static_cast<int>(a)), y[a]);
        }
        return value;
    }
    return value + conj(P.profile(), y.size() == 1 ? y[0] : norm2(y));
}

} // namespace

double conjugate(const Potential& P, std::span<const double> y)
{
    return conjugate_impl(P, y, [](const ScalarProfile& p, double v) { return p.conjugate(v); });
}

double conjugate_numeric(const Potential& P, std::span<const double> y)
{
    return conjugate_impl(P, y, [](const ScalarProfile& p, double v) { return p.conjugate_numeric(v); });
}

double fenchel_residual(const Potential& P, std::span<const double> x, std::span<const double> y)
{
    const double conj = conjugate(P, y);
    if (std::isinf(conj)) {
        throw InvalidArgument("fenchel_residual: conjugate is infinite at y");
    }
    const double px = eval_potential(P, x);
    double xy = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) {
        xy += x[a] * y[a];
    }
    return px + conj - xy;
}

bool ValidationReport::all_passed() const
{
    return std::all_of(entries.begin(), entries.end(), [](const ValidationEntry& e) { return e.passed; });
}

const ValidationEntry& ValidationReport::entry(const std::string& check) const
{
    for (const auto& e : entries) {
        if (e.check == check) {
            return e;
        }
    }
    throw InvalidArgument("no validation entry named " + check);
}

ValidationReport validate_potential(const Potential& P, double probe_radius, int sample_count)
{
    if (!(probe_radius > 0.0)) {
        throw InvalidArgument("probe radius must be positive");
    }
    if (sample_count < 8) {
        throw InvalidArgument("validation needs at least 8 samples");
    }
    const auto d = static_cast<std::size_t>(P.dimension());
    std::mt19937_64 rng(0x5eedULL + static_cast<unsigned long long>(sample_count));
    std::uniform_real_distribution<double> coord(-probe_radius, probe_radius);
    const auto draw = [&] {
        Point x(d);
        for (double& v : x) {
            v = coord(rng);
        }
        return x;
    };

    ValidationReport report;

    {
        ValidationEntry e{"origin", true, 0.0, Point(d, 0.0), ""};
        e.worst_value = eval_potential(P, e.worst_sample);
        e.passed = std::abs(e.worst_value) <= 1e-14;
        e.detail = "P(0) must vanish";
        report.entries.push_back(std::move(e));
    }

    std::vector<Point> samples;
    samples.reserve(static_cast<std::size_t>(sample_count));
    for (int i = 0; i < sample_count; ++i) {
        samples.push_back(draw());
    }

    {
        ValidationEntry e{"nonnegativity", true, kInfinity, {}, "min P over samples"};
        for (const auto& x : samples) {
            const double v = eval_potential(P, x);
            if (v < e.worst_value) {
                e.worst_value = v;
                e.worst_sample = x;
            }
        }
        e.passed = e.worst_value >= 0.0;
        report.entries.push_back(std::move(e));
    }

    {
        ValidationEntry e{"convexity", true, -kInfinity, {}, "max of P(tx+(1-t)y) - tP(x) - (1-t)P(y)"};
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int i = 0; i < sample_count; ++i) {
            const Point x = draw();
            const Point y = draw();
            const double t = unit(rng);
            Point z(d);
            for (std::size_t a = 0; a < d; ++a) {
                z[a] = t * x[a] + (1.0 - t) * y[a];
            }
            const double rhs = t * eval_potential(P, x) + (1.0 - t) * eval_potential(P, y);
            const double gap = eval_potential(P, z) - rhs;
            if (gap > e.worst_value) {
                e.worst_value = gap;
                e.worst_sample = z;
            }
            if (gap > 1e-12 * std::max(1.0, std::abs(rhs))) {
                e.passed = false;
            }
        }
        report.entries.push_back(std::move(e));
    }

    {
        ValidationEntry e{"superlinearity", true, kInfinity, {}, ""};
        if (P.arity() == Arity::Scalar) {
            e.worst_value = 0.0;
            e.detail = "not applicable to scalar potentials";
        } else {
            // slopes P(R e)/R on radii R_k = radius * 2^(k-8): must be
            // nondecreasing and at least double over the last four octaves
            constexpr int kLevels = 9;
            std::normal_distribution<double> gauss;
            const int directions = std::max(4, sample_count / 4);
            e.detail = "growth of P(Re)/R over the last four octaves (needs >= 2, nondecreasing)";
            for (int i = 0; i < directions; ++i) {
                Point dir(d);
                double n = 0.0;
                do {
                    for (double& v : dir) {
                        v = gauss(rng);
                    }
                    n = norm2(dir);
                } while (n == 0.0);
                for (double& v : dir) {
                    v /= n;
                }
                std::array<double, kLevels> slope{};
                bool monotone = true;
                for (int k = 0; k < kLevels; ++k) {
                    const double R = probe_radius * std::ldexp(1.0, k - (kLevels - 1));
                    Point x(d);
                    for (std::size_t a = 0; a < d; ++a) {
                        x[a] = R * dir[a];
                    }
                    slope[static_cast<std::size_t>(k)] = eval_potential(P, x) / R;
                    if (k > 0) {
                        const double prev = slope[static_cast<std::size_t>(k - 1)];
                        if (slope[static_cast<std::size_t>(k)] < prev - 1e-12 * (1.0 + std::abs(prev))) {
                            monotone = false;
                        }
                    }
                }
                const double base = slope[kLevels - 5];
                const double growth = base > 0.0 ? slope[kLevels - 1] / base : 0.0;
                if (growth < e.worst_value || !monotone) {
                    e.worst_value = monotone ? growth : 0.0;
                    e.worst_sample = dir;
                }
                if (!monotone || growth < 2.0) {
                    e.passed = false;
                }
            }
        }
        report.entries.push_back(std::move(e));
    }

    {
        ValidationEntry e{"symmetry", true, 0.0, {}, ""};
        e.detail = "max P(x)/P(-x) against bound " + std::to_string(P.symmetry_bound());
        for (const auto& x : samples) {
            Point minus(x);
            for (double& v : minus) {
                v = -v;
            }
            const double denom = eval_potential(P, minus);
            if (denom <= 0.0) {
                continue;
            }
            const double ratio = eval_potential(P, x) / denom;
            if (ratio > e.worst_value) {
                e.worst_value = ratio;
                e.worst_sample = x;
            }
        }
        e.passed = e.worst_value <= P.symmetry_bound();
        report.entries.push_back(std::move(e));
    }

    return report;
}

} // namespace dnspde
