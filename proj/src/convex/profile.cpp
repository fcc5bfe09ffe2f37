#include "dnspde/convex.hpp"
#include "dnspde/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dnspde {

namespace {

constexpr double kBracketCap = 1152921504606846976.0; // 2^60
constexpr int kMaxRootIterations = 400;
// Yosida values of bounded graphs land on the bound up to rounding; the
// conjugate's effective domain is widened by this relative slack.
constexpr double kIndicatorSlack = 1.0 + 1e-12;

double sign_of(double x) { return (x > 0.0) - (x < 0.0); }

void require_finite(double x, const char* what)
{
    if (!std::isfinite(x)) {
        throw InvalidArgument(std::string(what) + ": non-finite input");
    }
}

void require_lambda(double lambda)
{
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw InvalidArgument("resolvent parameter must be positive and finite");
    }
}

bool exponent_is(double p, double value) { return std::abs(p - value) < 1e-15; }

} // namespace

std::string to_string(ProfileKind kind)
{
    switch (kind) {
    case ProfileKind::Power: return "power";
    case ProfileKind::Abs: return "abs";
    case ProfileKind::Huberized: return "huberized";
    case ProfileKind::ExpCosh: return "exp-cosh";
    case ProfileKind::Piecewise: return "piecewise-1d";
    case ProfileKind::Sampled: return "user-sampled";
    }
    return "unknown";
}

YosidaParam::YosidaParam(double lambda) : lambda_(lambda)
{
    require_lambda(lambda);
}

ScalarProfile::ScalarProfile(ProfileKind kind, double p, double c, double d)
    : kind_(kind), p_(p), c_(c), d_(d)
{
}

ScalarProfile ScalarProfile::power(double p, double scale)
{
    if (!(p > 1.0) || !std::isfinite(p)) {
        throw InvalidArgument("power potential needs exponent p > 1 (use abs for p = 1)");
    }
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw InvalidArgument("power potential needs a positive scale");
    }
    return ScalarProfile(ProfileKind::Power, p, scale, 1.0);
}

ScalarProfile ScalarProfile::abs(double scale)
{
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw InvalidArgument("abs potential needs a positive scale");
    }
    return ScalarProfile(ProfileKind::Abs, 1.0, scale, 1.0);
}

ScalarProfile ScalarProfile::huberized(double threshold, double scale)
{
    if (!(threshold > 0.0) || !(scale > 0.0) || !std::isfinite(threshold) || !std::isfinite(scale)) {
        throw InvalidArgument("huberized potential needs positive threshold and scale");
    }
    return ScalarProfile(ProfileKind::Huberized, 2.0, scale, threshold);
}

ScalarProfile ScalarProfile::exp_cosh(double scale)
{
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw InvalidArgument("exp-cosh potential needs a positive scale");
    }
    return ScalarProfile(ProfileKind::ExpCosh, 2.0, scale, 1.0);
}

ScalarProfile ScalarProfile::piecewise(double right_slope, double left_slope)
{
    if (!(right_slope >= 0.0) || !(left_slope >= 0.0) || !std::isfinite(right_slope)
        || !std::isfinite(left_slope)) {
        throw InvalidArgument("piecewise potential needs nonnegative slopes");
    }
    return ScalarProfile(ProfileKind::Piecewise, 1.0, right_slope, left_slope);
}

ScalarProfile ScalarProfile::sampled(std::span<const double> x, std::span<const double> values)
{
    if (x.size() != values.size()) {
        throw ShapeMismatch("sampled potential: column lengths differ");
    }
    if (x.size() < 3) {
        throw InvalidArgument("sampled potential needs at least three samples");
    }
    auto table = std::make_shared<Table>();
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        require_finite(x[i], "sampled potential");
        require_finite(values[i], "sampled potential");
        if (!(x[i + 1] > x[i])) {
            throw InvalidArgument("sampled potential: abscissae must be strictly increasing");
        }
        table->breaks.push_back(0.5 * (x[i] + x[i + 1]));
        table->slopes.push_back((values[i + 1] - values[i]) / (x[i + 1] - x[i]));
    }
    require_finite(values.back(), "sampled potential");
    for (std::size_t i = 0; i + 1 < table->slopes.size(); ++i) {
        if (table->slopes[i + 1] < table->slopes[i]) {
            throw InvalidArgument("sampled potential: secant slopes decrease (data is not convex)");
        }
    }
    table->integral.assign(table->breaks.size(), 0.0);
    for (std::size_t i = 1; i < table->breaks.size(); ++i) {
        const double width = table->breaks[i] - table->breaks[i - 1];
        table->integral[i] = table->integral[i - 1] + 0.5 * width * (table->slopes[i] + table->slopes[i - 1]);
    }
    ScalarProfile profile(ProfileKind::Sampled, 2.0, 1.0, 1.0);
    profile.table_ = table;
    table->offset = profile.sampled_primitive(0.0);
    return profile;
}

ScalarProfile ScalarProfile::load_sampled(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in) {
        throw InvalidArgument("cannot open sampled potential file " + file.string());
    }
    std::vector<double> xs;
    std::vector<double> ps;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream row(line);
        double a = 0.0;
        double b = 0.0;
        if (!(row >> a)) {
            continue;
        }
        if (!(row >> b)) {
            throw InvalidArgument(file.string() + ":" + std::to_string(line_no) + ": expected two columns");
        }
        xs.push_back(a);
        ps.push_back(b);
    }
    return sampled(xs, ps);
}

bool ScalarProfile::is_even() const noexcept
{
    switch (kind_) {
    case ProfileKind::Power:
    case ProfileKind::Abs:
    case ProfileKind::Huberized:
    case ProfileKind::ExpCosh: return true;
    case ProfileKind::Piecewise: return c_ == d_;
    case ProfileKind::Sampled: return false;
    }
    return false;
}

std::string ScalarProfile::describe() const
{
    std::ostringstream out;
    out << to_string(kind_);
    switch (kind_) {
    case ProfileKind::Power: out << "(p=" << p_ << ", scale=" << c_ << ")"; break;
    case ProfileKind::Abs:
    case ProfileKind::ExpCosh: out << "(scale=" << c_ << ")"; break;
    case ProfileKind::Huberized: out << "(threshold=" << d_ << ", scale=" << c_ << ")"; break;
    case ProfileKind::Piecewise: out << "(right=" << c_ << ", left=" << d_ << ")"; break;
    case ProfileKind::Sampled: out << "(" << table_->breaks.size() + 1 << " samples)"; break;
    }
    return out.str();
}

double ScalarProfile::sampled_derivative(double x) const
{
    const auto& t = *table_;
    if (x <= t.breaks.front()) {
        return t.slopes.front();
    }
    if (x >= t.breaks.back()) {
        return t.slopes.back();
    }
    const auto it = std::upper_bound(t.breaks.begin(), t.breaks.end(), x);
    const auto i = static_cast<std::size_t>(it - t.breaks.begin()) - 1;
    const double w = (x - t.breaks[i]) / (t.breaks[i + 1] - t.breaks[i]);
    return (1.0 - w) * t.slopes[i] + w * t.slopes[i + 1];
}

double ScalarProfile::sampled_primitive(double x) const
{
    const auto& t = *table_;
    if (x <= t.breaks.front()) {
        return t.slopes.front() * (x - t.breaks.front());
    }
    if (x >= t.breaks.back()) {
        return t.integral.back() + t.slopes.back() * (x - t.breaks.back());
    }
    const auto it = std::upper_bound(t.breaks.begin(), t.breaks.end(), x);
    const auto i = static_cast<std::size_t>(it - t.breaks.begin()) - 1;
    return t.integral[i] + 0.5 * (x - t.breaks[i]) * (t.slopes[i] + sampled_derivative(x));
}

double ScalarProfile::value(double x) const
{
    const double a = std::abs(x);
    switch (kind_) {
    case ProfileKind::Power:
        if (exponent_is(p_, 2.0)) {
            return 0.5 * c_ * x * x;
        }
        return c_ * std::pow(a, p_) / p_;
    case ProfileKind::Abs: return c_ * a;
    case ProfileKind::Huberized: return a <= d_ ? c_ * x * x / (2.0 * d_) : c_ * (a - 0.5 * d_);
    case ProfileKind::ExpCosh: return c_ * (std::cosh(x) - 1.0);
    case ProfileKind::Piecewise: return x >= 0.0 ? c_ * x : -d_ * x;
    case ProfileKind::Sampled: return sampled_primitive(x) - table_->offset;
    }
    return 0.0;
}

double ScalarProfile::right_derivative(double x) const
{
    switch (kind_) {
    case ProfileKind::Power:
        if (exponent_is(p_, 2.0)) {
            return c_ * x;
        }
        return c_ * sign_of(x) * std::pow(std::abs(x), p_ - 1.0);
    case ProfileKind::Abs: return x >= 0.0 ? c_ : -c_;
    case ProfileKind::Huberized: return c_ * std::clamp(x / d_, -1.0, 1.0);
    case ProfileKind::ExpCosh: return c_ * std::sinh(x);
    case ProfileKind::Piecewise: return x >= 0.0 ? c_ : -d_;
    case ProfileKind::Sampled: return sampled_derivative(x);
    }
    return 0.0;
}

double ScalarProfile::left_derivative(double x) const
{
    switch (kind_) {
    case ProfileKind::Abs: return x > 0.0 ? c_ : -c_;
    case ProfileKind::Piecewise: return x > 0.0 ? c_ : -d_;
    default: return right_derivative(x);
    }
}

double ScalarProfile::minimal_section(double x) const
{
    const double lo = left_derivative(x);
    const double hi = right_derivative(x);
    if (lo <= 0.0 && hi >= 0.0) {
        return 0.0;
    }
    return lo > 0.0 ? lo : hi;
}

double ScalarProfile::derivative_lipschitz() const noexcept
{
    switch (kind_) {
    case ProfileKind::Power: return exponent_is(p_, 2.0) ? c_ : kInfinity;
    case ProfileKind::Huberized: return c_ / d_;
    case ProfileKind::Sampled: {
        double lip = 0.0;
        const auto& t = *table_;
        for (std::size_t i = 0; i + 1 < t.breaks.size(); ++i) {
            lip = std::max(lip, (t.slopes[i + 1] - t.slopes[i]) / (t.breaks[i + 1] - t.breaks[i]));
        }
        return lip;
    }
    default: return kInfinity;
    }
}

double ScalarProfile::yosida_lipschitz(double lambda) const noexcept
{
    const double lip = derivative_lipschitz();
    if (std::isinf(lip)) {
        return 1.0 / lambda;
    }
    return lip / (1.0 + lambda * lip);
}

std::vector<double> ScalarProfile::derivative_kinks() const
{
    switch (kind_) {
    case ProfileKind::Power: return p_ < 2.0 ? std::vector<double>{0.0} : std::vector<double>{};
    case ProfileKind::Abs:
    case ProfileKind::Piecewise: return {0.0};
    case ProfileKind::Huberized: return {-d_, d_};
    case ProfileKind::ExpCosh: return {};
    case ProfileKind::Sampled: return table_->breaks;
    }
    return {};
}

bool ScalarProfile::has_closed_resolvent() const noexcept
{
    if (kind_ == ProfileKind::Power) {
        return exponent_is(p_, 1.5) || exponent_is(p_, 2.0) || exponent_is(p_, 3.0) || exponent_is(p_, 4.0);
    }
    return kind_ != ProfileKind::ExpCosh;
}

bool ScalarProfile::has_closed_conjugate() const noexcept
{
    return kind_ != ProfileKind::Sampled;
}

double ScalarProfile::resolvent(double lambda, double x) const
{
    require_lambda(lambda);
    require_finite(x, "resolvent");
    const double a = std::abs(x);
    const double s = sign_of(x);
    const double lc = lambda * c_;
    switch (kind_) {
    case ProfileKind::Power:
        if (exponent_is(p_, 2.0)) {
            return x / (1.0 + lc);
        }
        if (exponent_is(p_, 3.0)) {
            return s * 2.0 * a / (1.0 + std::sqrt(1.0 + 4.0 * lc * a));
        }
        if (exponent_is(p_, 1.5)) {
            const double root = 2.0 * a / (lc + std::sqrt(lc * lc + 4.0 * a));
            return s * root * root;
        }
        if (exponent_is(p_, 4.0)) {
            if (a == 0.0) {
                return 0.0;
            }
            // r^3 + P r - Q = 0 with P, Q > 0 has one real root (Cardano).
            const double P = 1.0 / lc;
            const double Q = a / lc;
            const double disc = std::sqrt(0.25 * Q * Q + P * P * P / 27.0);
            const double A = std::cbrt(0.5 * Q + disc);
            double r = A - P / (3.0 * A);
            r = std::clamp(r, 0.0, a);
            for (int it = 0; it < 3; ++it) {
                const double f = r + lc * r * r * r - a;
                r -= f / (1.0 + 3.0 * lc * r * r);
            }
            return s * r;
        }
        return newton_resolvent(lambda, x);
    case ProfileKind::Abs: return s * std::max(a - lc, 0.0);
    case ProfileKind::Huberized:
        if (a <= d_ + lc) {
            return x / (1.0 + lc / d_);
        }
        return x - s * lc;
    case ProfileKind::ExpCosh: return newton_resolvent(lambda, x);
    case ProfileKind::Piecewise:
        if (x > lc) {
            return x - lc;
        }
        if (x < -lambda * d_) {
            return x + lambda * d_;
        }
        return 0.0;
    case ProfileKind::Sampled: return sampled_resolvent(lambda, x);
    }
    return 0.0;
}

double ScalarProfile::sampled_resolvent(double lambda, double x) const
{
    // h(r) = r + lambda D(r) is strictly increasing and piecewise linear with
    // breakpoints at the table breaks.
    const auto& t = *table_;
    const auto h = [&](double r) { return r + lambda * sampled_derivative(r); };
    if (x <= h(t.breaks.front())) {
        return (x - lambda * t.slopes.front());
    }
    if (x >= h(t.breaks.back())) {
        return (x - lambda * t.slopes.back());
    }
    std::size_t lo = 0;
    std::size_t hi = t.breaks.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (h(t.breaks[mid]) <= x) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double h0 = h(t.breaks[lo]);
    const double h1 = h(t.breaks[hi]);
    const double w = (x - h0) / (h1 - h0);
    return t.breaks[lo] + w * (t.breaks[hi] - t.breaks[lo]);
}

double ScalarProfile::newton_resolvent(double lambda, double x) const
{
    // Root of r + lambda phi'(r) = x; phi has its minimum at 0, so the root
    // lies between 0 and x.
    if (x == 0.0) {
        return 0.0;
    }
    double lo = std::min(0.0, x);
    double hi = std::max(0.0, x);
    const auto f = [&](double r) { return r + lambda * right_derivative(r) - x; };
    const auto df = [&](double r) {
        if (kind_ == ProfileKind::ExpCosh) {
            return 1.0 + lambda * c_ * std::cosh(r);
        }
        return 1.0 + lambda * c_ * (p_ - 1.0) * std::pow(std::abs(r), p_ - 2.0);
    };
    double r = 0.5 * (lo + hi);
    for (int it = 0; it < kMaxRootIterations; ++it) {
        const double fr = f(r);
        if (fr == 0.0) {
            return r;
        }
        if (fr < 0.0) {
            lo = r;
        } else {
            hi = r;
        }
        double next = r - fr / df(r);
        if (!(next > lo && next < hi) || !std::isfinite(next)) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - r) <= 0.25 * kRootTolerance || hi - lo <= kRootTolerance) {
            return next;
        }
        r = next;
    }
    throw ConvergenceError("resolvent: tolerance not reached for " + describe());
}

double ScalarProfile::resolvent_bisection(double lambda, double x) const
{
    require_lambda(lambda);
    require_finite(x, "resolvent");
    // r is too small when r + lambda phi'_+(r) < x, too large when
    // r + lambda phi'_-(r) > x, and a solution otherwise.
    const auto too_small = [&](double r) { return r + lambda * right_derivative(r) < x; };
    const auto too_large = [&](double r) { return r + lambda * left_derivative(r) > x; };

    double span = std::max(1.0, std::abs(x));
    double lo = -span;
    double hi = span;
    while (too_large(lo) || too_small(hi)) {
        span *= 2.0;
        if (span > kBracketCap) {
            throw ConvergenceError("resolvent: root bracket failure (graph is not monotone?)");
        }
        lo = -span;
        hi = span;
    }
    if (!too_small(lo) && !too_large(lo)) {
        return lo;
    }
    if (!too_small(hi) && !too_large(hi)) {
        return hi;
    }
    for (int it = 0; it < kMaxRootIterations; ++it) {
        const double tol = std::max(kRootTolerance, 4.0 * std::numeric_limits<double>::epsilon()
                                                        * std::max(std::abs(lo), std::abs(hi)));
        if (hi - lo <= tol) {
            return 0.5 * (lo + hi);
        }
        const double mid = 0.5 * (lo + hi);
        if (too_small(mid)) {
            lo = mid;
        } else if (too_large(mid)) {
            hi = mid;
        } else {
            return mid;
        }
    }
    throw ConvergenceError("resolvent: bisection did not reach tolerance");
}

double ScalarProfile::yosida(double lambda, double x) const
{
    return (x - resolvent(lambda, x)) / lambda;
}

double ScalarProfile::moreau_envelope(double lambda, double x) const
{
    const double r = resolvent(lambda, x);
    const double g = (x - r) / lambda;
    return value(r) + 0.5 * lambda * g * g;
}

double ScalarProfile::conjugate(double y) const
{
    require_finite(y, "conjugate");
    const double a = std::abs(y);
    switch (kind_) {
    case ProfileKind::Power: {
        if (a == 0.0) {
            return 0.0;
        }
        if (exponent_is(p_, 2.0)) {
            return 0.5 * y * y / c_;
        }
        const double q = p_ / (p_ - 1.0);
        return std::pow(a, q) / (q * std::pow(c_, q - 1.0));
    }
    case ProfileKind::Abs: return a <= c_ * kIndicatorSlack ? 0.0 : kInfinity;
    case ProfileKind::Huberized:
        return a <= c_ * kIndicatorSlack ? d_ * std::min(a, c_) * std::min(a, c_) / (2.0 * c_) : kInfinity;
    case ProfileKind::ExpCosh: {
        const double z = y / c_;
        // sqrt(1+z^2) - 1 written without cancellation
        return y * std::asinh(z) - c_ * (z * z / (std::sqrt(1.0 + z * z) + 1.0));
    }
    case ProfileKind::Piecewise: return (y <= c_ * kIndicatorSlack && y >= -d_ * kIndicatorSlack) ? 0.0 : kInfinity;
    case ProfileKind::Sampled: return conjugate_numeric(y);
    }
    return 0.0;
}

double ScalarProfile::conjugate_numeric(double y) const
{
    require_finite(y, "conjugate");
    // sup_t g(t), g(t) = t|y| - phi(s t) along the ray s = sign(y). g is
    // concave; the ray in the opposite direction never beats g(0).
    const double s = y >= 0.0 ? 1.0 : -1.0;
    const double a = std::abs(y);
    const auto g = [&](double t) {
        const double v = value(s * t);
        return std::isfinite(v) ? a * t - v : -kInfinity;
    };
    const double g0 = g(0.0);
    if (a == 0.0) {
        return 0.0; // sup of -phi with phi >= 0, phi(0) = 0
    }

    constexpr int kPerDecade = 10;
    constexpr int kFirstDecade = -8;
    constexpr int kLastDecade = 15;
    std::vector<double> ts{0.0};
    std::vector<double> gs{g0};
    double best = g0;
    std::size_t best_index = 0;
    for (int k = 0; k <= (kLastDecade - kFirstDecade) * kPerDecade; ++k) {
        const double t = std::pow(10.0, kFirstDecade + static_cast<double>(k) / kPerDecade);
        const double gt = g(t);
        ts.push_back(t);
        gs.push_back(gt);
        if (gt > best) {
            best = gt;
            best_index = ts.size() - 1;
        }
        if (gt < gs[gs.size() - 2]) {
            // interior maximum bracketed by the neighbours of the best sample
            double lo = ts[best_index == 0 ? 0 : best_index - 1];
            double hi = ts[std::min(best_index + 1, ts.size() - 1)];
            constexpr double kGolden = 0.6180339887498949;
            double m1 = hi - kGolden * (hi - lo);
            double m2 = lo + kGolden * (hi - lo);
            double g1 = g(m1);
            double g2 = g(m2);
            for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
                if (g1 < g2) {
                    lo = m1;
                    m1 = m2;
                    g1 = g2;
                    m2 = lo + kGolden * (hi - lo);
                    g2 = g(m2);
                } else {
                    hi = m2;
                    m2 = m1;
                    g2 = g1;
                    m1 = hi - kGolden * (hi - lo);
                    g1 = g(m1);
                }
            }
            return std::max({best, g1, g2});
        }
    }
    // Still nondecreasing at the end of the budget: decide between a plateau
    // and divergence by the growth over the last two decades.
    const double last = gs.back();
    const double two_decades_back = gs[gs.size() - 1 - 2 * kPerDecade];
    const double one_decade_back = gs[gs.size() - 1 - kPerDecade];
    if (last > 10.0 * std::max(two_decades_back, 0.0) && last > 0.0) {
        return kInfinity;
    }
    if (last - one_decade_back <= 1e-9 * (1.0 + std::abs(last))) {
        return last;
    }
    throw ConvergenceError("conjugate: search budget exhausted for " + describe());
}

} // namespace dnspde
