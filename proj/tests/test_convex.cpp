#include "dnspde/convex.hpp"
#include "dnspde/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

using namespace dnspde;

namespace {

// Independent oracles: plain bisection on a scalar monotone function and a
// dense-grid search. They never call into the library's root finders.
double bisect(const std::function<double(double)>& f, double lo, double hi)
{
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double grid_min(const std::function<double(double)>& f, double lo, double hi, int n)
{
    double best = f(lo);
    for (int i = 1; i <= n; ++i) {
        best = std::min(best, f(lo + (hi - lo) * i / n));
    }
    return best;
}

double grid_max(const std::function<double(double)>& f, double lo, double hi, int n)
{
    return -grid_min([&](double t) { return -f(t); }, lo, hi, n);
}

Potential quadratic() { return Potential::scalar(ScalarProfile::power(2.0)); }
Potential abs_potential() { return Potential::scalar(ScalarProfile::abs()); }
Potential cubic() { return Potential::scalar(ScalarProfile::power(4.0)); }

std::vector<Potential> catalog()
{
    return {
        quadratic(),
        Potential::scalar(ScalarProfile::power(1.5)),
        cubic(),
        Potential::scalar(ScalarProfile::power(3.0, 0.5)),
        abs_potential(),
        Potential::scalar(ScalarProfile::huberized(0.3, 2.0)),
        Potential::scalar(ScalarProfile::piecewise(1.0, 2.5)),
        Potential::scalar(ScalarProfile::exp_cosh(0.7)),
        Potential::radial(2, ScalarProfile::power(4.0)),
        Potential::radial(2, ScalarProfile::power(1.5, 2.0)),
        Potential::separable({ScalarProfile::power(2.0), ScalarProfile::abs(0.5)}),
    };
}

Point random_point(std::mt19937_64& rng, int d, double radius)
{
    std::uniform_real_distribution<double> u(-radius, radius);
    Point x(static_cast<std::size_t>(d));
    for (double& v : x) {
        v = u(rng);
    }
    return x;
}

double dist(const Point& a, const Point& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    return std::sqrt(s);
}

} // namespace

TEST(EvalPotential, CatalogValues)
{
    EXPECT_EQ(eval_potential(quadratic(), 0.0), 0.0);
    EXPECT_DOUBLE_EQ(eval_potential(cubic(), 1.0), 0.25);
    EXPECT_DOUBLE_EQ(eval_potential(abs_potential(), -3.0), 3.0);
    EXPECT_DOUBLE_EQ(eval_potential(Potential::radial(2, ScalarProfile::power(2.0)), Point{3.0, 4.0}), 12.5);
}

TEST(EvalPotential, RejectsBadInput)
{
    EXPECT_THROW((void)eval_potential(quadratic(), Point{1.0, 2.0}), ShapeMismatch);
    EXPECT_THROW((void)eval_potential(quadratic(), std::nan("")), InvalidArgument);
    EXPECT_THROW((void)eval_potential(quadratic(), kInfinity), InvalidArgument);
}

TEST(Resolvent, Examples)
{
    const YosidaParam one(1.0);
    EXPECT_DOUBLE_EQ(resolvent(MonotoneGraph(quadratic()), one, Point{2.0})[0], 1.0);

    // sign graph: r + sign(r) contains 0.5 -> r = 0
    const double sign_oracle = bisect([](double r) { return r + (r > 0) - (r < 0) - 0.5; }, -4.0, 4.0);
    EXPECT_NEAR(sign_oracle, 0.0, 1e-12);
    EXPECT_NEAR(resolvent(MonotoneGraph(abs_potential()), one, Point{0.5})[0], sign_oracle, 1e-12);

    const double cubic_oracle = bisect([](double r) { return r + r * r * r - 2.0; }, -4.0, 4.0);
    EXPECT_NEAR(cubic_oracle, 1.0, 1e-12);
    EXPECT_NEAR(resolvent(MonotoneGraph(cubic()), one, Point{2.0})[0], cubic_oracle, 1e-12);
}

TEST(Resolvent, RejectsNonPositiveLambda)
{
    EXPECT_THROW(YosidaParam(0.0), InvalidArgument);
    EXPECT_THROW(YosidaParam(-1.0), InvalidArgument);
    EXPECT_THROW(YosidaParam(std::nan("")), InvalidArgument);
}

TEST(Yosida, Examples)
{
    const YosidaParam one(1.0);
    for (const auto& P : catalog()) {
        const Point zero(static_cast<std::size_t>(P.dimension()), 0.0);
        for (double v : yosida(MonotoneGraph(P), one, zero)) {
            EXPECT_EQ(v, 0.0) << P.describe();
        }
    }
    EXPECT_NEAR(yosida(MonotoneGraph(abs_potential()), one, Point{2.0})[0], 1.0, 1e-14);
    EXPECT_NEAR(yosida(MonotoneGraph(quadratic()), one, Point{2.0})[0], 1.0, 1e-14);
}

TEST(MoreauEnvelope, MatchesGridMinimization)
{
    const YosidaParam one(1.0);
    EXPECT_EQ(moreau_envelope(abs_potential(), one, Point{0.0}), 0.0);

    const auto abs_env = grid_min([](double r) { return std::abs(r) + 0.5 * (2.0 - r) * (2.0 - r); }, -4, 4, 80000);
    EXPECT_NEAR(abs_env, 1.5, 1e-8);
    EXPECT_NEAR(moreau_envelope(abs_potential(), one, Point{2.0}), abs_env, 1e-8);

    const auto quad_env = grid_min([](double r) { return 0.5 * r * r + 0.5 * (2.0 - r) * (2.0 - r); }, -4, 4, 80000);
    EXPECT_NEAR(quad_env, 1.0, 1e-8);
    EXPECT_NEAR(moreau_envelope(quadratic(), one, Point{2.0}), quad_env, 1e-8);
}

TEST(Conjugate, Examples)
{
    for (const auto& P : catalog()) {
        const Point zero(static_cast<std::size_t>(P.dimension()), 0.0);
        EXPECT_EQ(conjugate(P, zero), 0.0) << P.describe();
    }
    const double oracle = grid_max([](double x) { return x - 0.5 * x * x; }, -10, 10, 200000);
    EXPECT_NEAR(oracle, 0.5, 1e-8);
    EXPECT_NEAR(conjugate(quadratic(), Point{1.0}), oracle, 1e-8);

    EXPECT_TRUE(std::isinf(conjugate(abs_potential(), Point{2.0})));
    EXPECT_TRUE(std::isinf(conjugate_numeric(abs_potential(), Point{2.0})));
    EXPECT_EQ(conjugate(abs_potential(), Point{1.0}), 0.0);
}

TEST(Conjugate, RaySearchMatchesClosedForms)
{
    std::mt19937_64 rng(7);
    for (const auto& P : catalog()) {
        for (int i = 0; i < 50; ++i) {
            const Point y = random_point(rng, P.dimension(), 3.0);
            const double closed = conjugate(P, y);
            const double numeric = conjugate_numeric(P, y);
            if (std::isinf(closed)) {
                EXPECT_TRUE(std::isinf(numeric)) << P.describe();
            } else {
                EXPECT_NEAR(numeric, closed, 1e-8 * (1.0 + std::abs(closed))) << P.describe();
            }
        }
    }
}

TEST(Conjugate, ExpCoshAgainstGridOracle)
{
    const auto P = Potential::scalar(ScalarProfile::exp_cosh(0.7));
    for (double y : {-3.0, -0.4, 0.9, 2.5}) {
        const double oracle = grid_max([&](double x) { return x * y - 0.7 * (std::cosh(x) - 1.0); }, -6, 6, 600000);
        EXPECT_NEAR(conjugate(P, Point{y}), oracle, 1e-8);
    }
}

TEST(FenchelResidual, Examples)
{
    EXPECT_NEAR(fenchel_residual(quadratic(), Point{1.0}, Point{1.0}), 0.0, 1e-15);
    const double oracle = 0.5 + grid_max([](double x) { return -0.5 * x * x; }, -5, 5, 1000) - 0.0;
    EXPECT_NEAR(fenchel_residual(quadratic(), Point{1.0}, Point{0.0}), oracle, 1e-12);
    EXPECT_THROW((void)fenchel_residual(abs_potential(), Point{1.0}, Point{3.0}), InvalidArgument);

    std::mt19937_64 rng(11);
    for (const auto& P : catalog()) {
        const MonotoneGraph G(P);
        for (double lambda : {1.0, 0.1, 0.01}) {
            for (int i = 0; i < 200; ++i) {
                const Point x = random_point(rng, P.dimension(), 4.0);
                const Point r = resolvent(G, YosidaParam(lambda), x);
                const Point y = yosida(G, YosidaParam(lambda), x);
                EXPECT_LE(std::abs(fenchel_residual(P, r, y)), 1e-8) << P.describe();
            }
        }
    }
}

TEST(ValidatePotential, Examples)
{
    EXPECT_TRUE(validate_potential(Potential::radial(1, ScalarProfile::power(2.0)), 10.0, 64).all_passed());
    EXPECT_TRUE(validate_potential(quadratic(), 10.0, 64).all_passed());

    const auto linear = validate_potential(Potential::radial(2, ScalarProfile::abs()), 10.0, 64);
    EXPECT_FALSE(linear.entry("superlinearity").passed);
    EXPECT_TRUE(linear.entry("convexity").passed);

    const auto shifted = validate_potential(quadratic().shifted(0.1), 10.0, 64);
    EXPECT_FALSE(shifted.entry("origin").passed);
    EXPECT_NEAR(shifted.entry("origin").worst_value, 0.1, 1e-15);

    const auto huber = validate_potential(Potential::radial(2, ScalarProfile::huberized(0.5)), 10.0, 64);
    EXPECT_FALSE(huber.entry("superlinearity").passed);

    // asymmetric slopes 1 and 2.5 give ratio 2.5
    const auto lopsided = Potential::scalar(ScalarProfile::piecewise(1.0, 2.5), 2.0);
    const auto report = validate_potential(lopsided, 10.0, 64);
    EXPECT_FALSE(report.entry("symmetry").passed);
    EXPECT_NEAR(report.entry("symmetry").worst_value, 2.5, 1e-12);

    EXPECT_THROW((void)validate_potential(quadratic(), 0.0, 64), InvalidArgument);
    EXPECT_THROW((void)validate_potential(quadratic(), 1.0, 4), InvalidArgument);
}

TEST(Properties, NonexpansiveResolventAndLipschitzYosida)
{
    std::mt19937_64 rng(3);
    for (const auto& P : catalog()) {
        const MonotoneGraph G(P);
        for (double lambda : {1.0, 0.1, 0.01}) {
            const YosidaParam lam(lambda);
            for (int i = 0; i < 1000; ++i) {
                const Point x = random_point(rng, P.dimension(), 5.0);
                const Point y = random_point(rng, P.dimension(), 5.0);
                const double dxy = dist(x, y);
                EXPECT_LE(dist(resolvent(G, lam, x), resolvent(G, lam, y)), dxy + 1e-10);
                EXPECT_LE(dist(yosida(G, lam, x), yosida(G, lam, y)), dxy / lambda + 1e-10);
                // monotonicity of the Yosida map
                const Point gx = yosida(G, lam, x);
                const Point gy = yosida(G, lam, y);
                double pairing = 0.0;
                for (std::size_t a = 0; a < x.size(); ++a) {
                    pairing += (gx[a] - gy[a]) * (x[a] - y[a]);
                }
                EXPECT_GE(pairing, -1e-12);
            }
        }
    }
}

TEST(Properties, YosidaResolventIdentity)
{
    std::mt19937_64 rng(5);
    for (const auto& P : catalog()) {
        const MonotoneGraph G(P);
        const YosidaParam lam(0.37);
        for (int i = 0; i < 500; ++i) {
            const Point x = random_point(rng, P.dimension(), 8.0);
            const Point r = resolvent(G, lam, x);
            const Point g = yosida(G, lam, x);
            for (std::size_t a = 0; a < x.size(); ++a) {
                EXPECT_NEAR(r[a] + lam.value() * g[a], x[a], 1e-12 * (1.0 + std::abs(x[a])));
            }
        }
    }
}

TEST(Properties, BisectionMatchesClosedForm)
{
    std::mt19937_64 rng(9);
    for (const auto& P : catalog()) {
        if (!P.has_closed_forms()) {
            continue;
        }
        const MonotoneGraph G(P);
        for (int i = 0; i < 1000; ++i) {
            const YosidaParam lam(std::pow(10.0, std::uniform_real_distribution<double>(-3, 1)(rng)));
            const Point x = random_point(rng, P.dimension(), 20.0);
            EXPECT_LE(dist(resolvent(G, lam, x), resolvent_bisection(G, lam, x)), 1e-10) << P.describe();
        }
    }
}

TEST(Properties, NewtonResolventMatchesBisection)
{
    std::mt19937_64 rng(13);
    for (const auto& profile : {ScalarProfile::exp_cosh(0.7), ScalarProfile::power(2.7), ScalarProfile::power(1.2)}) {
        ASSERT_FALSE(profile.has_closed_resolvent());
        for (int i = 0; i < 500; ++i) {
            const double lambda = std::pow(10.0, std::uniform_real_distribution<double>(-3, 1)(rng));
            const double x = std::uniform_real_distribution<double>(-10, 10)(rng);
            EXPECT_NEAR(profile.resolvent(lambda, x), profile.resolvent_bisection(lambda, x), 1e-10);
        }
    }
}

TEST(Properties, EnvelopeGradientIsYosida)
{
    // central differences at step h and h/2 away from the kinks of the
    // Yosida map; the aggregate error must fall at second order
    std::mt19937_64 rng(17);
    for (const auto& P : catalog()) {
        if (P.dimension() != 1) {
            continue;
        }
        const ScalarProfile& phi = P.profile();
        for (double lambda : {1.0, 0.1}) {
            const YosidaParam lam(lambda);
            const double h = 0.02;
            std::vector<double> yosida_kinks;
            for (double k : phi.derivative_kinks()) {
                yosida_kinks.push_back(k + lambda * phi.left_derivative(k));
                yosida_kinks.push_back(k + lambda * phi.right_derivative(k));
            }
            double err_h = 0.0;
            double err_h2 = 0.0;
            int used = 0;
            while (used < 200) {
                const double x = std::uniform_real_distribution<double>(-3, 3)(rng);
                bool near_kink = false;
                for (double k : yosida_kinks) {
                    near_kink = near_kink || std::abs(x - k) < 3 * h;
                }
                if (near_kink) {
                    continue;
                }
                ++used;
                const double g = yosida(MonotoneGraph(P), lam, Point{x})[0];
                const auto fd = [&](double step) {
                    return (moreau_envelope(P, lam, Point{x + step}) - moreau_envelope(P, lam, Point{x - step}))
                         / (2 * step);
                };
                err_h += std::pow(fd(h) - g, 2);
                err_h2 += std::pow(fd(h / 2) - g, 2);
            }
            err_h = std::sqrt(err_h);
            err_h2 = std::sqrt(err_h2);
            if (err_h < 1e-11) {
                continue; // piecewise quadratic envelope: differences are exact
            }
            EXPECT_GE(std::log2(err_h / err_h2), 1.9) << P.describe() << " lambda=" << lambda;
        }
    }
}

TEST(Properties, GraphConvergenceToMinimalSection)
{
    for (const auto& P : catalog()) {
        const MonotoneGraph G(P);
        std::mt19937_64 rng(19);
        for (int i = 0; i < 50; ++i) {
            const Point x = random_point(rng, P.dimension(), 2.0);
            const Point m = G.minimal_section(x);
            double prev = kInfinity;
            for (int level = 0; level <= 12; ++level) {
                const Point g = yosida(G, YosidaParam(std::ldexp(1.0, -level)), x);
                const double gap = dist(g, m);
                EXPECT_LE(gap, prev + 1e-12) << P.describe();
                prev = gap;
            }
            EXPECT_LE(prev, 0.05 * (1.0 + std::sqrt(std::inner_product(m.begin(), m.end(), m.begin(), 0.0))))
                << P.describe();
        }
    }
    // multivalued point: minimal section of the sign graph at 0 is 0
    EXPECT_EQ(MonotoneGraph(abs_potential()).minimal_section(Point{0.0})[0], 0.0);
    EXPECT_EQ(MonotoneGraph(Potential::scalar(ScalarProfile::piecewise(0.5, 0.0))).minimal_section(Point{0.0})[0], 0.0);
}

TEST(SampledPotential, ReproducesQuadraticData)
{
    std::vector<double> xs;
    std::vector<double> ps;
    for (int i = -20; i <= 20; ++i) {
        xs.push_back(0.25 * i);
        ps.push_back(0.5 * xs.back() * xs.back());
    }
    const auto phi = ScalarProfile::sampled(xs, ps);
    for (double x : {-3.3, -0.1, 0.0, 0.7, 4.2}) {
        EXPECT_NEAR(phi.value(x), 0.5 * x * x, 1e-12);
        EXPECT_NEAR(phi.right_derivative(x), x, 1e-12);
        EXPECT_NEAR(phi.resolvent(0.5, x), phi.resolvent_bisection(0.5, x), 1e-11);
        EXPECT_NEAR(phi.conjugate(x), 0.5 * x * x, 1e-8);
    }
    // linear extrapolation of the derivative beyond the table
    EXPECT_NEAR(phi.right_derivative(100.0), 4.875, 1e-12);
}

TEST(SampledPotential, RejectsBadTables)
{
    const std::vector<double> xs{-1.0, 0.0, 1.0};
    EXPECT_THROW((void)ScalarProfile::sampled(xs, std::vector<double>{0.0, 1.0, 0.0}), InvalidArgument);
    EXPECT_THROW((void)ScalarProfile::sampled(std::vector<double>{0.0, 0.0, 1.0}, std::vector<double>{1, 0, 1}),
                 InvalidArgument);
    EXPECT_THROW((void)ScalarProfile::sampled(xs, std::vector<double>{1.0, 0.0}), ShapeMismatch);
}

TEST(Potential, RadialNeedsEvenProfile)
{
    EXPECT_THROW((void)Potential::radial(2, ScalarProfile::piecewise(1.0, 2.0)), InvalidArgument);
    EXPECT_THROW((void)ScalarProfile::power(1.0), InvalidArgument);
}
