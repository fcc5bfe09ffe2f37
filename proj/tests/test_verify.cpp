#include "dnspde/errors.hpp"
#include "dnspde/verify.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace dnspde;

namespace {

GridField bump(const DirichletGrid& g, double height)
{
    return make_initial(InitialDatum::sampled([&](double x, double) {
                            const double s = std::sin(std::numbers::pi * x / g.extent(0));
                            return height * s * s * s + 0.3 * height * std::sin(3 * std::numbers::pi * x / g.extent(0));
                        }),
                        g);
}

SolverConfig base_config(const DirichletGrid& g)
{
    SolverConfig cfg(g);
    cfg.gamma = Potential::scalar(ScalarProfile::power(2.0));
    cfg.dt = 1.0 / 32;
    cfg.horizon = 0.5;
    return cfg;
}

std::vector<double> ladder(int n, double first)
{
    std::vector<double> l;
    for (int i = 0; i < n; ++i) {
        l.push_back(first / std::ldexp(1.0, i));
    }
    return l;
}

} // namespace

TEST(Sweep, ZeroDataStaysZeroForEveryLambda)
{
    const auto g = DirichletGrid::interval(1.0, 32);
    auto cfg = base_config(g);
    cfg.beta = Potential::scalar(ScalarProfile::abs());
    const auto rep = lambda_sweep(cfg, ladder(4, 0.25), {1, 0}, GridField(g));
    for (const auto& e : rep.entries) {
        for (double v : e.bounds.values()) {
            EXPECT_EQ(v, 0.0);
        }
        EXPECT_EQ(e.gaps.eta, 0.0);
        EXPECT_EQ(e.gaps.xi, 0.0);
        EXPECT_EQ(e.tails.eta.front(), 0.0);
        if (e.cauchy) {
            EXPECT_EQ(*e.cauchy, 0.0);
        }
    }
    EXPECT_FALSE(rep.entries.back().cauchy.has_value());
}

TEST(Sweep, QuadraticCauchyDistanceMatchesModeRecursion)
{
    const auto g = DirichletGrid::interval(1.0, 32);
    auto cfg = base_config(g);
    cfg.lambda_visc = 0.01;
    cfg.inner_tol = 1e-12;
    const GridField u0 = sine_mode(g, 1);
    const auto lambdas = ladder(4, 0.5);
    const auto rep = lambda_sweep(cfg, lambdas, {1, 0}, u0);
    const double a = g.lambda_min();
    const auto factor = [&](double lam) { return 1.0 / (1.0 + cfg.dt * (0.01 + 1.0 / (1.0 + lam)) * a); };
    for (std::size_t i = 0; i + 1 < lambdas.size(); ++i) {
        double expected = 0.0;
        for (int n = 0; n <= cfg.steps(); ++n) {
            expected = std::max(expected, std::abs(std::pow(factor(lambdas[i]), n) - std::pow(factor(lambdas[i + 1]), n)));
        }
        expected *= norm(u0);
        EXPECT_NEAR(*rep.entries[i].cauchy, expected, 1e-9 * expected + 1e-11) << "lambda " << lambdas[i];
    }
    // O(lambda) decay along the halvings
    EXPECT_NEAR(*rep.entries[0].cauchy / *rep.entries[1].cauchy, 2.0, 0.5);
    EXPECT_NEAR(*rep.entries[1].cauchy / *rep.entries[2].cauchy, 2.0, 0.25);
}

TEST(Sweep, SignSelectionHasNoTailAboveOne)
{
    const auto g = DirichletGrid::interval(1.0, 32);
    auto cfg = base_config(g);
    cfg.beta = Potential::scalar(ScalarProfile::abs());
    cfg.noise = NoiseModel::additive(NoiseModel::power_law(4, 0.5, 1.0), 10.0);
    const auto rep = lambda_sweep(cfg, ladder(4, 0.25), {3, 0}, bump(g, 2.0));
    const auto levels = default_tail_levels();
    ASSERT_EQ(levels[1], 2.0);
    for (const auto& e : rep.entries) {
        EXPECT_EQ(e.tails.xi[1], 0.0);
        EXPECT_LE(e.bounds.xi_pairing, rep.max_bounds.xi_pairing);
        EXPECT_GE(e.gaps.eta, -1e-8);
        EXPECT_GE(e.gaps.xi, -1e-8);
    }
}

TEST(Sweep, XiPairingBoundedByAbsoluteMass)
{
    const auto g = DirichletGrid::interval(1.0, 32);
    auto cfg = base_config(g);
    cfg.beta = Potential::scalar(ScalarProfile::abs());
    cfg.lambda_yosida = 1.0 / 16;
    const auto t = integrate(cfg, bump(g, 2.0), {1, 0});
    double mass = 0.0;
    for (std::size_t n = 1; n < t.records.size(); ++n) {
        for (double v : t.records[n].u->values()) {
            mass += cfg.dt * g.cell_volume() * std::abs(v);
        }
    }
    const auto b = apriori_bounds(t);
    EXPECT_GT(b.xi_pairing, 0.0);
    EXPECT_LE(b.xi_pairing, mass * (1.0 + 1e-12));
}

TEST(Sweep, RejectsBadLadders)
{
    const auto g = DirichletGrid::interval(1.0, 16);
    const auto cfg = base_config(g);
    const GridField u0(g);
    EXPECT_THROW((void)lambda_sweep(cfg, {}, {1, 0}, u0), InvalidArgument);
    EXPECT_THROW((void)lambda_sweep(cfg, {0.5, 0.3}, {1, 0}, u0), InvalidArgument);
    EXPECT_THROW((void)lambda_sweep(cfg, {0.5, -0.25}, {1, 0}, u0), InvalidArgument);
}

TEST(Sweep, CsvHasOneRowPerLambda)
{
    const auto g = DirichletGrid::interval(1.0, 16);
    const auto rep = lambda_sweep(base_config(g), ladder(3, 0.25), {1, 0}, bump(g, 1.0));
    std::ostringstream out;
    write_sweep_csv(out, rep);
    const std::string s = out.str();
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 4);
    EXPECT_EQ(s.rfind("lambda,cauchy_sup,", 0), 0u);
}

TEST(Lipschitz, IdenticalDataGiveZeroRatio)
{
    const auto g = DirichletGrid::interval(1.0, 16);
    auto cfg = base_config(g);
    cfg.noise = NoiseModel(NoiseModel::power_law(2, 0.4, 1.0), Gain::clipped_linear(0.0, 1.0, 1.0), 1.0);
    const GridField u0 = bump(g, 1.0);
    const auto rep = lipschitz_test(cfg, u0, u0, 4, 9);
    EXPECT_EQ(rep.ratio, 0.0);
    EXPECT_TRUE(rep.passed);
    EXPECT_DOUBLE_EQ(rep.bound, std::exp(2.0 * cfg.horizon));
}

TEST(Lipschitz, AdditiveNoiseContractsPathwise)
{
    const auto g = DirichletGrid::interval(1.0, 16);
    auto cfg = base_config(g);
    cfg.gamma = Potential::scalar(ScalarProfile::power(4.0));
    cfg.beta = Potential::scalar(ScalarProfile::abs());
    cfg.noise = NoiseModel::additive(NoiseModel::power_law(4, 0.5, 1.0), 10.0);
    const auto rep = lipschitz_test(cfg, bump(g, 1.0), bump(g, -1.0), 5, 4, 1);
    EXPECT_TRUE(rep.additive);
    EXPECT_LE(rep.worst_pathwise_excess, 0.0);
    EXPECT_LE(rep.ratio, 1.0 + 1e-12);
    EXPECT_THROW((void)lipschitz_test(cfg, bump(g, 1.0), bump(g, -1.0), 0, 4), InvalidArgument);
}

TEST(Phi, IdenticalConfigsAgreeExactly)
{
    const auto g = DirichletGrid::interval(1.0, 16);
    auto cfg = base_config(g);
    cfg.gamma = Potential::scalar(ScalarProfile::abs());
    cfg.noise = NoiseModel::additive({0.2}, 10.0);
    const auto rep = phi_uniqueness_test(cfg, cfg, {2, 0}, bump(g, 1.0), {0.25, 0.5});
    ASSERT_EQ(rep.times.size(), 2u);
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
        EXPECT_EQ(rep.phi_distance[i], 0.0);
        EXPECT_EQ(rep.u_distance[i], 0.0);
    }
    EXPECT_EQ(rep.eta_max_difference, 0.0);
    EXPECT_EQ(rep.xi_max_difference, 0.0);
}

TEST(Phi, RejectsMismatchedProblems)
{
    const auto g = DirichletGrid::interval(1.0, 16);
    const auto a = base_config(g);
    auto b = a;
    b.horizon = 0.25;
    EXPECT_THROW((void)phi_uniqueness_test(a, b, {2, 0}, bump(g, 1.0), {0.25}), InvalidArgument);
    auto c = a;
    c.beta = Potential::scalar(ScalarProfile::abs());
    EXPECT_THROW((void)phi_uniqueness_test(a, c, {2, 0}, bump(g, 1.0), {0.25}), InvalidArgument);
}

TEST(Apriori, EnsembleIsPathwiseMaximum)
{
    const auto g = DirichletGrid::interval(1.0, 16);
    auto cfg = base_config(g);
    cfg.noise = NoiseModel::additive(NoiseModel::power_law(4, 0.5, 1.0), 10.0);
    std::vector<Trajectory> runs;
    for (std::uint64_t p = 0; p < 4; ++p) {
        runs.push_back(integrate(cfg, bump(g, 1.0), {5, p}));
    }
    const auto table = apriori_report(runs);
    EXPECT_TRUE(table.all_finite);
    EXPECT_FALSE(table.slopes.has_value());
    for (std::size_t q = 0; q < 4; ++q) {
        double m = 0.0;
        for (const auto& b : table.per_path) {
            m = std::max(m, b.values()[q]);
        }
        EXPECT_EQ(table.ensemble.values()[q], m);
    }
}

TEST(Modulus, HeatModeMatchesClosedForm)
{
    const auto g = DirichletGrid::interval(1.0, 32);
    auto cfg = base_config(g);
    cfg.inner_tol = 1e-12;
    cfg.lambda_yosida = 0.1;
    const GridField u0 = sine_mode(g, 1);
    const auto t = integrate(cfg, u0, {1, 0});
    const auto m = continuity_modulus(t);
    const double r = 1.0 / (1.0 + cfg.dt * (0.1 + 1.0 / 1.1) * g.lambda_min());
    ASSERT_EQ(m.lags.front(), 1);
    for (std::size_t i = 0; i < m.lags.size(); ++i) {
        EXPECT_NEAR(m.moduli[i], (1.0 - std::pow(r, m.lags[i])) * norm(u0), 1e-9);
    }
    EXPECT_EQ(m.lags.back(), 8);
}

TEST(Modulus, OrnsteinUhlenbeckIsHalfHolder)
{
    const auto g = DirichletGrid::interval(1.0, 16);
    auto cfg = base_config(g);
    cfg.noise = NoiseModel::additive(NoiseModel::power_law(4, 1.0, 1.0), 10.0);
    std::vector<ModulusTable> tables;
    for (double dt : {1.0 / 64, 1.0 / 256, 1.0 / 1024}) {
        // same step count on every level, so the max over steps samples alike
        cfg.dt = dt;
        cfg.horizon = 128 * dt;
        for (std::uint64_t p = 0; p < 8; ++p) {
            tables.push_back(continuity_modulus(integrate(cfg, GridField(g), {7, p})));
        }
    }
    const double alpha = holder_exponent(tables);
    EXPECT_GE(alpha, 0.35);
    EXPECT_LE(alpha, 0.65);
    EXPECT_LE(holder_ratio_spread(tables), 4.0);
}

TEST(Modulus, NeedsSixteenSteps)
{
    const auto g = DirichletGrid::interval(1.0, 16);
    auto cfg = base_config(g);
    cfg.horizon = 8 * cfg.dt;
    EXPECT_THROW((void)continuity_modulus(integrate(cfg, GridField(g), {1, 0})), InvalidArgument);
}

TEST(Regression, SlopeOfExactLine)
{
    EXPECT_NEAR(regression_slope({0.0, 1.0, 2.0, 3.0}, {1.0, 3.5, 6.0, 8.5}), 2.5, 1e-14);
    EXPECT_THROW((void)regression_slope({1.0}, {1.0}), InvalidArgument);
}

TEST(Criteria, BindingIsSmallestMargin)
{
    CriterionResult r{"X", "verify", "t", "default", {}};
    r.checks.push_back(check_le("loose", 0.1, 1.0));
    r.checks.push_back(check_ge("tight", 1.05, 1.0));
    EXPECT_TRUE(r.pass());
    EXPECT_EQ(r.binding().name, "tight");
    r.checks.push_back(check_le("broken", 2.0, 1.0));
    EXPECT_FALSE(r.pass());
    EXPECT_EQ(r.binding().name, "broken");
    const std::string line = format_criterion_line(r);
    EXPECT_EQ(line.rfind("X FAIL measured=2 <= threshold=1", 0), 0u) << line;
    EXPECT_EQ(line.find('\n'), std::string::npos);
}

TEST(Criteria, ConvexFamilyPasses)
{
    AcceptanceOptions opt;
    const auto before = solver_invocations();
    EXPECT_TRUE(criterion_convex_oracles(opt).pass());
    EXPECT_TRUE(criterion_fenchel_young(opt).pass());
    EXPECT_TRUE(criterion_discrete_duality(opt).pass());
    EXPECT_EQ(solver_invocations(), before);
}

TEST(Apriori, QuadraticFluxHasNoGrowthTrendInLambda)
{
    const auto g = DirichletGrid::interval(1.0, 32);
    SolverConfig cfg(g);
    cfg.gamma = Potential::scalar(ScalarProfile::power(2.0, 4.0));
    cfg.dt = 1.0 / 64;
    cfg.horizon = 0.5;
    cfg.noise = NoiseModel::additive(NoiseModel::power_law(4, 0.5, 1.0), 10.0);
    const auto lambdas = ladder(8, 0.25);
    std::vector<Trajectory> runs;
    for (double l : lambdas) {
        cfg.lambda_yosida = l;
        runs.push_back(integrate(cfg, bump(g, 4.0), {11, 0}));
    }
    const auto table = apriori_report(runs, lambdas);
    ASSERT_TRUE(table.slopes.has_value());
    for (std::size_t q = 0; q < 4; ++q) {
        EXPECT_GE((*table.slopes)[q], -0.05) << kBoundNames[q];
    }
}
