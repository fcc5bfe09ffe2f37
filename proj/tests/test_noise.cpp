#include "dnspde/errors.hpp"
#include "dnspde/noise.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace dnspde;

TEST(Increments, ZeroStepIsExactlyZero)
{
    const auto t = sample_increments({7, 0}, 16, 0.0, 4);
    for (double v : t.data()) {
        EXPECT_EQ(v, 0.0);
    }
    EXPECT_EQ(sample_increments({7, 0}, 0, 0.1, 3).data().size(), 0u);
    EXPECT_THROW((void)sample_increments({7, 0}, 4, -1.0, 3), InvalidArgument);
    EXPECT_THROW((void)sample_increments({7, 0}, 4, 0.1, 0), InvalidArgument);
}

TEST(Increments, Deterministic)
{
    for (int n : {12, 16}) {
        const auto a = sample_increments({42, 3}, n, 0.01, 5);
        const auto b = sample_increments({42, 3}, n, 0.01, 5);
        EXPECT_TRUE(a == b);
        EXPECT_EQ(increment_checksum(a), increment_checksum(b));
        const auto c = sample_increments({42, 4}, n, 0.01, 5);
        EXPECT_FALSE(a == c);
        const auto d = sample_increments({43, 3}, n, 0.01, 5);
        EXPECT_FALSE(a == d);
    }
}

TEST(Increments, VarianceAndIndependence)
{
    // power-of-two (bridge) and direct layouts
    for (int n : {1000, 1024}) {
        const double dt = 0.02;
        const int K = 3;
        const int paths = 100;
        const double count = double(n) * paths;
        std::vector<double> sum(K, 0.0);
        std::vector<double> sq(K, 0.0);
        std::vector<double> cross(K * K, 0.0);
        double lag = 0.0;
        for (int p = 0; p < paths; ++p) {
            const auto t = sample_increments({11, std::uint64_t(p)}, n, dt, K);
            for (int s = 0; s < n; ++s) {
                for (int a = 0; a < K; ++a) {
                    sum[a] += t(s, a);
                    sq[a] += t(s, a) * t(s, a);
                    for (int b = 0; b < K; ++b) {
                        cross[a * K + b] += t(s, a) * t(s, b);
                    }
                }
                if (s + 1 < n) {
                    lag += t(s, 0) * t(s + 1, 0);
                }
            }
        }
        // var(dw^2) = 2 dt^2, var(dw_a dw_b) = dt^2
        const double se_var = std::sqrt(2.0 / count) * dt;
        const double se_cross = dt / std::sqrt(count);
        for (int a = 0; a < K; ++a) {
            EXPECT_NEAR(sq[a] / count, dt, 3.0 * se_var) << "n=" << n;
            EXPECT_NEAR(sum[a] / count, 0.0, 3.0 * std::sqrt(dt / count));
            for (int b = a + 1; b < K; ++b) {
                EXPECT_NEAR(cross[a * K + b] / count, 0.0, 4.0 * se_cross);
            }
        }
        EXPECT_NEAR(lag / (paths * (n - 1.0)), 0.0, 4.0 * dt / std::sqrt(paths * (n - 1.0)));
    }
}

TEST(Increments, BridgeCouplesRefinements)
{
    const double T = 1.0;
    const auto coarse = sample_increments({5, 2}, 8, T / 8, 2);
    const auto fine = sample_increments({5, 2}, 32, T / 32, 2);
    for (int k = 0; k < 2; ++k) {
        for (int s = 0; s < 8; ++s) {
            double agg = 0.0;
            for (int j = 0; j < 4; ++j) {
                agg += fine(4 * s + j, k);
            }
            EXPECT_NEAR(agg, coarse(s, k), 1e-13);
        }
    }
    EXPECT_EQ(increment_checksum(coarse), increment_checksum(fine));
}

TEST(ApplyB, SingleModeAndLinearity)
{
    const auto g = DirichletGrid::interval(1.0, 31);
    const ModeBasis basis(g, 4);
    const auto model = NoiseModel::additive({2.0, 0.5, 0.0, 1.0}, 10.0);
    GridField u(g);
    const std::vector<double> dw{0.3, 0.0, 0.0, 0.0};
    const auto out = apply_b(model, basis, u, dw);
    const auto e1 = sine_mode(g, 1);
    for (std::size_t i = 0; i < u.size(); ++i) {
        EXPECT_NEAR(out[i], 0.6 * e1[i], 1e-15);
    }
    const std::vector<double> a{0.1, -0.2, 0.7, 1.1};
    const std::vector<double> b{-1.3, 0.4, 0.2, 0.05};
    std::vector<double> ab(4);
    for (int k = 0; k < 4; ++k) {
        ab[k] = 2.0 * a[k] - b[k];
    }
    const auto lhs = apply_b(model, basis, u, ab);
    const auto rhs = 2.0 * apply_b(model, basis, u, a) - apply_b(model, basis, u, b);
    EXPECT_LE(norm(lhs - rhs), 1e-13);
    EXPECT_THROW((void)apply_b(model, basis, u, std::vector<double>{1.0}), ShapeMismatch);
    const auto big = NoiseModel::additive(std::vector<double>(40, 1.0), 10.0);
    EXPECT_THROW((void)apply_b(big, u, std::vector<double>(40, 0.0)), InvalidArgument);
}

TEST(ApplyB, MultiplicativeGain)
{
    const auto g = DirichletGrid::interval(2.0, 15);
    const ModeBasis basis(g, 2);
    const NoiseModel model({1.0, 0.5}, Gain::clipped_linear(0.0, 1.0, 0.5), 1.0);
    GridField u(g);
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = std::sin(double(i));
    }
    const std::vector<double> dw{0.2, -0.4};
    const auto out = apply_b(model, basis, u, dw);
    const auto e1 = sine_mode(g, 1);
    const auto e2 = sine_mode(g, 2);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double s = std::clamp(u[i], -0.5, 0.5);
        EXPECT_NEAR(out[i], s * (0.2 * e1[i] - 0.2 * e2[i]), 1e-15);
    }
}

TEST(HsNorm, Examples)
{
    for (const auto& g : {DirichletGrid::interval(1.0, 20), DirichletGrid::rectangle(1.0, 2.0, 8, 9)}) {
        const auto single = NoiseModel::additive({-1.7}, 10.0);
        EXPECT_NEAR(hs_norm(single, GridField(g)), 1.7, 1e-12);
        const auto amps = NoiseModel::power_law(5, 1.0, 1.0);
        double expected = 0.0;
        for (double b : amps) {
            expected += b * b;
        }
        EXPECT_NEAR(hs_norm(NoiseModel::additive(amps, 10.0), GridField(g)), std::sqrt(expected), 1e-12);
        EXPECT_EQ(hs_norm(NoiseModel::none(3), GridField(g)), 0.0);
    }
}

TEST(SmoothNoise, ScalesModesAndContracts)
{
    const auto g = DirichletGrid::interval(1.0, 31);
    const auto model = NoiseModel::additive(NoiseModel::power_law(6, 2.0, 0.5), 10.0);
    const auto modes = modes_by_eigenvalue(g, 6);
    GridField u(g);
    double prev = hs_norm(model, u);
    for (double delta : {0.0, 1e-4, 1e-3, 1e-2}) {
        const auto s = smooth_noise(model, delta, 2, g);
        for (int k = 0; k < 6; ++k) {
            EXPECT_NEAR(s.amplitudes()[k] / model.amplitudes()[k], std::pow(1.0 + delta * modes[k].eigenvalue, -2),
                        1e-14);
        }
        const double h = hs_norm(s, u);
        EXPECT_LE(h, prev * (1.0 + 1e-15));
        prev = h;
    }
    EXPECT_THROW((void)smooth_noise(model, -1.0, 2, g), InvalidArgument);
    EXPECT_THROW((void)smooth_noise(model, 0.1, 0, g), InvalidArgument);
}

TEST(NoiseBounds, CertifiedBoundPassesAndUnderstatedBoundFails)
{
    const auto g = DirichletGrid::interval(1.0, 24);
    const ModeBasis basis(g, 4);
    const std::vector<NoiseModel> models{
        NoiseModel::additive(NoiseModel::power_law(4, 1.0, 1.0), 0.0),
        NoiseModel(NoiseModel::power_law(4, 0.5, 1.0), Gain::clipped_linear(0.1, 0.8, 2.0), 0.0),
        NoiseModel(NoiseModel::power_law(4, 0.5, 1.0), Gain::bounded_smooth(0.2, -0.6), 0.0),
    };
    for (const auto& m : models) {
        const double nb = m.certified_bound(basis);
        EXPECT_GT(nb, 0.0);
        const auto ok = check_noise_bounds(m.with_declared_bound(nb), basis, 400, 3);
        EXPECT_TRUE(ok.passed) << m.gain().describe() << " growth " << ok.worst_growth_ratio << " lip "
                               << ok.worst_lipschitz_ratio << " nb " << nb;
        const double worst = std::max(ok.worst_growth_ratio, ok.worst_lipschitz_ratio);
        const auto bad = check_noise_bounds(m.with_declared_bound(0.5 * worst), basis, 400, 3);
        EXPECT_FALSE(bad.passed);
    }
}

TEST(NoiseModel, Validation)
{
    EXPECT_THROW(NoiseModel({}, Gain::constant(), 1.0), InvalidArgument);
    EXPECT_THROW(NoiseModel({1.0}, Gain::constant(), -1.0), InvalidArgument);
    EXPECT_THROW((void)Gain::clipped_linear(0.0, 1.0, 0.0), InvalidArgument);
    EXPECT_THROW((void)NoiseModel::power_law(0, 1.0, 1.0), InvalidArgument);
    EXPECT_TRUE(NoiseModel::none(2).is_zero());
    EXPECT_TRUE(NoiseModel::additive({1.0}, 1.0).is_additive());
}
