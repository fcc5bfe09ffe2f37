#include "dnspde/errors.hpp"
#include "dnspde/grid.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace dnspde;

namespace {

GridField random_field(const DirichletGrid& g, std::mt19937_64& rng)
{
    std::normal_distribution<double> n;
    GridField u(g);
    for (double& v : u.values()) {
        v = n(rng);
    }
    return u;
}

FluxField random_flux(const DirichletGrid& g, std::mt19937_64& rng)
{
    std::normal_distribution<double> n;
    FluxField f(g);
    for (int a = 0; a < g.dimension(); ++a) {
        for (double& v : f.component(a)) {
            v = n(rng);
        }
    }
    return f;
}

// <f, grad g> written as an explicit double sum over faces, with the
// boundary ghosts spelled out; independent of gradient_into.
double flux_pairing_oracle(const DirichletGrid& g, const FluxField& f, const GridField& u)
{
    const int nx = g.nodes(0);
    const int ny = g.dimension() == 2 ? g.nodes(1) : 1;
    auto val = [&](int i, int j) { return (i < 0 || i >= nx || j < 0 || j >= ny) ? 0.0 : u[std::size_t(i * ny + j)]; };
    double s = 0.0;
    for (int i = 0; i <= nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            s += f.component(0)[std::size_t(i * ny + j)] * (val(i, j) - val(i - 1, j)) / g.spacing(0);
        }
    }
    if (g.dimension() == 2) {
        for (int i = 0; i < nx; ++i) {
            for (int j = 0; j <= ny; ++j) {
                s += f.component(1)[std::size_t(i * (ny + 1) + j)] * (val(i, j) - val(i, j - 1)) / g.spacing(1);
            }
        }
    }
    return s * g.cell_volume();
}

std::vector<DirichletGrid> test_grids()
{
    return {DirichletGrid::interval(1.0, 128), DirichletGrid::interval(2.5, 17),
            DirichletGrid::rectangle(1.0, 1.0, 32, 32), DirichletGrid::rectangle(2.0, 0.5, 9, 13)};
}

} // namespace

TEST(Grid, Construction)
{
    const auto g = DirichletGrid::interval(1.0, 63);
    EXPECT_DOUBLE_EQ(g.spacing(0), 1.0 / 64.0);
    EXPECT_EQ(g.node_count(), 63u);
    EXPECT_EQ(g.face_count(0), 64u);
    const auto r = DirichletGrid::rectangle(1.0, 2.0, 4, 5);
    EXPECT_EQ(r.node_count(), 20u);
    EXPECT_EQ(r.face_count(0), 25u);
    EXPECT_EQ(r.face_count(1), 24u);
    EXPECT_THROW((void)DirichletGrid::interval(1.0, 2), InvalidArgument);
    EXPECT_THROW((void)DirichletGrid::interval(-1.0, 5), InvalidArgument);
}

TEST(Gradient, ZeroAndLinearity)
{
    std::mt19937_64 rng(1);
    for (const auto& g : test_grids()) {
        EXPECT_EQ(norm(gradient(GridField(g))), 0.0);
        const auto u = random_field(g, rng);
        const auto v = random_field(g, rng);
        auto lhs = gradient(u + v);
        lhs -= gradient(u);
        lhs -= gradient(v);
        EXPECT_LE(norm(lhs), 1e-12 * norm(gradient(u)));
    }
}

TEST(Gradient, HatGivesPiecewiseConstantFlux)
{
    // nodes 1..9 on [0,10]: hat rising with slope 1 to x=5 and falling after
    const auto g = DirichletGrid::interval(10.0, 9);
    GridField u(g);
    for (int i = 0; i < 9; ++i) {
        const double x = g.coordinate(0, i);
        u[std::size_t(i)] = x <= 5.0 ? x : 10.0 - x;
    }
    const auto f = gradient(u);
    for (int face = 0; face <= 9; ++face) {
        EXPECT_NEAR(f.component(0)[std::size_t(face)], face < 5 ? 1.0 : -1.0, 1e-14);
    }
}

TEST(Divergence, SummationByParts)
{
    std::mt19937_64 rng(2);
    for (const auto& g : test_grids()) {
        EXPECT_EQ(norm(divergence(FluxField(g))), 0.0);
        for (int trial = 0; trial < 100; ++trial) {
            const auto f = random_flux(g, rng);
            const auto u = random_field(g, rng);
            const double lhs = inner(divergence(f), u);
            const double oracle = flux_pairing_oracle(g, f, u);
            EXPECT_LE(std::abs(lhs + oracle), 1e-12 * norm(f) * norm(gradient(u)) + 1e-300);
            EXPECT_LE(std::abs(oracle - inner(f, gradient(u))), 1e-12 * std::abs(oracle) + 1e-12);
        }
    }
}

TEST(Divergence, DivGradIsStencilLaplacian)
{
    std::mt19937_64 rng(3);
    for (const auto& g : test_grids()) {
        const auto u = random_field(g, rng);
        const auto a = divergence(gradient(u));
        const auto b = laplacian_stencil(u);
        const double scale = 4.0 / (g.spacing(0) * g.spacing(0));
        for (std::size_t i = 0; i < u.size(); ++i) {
            EXPECT_NEAR(a[i], b[i], 1e-13 * scale * 5);
        }
    }
}

TEST(Divergence, RejectsForeignFields)
{
    const auto a = DirichletGrid::interval(1.0, 8);
    const auto b = DirichletGrid::interval(1.0, 9);
    EXPECT_THROW((void)divergence(a, FluxField(b)), ShapeMismatch);
    EXPECT_THROW((void)gradient(a, GridField(b)), ShapeMismatch);
    EXPECT_THROW(GridField(a, std::vector<double>(3)), ShapeMismatch);
}

TEST(Gradient, FirstOrderRefinementConsistency)
{
    // samples of sin(pi x) on [0,1]; face values compared to the exact
    // derivative at the face-adjacent node (one-sided, first order)
    std::vector<double> errors;
    for (int n : {31, 63, 127, 255}) {
        const auto g = DirichletGrid::interval(1.0, n);
        GridField u(g);
        for (int i = 0; i < n; ++i) {
            u[std::size_t(i)] = std::sin(std::numbers::pi * g.coordinate(0, i));
        }
        const auto f = gradient(u);
        double err = 0.0;
        for (int face = 0; face <= n; ++face) {
            const double x = face * g.spacing(0);
            err = std::max(err, std::abs(f.component(0)[std::size_t(face)] - std::numbers::pi * std::cos(std::numbers::pi * x)));
        }
        errors.push_back(err);
    }
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
        EXPECT_NEAR(std::log2(errors[i] / errors[i + 1]), 1.0, 0.1);
    }
}

TEST(LaplacianResolvent, SineModeScaling)
{
    for (const auto& g : test_grids()) {
        const auto e = sine_mode(g, 1, 1);
        EXPECT_NEAR(norm(e), 1.0, 1e-12);
        // independent eigenvalue: Rayleigh quotient through the stencil
        const double alpha = -inner(laplacian_stencil(e), e);
        EXPECT_NEAR(alpha, g.lambda_min(), 1e-9 * alpha);
        for (double delta : {0.0, 0.01, 0.3}) {
            for (int m : {1, 2, 3}) {
                const auto out = laplacian_resolvent(g, delta, m, e);
                const double expected = std::pow(1.0 + delta * alpha, -m);
                for (std::size_t i = 0; i < e.size(); ++i) {
                    EXPECT_NEAR(out[i], expected * e[i], 1e-8 * std::abs(expected) * (1.0 + std::abs(e[i])));
                }
            }
        }
        const auto top = sine_mode(g, g.nodes(0), g.dimension() == 2 ? g.nodes(1) : 1);
        const double alpha_top = -inner(laplacian_stencil(top), top);
        EXPECT_NEAR(alpha_top, g.lambda_max(), 1e-9 * alpha_top);
        const auto out = laplacian_resolvent(g, 0.05, 2, top);
        EXPECT_NEAR(norm(out), std::pow(1.0 + 0.05 * alpha_top, -2), 1e-8 * std::pow(1.0 + 0.05 * alpha_top, -2));
    }
}

TEST(LaplacianResolvent, IdentityAndContraction)
{
    std::mt19937_64 rng(4);
    for (const auto& g : test_grids()) {
        const auto u = random_field(g, rng);
        const auto same = laplacian_resolvent(g, 0.0, 3, u);
        for (std::size_t i = 0; i < u.size(); ++i) {
            EXPECT_EQ(same[i], u[i]);
        }
        EXPECT_LE(norm(laplacian_resolvent(g, 0.1, 2, u)), norm(u));
    }
    const auto g = DirichletGrid::interval(1.0, 8);
    EXPECT_THROW((void)laplacian_resolvent(g, -1.0, 1, GridField(g)), InvalidArgument);
    EXPECT_THROW((void)laplacian_resolvent(g, 1.0, 0, GridField(g)), InvalidArgument);
}

TEST(DualNorm, Examples)
{
    std::mt19937_64 rng(5);
    for (const auto& g : test_grids()) {
        EXPECT_EQ(dual_norm_v0(g, GridField(g)), 0.0);
        const auto e = 3.0 * sine_mode(g, 1, 1);
        const double alpha = g.lambda_min();
        EXPECT_NEAR(dual_norm_v0(g, e, 2), std::pow(1.0 + alpha, -2) * 3.0, 1e-9);
        const auto f = random_field(g, rng);
        const double c = -2.7;
        EXPECT_NEAR(dual_norm_v0(g, c * f), std::abs(c) * dual_norm_v0(g, f), 1e-10 * dual_norm_v0(g, f));
        EXPECT_GT(dual_norm_v0(g, f), 0.0);
    }
}

TEST(Spectral, ClosedFormMatchesPowerIteration)
{
    for (const auto& g : test_grids()) {
        const auto bounds = spectral_bounds(g);
        EXPECT_NEAR(bounds.power_iteration_estimate, bounds.lambda_max, 1e-8 * bounds.lambda_max);
    }
}

TEST(Modes, OrthonormalAndOrdered)
{
    const auto g = DirichletGrid::rectangle(1.0, 2.0, 6, 7);
    const auto modes = modes_by_eigenvalue(g, 12);
    for (std::size_t i = 0; i + 1 < modes.size(); ++i) {
        EXPECT_LE(modes[i].eigenvalue, modes[i + 1].eigenvalue);
    }
    for (std::size_t i = 0; i < modes.size(); ++i) {
        for (std::size_t j = 0; j < modes.size(); ++j) {
            const double ip = inner(sine_mode(g, modes[i].kx, modes[i].ky), sine_mode(g, modes[j].kx, modes[j].ky));
            EXPECT_NEAR(ip, i == j ? 1.0 : 0.0, 1e-12);
        }
    }
    EXPECT_THROW((void)modes_by_eigenvalue(g, 43), InvalidArgument);
}

TEST(Serialization, RoundTripIsExact)
{
    std::mt19937_64 rng(6);
    for (const auto& g : test_grids()) {
        const auto u = random_field(g, rng);
        std::stringstream buf;
        write_grid_field(buf, u);
        const auto back = read_grid_field(buf);
        ASSERT_TRUE(back.grid() == g);
        for (std::size_t i = 0; i < u.size(); ++i) {
            EXPECT_EQ(back[i], u[i]);
        }
    }
    std::stringstream bad("1.0\n2.0\n");
    EXPECT_THROW((void)read_grid_field(bad), InvalidArgument);
}
