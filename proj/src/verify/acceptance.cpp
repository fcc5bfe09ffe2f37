#include "dnspde/errors.hpp"
#include "dnspde/format.hpp"
#include "dnspde/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

namespace dnspde {

bool CriterionResult::pass() const
{
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const Check& CriterionResult::binding() const
{
    if (checks.empty()) {
        throw InvalidArgument("criterion " + id + " has no checks");
    }
    const auto margin = [](const Check& c) {
        if (!c.pass) {
            return -kInfinity;
        }
        if (c.indicator) {
            return kInfinity;
        }
        const double scale = std::max({std::abs(c.threshold), std::abs(c.measured), 1e-300});
        return c.relation == ">=" ? (c.measured - c.threshold) / scale : (c.threshold - c.measured) / scale;
    };
    return *std::min_element(checks.begin(), checks.end(),
                             [&](const Check& a, const Check& b) { return margin(a) < margin(b); });
}

Check check_le(std::string name, double measured, double threshold)
{
    return {std::move(name), measured, threshold, "<=", measured <= threshold, false};
}

Check check_ge(std::string name, double measured, double threshold)
{
    return {std::move(name), measured, threshold, ">=", measured >= threshold, false};
}

Check check_flag(std::string name, bool ok)
{
    return {std::move(name), ok ? 1.0 : 0.0, 1.0, ">=", ok, true};
}

namespace {

std::string short_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace

std::string format_criterion_line(const CriterionResult& r)
{
    std::ostringstream out;
    const Check& b = r.binding();
    out << r.id << ' ' << (r.pass() ? "PASS" : "FAIL") << " measured=" << short_double(b.measured) << ' '
        << b.relation << " threshold=" << short_double(b.threshold) << " [" << b.name << "; " << r.checks.size()
        << " checks; " << r.provenance << "] " << r.title;
    return out.str();
}

namespace {

struct Graph {
    std::string name;
    ScalarProfile profile;
};

std::vector<Graph> catalog_graphs()
{
    return {{"quadratic", ScalarProfile::power(2.0)}, {"power1.5", ScalarProfile::power(1.5)},
            {"power4", ScalarProfile::power(4.0)},    {"abs", ScalarProfile::abs()},
            {"cubic", ScalarProfile::power(3.0)}};
}

double log_uniform(std::mt19937_64& rng, double lo_exp, double hi_exp)
{
    std::uniform_real_distribution<double> u(lo_exp, hi_exp);
    return std::pow(10.0, u(rng));
}

double signed_log_uniform(std::mt19937_64& rng, double lo_exp, double hi_exp)
{
    std::bernoulli_distribution coin;
    const double v = log_uniform(rng, lo_exp, hi_exp);
    return coin(rng) ? v : -v;
}

// Breakpoints of the Yosida map: images of derivative kinks under x = k + lambda s.
std::vector<double> yosida_kinks(const ScalarProfile& p, double lambda)
{
    std::vector<double> out;
    for (double k : p.derivative_kinks()) {
        out.push_back(k + lambda * p.left_derivative(k));
        out.push_back(k + lambda * p.right_derivative(k));
    }
    return out;
}

GridField smooth_bump(const DirichletGrid& g, double height)
{
    return make_initial(InitialDatum::sampled([&](double x, double y) {
                            const double sx = std::sin(std::numbers::pi * x / g.extent(0));
                            const double sy = g.dimension() == 2 ? std::sin(std::numbers::pi * y / g.extent(1)) : 1.0;
                            return height * std::pow(sx * sy, 3)
                                 + 0.3 * height * std::sin(3.0 * std::numbers::pi * x / g.extent(0));
                        }),
                        g);
}

// 0 at the ends, linear ramps, flat top on the middle half.
GridField plateau(const DirichletGrid& g, double height)
{
    return make_initial(InitialDatum::sampled([&](double x, double) {
                            const double s = x / g.extent(0);
                            return height * std::clamp(4.0 * std::min(s, 1.0 - s), 0.0, 1.0);
                        }),
                        g);
}

IntegrateOptions ledger_only()
{
    IntegrateOptions o;
    o.state_stride = 0;
    return o;
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v)
{
    MeanSe r;
    for (double x : v) {
        r.mean += x;
    }
    r.mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) {
        var += (x - r.mean) * (x - r.mean);
    }
    var /= static_cast<double>(v.size() - 1);
    r.se = std::sqrt(var / static_cast<double>(v.size()));
    return r;
}

std::string tag(const std::string& base, double value)
{
    return base + "@" + format_double(value);
}

} // namespace

CriterionResult criterion_convex_oracles(const AcceptanceOptions& opt)
{
    CriterionResult r{"C1", "convex_core", "closed-form vs bisection resolvents, Yosida identity, envelope gradient", "default", {}};
    std::mt19937_64 rng(opt.seed);
    for (const auto& g : catalog_graphs()) {
        double worst_res = 0.0;
        double worst_id = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const double lam = log_uniform(rng, -2.0, 0.5);
            const double x = signed_log_uniform(rng, -3.0, 1.3);
            const double j = g.profile.resolvent(lam, x);
            const double jb = g.profile.resolvent_bisection(lam, x);
            const double scale = std::max(1.0, std::abs(x));
            worst_res = std::max(worst_res, std::abs(j - jb) / scale);
            worst_id = std::max(worst_id, std::abs(x - j - lam * g.profile.yosida(lam, x)) / scale);
        }
        r.checks.push_back(check_le("resolvent_bisection_gap_" + g.name, worst_res, 1e-10));
        r.checks.push_back(check_le("yosida_identity_" + g.name, worst_id, 1e-10));

        const double lam = 0.5;
        const double h0 = 1e-2;
        const auto kinks = yosida_kinks(g.profile, lam);
        double e1 = 0.0;
        double e2 = 0.0;
        int used = 0;
        for (int i = 0; i < 200; ++i) {
            const double x = -3.0 + 6.0 * (i + 0.5) / 200.0;
            if (std::any_of(kinks.begin(), kinks.end(), [&](double k) { return std::abs(x - k) < 4.0 * h0; })) {
                continue;
            }
            const double grad = g.profile.yosida(lam, x);
            const auto fd = [&](double h) {
                return (g.profile.moreau_envelope(lam, x + h) - g.profile.moreau_envelope(lam, x - h)) / (2.0 * h);
            };
            e1 += std::abs(fd(h0) - grad);
            e2 += std::abs(fd(h0 / 2.0) - grad);
            ++used;
        }
        // piecewise-quadratic envelopes are differentiated exactly by central differences
        const double exact_floor = 1e-9 * used;
        if (e1 <= exact_floor) {
            r.checks.push_back(check_le("envelope_fd_error_" + g.name, e1, exact_floor));
        } else {
            r.checks.push_back(check_ge("envelope_fd_order_" + g.name, std::log2(e1 / e2), 1.9));
        }
    }
    return r;
}

CriterionResult criterion_fenchel_young(const AcceptanceOptions& opt)
{
    CriterionResult r{"C2", "convex_core", "Fenchel-Young residuals: sign, equality on the graph, decay in lambda", "default", {}};
    std::mt19937_64 rng(opt.seed + 1);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (const auto& g : catalog_graphs()) {
        const Potential P = Potential::scalar(g.profile);
        const bool bounded = g.profile.kind() == ProfileKind::Abs;
        double min_res = kInfinity;
        double max_graph = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const double x = signed_log_uniform(rng, -3.0, 1.0);
            const double y = bounded ? unit(rng) : signed_log_uniform(rng, -3.0, 1.3);
            const double xs[] = {x};
            const double ys[] = {y};
            min_res = std::min(min_res, fenchel_residual(P, xs, ys));
            const double lam = log_uniform(rng, -2.0, 0.5);
            const double js[] = {g.profile.resolvent(lam, x)};
            const double gs[] = {g.profile.yosida(lam, x)};
            max_graph = std::max(max_graph, fenchel_residual(P, js, gs));
        }
        r.checks.push_back(check_ge("min_residual_" + g.name, min_res, -1e-8));
        r.checks.push_back(check_le("graph_residual_" + g.name, max_graph, 1e-8));

        double worst_increase = -kInfinity;
        for (int i = 0; i < 100; ++i) {
            const double x = signed_log_uniform(rng, -2.0, 1.0);
            double prev = kInfinity;
            for (int l = 0; l <= 6; ++l) {
                const double lam = std::ldexp(1.0, -l);
                const double xs[] = {x};
                const double gs[] = {g.profile.yosida(lam, x)};
                const double res = fenchel_residual(P, xs, gs);
                if (l > 0) {
                    worst_increase = std::max(worst_increase, res - prev - 1e-12 * std::max(1.0, std::abs(prev)));
                }
                prev = res;
            }
        }
        r.checks.push_back(check_le("residual_increase_under_halving_" + g.name, worst_increase, 0.0));
    }
    return r;
}

CriterionResult criterion_discrete_duality(const AcceptanceOptions& opt)
{
    CriterionResult r{"C3", "grid", "summation by parts and div grad = stencil Laplacian", "default", {}};
    std::mt19937_64 rng(opt.seed + 2);
    std::normal_distribution<double> n01;
    for (const auto& g : {DirichletGrid::interval(1.0, 128), DirichletGrid::rectangle(1.0, 1.0, 32, 32)}) {
        const std::string dim = std::to_string(g.dimension()) + "d";
        double worst = 0.0;
        double worst_stencil = 0.0;
        for (int i = 0; i < 100; ++i) {
            GridField u(g);
            FluxField f(g);
            for (double& v : u.values()) {
                v = n01(rng);
            }
            for (int a = 0; a < g.dimension(); ++a) {
                for (double& v : f.component(a)) {
                    v = n01(rng);
                }
            }
            const FluxField gu = gradient(u);
            const GridField df = divergence(f);
            const double lhs = inner(df, u) + inner(f, gu);
            worst = std::max(worst, std::abs(lhs) / (norm(df) * norm(u) + norm(f) * norm(gu)));
            const GridField a = divergence(gu);
            const GridField b = laplacian_stencil(u);
            double scale = 0.0;
            double diff = 0.0;
            for (std::size_t k = 0; k < u.size(); ++k) {
                scale = std::max(scale, std::abs(b[k]));
                diff = std::max(diff, std::abs(a[k] - b[k]));
            }
            worst_stencil = std::max(worst_stencil, diff / scale);
        }
        r.checks.push_back(check_le("sbp_relative_" + dim, worst, 1e-12));
        r.checks.push_back(check_le("div_grad_vs_stencil_" + dim, worst_stencil, 1e-12));
    }
    return r;
}

CriterionResult criterion_ou_moments(const AcceptanceOptions& opt)
{
    CriterionResult r{"C4", "solver", "terminal second moment of the linear equation vs the OU formula", "default", {}};
    const auto g = DirichletGrid::interval(4.0, 32);
    SolverConfig cfg(g);
    cfg.gamma = Potential::scalar(ScalarProfile::power(2.0));
    cfg.lambda_yosida = 0.1;
    cfg.horizon = 1.0;
    cfg.noise = NoiseModel::additive({1.0}, 10.0);
    const double a = (cfg.viscosity() + 1.0 / (1.0 + cfg.lambda_yosida)) * g.lambda_min();
    const double T = cfg.horizon;
    const double ref = std::exp(-2.0 * a * T) + (1.0 - std::exp(-2.0 * a * T)) / (2.0 * a);
    const GridField u0 = sine_mode(g, 1);
    for (double dt : {1.0 / 64, 1.0 / 128}) {
        cfg.dt = dt;
        std::vector<double> finals(static_cast<std::size_t>(opt.paths));
        parallel_for(opt.paths, opt.jobs, [&](int p) {
            const auto t = integrate(cfg, u0, {opt.seed, static_cast<std::uint64_t>(p)}, ledger_only());
            finals[static_cast<std::size_t>(p)] = t.records.back().ledger.norm_u_sq;
        });
        const auto ms = mean_se(finals);
        r.checks.push_back(check_le(tag("moment_error_dt", dt), std::abs(ms.mean - ref),
                                    std::max(3.0 * ms.se, 5.0 * dt * ref)));
    }
    return r;
}

CriterionResult criterion_energy(const AcceptanceOptions& opt)
{
    CriterionResult r{"C5", "solver", "per-step energy inequality and mean energy residual O(dt)", "default", {}};
    {
        const auto g = DirichletGrid::interval(1.0, 64);
        SolverConfig cfg(g);
        cfg.gamma = Potential::scalar(ScalarProfile::power(4.0));
        cfg.beta = Potential::scalar(ScalarProfile::abs());
        cfg.lambda_yosida = 1.0 / 16;
        cfg.dt = 0.01;
        cfg.horizon = 0.25;
        const auto t = integrate(cfg, smooth_bump(g, 1.5), {opt.seed, 0}, ledger_only());
        r.checks.push_back(check_le("energy_step_excess_1d", max_energy_step_excess(t), 0.0));
    }
    {
        const auto g = DirichletGrid::rectangle(1.0, 1.0, 16, 16);
        SolverConfig cfg(g);
        cfg.gamma = Potential::separable({ScalarProfile::power(4.0), ScalarProfile::power(4.0)});
        cfg.beta = Potential::scalar(ScalarProfile::abs());
        cfg.lambda_yosida = 1.0 / 16;
        cfg.dt = 0.01;
        cfg.horizon = 0.1;
        const auto t = integrate(cfg, smooth_bump(g, 1.5), {opt.seed, 0}, ledger_only());
        r.checks.push_back(check_le("energy_step_excess_2d", max_energy_step_excess(t), 0.0));
    }
    const auto g = DirichletGrid::interval(1.0, 32);
    SolverConfig cfg(g);
    cfg.gamma = Potential::scalar(ScalarProfile::power(2.0));
    cfg.lambda_yosida = 0.1;
    cfg.horizon = 1.0;
    cfg.noise = NoiseModel::additive({1.0}, 10.0);
    const GridField u0 = sine_mode(g, 1);
    std::vector<double> dts{1.0 / 32, 1.0 / 64};
    std::vector<MeanSe> stats;
    for (double dt : dts) {
        cfg.dt = dt;
        std::vector<double> res(static_cast<std::size_t>(opt.paths));
        parallel_for(opt.paths, opt.jobs, [&](int p) {
            res[static_cast<std::size_t>(p)] =
                energy_residual(integrate(cfg, u0, {opt.seed + 5, static_cast<std::uint64_t>(p)}, ledger_only()));
        });
        stats.push_back(mean_se(res));
    }
    // C fitted by least squares through the origin; per-level C from each mean
    double num = 0.0;
    double den = 0.0;
    std::vector<double> per_level;
    for (std::size_t i = 0; i < dts.size(); ++i) {
        num += std::abs(stats[i].mean) * dts[i];
        den += dts[i] * dts[i];
        per_level.push_back(std::abs(stats[i].mean) / dts[i]);
    }
    const double c_fit = num / den;
    for (std::size_t i = 0; i < dts.size(); ++i) {
        r.checks.push_back(check_le(tag("mean_residual_dt", dts[i]), std::abs(stats[i].mean),
                                    3.0 * stats[i].se + c_fit * dts[i]));
    }
    const double lo = std::min(per_level[0], per_level[1]);
    const double hi = std::max(per_level[0], per_level[1]);
    r.checks.push_back(check_le("c_ratio_across_halving", lo > 0.0 ? hi / lo : kInfinity, 2.0));
    return r;
}

namespace {

SolverConfig sweep_config(const DirichletGrid& g, const std::string& variant)
{
    SolverConfig cfg(g);
    if (variant == "quadratic") {
        cfg.gamma = Potential::scalar(ScalarProfile::power(2.0));
    } else {
        cfg.gamma = Potential::scalar(ScalarProfile::power(4.0));
        cfg.beta = Potential::scalar(ScalarProfile::abs());
    }
    cfg.dt = 1.0 / 64;
    cfg.horizon = 0.5;
    cfg.noise = NoiseModel::additive(NoiseModel::power_law(4, 0.5, 1.0), 10.0);
    return cfg;
}

std::vector<double> halving_ladder(int first_exp, int last_exp)
{
    std::vector<double> l;
    for (int k = first_exp; k <= last_exp; ++k) {
        l.push_back(std::ldexp(1.0, -k));
    }
    return l;
}

} // namespace

CriterionResult criterion_apriori(const AcceptanceOptions& opt)
{
    CriterionResult r{"C6", "verify", "ledger bounds uniform in lambda and uniformly decaying tails", "default", {}};
    const auto g = DirichletGrid::interval(1.0, 64);
    SolverConfig cfg(g);
    cfg.gamma = Potential::scalar(ScalarProfile::power(2.0, 4.0));
    cfg.beta = Potential::scalar(ScalarProfile::abs());
    cfg.dt = 1.0 / 64;
    cfg.horizon = 0.5;
    cfg.noise = NoiseModel::additive(NoiseModel::power_law(4, 0.5, 1.0), 10.0);
    const auto lambdas = halving_ladder(2, 7);
    const auto report = lambda_sweep(cfg, lambdas, {opt.seed, 0}, smooth_bump(g, 4.0), opt.jobs);

    std::vector<double> x;
    for (double l : lambdas) {
        x.push_back(std::log(l));
    }
    bool finite = true;
    const auto top = report.max_bounds.values();
    for (std::size_t q = 0; q < 4; ++q) {
        std::vector<double> y;
        for (const auto& e : report.entries) {
            const double v = e.bounds.values()[q];
            finite = finite && std::isfinite(v);
            y.push_back(top[q] > 0.0 ? v / top[q] : 0.0);
        }
        r.checks.push_back(check_ge(std::string("slope_") + kBoundNames[q], regression_slope(x, y), -0.05));
    }
    r.checks.push_back(check_flag("bounds_finite", finite));
    double worst_increase = -kInfinity;
    double worst_tail_ratio = 0.0;
    for (const auto& e : report.entries) {
        for (const auto* tau : {&e.tails.eta, &e.tails.xi}) {
            for (std::size_t m = 0; m + 1 < tau->size(); ++m) {
                worst_increase = std::max(worst_increase, (*tau)[m + 1] - (*tau)[m]);
            }
            const double ratio = tau->front() > 0.0 ? tau->back() / tau->front() : 0.0;
            worst_tail_ratio = std::max(worst_tail_ratio, ratio);
        }
    }
    r.checks.push_back(check_le("tail_increase_in_M", worst_increase, 0.0));
    r.checks.push_back(check_le("tail_ratio_Mmax_over_1", worst_tail_ratio, 0.01));
    return r;
}

CriterionResult criterion_cauchy(const AcceptanceOptions& opt)
{
    CriterionResult r{"C7", "verify", "sup-distance between lambda and lambda/2 runs decreases", "default", {}};
    const auto g = DirichletGrid::interval(1.0, 64);
    const auto lambdas = halving_ladder(2, 6);
    for (const std::string variant : {"quadratic", "power4_sign"}) {
        const auto cfg = sweep_config(g, variant);
        const auto report = lambda_sweep(cfg, lambdas, {opt.seed, 1}, smooth_bump(g, 1.0), opt.jobs);
        std::vector<double> d;
        for (const auto& e : report.entries) {
            if (e.cauchy) {
                d.push_back(*e.cauchy);
            }
        }
        double worst_ratio = 0.0;
        for (std::size_t i = 0; i + 1 < d.size(); ++i) {
            worst_ratio = std::max(worst_ratio, d[i + 1] / d[i]);
        }
        r.checks.push_back(check_le("cauchy_successive_ratio_" + variant, worst_ratio, 1.0 - 1e-12));
        if (variant == "quadratic") {
            std::vector<double> lx;
            std::vector<double> ly;
            for (std::size_t i = 0; i < d.size(); ++i) {
                lx.push_back(std::log(lambdas[i]));
                ly.push_back(std::log(d[i]));
            }
            r.checks.push_back(check_ge("cauchy_order_quadratic", regression_slope(lx, ly), 0.9));
        }
    }
    return r;
}

CriterionResult criterion_lipschitz(const AcceptanceOptions& opt)
{
    CriterionResult r{"C8", "verify", "pathwise contraction (additive) and mean-square Lipschitz ratio (multiplicative)", "default", {}};
    const auto g = DirichletGrid::interval(1.0, 32);
    const GridField a0 = smooth_bump(g, 1.0);
    const GridField b0 = smooth_bump(g, -0.5) + 0.3 * sine_mode(g, 2);
    {
        SolverConfig cfg(g);
        cfg.gamma = Potential::scalar(ScalarProfile::power(4.0));
        cfg.beta = Potential::scalar(ScalarProfile::abs());
        cfg.lambda_yosida = 1.0 / 16;
        cfg.dt = 1.0 / 32;
        cfg.horizon = 0.5;
        cfg.noise = NoiseModel::additive(NoiseModel::power_law(4, 0.5, 1.0), 10.0);
        const auto rep = lipschitz_test(cfg, a0, b0, 20, opt.seed + 8, opt.jobs);
        r.checks.push_back(check_le("additive_pathwise_excess", rep.worst_pathwise_excess, 0.0));
    }
    SolverConfig cfg(g);
    cfg.gamma = Potential::scalar(ScalarProfile::power(2.0));
    cfg.beta = Potential::scalar(ScalarProfile::abs());
    cfg.lambda_yosida = 1.0 / 16;
    cfg.dt = 1.0 / 32;
    cfg.horizon = 0.5;
    cfg.noise = NoiseModel(NoiseModel::power_law(4, 0.4, 1.0), Gain::clipped_linear(0.0, 1.0, 1.0), 1.0);
    const ModeBasis basis(g, cfg.noise.mode_count());
    r.checks.push_back(check_le("certified_NB", cfg.noise.certified_bound(basis), cfg.noise.declared_bound()));
    const auto nb = check_noise_bounds(cfg.noise, basis, 200, opt.seed);
    r.checks.push_back(check_le("sampled_HS_bound", std::max(nb.worst_growth_ratio, nb.worst_lipschitz_ratio),
                                cfg.noise.declared_bound()));
    const auto rep = lipschitz_test(cfg, a0, b0, opt.paths, opt.seed + 9, opt.jobs);
    r.checks.push_back(check_le("multiplicative_ratio_R", rep.ratio, rep.bound));
    return r;
}

CriterionResult criterion_phi_uniqueness(const AcceptanceOptions& opt)
{
    CriterionResult r{"C9", "verify", "Phi = -div eta + xi converges across schemes while eta alone does not", "default", {}};
    const auto g = DirichletGrid::interval(1.0, 16);
    const GridField u0 = plateau(g, 1.0);
    const double horizon = 0.05;
    const double dt_over_lambda = 0.9 / g.lambda_max();
    std::vector<double> dist;
    double eta_diff = 0.0;
    for (int l = 0; l < 3; ++l) {
        SolverConfig a(g);
        a.gamma = Potential::scalar(ScalarProfile::abs());
        // dyadic step counts keep every level on the same Brownian path
        a.dt = horizon / (128.0 * std::ldexp(1.0, l));
        a.lambda_yosida = a.dt / dt_over_lambda;
        a.horizon = horizon;
        a.noise = NoiseModel::additive(NoiseModel::power_law(2, 0.05, 1.0), 10.0);
        SolverConfig b = a;
        b.scheme = Scheme::SemiImplicit;
        const auto rep = phi_uniqueness_test(a, b, {opt.seed, 3}, u0, {horizon});
        dist.push_back(rep.phi_distance.back());
        eta_diff = rep.eta_max_difference;
    }
    for (int l = 0; l < 2; ++l) {
        r.checks.push_back(check_ge("phi_distance_reduction_level" + std::to_string(l), dist[l] / dist[l + 1], 1.5));
    }
    r.checks.push_back(check_ge("eta_difference_over_final_phi", eta_diff / dist.back(), 10.0));
    return r;
}

const std::vector<CriterionSpec>& library_criteria()
{
    static const std::vector<CriterionSpec> specs{
        {"C1", "convex_core", criterion_convex_oracles}, {"C2", "convex_core", criterion_fenchel_young},
        {"C3", "grid", criterion_discrete_duality},      {"C4", "solver", criterion_ou_moments},
        {"C5", "solver", criterion_energy},              {"C6", "verify", criterion_apriori},
        {"C7", "verify", criterion_cauchy},              {"C8", "verify", criterion_lipschitz},
        {"C9", "verify", criterion_phi_uniqueness},
    };
    return specs;
}

} // namespace dnspde
