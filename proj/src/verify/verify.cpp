#include "dnspde/verify.hpp"
#include "dnspde/errors.hpp"
#include "dnspde/format.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace dnspde {

namespace {

// Indices of the records whose dissipation enters the time sums.
std::pair<std::size_t, std::size_t> dissipation_range(const Trajectory& traj)
{
    const std::size_t n = traj.records.size();
    if (n < 2) {
        return {0, 0};
    }
    return traj.config.scheme == Scheme::ImplicitOpt ? std::pair{std::size_t{1}, n} : std::pair{std::size_t{0}, n - 1};
}

void require_states(const Trajectory& traj, std::size_t i, const char* who)
{
    const auto& r = traj.records[i];
    if (!r.u || !r.eta || !r.xi) {
        throw InvalidArgument(std::string(who) + " needs the states of every step (state_stride = 1)");
    }
}

double fenchel_term(const ScalarProfile& p, double x, double y)
{
    return p.value(x) + p.conjugate(y) - x * y;
}

} // namespace

AprioriBounds apriori_bounds(const Trajectory& traj)
{
    AprioriBounds b;
    const double dt = traj.config.dt;
    const double visc = traj.config.viscosity();
    for (const auto& r : traj.records) {
        b.sup_norm_sq = std::max(b.sup_norm_sq, r.ledger.norm_u_sq);
    }
    const auto [lo, hi] = dissipation_range(traj);
    for (std::size_t i = lo; i < hi; ++i) {
        const auto& e = traj.records[i].ledger;
        b.visc_energy += dt * visc * e.visc_grad_sq;
        b.eta_pairing += dt * e.pairing_eta_gradu;
        b.xi_pairing += dt * e.pairing_xi_u;
    }
    return b;
}

std::vector<double> default_tail_levels()
{
    std::vector<double> m;
    for (int k = 0; k <= 10; ++k) {
        m.push_back(std::ldexp(1.0, k));
    }
    return m;
}

TailProfile tail_profile(const Trajectory& traj, const std::vector<double>& levels)
{
    TailProfile t;
    t.levels = levels;
    t.eta.assign(levels.size(), 0.0);
    t.xi.assign(levels.size(), 0.0);
    const double w = traj.config.dt * traj.config.grid.cell_volume();
    const auto [lo, hi] = dissipation_range(traj);
    for (std::size_t i = lo; i < hi; ++i) {
        require_states(traj, i, "tail_profile");
        const auto& eta = *traj.records[i].eta;
        const auto& xi = *traj.records[i].xi;
        for (std::size_t m = 0; m < levels.size(); ++m) {
            double se = 0.0;
            for (int a = 0; a < eta.dimension(); ++a) {
                for (double v : eta.component(a)) {
                    se += std::abs(v) > levels[m] ? std::abs(v) : 0.0;
                }
            }
            double sx = 0.0;
            for (double v : xi.values()) {
                sx += std::abs(v) > levels[m] ? std::abs(v) : 0.0;
            }
            t.eta[m] += w * se;
            t.xi[m] += w * sx;
        }
    }
    return t;
}

FenchelGaps fenchel_gaps(const Trajectory& traj)
{
    FenchelGaps g;
    const auto& cfg = traj.config;
    const double w = cfg.dt * cfg.grid.cell_volume();
    const auto profiles = cfg.gamma ? flux_profiles(*cfg.gamma, cfg.grid) : std::vector<ScalarProfile>{};
    const auto [lo, hi] = dissipation_range(traj);
    for (std::size_t i = lo; i < hi; ++i) {
        require_states(traj, i, "fenchel_gaps");
        const auto& r = traj.records[i];
        if (!profiles.empty()) {
            const FluxField grad = gradient(*r.u);
            for (int a = 0; a < cfg.grid.dimension(); ++a) {
                const auto& p = profiles[static_cast<std::size_t>(a)];
                const auto x = grad.component(a);
                const auto y = r.eta->component(a);
                for (std::size_t f = 0; f < x.size(); ++f) {
                    g.eta += w * fenchel_term(p, x[f], y[f]);
                }
            }
        }
        if (cfg.beta) {
            const auto& p = cfg.beta->profile();
            for (std::size_t k = 0; k < r.u->size(); ++k) {
                g.xi += w * fenchel_term(p, (*r.u)[k], (*r.xi)[k]);
            }
        }
    }
    return g;
}

SweepReport lambda_sweep(const SolverConfig& base, const std::vector<double>& lambdas, const PathSeed& seed,
                         const GridField& u0, int jobs)
{
    if (lambdas.empty()) {
        throw InvalidArgument("lambda_sweep needs at least one lambda");
    }
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!(lambdas[i] > 0.0)) {
            throw InvalidArgument("lambdas must be positive");
        }
        if (i + 1 < lambdas.size() && std::abs(lambdas[i] / lambdas[i + 1] - 2.0) > 1e-9) {
            throw InvalidArgument("consecutive lambdas must halve");
        }
    }
    base.validate();
    const auto increments = sample_increments(seed, base.steps(), base.dt, base.noise.mode_count());
    std::vector<std::optional<Trajectory>> runs(lambdas.size());
    parallel_for(static_cast<int>(lambdas.size()), jobs, [&](int i) {
        SolverConfig cfg = base;
        cfg.lambda_yosida = lambdas[static_cast<std::size_t>(i)];
        try {
            runs[static_cast<std::size_t>(i)].emplace(integrate(cfg, u0, seed, increments));
        } catch (const SolverFailure& e) {
            throw SolverFailure(e.step(), "lambda_yosida=" + format_double(cfg.lambda_yosida) + ": " + e.detail());
        }
    });

    SweepReport report;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        const Trajectory& t = *runs[i];
        SweepEntry e;
        e.lambda = lambdas[i];
        e.bounds = apriori_bounds(t);
        e.tails = tail_profile(t);
        e.gaps = fenchel_gaps(t);
        e.energy_residual = energy_residual(t);
        e.increments_checksum = t.increments_checksum;
        if (i + 1 < lambdas.size()) {
            const Trajectory& s = *runs[i + 1];
            double d = 0.0;
            for (std::size_t n = 0; n < t.records.size(); ++n) {
                d = std::max(d, norm(*t.records[n].u - *s.records[n].u));
            }
            e.cauchy = d;
        }
        auto& m = report.max_bounds;
        m.sup_norm_sq = std::max(m.sup_norm_sq, e.bounds.sup_norm_sq);
        m.visc_energy = std::max(m.visc_energy, e.bounds.visc_energy);
        m.eta_pairing = std::max(m.eta_pairing, e.bounds.eta_pairing);
        m.xi_pairing = std::max(m.xi_pairing, e.bounds.xi_pairing);
        report.entries.push_back(std::move(e));
    }
    return report;
}

void write_sweep_csv(std::ostream& out, const SweepReport& report)
{
    out << "lambda,cauchy_sup,sup_norm_sq,visc_energy,eta_pairing,xi_pairing,fenchel_gap_eta,fenchel_gap_xi,"
           "tau_eta_1,tau_eta_max,tau_xi_1,tau_xi_max,energy_residual,increments_checksum\n";
    for (const auto& e : report.entries) {
        out << format_double(e.lambda) << ',' << (e.cauchy ? format_double(*e.cauchy) : "") << ','
            << format_double(e.bounds.sup_norm_sq) << ',' << format_double(e.bounds.visc_energy) << ','
            << format_double(e.bounds.eta_pairing) << ',' << format_double(e.bounds.xi_pairing) << ','
            << format_double(e.gaps.eta) << ',' << format_double(e.gaps.xi) << ','
            << format_double(e.tails.eta.front()) << ',' << format_double(e.tails.eta.back()) << ','
            << format_double(e.tails.xi.front()) << ',' << format_double(e.tails.xi.back()) << ','
            << format_double(e.energy_residual) << ',' << hex64(e.increments_checksum) << '\n';
    }
}

LipschitzReport lipschitz_test(const SolverConfig& cfg, const GridField& u0_a, const GridField& u0_b, int n_paths,
                               std::uint64_t master_seed, int jobs, std::optional<double> c_lip)
{
    if (n_paths < 1) {
        throw InvalidArgument("lipschitz_test needs at least one path");
    }
    cfg.validate();
    LipschitzReport rep;
    rep.additive = cfg.noise.is_additive();
    const double nb = cfg.noise.declared_bound();
    rep.bound = c_lip.value_or(std::exp((1.0 + nb * nb) * cfg.horizon));
    const double d0 = norm(u0_a - u0_b);
    std::vector<double> sup_sq(static_cast<std::size_t>(n_paths), 0.0);
    std::vector<double> excess(static_cast<std::size_t>(n_paths), -kInfinity);
    parallel_for(n_paths, jobs, [&](int p) {
        const PathSeed seed{master_seed, static_cast<std::uint64_t>(p)};
        const auto inc = sample_increments(seed, cfg.steps(), cfg.dt, cfg.noise.mode_count());
        const auto a = integrate(cfg, u0_a, seed, inc);
        const auto b = integrate(cfg, u0_b, seed, inc);
        double s = 0.0;
        double ex = -kInfinity;
        for (std::size_t n = 0; n < a.records.size(); ++n) {
            const double d = norm(*a.records[n].u - *b.records[n].u);
            s = std::max(s, d * d);
            if (n > 0) {
                ex = std::max(ex, d - d0 - 10.0 * cfg.inner_tol * static_cast<double>(n));
            }
        }
        sup_sq[static_cast<std::size_t>(p)] = s;
        excess[static_cast<std::size_t>(p)] = ex;
    });
    double mean = 0.0;
    for (double s : sup_sq) {
        mean += s;
    }
    mean /= n_paths;
    if (d0 == 0.0) {
        rep.ratio = mean == 0.0 ? 0.0 : kInfinity;
    } else {
        rep.ratio = std::sqrt(mean) / d0;
    }
    rep.worst_pathwise_excess = *std::max_element(excess.begin(), excess.end());
    rep.passed = rep.ratio <= rep.bound && (!rep.additive || rep.worst_pathwise_excess <= 0.0);
    return rep;
}

namespace {

struct PhiRun {
    double dt = 0.0;
    std::vector<GridField> phi; // after n steps
    std::vector<GridField> u;
    std::vector<FluxField> eta;
    std::vector<GridField> xi;
};

PhiRun phi_run(const SolverConfig& cfg, const GridField& u0, const PathSeed& seed)
{
    PhiRun run;
    run.dt = cfg.dt;
    const bool implicit = cfg.scheme == Scheme::ImplicitOpt;
    GridField acc(cfg.grid);
    IntegrateOptions opt;
    opt.state_stride = 0;
    opt.observer = [&](int n, double, const GridField& u, const FluxField& eta, const GridField& xi) {
        GridField w = xi - divergence(eta);
        w *= cfg.dt;
        if (implicit && n > 0) {
            acc += w;
        }
        run.phi.push_back(acc);
        if (!implicit) {
            acc += w;
        }
        run.u.push_back(u);
        run.eta.push_back(eta);
        run.xi.push_back(xi);
    };
    (void)integrate(cfg, u0, seed, opt);
    return run;
}

std::optional<std::size_t> step_at(double t, double dt, std::size_t count)
{
    const double k = std::round(t / dt);
    if (std::abs(k * dt - t) > 1e-9 * std::max(1.0, std::abs(t)) || k < 0 || k >= static_cast<double>(count)) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(k);
}

} // namespace

PhiReport phi_uniqueness_test(const SolverConfig& cfg_a, const SolverConfig& cfg_b, const PathSeed& seed,
                              const GridField& u0, const std::vector<double>& checkpoints)
{
    const auto same_noise = [](const NoiseModel& x, const NoiseModel& y) {
        return std::equal(x.amplitudes().begin(), x.amplitudes().end(), y.amplitudes().begin(), y.amplitudes().end())
            && x.gain().describe() == y.gain().describe();
    };
    const auto describe = [](const std::optional<Potential>& p) { return p ? p->describe() : std::string("none"); };
    if (!(cfg_a.grid == cfg_b.grid) || describe(cfg_a.gamma) != describe(cfg_b.gamma)
        || describe(cfg_a.beta) != describe(cfg_b.beta) || !same_noise(cfg_a.noise, cfg_b.noise)
        || std::abs(cfg_a.horizon - cfg_b.horizon) > 1e-12 * cfg_a.horizon) {
        throw InvalidArgument("phi_uniqueness_test: configurations must share grid, potentials, noise and horizon");
    }
    const PhiRun a = phi_run(cfg_a, u0, seed);
    const PhiRun b = phi_run(cfg_b, u0, seed);
    PhiReport rep;
    for (double t : checkpoints) {
        const auto ia = step_at(t, a.dt, a.phi.size());
        const auto ib = step_at(t, b.dt, b.phi.size());
        if (!ia || !ib) {
            throw InvalidArgument("checkpoint " + format_double(t) + " is not a common time step of both runs");
        }
        rep.times.push_back(t);
        rep.phi_distance.push_back(dual_norm_v0(cfg_a.grid, a.phi[*ia] - b.phi[*ib]));
        rep.u_distance.push_back(dual_norm_v0(cfg_a.grid, a.u[*ia] - b.u[*ib]));
    }
    for (std::size_t n = 0; n < a.eta.size(); ++n) {
        const auto m = step_at(static_cast<double>(n) * a.dt, b.dt, b.eta.size());
        if (!m) {
            continue;
        }
        for (int ax = 0; ax < cfg_a.grid.dimension(); ++ax) {
            const auto x = a.eta[n].component(ax);
            const auto y = b.eta[*m].component(ax);
            for (std::size_t f = 0; f < x.size(); ++f) {
                rep.eta_max_difference = std::max(rep.eta_max_difference, std::abs(x[f] - y[f]));
            }
        }
        for (std::size_t k = 0; k < a.xi[n].size(); ++k) {
            rep.xi_max_difference = std::max(rep.xi_max_difference, std::abs(a.xi[n][k] - b.xi[*m][k]));
        }
    }
    return rep;
}

double regression_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) {
        throw InvalidArgument("regression needs two or more paired points");
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) {
        throw InvalidArgument("regression abscissae are all equal");
    }
    return sxy / sxx;
}

AprioriTable apriori_report(const std::vector<Trajectory>& trajs, const std::vector<double>& lambdas)
{
    if (trajs.empty()) {
        throw InvalidArgument("apriori_report needs at least one trajectory");
    }
    AprioriTable table;
    for (const auto& t : trajs) {
        const auto b = apriori_bounds(t);
        for (double v : b.values()) {
            table.all_finite = table.all_finite && std::isfinite(v);
        }
        auto& e = table.ensemble;
        e.sup_norm_sq = std::max(e.sup_norm_sq, b.sup_norm_sq);
        e.visc_energy = std::max(e.visc_energy, b.visc_energy);
        e.eta_pairing = std::max(e.eta_pairing, b.eta_pairing);
        e.xi_pairing = std::max(e.xi_pairing, b.xi_pairing);
        table.per_path.push_back(b);
    }
    if (!lambdas.empty()) {
        if (lambdas.size() != trajs.size()) {
            throw ShapeMismatch("one lambda per trajectory expected");
        }
        std::vector<double> x;
        for (double l : lambdas) {
            x.push_back(std::log(l));
        }
        std::array<double, 4> slopes{};
        const auto top = table.ensemble.values();
        for (std::size_t q = 0; q < 4; ++q) {
            std::vector<double> y;
            for (const auto& b : table.per_path) {
                y.push_back(top[q] > 0.0 ? b.values()[q] / top[q] : 0.0);
            }
            slopes[q] = regression_slope(x, y);
        }
        table.slopes = slopes;
    }
    return table;
}

ModulusTable continuity_modulus(const Trajectory& traj)
{
    const int N = traj.steps();
    if (N < 16) {
        throw InvalidArgument("continuity_modulus needs at least 16 steps");
    }
    ModulusTable m;
    m.dt = traj.config.dt;
    for (int j = 1; j <= N / 2; j *= 2) {
        double worst = 0.0;
        for (int k = 0; k + j <= N; ++k) {
            const auto& a = traj.records[static_cast<std::size_t>(k)].u;
            const auto& b = traj.records[static_cast<std::size_t>(k + j)].u;
            if (!a || !b) {
                throw InvalidArgument("continuity_modulus needs the states of every step");
            }
            worst = std::max(worst, norm(*b - *a));
        }
        m.lags.push_back(j);
        m.moduli.push_back(worst);
    }
    return m;
}

double holder_exponent(const std::vector<ModulusTable>& tables)
{
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& t : tables) {
        x.push_back(std::log(t.dt));
        y.push_back(std::log(t.moduli.front()));
    }
    return regression_slope(x, y);
}

double holder_ratio_spread(const std::vector<ModulusTable>& tables)
{
    double lo = kInfinity;
    double hi = 0.0;
    for (const auto& t : tables) {
        if (t.moduli.empty() || t.moduli.front() <= 0.0) {
            continue;
        }
        const double r = t.moduli.front() / std::sqrt(t.dt);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    return hi > 0.0 ? hi / lo : 1.0;
}

} // namespace dnspde
