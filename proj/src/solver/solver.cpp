#include "dnspde/solver.hpp"
#include "dnspde/errors.hpp"
#include "dnspde/format.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace dnspde {

namespace {

std::atomic<std::uint64_t> g_invocations{0};

double weighted_norm(const DirichletGrid& grid, std::span<const double> v)
{
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return std::sqrt(s * grid.cell_volume());
}


double max_yosida_lipschitz(const std::vector<ScalarProfile>& profiles, double lambda)
{
    double lip = 0.0;
    for (const auto& p : profiles) {
        lip = std::max(lip, p.yosida_lipschitz(lambda));
    }
    return lip;
}

double profile_graph_residual(const ScalarProfile& p, double lambda, double x)
{
    const double j = p.resolvent(lambda, x);
    const double eta = (x - j) / lambda;
    return p.value(j) + p.conjugate(eta) - j * eta;
}

} // namespace

std::vector<ScalarProfile> flux_profiles(const Potential& k, const DirichletGrid& grid)
{
    const int d = grid.dimension();
    if (k.arity() == Arity::Scalar) {
        if (d != 1) {
            throw InvalidArgument("flux potential must be a vector potential on a 2D grid");
        }
        return {k.profile()};
    }
    if (k.dimension() != d) {
        throw ShapeMismatch("flux potential dimension " + std::to_string(k.dimension())
                            + " differs from the grid dimension " + std::to_string(d));
    }
    if (k.structure() == Structure::Separable) {
        return k.profiles();
    }
    if (d == 1) {
        return {k.profile()};
    }
    const auto& p = k.profile();
    if (p.kind() == ProfileKind::Power && p.exponent() == 2.0) {
        return std::vector<ScalarProfile>(static_cast<std::size_t>(d), p);
    }
    throw Unsupported("radial flux potentials on a staggered 2D grid are limited to the quadratic profile; "
                      "use a separable potential");
}

std::string to_string(Scheme scheme)
{
    return scheme == Scheme::ImplicitOpt ? "implicit_opt" : "semi_implicit";
}

Scheme parse_scheme(const std::string& name)
{
    if (name == "implicit_opt") {
        return Scheme::ImplicitOpt;
    }
    if (name == "semi_implicit") {
        return Scheme::SemiImplicit;
    }
    throw InvalidArgument("unknown scheme '" + name + "' (expected implicit_opt or semi_implicit)");
}

InitialDatum InitialDatum::eigenmode(int kx, int ky, double amplitude)
{
    InitialDatum d;
    d.kind = Kind::Eigenmode;
    d.kx = kx;
    d.ky = ky;
    d.amplitude = amplitude;
    return d;
}

InitialDatum InitialDatum::sampled(std::function<double(double, double)> f)
{
    InitialDatum d;
    d.kind = Kind::Function;
    d.function = std::move(f);
    return d;
}

InitialDatum InitialDatum::from_file(std::filesystem::path path)
{
    InitialDatum d;
    d.kind = Kind::File;
    d.file = std::move(path);
    return d;
}

GridField make_initial(const InitialDatum& datum, const DirichletGrid& grid)
{
    switch (datum.kind) {
    case InitialDatum::Kind::Zero: return GridField(grid);
    case InitialDatum::Kind::Eigenmode: return datum.amplitude * sine_mode(grid, datum.kx, datum.ky);
    case InitialDatum::Kind::Function: {
        if (!datum.function) {
            throw InvalidArgument("function initial datum without a sampler");
        }
        GridField u(grid);
        const int nx = grid.nodes(0);
        const int ny = grid.dimension() == 2 ? grid.nodes(1) : 1;
        for (int ix = 0; ix < nx; ++ix) {
            for (int iy = 0; iy < ny; ++iy) {
                const double y = grid.dimension() == 2 ? grid.coordinate(1, iy) : 0.0;
                u[static_cast<std::size_t>(ix * ny + iy)] = datum.function(grid.coordinate(0, ix), y);
            }
        }
        if (!u.all_finite()) {
            throw InvalidArgument("initial datum sampler returned non-finite values");
        }
        return u;
    }
    case InitialDatum::Kind::File: {
        GridField u = load_grid_field(datum.file);
        if (!(u.grid() == grid)) {
            throw ShapeMismatch("initial datum file " + datum.file.string() + " lives on a different grid");
        }
        return u;
    }
    }
    return GridField(grid);
}

int SolverConfig::steps() const
{
    return static_cast<int>(std::ceil(horizon / dt - 1e-9));
}

void SolverConfig::validate() const
{
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InvalidArgument("dt must be positive");
    }
    if (!(horizon >= dt * (1.0 - 1e-12)) || !std::isfinite(horizon)) {
        throw InvalidArgument("horizon must satisfy T >= dt");
    }
    if (!(lambda_yosida > 0.0) || !std::isfinite(lambda_yosida)) {
        throw InvalidArgument("lambda_yosida must be positive");
    }
    if (!(viscosity() >= 0.0) || !std::isfinite(viscosity())) {
        throw InvalidArgument("lambda_visc must be nonnegative");
    }
    if (!(inner_tol > 0.0) || inner_max_iter < 1) {
        throw InvalidArgument("inner tolerance and iteration cap must be positive");
    }
    if (gamma) {
        (void)flux_profiles(*gamma, grid);
    }
    if (beta && beta->arity() != Arity::Scalar) {
        throw InvalidArgument("beta must come from a scalar potential");
    }
    if (noise.mode_count() > static_cast<int>(grid.node_count())) {
        throw InvalidArgument("noise uses " + std::to_string(noise.mode_count()) + " modes but the grid has only "
                              + std::to_string(grid.node_count()) + " nodes");
    }
}

Stepper::Stepper(const SolverConfig& cfg) : cfg_(cfg), basis_((cfg.validate(), cfg.grid), cfg.noise.mode_count())
{
    if (cfg_.gamma) {
        flux_profiles_ = flux_profiles(*cfg_.gamma, cfg_.grid);
    }
    if (cfg_.beta) {
        node_profile_ = cfg_.beta->profile();
    }
    const double lam = cfg_.lambda_yosida;
    const double lip_gamma = max_yosida_lipschitz(flux_profiles_, lam);
    const double lip_beta = node_profile_ ? node_profile_->yosida_lipschitz(lam) : 0.0;
    const double lmax = cfg_.grid.lambda_max();
    lip_ = 1.0 / cfg_.dt + (cfg_.viscosity() + lip_gamma) * lmax + lip_beta;
    mu_ = 1.0 / cfg_.dt + cfg_.viscosity() * cfg_.grid.lambda_min();
    stability_ = cfg_.dt * (lmax * lip_gamma + lip_beta);
    for (int a = 0; a < cfg_.grid.dimension(); ++a) {
        faces_[static_cast<std::size_t>(a)].assign(cfg_.grid.face_count(a), 0.0);
    }
    tmp_.assign(cfg_.grid.node_count(), 0.0);
}

void Stepper::gradient_of_energy(std::span<const double> v, std::span<const double> forcing, std::span<double> g)
{
    const auto& grid = cfg_.grid;
    const double lam = cfg_.lambda_yosida;
    const double visc = cfg_.viscosity();
    gradient_into(grid, v, {faces_[0], faces_[1]});
    for (int a = 0; a < grid.dimension(); ++a) {
        auto& f = faces_[static_cast<std::size_t>(a)];
        if (flux_profiles_.empty()) {
            for (double& x : f) {
                x *= visc;
            }
        } else {
            const auto& p = flux_profiles_[static_cast<std::size_t>(a)];
            for (double& x : f) {
                x = visc * x + p.yosida(lam, x);
            }
        }
    }
    divergence_into(grid, {faces_[0], faces_[1]}, tmp_);
    const double inv_dt = 1.0 / cfg_.dt;
    for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] = (v[i] - forcing[i]) * inv_dt - tmp_[i];
    }
    if (node_profile_) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            g[i] += node_profile_->yosida(lam, v[i]);
        }
    }
}

StepStats Stepper::implicit_step(std::span<const double> forcing, std::span<double> v)
{
    const auto& grid = cfg_.grid;
    const std::size_t n = grid.node_count();
    if (forcing.size() != n || v.size() != n) {
        throw ShapeMismatch("implicit_step: buffers do not match the grid");
    }
    std::vector<double> x(v.begin(), v.end());
    std::vector<double> y = x;
    std::vector<double> g(n);
    std::vector<double> x_new(n);
    const double q = std::sqrt(mu_ / lip_);
    const double momentum = (1.0 - q) / (1.0 + q);
    const double step = 1.0 / lip_;
    for (int it = 0; it <= cfg_.inner_max_iter; ++it) {
        gradient_of_energy(y, forcing, g);
        const double r = weighted_norm(grid, g);
        if (!std::isfinite(r)) {
            throw ConvergenceError("non-finite iterate in the implicit step");
        }
        if (r <= cfg_.inner_tol) {
            std::copy(y.begin(), y.end(), v.begin());
            return {it, r};
        }
        double restart = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            x_new[i] = y[i] - step * g[i];
            restart += g[i] * (x_new[i] - x[i]);
        }
        if (restart > 0.0) {
            y = x_new;
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                y[i] = x_new[i] + momentum * (x_new[i] - x[i]);
            }
        }
        std::swap(x, x_new);
    }
    gradient_of_energy(y, forcing, g);
    std::ostringstream msg;
    msg << "implicit step did not reach |grad F| <= " << cfg_.inner_tol << " in " << cfg_.inner_max_iter
        << " iterations (residual " << weighted_norm(grid, g) << ")";
    throw ConvergenceError(msg.str());
}

void Stepper::nonlinear_drift(std::span<const double> u, std::span<double> out)
{
    const auto& grid = cfg_.grid;
    const double lam = cfg_.lambda_yosida;
    std::fill(out.begin(), out.end(), 0.0);
    if (!flux_profiles_.empty()) {
        gradient_into(grid, u, {faces_[0], faces_[1]});
        for (int a = 0; a < grid.dimension(); ++a) {
            const auto& p = flux_profiles_[static_cast<std::size_t>(a)];
            for (double& x : faces_[static_cast<std::size_t>(a)]) {
                x = p.yosida(lam, x);
            }
        }
        divergence_into(grid, {faces_[0], faces_[1]}, out);
        for (double& x : out) {
            x = -x;
        }
    }
    if (node_profile_) {
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] += node_profile_->yosida(lam, u[i]);
        }
    }
}

StepStats Stepper::semi_implicit_step(std::span<const double> u, std::span<const double> forcing, std::span<double> v)
{
    if (stability_ > 1.0 + 1e-12) {
        std::ostringstream msg;
        msg << "semi-implicit stability bound violated: dt*(lambda_max*L_gamma + L_beta) = " << stability_ << " > 1";
        throw InvalidArgument(msg.str());
    }
    std::vector<double> rhs(u.size());
    nonlinear_drift(u, rhs);
    for (std::size_t i = 0; i < rhs.size(); ++i) {
        rhs[i] = forcing[i] - cfg_.dt * rhs[i];
    }
    const double shift = cfg_.dt * cfg_.viscosity();
    if (shift == 0.0) {
        std::copy(rhs.begin(), rhs.end(), v.begin());
        return {};
    }
    std::copy(forcing.begin(), forcing.end(), v.begin());
    const auto cg = solve_shifted_laplacian(cfg_.grid, shift, rhs, v);
    return {cg.iterations, 0.0};
}

void Stepper::selections(std::span<const double> u, FluxField& eta, GridField& xi)
{
    const auto& grid = cfg_.grid;
    const double lam = cfg_.lambda_yosida;
    gradient_into(grid, u, {eta.component(0), eta.component(1)});
    for (int a = 0; a < grid.dimension(); ++a) {
        auto comp = eta.component(a);
        if (flux_profiles_.empty()) {
            std::fill(comp.begin(), comp.end(), 0.0);
            continue;
        }
        const auto& p = flux_profiles_[static_cast<std::size_t>(a)];
        for (double& x : comp) {
            x = p.yosida(lam, x);
        }
    }
    for (std::size_t i = 0; i < u.size(); ++i) {
        xi[i] = node_profile_ ? node_profile_->yosida(lam, u[i]) : 0.0;
    }
}

double Stepper::graph_residual(std::span<const double> u)
{
    const auto& grid = cfg_.grid;
    const double lam = cfg_.lambda_yosida;
    double worst = 0.0;
    if (!flux_profiles_.empty()) {
        gradient_into(grid, u, {faces_[0], faces_[1]});
        for (int a = 0; a < grid.dimension(); ++a) {
            const auto& p = flux_profiles_[static_cast<std::size_t>(a)];
            for (double x : faces_[static_cast<std::size_t>(a)]) {
                worst = std::max(worst, profile_graph_residual(p, lam, x));
            }
        }
    }
    if (node_profile_) {
        for (double x : u) {
            worst = std::max(worst, profile_graph_residual(*node_profile_, lam, x));
        }
    }
    return worst;
}

GridField implicit_step(const SolverConfig& cfg, const GridField& u_n, const GridField& forcing)
{
    Stepper s(cfg);
    GridField v = u_n;
    (void)s.implicit_step(forcing.values(), v.values());
    return v;
}

GridField semi_implicit_step(const SolverConfig& cfg, const GridField& u_n, const GridField& forcing)
{
    Stepper s(cfg);
    GridField v(cfg.grid);
    (void)s.semi_implicit_step(u_n.values(), forcing.values(), v.values());
    return v;
}

const GridField& Trajectory::final_state() const
{
    if (records.empty() || !records.back().u) {
        throw InvalidArgument("trajectory holds no final state");
    }
    return *records.back().u;
}

Trajectory integrate(const SolverConfig& cfg, const GridField& u0, const PathSeed& seed,
                     const IntegrateOptions& options)
{
    cfg.validate();
    return integrate(cfg, u0, seed, sample_increments(seed, cfg.steps(), cfg.dt, cfg.noise.mode_count()), options);
}

Trajectory integrate(const SolverConfig& cfg, const GridField& u0, const PathSeed& seed,
                     const IncrementTable& increments, const IntegrateOptions& options)
{
    g_invocations.fetch_add(1, std::memory_order_relaxed);
    Stepper stepper(cfg);
    const auto& grid = cfg.grid;
    if (!(u0.grid() == grid)) {
        throw ShapeMismatch("initial datum lives on a different grid");
    }
    if (!u0.all_finite()) {
        throw InvalidArgument("initial datum is not finite");
    }
    const int n_steps = cfg.steps();
    if (increments.steps() != n_steps || increments.modes() != cfg.noise.mode_count()) {
        throw ShapeMismatch("increment table does not match the step count and mode count");
    }
    if (cfg.scheme == Scheme::SemiImplicit && stepper.stability_number() > 1.0 + 1e-12) {
        std::ostringstream msg;
        msg << "semi-implicit stability bound violated: dt*(lambda_max*L_gamma + L_beta) = "
            << format_double(stepper.stability_number()) << " > 1";
        throw SolverFailure(0, msg.str());
    }

    Trajectory traj(cfg);
    traj.seed = seed;
    traj.increments_checksum = increment_checksum(increments);
    traj.records.reserve(static_cast<std::size_t>(n_steps) + 1);

    GridField u = u0;
    GridField next(grid);
    GridField bdw(grid);
    GridField forcing(grid);
    FluxField eta(grid);
    GridField xi(grid);
    const bool noisy = !cfg.noise.is_zero();

    const auto record = [&](int n, const StepStats& stats) {
        stepper.selections(u.values(), eta, xi);
        const FluxField gu = gradient(u);
        LedgerEntry e;
        e.step = n;
        e.time = n * cfg.dt;
        e.norm_u_sq = inner(u, u);
        e.pairing_eta_gradu = inner(eta, gu);
        e.pairing_xi_u = inner(xi, u);
        e.visc_grad_sq = inner(gu, gu);
        e.hs_sq = noisy ? hs_norm_sq(cfg.noise, stepper.basis(), u.values()) : 0.0;
        e.inner_iterations = stats.iterations;
        e.inner_residual = stats.residual;
        if (options.check_graph) {
            e.graph_residual = stepper.graph_residual(u.values());
            traj.max_graph_residual = std::max(traj.max_graph_residual, e.graph_residual);
        }
        traj.total_inner_iterations += stats.iterations;
        StateRecord rec{e, std::nullopt, std::nullopt, std::nullopt};
        const bool keep = options.state_stride > 0 && (n % options.state_stride == 0 || n == n_steps);
        if (keep) {
            rec.u = u;
            rec.eta = eta;
            rec.xi = xi;
        }
        if (options.observer) {
            options.observer(n, e.time, u, eta, xi);
        }
        traj.records.push_back(std::move(rec));
    };

    record(0, {});
    for (int n = 0; n < n_steps; ++n) {
        try {
            if (noisy) {
                apply_b_into(cfg.noise, stepper.basis(), u.values(), increments.row(n), bdw.values());
                traj.records.back().ledger.stoch_pairing = inner(u, bdw);
                forcing = u;
                forcing += bdw;
            } else {
                forcing = u;
            }
            StepStats stats;
            if (cfg.scheme == Scheme::ImplicitOpt) {
                next = u;
                stats = stepper.implicit_step(forcing.values(), next.values());
            } else {
                stats = stepper.semi_implicit_step(u.values(), forcing.values(), next.values());
            }
            if (!next.all_finite()) {
                throw ConvergenceError("non-finite state");
            }
            std::swap(u, next);
            record(n + 1, stats);
        } catch (const SolverFailure&) {
            throw;
        } catch (const Error& e) {
            throw SolverFailure(n + 1, e.what());
        }
    }
    return traj;
}

std::uint64_t solver_invocations() noexcept
{
    return g_invocations.load(std::memory_order_relaxed);
}

namespace {

double dissipation(const LedgerEntry& e, double visc)
{
    return e.pairing_eta_gradu + e.pairing_xi_u + visc * e.visc_grad_sq;
}

void require_complete(const Trajectory& traj)
{
    if (traj.records.empty() || traj.steps() != traj.config.steps()) {
        throw InvalidArgument("incomplete ledger: " + std::to_string(traj.records.size()) + " records for "
                              + std::to_string(traj.config.steps()) + " steps");
    }
}

} // namespace

double energy_residual(const Trajectory& traj)
{
    require_complete(traj);
    const auto& r = traj.records;
    const int N = traj.steps();
    const double dt = traj.config.dt;
    const double visc = traj.config.viscosity();
    const int shift = traj.config.scheme == Scheme::ImplicitOpt ? 1 : 0;
    double res = 0.5 * (r.back().ledger.norm_u_sq - r.front().ledger.norm_u_sq);
    for (int n = 0; n < N; ++n) {
        const auto& e = r[static_cast<std::size_t>(n)].ledger;
        res += dt * dissipation(r[static_cast<std::size_t>(n + shift)].ledger, visc);
        res -= 0.5 * dt * e.hs_sq + e.stoch_pairing;
    }
    return res;
}

double max_energy_step_excess(const Trajectory& traj)
{
    require_complete(traj);
    const auto& r = traj.records;
    const double dt = traj.config.dt;
    const double visc = traj.config.viscosity();
    double worst = -kInfinity;
    for (std::size_t n = 0; n + 1 < r.size(); ++n) {
        const auto& a = r[n].ledger;
        const auto& b = r[n + 1].ledger;
        const double excess = 0.5 * b.norm_u_sq + dt * dissipation(b, visc) - 0.5 * a.norm_u_sq
                            - traj.config.inner_tol * std::sqrt(b.norm_u_sq);
        worst = std::max(worst, excess);
    }
    return r.size() < 2 ? 0.0 : worst;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj)
{
    out << "step,t,norm_u_sq,pairing_eta_gradu,pairing_xi_u,hs_sq,stoch_pairing,visc_grad_sq\n";
    for (const auto& rec : traj.records) {
        const auto& e = rec.ledger;
        out << e.step << ',' << format_double(e.time) << ',' << format_double(e.norm_u_sq) << ','
            << format_double(e.pairing_eta_gradu) << ',' << format_double(e.pairing_xi_u) << ','
            << format_double(e.hs_sq) << ',' << format_double(e.stoch_pairing) << ','
            << format_double(e.visc_grad_sq) << '\n';
    }
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn)
{
    const int workers = std::max(1, std::min(jobs, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    errors[static_cast<std::size_t>(i)] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

} // namespace dnspde
