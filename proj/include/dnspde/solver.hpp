#pragma once

// Time stepping for the regularized problem
//     du - lambda_v Delta u dt - div gamma_l(grad u) dt + beta_l(u) dt = B(u) dW
// with explicit noise and either an implicit variational drift step or a
// semi-implicit splitting.

#include "dnspde/convex.hpp"
#include "dnspde/grid.hpp"
#include "dnspde/noise.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dnspde {

enum class Scheme { ImplicitOpt, SemiImplicit };

std::string to_string(Scheme scheme);
/// "implicit_opt" or "semi_implicit".
Scheme parse_scheme(const std::string& name);

struct InitialDatum {
    enum class Kind { Zero, Eigenmode, Function, File };

    Kind kind = Kind::Zero;
    double amplitude = 1.0;
    int kx = 1;
    int ky = 1;
    std::function<double(double, double)> function;
    std::filesystem::path file;

    static InitialDatum zero() { return {}; }
    static InitialDatum eigenmode(int kx, int ky = 1, double amplitude = 1.0);
    static InitialDatum sampled(std::function<double(double, double)> f);
    static InitialDatum from_file(std::filesystem::path path);
};

[[nodiscard]] GridField make_initial(const InitialDatum& datum, const DirichletGrid& grid);

struct SolverConfig {
    explicit SolverConfig(DirichletGrid g) : grid(g) {}

    DirichletGrid grid;
    std::optional<Potential> gamma; ///< flux potential k; absent means gamma = 0
    std::optional<Potential> beta;  ///< scalar potential j; absent means beta = 0
    NoiseModel noise = NoiseModel::none();
    double lambda_yosida = 0.1;
    std::optional<double> lambda_visc; ///< tied to lambda_yosida when empty
    double dt = 0.01;
    double horizon = 1.0;
    Scheme scheme = Scheme::ImplicitOpt;
    double inner_tol = 1e-10;
    int inner_max_iter = 100000;
    InitialDatum initial;

    [[nodiscard]] double viscosity() const { return lambda_visc.value_or(lambda_yosida); }
    /// Number of steps, ceil(T/dt) up to rounding.
    [[nodiscard]] int steps() const;
    /// Throws InvalidArgument / Unsupported on an inconsistent configuration.
    void validate() const;
};

/// Per-axis profiles of a flux potential on the staggered grid. Radial
/// potentials in 2D are accepted only with the quadratic profile.
[[nodiscard]] std::vector<ScalarProfile> flux_profiles(const Potential& k, const DirichletGrid& grid);

struct StepStats {
    int iterations = 0;
    double residual = 0.0; ///< h-norm of grad F at the returned point (implicit only)
};

/// Cached operators for one configuration. Not thread-safe; use one per thread.
class Stepper {
public:
    explicit Stepper(const SolverConfig& cfg);

    [[nodiscard]] const SolverConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] const ModeBasis& basis() const noexcept { return basis_; }

    /// Lipschitz constant of grad F used as the inverse step size.
    [[nodiscard]] double inner_lipschitz() const noexcept { return lip_; }
    /// Strong convexity modulus of F.
    [[nodiscard]] double strong_convexity() const noexcept { return mu_; }
    /// dt (lambda_max L_gamma + L_beta); the semi-implicit step needs <= 1.
    [[nodiscard]] double stability_number() const noexcept { return stability_; }

    /// v <- argmin F; `v` holds the starting guess on entry.
    StepStats implicit_step(std::span<const double> forcing, std::span<double> v);
    /// v <- (I - dt lambda_v Delta)^{-1}(forcing + dt(div gamma_l(grad u) - beta_l(u)))
    StepStats semi_implicit_step(std::span<const double> u, std::span<const double> forcing, std::span<double> v);

    /// eta = gamma_l(grad u), xi = beta_l(u)
    void selections(std::span<const double> u, FluxField& eta, GridField& xi);
    /// -div gamma_l(grad u) + beta_l(u), without the viscous term.
    void nonlinear_drift(std::span<const double> u, std::span<double> out);
    /// Largest Fenchel-Young residual of (J_l x, gamma_l x) over faces and of
    /// (J_l u, beta_l u) over nodes.
    [[nodiscard]] double graph_residual(std::span<const double> u);

private:
    void gradient_of_energy(std::span<const double> v, std::span<const double> forcing, std::span<double> g);

    SolverConfig cfg_;
    ModeBasis basis_;
    std::vector<ScalarProfile> flux_profiles_; // one per axis
    std::optional<ScalarProfile> node_profile_;
    double lip_ = 0.0;
    double mu_ = 0.0;
    double stability_ = 0.0;
    std::array<std::vector<double>, 2> faces_;
    std::vector<double> tmp_;
};

/// Single implicit step with a freshly built Stepper; starts from u_n.
[[nodiscard]] GridField implicit_step(const SolverConfig& cfg, const GridField& u_n, const GridField& forcing);
[[nodiscard]] GridField semi_implicit_step(const SolverConfig& cfg, const GridField& u_n, const GridField& forcing);

struct LedgerEntry {
    int step = 0;
    double time = 0.0;
    double norm_u_sq = 0.0;
    double pairing_eta_gradu = 0.0;
    double pairing_xi_u = 0.0;
    double visc_grad_sq = 0.0; ///< ||grad u||^2
    double hs_sq = 0.0;
    double stoch_pairing = 0.0; ///< <u_n, B(u_n) dW_n>; 0 on the last record
    int inner_iterations = 0;   ///< for the step that produced this state
    double inner_residual = 0.0;
    double graph_residual = 0.0; ///< 0 unless graph checks were requested
};

struct StateRecord {
    LedgerEntry ledger;
    std::optional<GridField> u;
    std::optional<FluxField> eta;
    std::optional<GridField> xi;
};

struct IntegrateOptions {
    /// Keep (u, eta, xi) every `state_stride` steps (and at the last step); 0 keeps none.
    int state_stride = 1;
    bool check_graph = false;
    /// Called with every state, including the initial one.
    std::function<void(int step, double t, const GridField& u, const FluxField& eta, const GridField& xi)> observer;
};

struct Trajectory {
    explicit Trajectory(SolverConfig c) : config(std::move(c)) {}

    SolverConfig config;
    PathSeed seed;
    std::vector<StateRecord> records;
    std::uint64_t increments_checksum = 0;
    double max_graph_residual = 0.0;
    int total_inner_iterations = 0;

    [[nodiscard]] int steps() const noexcept { return static_cast<int>(records.size()) - 1; }
    [[nodiscard]] const GridField& final_state() const;
};

/// Runs ceil(T/dt) steps from u0. Errors inside a step are rethrown as
/// SolverFailure carrying the step index.
[[nodiscard]] Trajectory integrate(const SolverConfig& cfg, const GridField& u0, const PathSeed& seed,
                                   const IntegrateOptions& options = {});
/// Same with precomputed increments (steps x K).
[[nodiscard]] Trajectory integrate(const SolverConfig& cfg, const GridField& u0, const PathSeed& seed,
                                   const IncrementTable& increments, const IntegrateOptions& options = {});

/// Number of integrate() calls made by this process.
[[nodiscard]] std::uint64_t solver_invocations() noexcept;

/// 1/2|u_N|^2 + sum dt (<eta,grad u> + <xi,u> + lambda_v |grad u|^2) - 1/2|u_0|^2
/// - 1/2 sum dt HS^2 - sum <u_n, B dW_n>. Dissipation is taken at the new
/// state for the implicit scheme and at the old state for the semi-implicit one.
[[nodiscard]] double energy_residual(const Trajectory& traj);

/// max_n of 1/2|u_{n+1}|^2 + dt D(u_{n+1}) - 1/2|u_n|^2 - eps_inner |u_{n+1}|,
/// D the full dissipation; <= 0 means the per-step energy inequality holds.
[[nodiscard]] double max_energy_step_excess(const Trajectory& traj);

/// step,t,norm_u_sq,pairing_eta_gradu,pairing_xi_u,hs_sq,stoch_pairing,visc_grad_sq
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Work items are
/// independent; callers write results by index.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

} // namespace dnspde
