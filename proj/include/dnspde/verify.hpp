#pragma once

// Diagnostics for the lambda -> 0 program: Cauchy sweeps, bounds uniform in
// lambda, tails, Lipschitz dependence on the initial datum and uniqueness of
// -div eta + xi. Also the acceptance criteria shared by the test binary and
// the verify command.

#include "dnspde/solver.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dnspde {

/// The four time-integrated quantities bounded uniformly in lambda.
struct AprioriBounds {
    double sup_norm_sq = 0.0;  ///< max_n |u_n|^2
    double visc_energy = 0.0;  ///< sum dt lambda_v |grad u|^2
    double eta_pairing = 0.0;  ///< sum dt <eta, grad u>
    double xi_pairing = 0.0;   ///< sum dt <xi, u>

    [[nodiscard]] std::array<double, 4> values() const { return {sup_norm_sq, visc_energy, eta_pairing, xi_pairing}; }
};

inline constexpr std::array<const char*, 4> kBoundNames{"sup_norm_sq", "visc_energy", "eta_pairing", "xi_pairing"};

[[nodiscard]] AprioriBounds apriori_bounds(const Trajectory& traj);

/// tau(M) = sum dt h^d sum |v| 1{|v| > M} at M = 1, 2, 4, ..., 2^10.
struct TailProfile {
    std::vector<double> levels;
    std::vector<double> eta;
    std::vector<double> xi;
};

[[nodiscard]] std::vector<double> default_tail_levels();
[[nodiscard]] TailProfile tail_profile(const Trajectory& traj, const std::vector<double>& levels = default_tail_levels());

/// sum dt h^d (k(grad u) + k*(eta) - eta . grad u) and the same for (j, xi).
struct FenchelGaps {
    double eta = 0.0;
    double xi = 0.0;
};

[[nodiscard]] FenchelGaps fenchel_gaps(const Trajectory& traj);

struct SweepEntry {
    double lambda = 0.0;
    AprioriBounds bounds;
    TailProfile tails;
    FenchelGaps gaps;
    double energy_residual = 0.0;
    std::uint64_t increments_checksum = 0;
    /// sup_n |u_lambda - u_{lambda/2}|; empty for the last lambda.
    std::optional<double> cauchy;
};

struct SweepReport {
    std::vector<SweepEntry> entries;
    AprioriBounds max_bounds; ///< the discrete constant N
};

/// Runs `base` at every lambda (consecutive ratio 2, decreasing) on the same
/// noise path. Viscosity follows lambda unless base.lambda_visc is set.
[[nodiscard]] SweepReport lambda_sweep(const SolverConfig& base, const std::vector<double>& lambdas,
                                       const PathSeed& seed, const GridField& u0, int jobs = 1);

void write_sweep_csv(std::ostream& out, const SweepReport& report);

struct LipschitzReport {
    double ratio = 0.0;             ///< R
    double bound = 0.0;             ///< C_lip
    bool additive = false;
    double worst_pathwise_excess = 0.0; ///< additive only: max over n >= 1 of |u_a - u_b| - |d0| - 10 eps n
    bool passed = false;
};

/// C_lip defaults to exp((1 + N_B^2) T).
[[nodiscard]] LipschitzReport lipschitz_test(const SolverConfig& cfg, const GridField& u0_a, const GridField& u0_b,
                                             int n_paths, std::uint64_t master_seed, int jobs = 1,
                                             std::optional<double> c_lip = std::nullopt);

struct PhiReport {
    std::vector<double> times;
    std::vector<double> phi_distance; ///< dual_norm_v0 of Phi_a - Phi_b at each checkpoint
    std::vector<double> u_distance;   ///< dual_norm_v0 of u_a - u_b
    double eta_max_difference = 0.0;  ///< max over common steps and faces of |eta_a - eta_b|
    double xi_max_difference = 0.0;
};

/// Phi(t) = int_0^t (-div eta + xi) ds with the quadrature matching each
/// scheme (right endpoint for implicit, left for semi-implicit).
[[nodiscard]] PhiReport phi_uniqueness_test(const SolverConfig& cfg_a, const SolverConfig& cfg_b, const PathSeed& seed,
                                            const GridField& u0, const std::vector<double>& checkpoints);

struct AprioriTable {
    std::vector<AprioriBounds> per_path; ///< M(omega)
    AprioriBounds ensemble;              ///< N
    bool all_finite = true;
    /// Regression slope of bound / max bound against log(lambda); only when lambdas were given.
    std::optional<std::array<double, 4>> slopes;
};

[[nodiscard]] AprioriTable apriori_report(const std::vector<Trajectory>& trajs,
                                          const std::vector<double>& lambdas = {});

struct ModulusTable {
    double dt = 0.0;
    std::vector<int> lags;
    std::vector<double> moduli;
};

/// max_k |u(t_{k+j}) - u(t_k)| for j = 1, 2, 4, ... <= steps/2.
[[nodiscard]] ModulusTable continuity_modulus(const Trajectory& traj);
/// Log-log slope of the lag-1 modulus against dt.
[[nodiscard]] double holder_exponent(const std::vector<ModulusTable>& tables);
/// max/min over the tables of the lag-1 modulus / sqrt(dt).
[[nodiscard]] double holder_ratio_spread(const std::vector<ModulusTable>& tables);

/// Least-squares slope of y against x.
[[nodiscard]] double regression_slope(const std::vector<double>& x, const std::vector<double>& y);

// ---------------------------------------------------------------------------
// Acceptance criteria

struct Check {
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    std::string relation; ///< "<=" or ">="
    bool pass = false;
    bool indicator = false; ///< yes/no outcome (1 or 0); never reported as binding while it passes
};

struct CriterionResult {
    std::string id;       ///< "C1".."C10" or a named config check
    std::string family;   ///< convex_core, grid, noise, solver, verify, cli
    std::string title;
    std::string provenance = "default"; ///< "default" or "config"
    std::vector<Check> checks;

    [[nodiscard]] bool pass() const;
    /// The numeric check with the smallest relative margin (a failing check wins).
    [[nodiscard]] const Check& binding() const;
};

Check check_le(std::string name, double measured, double threshold);
Check check_ge(std::string name, double measured, double threshold);
Check check_flag(std::string name, bool ok);

struct AcceptanceOptions {
    std::uint64_t seed = 20240601;
    int jobs = 1;
    int paths = 200;
};

[[nodiscard]] CriterionResult criterion_convex_oracles(const AcceptanceOptions& opt);    // C1
[[nodiscard]] CriterionResult criterion_fenchel_young(const AcceptanceOptions& opt);    // C2
[[nodiscard]] CriterionResult criterion_discrete_duality(const AcceptanceOptions& opt); // C3
[[nodiscard]] CriterionResult criterion_ou_moments(const AcceptanceOptions& opt);       // C4
[[nodiscard]] CriterionResult criterion_energy(const AcceptanceOptions& opt);           // C5
[[nodiscard]] CriterionResult criterion_apriori(const AcceptanceOptions& opt);          // C6
[[nodiscard]] CriterionResult criterion_cauchy(const AcceptanceOptions& opt);           // C7
[[nodiscard]] CriterionResult criterion_lipschitz(const AcceptanceOptions& opt);        // C8
[[nodiscard]] CriterionResult criterion_phi_uniqueness(const AcceptanceOptions& opt);   // C9

struct CriterionSpec {
    std::string id;
    std::string family;
    CriterionResult (*run)(const AcceptanceOptions&);
};

/// C1..C9 in order.
[[nodiscard]] const std::vector<CriterionSpec>& library_criteria();

/// "C4 PASS measured=... threshold=... (...)" on one line.
[[nodiscard]] std::string format_criterion_line(const CriterionResult& r);

} // namespace dnspde
