#pragma once

// Config-file front end: run, sweep and verify commands writing CSV reports.

#include "dnspde/errors.hpp"
#include "dnspde/solver.hpp"
#include "dnspde/verify.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dnspde {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;

/// Parse or validation problem in a config file; line 0 when no single line is to blame.
class ConfigError : public Error {
public:
    ConfigError(std::string origin, int line, const std::string& message);
    [[nodiscard]] int line() const noexcept { return line_; }

private:
    int line_;
};

struct ProfileSpec {
    std::string kind = "none"; ///< power, abs, huberized, exp_cosh, piecewise, sampled, none
    double p = 2.0;
    double scale = 1.0;
    double threshold = 1.0;
    double right_slope = 1.0;
    double left_slope = 1.0;
    std::filesystem::path file;
    std::string structure; ///< flux only: scalar, radial, separable
    int line = 0;
};

struct NoiseSpec {
    bool present = false;
    int modes = 1;
    std::vector<double> amplitudes; ///< explicit list; empty means the power law below
    double amplitude_c = 0.0;
    double amplitude_q = 1.0;
    std::string gain = "constant";
    double gain_level = 1.0;
    double gain_offset = 0.0;
    double gain_slope = 1.0;
    double gain_cap = 1.0;
    double gain_amplitude = 0.0;
    double declared_bound = 0.0;
    std::optional<double> smoothing_delta;
    int smoothing_m = 2;
    int line = 0;
};

struct VerifySpec {
    std::vector<std::string> select{"all"};
    int paths = 200;
    std::uint64_t seed = 20240601;
    int hs_samples = 200;
    double probe_radius = 10.0;
};

/// Everything a config file describes. Grid-dependent objects are rebuilt by
/// build_solver_config so sweeps can vary h and the mode count.
struct RunConfig {
    std::string origin; ///< file name for messages
    std::filesystem::path base_dir;
    std::uint64_t checksum = 0; ///< FNV-1a of the file bytes

    int nodes_x = 0;
    std::optional<int> nodes_y;
    double length_x = 1.0;
    double length_y = 1.0;

    ProfileSpec gamma;
    ProfileSpec beta;
    double symmetry_bound = kDefaultSymmetryBound;
    NoiseSpec noise;

    Scheme scheme = Scheme::ImplicitOpt;
    double lambda_yosida = 0.0;
    std::optional<double> lambda_visc;
    double dt = 0.0;
    double horizon = 0.0;
    double inner_tol = 1e-10;
    int inner_max_iter = 100000;
    bool check_graph = true;
    InitialDatum initial;
    std::uint64_t seed = 0;

    VerifySpec verify;
    std::filesystem::path output_dir = "out";

    [[nodiscard]] DirichletGrid grid() const;
    /// Throws ConfigError when the modules reject the combination.
    [[nodiscard]] SolverConfig build_solver_config() const;
};

[[nodiscard]] RunConfig parse_config(const std::string& text, const std::string& origin = "config",
                                     const std::filesystem::path& base_dir = ".");
[[nodiscard]] RunConfig load_config(const std::filesystem::path& file);

struct CommandOptions {
    std::filesystem::path config;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out_dir;
    int jobs = 1;
    std::optional<std::vector<std::string>> select; ///< verify only
    std::string sweep_key;                          ///< sweep only
    std::vector<double> sweep_values;               ///< sweep only
};

/// Writes trajectory.csv and summary.csv.
int cmd_run(const CommandOptions& opt, std::ostream& out, std::ostream& err);
/// Writes sweep.csv; key is lambda_yosida, dt, h or mode_count.
int cmd_sweep(const CommandOptions& opt, std::ostream& out, std::ostream& err);
/// Prints the criteria table and writes verify.csv.
int cmd_verify(const CommandOptions& opt, std::ostream& out, std::ostream& err);

/// Entry point of the executable.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

/// Two executions of every command on the same config give identical bytes.
[[nodiscard]] CriterionResult criterion_reproducibility(const AcceptanceOptions& opt); // C10

/// Named checks on the config's own noise and potentials.
[[nodiscard]] CriterionResult config_hs_bound_check(const RunConfig& cfg, int samples, std::uint64_t seed);
[[nodiscard]] CriterionResult config_potential_check(const RunConfig& cfg, double probe_radius);

} // namespace dnspde
