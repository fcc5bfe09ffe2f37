#include "dnspde/cli.hpp"
#include "dnspde/format.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace dnspde {

namespace {

namespace fs = std::filesystem;

struct Loaded {
    RunConfig config;
    fs::path out_dir;
    std::uint64_t seed = 0;
};

Loaded load(const CommandOptions& opt)
{
    Loaded l{load_config(opt.config), {}, 0};
    l.out_dir = opt.out_dir.value_or(l.config.output_dir);
    l.seed = opt.seed.value_or(l.config.seed);
    if (opt.jobs < 1) {
        throw ConfigError("--jobs", 0, "needs a positive job count");
    }
    return l;
}

void write_header(std::ostream& out, const std::string& what, const RunConfig& cfg, std::uint64_t seed,
                  const std::vector<std::string>& extra = {})
{
    out << "# dnspde " << what << '\n';
    out << "# config_fnv1a=" << hex64(cfg.checksum) << '\n';
    out << "# master_seed=" << seed << '\n';
    for (const auto& e : extra) {
        out << "# " << e << '\n';
    }
}

std::ofstream open_output(const fs::path& dir, const std::string& name)
{
    fs::create_directories(dir);
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) {
        throw ConfigError((dir / name).string(), 0, "cannot open output file");
    }
    return f;
}

// Maps library exceptions onto exit codes.
template <class F>
int guarded(std::ostream& err, F&& body)
{
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const SolverFailure& e) {
        err << "solver failure at " << e.what() << '\n';
        return kExitSolver;
    } catch (const ConvergenceError& e) {
        err << "solver failure: " << e.what() << '\n';
        return kExitSolver;
    } catch (const Error& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const fs::filesystem_error& e) {
        err << "output error: " << e.what() << '\n';
        return kExitConfig;
    }
}

std::string csv_safe(std::string s)
{
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

} // namespace

int cmd_run(const CommandOptions& opt, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        const Loaded l = load(opt);
        const SolverConfig cfg = l.config.build_solver_config();
        const GridField u0 = make_initial(cfg.initial, cfg.grid);
        IntegrateOptions io;
        io.check_graph = l.config.check_graph;
        const auto start = std::chrono::steady_clock::now();
        const Trajectory t = integrate(cfg, u0, {l.seed, 0}, io);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        const FenchelGaps gaps = fenchel_gaps(t);
        const double residual = energy_residual(t);
        {
            auto f = open_output(l.out_dir, "trajectory.csv");
            write_header(f, "trajectory", l.config, l.seed);
            write_trajectory_csv(f, t);
        }
        {
            auto f = open_output(l.out_dir, "summary.csv");
            write_header(f, "run summary", l.config, l.seed);
            const std::vector<std::pair<std::string, std::string>> rows{
                {"scheme", to_string(cfg.scheme)},
                {"steps", std::to_string(t.steps())},
                {"dt", format_double(cfg.dt)},
                {"horizon", format_double(cfg.horizon)},
                {"lambda_yosida", format_double(cfg.lambda_yosida)},
                {"lambda_visc", format_double(cfg.viscosity())},
                {"final_norm_sq", format_double(t.records.back().ledger.norm_u_sq)},
                {"energy_residual", format_double(residual)},
                {"max_energy_step_excess", format_double(max_energy_step_excess(t))},
                {"fenchel_gap_eta", format_double(gaps.eta)},
                {"fenchel_gap_xi", format_double(gaps.xi)},
                {"max_fenchel_gap", format_double(std::max(gaps.eta, gaps.xi))},
                {"max_graph_residual", l.config.check_graph ? format_double(t.max_graph_residual) : "not_checked"},
                {"total_inner_iterations", std::to_string(t.total_inner_iterations)},
                {"increments_checksum", hex64(t.increments_checksum)},
            };
            f << "quantity,value\n";
            for (const auto& [k, v] : rows) {
                f << k << ',' << v << '\n';
            }
        }
        out << "run: " << t.steps() << " steps, energy_residual=" << format_double(residual)
            << ", max_fenchel_gap=" << format_double(std::max(gaps.eta, gaps.xi)) << ", wall_time=" << wall
            << " s\n";
        out << "wrote " << (l.out_dir / "trajectory.csv").string() << " and " << (l.out_dir / "summary.csv").string()
            << '\n';
        return kExitOk;
    });
}

namespace {

RunConfig with_sweep_value(const RunConfig& base, const std::string& key, double v)
{
    RunConfig c = base;
    const auto bad = [&](const std::string& why) {
        throw ConfigError("sweep", 0, key + "=" + format_double(v) + ": " + why);
    };
    if (key == "lambda_yosida") {
        c.lambda_yosida = v;
    } else if (key == "dt") {
        c.dt = v;
    } else if (key == "h") {
        const auto nodes = [&](double length) {
            const double cells = length / v;
            if (!(v > 0.0) || std::abs(cells - std::round(cells)) > 1e-9 * cells || std::round(cells) < 2.0) {
                bad("spacing must divide the domain length into at least 2 cells");
            }
            return static_cast<int>(std::round(cells)) - 1;
        };
        c.nodes_x = nodes(c.length_x);
        if (c.nodes_y) {
            c.nodes_y = nodes(c.length_y);
        }
    } else if (key == "mode_count") {
        if (!c.noise.present) {
            bad("the config has no [noise] section");
        }
        if (!c.noise.amplitudes.empty()) {
            bad("needs amplitude_c/amplitude_q instead of an explicit amplitude list");
        }
        if (v < 1.0 || v != std::floor(v)) {
            bad("mode count must be a positive integer");
        }
        c.noise.modes = static_cast<int>(v);
    } else {
        throw ConfigError("sweep", 0, "unknown sweep key '" + key + "' (use lambda_yosida, dt, h or mode_count)");
    }
    return c;
}

} // namespace

int cmd_sweep(const CommandOptions& opt, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        const Loaded l = load(opt);
        if (opt.sweep_values.empty()) {
            throw ConfigError("sweep", 0, "no sweep values given");
        }
        const std::size_t n = opt.sweep_values.size();
        std::vector<SolverConfig> cfgs;
        std::vector<GridField> starts;
        for (double v : opt.sweep_values) {
            const RunConfig rc = with_sweep_value(l.config, opt.sweep_key, v);
            cfgs.push_back(rc.build_solver_config());
            starts.push_back(make_initial(cfgs.back().initial, cfgs.back().grid));
        }

        std::vector<std::optional<Trajectory>> runs(n);
        std::vector<std::string> failures(n);
        parallel_for(static_cast<int>(n), opt.jobs, [&](int i) {
            const auto k = static_cast<std::size_t>(i);
            try {
                runs[k].emplace(integrate(cfgs[k], starts[k], {l.seed, 0}));
            } catch (const Error& e) {
                failures[k] = e.what();
            }
        });

        std::ostringstream values;
        for (std::size_t i = 0; i < n; ++i) {
            values << (i ? ";" : "") << format_double(opt.sweep_values[i]);
        }
        auto f = open_output(l.out_dir, "sweep.csv");
        write_header(f, "sweep", l.config, l.seed, {"sweep_key=" + opt.sweep_key, "sweep_values=" + values.str()});
        f << "key,value,status,steps,cauchy_sup,sup_norm_sq,visc_energy,eta_pairing,xi_pairing,fenchel_gap_eta,"
             "fenchel_gap_xi,tau_eta_1,tau_eta_max,tau_xi_1,tau_xi_max,energy_residual,increments_checksum,message\n";
        const bool comparable = opt.sweep_key == "lambda_yosida" || opt.sweep_key == "mode_count";
        int failed = 0;
        for (std::size_t i = 0; i < n; ++i) {
            f << opt.sweep_key << ',' << format_double(opt.sweep_values[i]) << ',';
            if (!runs[i]) {
                ++failed;
                f << "failed" << std::string(15, ',') << csv_safe(failures[i]) << '\n';
                err << "sweep value " << format_double(opt.sweep_values[i]) << " failed: " << failures[i] << '\n';
                continue;
            }
            const Trajectory& t = *runs[i];
            std::string cauchy;
            if (comparable && i + 1 < n && runs[i + 1]) {
                double d = 0.0;
                for (std::size_t s = 0; s < t.records.size(); ++s) {
                    d = std::max(d, norm(*t.records[s].u - *runs[i + 1]->records[s].u));
                }
                cauchy = format_double(d);
            }
            const auto b = apriori_bounds(t);
            const auto tails = tail_profile(t);
            const auto gaps = fenchel_gaps(t);
            f << "ok," << t.steps() << ',' << cauchy << ',' << format_double(b.sup_norm_sq) << ','
              << format_double(b.visc_energy) << ',' << format_double(b.eta_pairing) << ','
              << format_double(b.xi_pairing) << ',' << format_double(gaps.eta) << ',' << format_double(gaps.xi) << ','
              << format_double(tails.eta.front()) << ',' << format_double(tails.eta.back()) << ','
              << format_double(tails.xi.front()) << ',' << format_double(tails.xi.back()) << ','
              << format_double(energy_residual(t)) << ',' << hex64(t.increments_checksum) << ",\n";
        }
        out << "sweep over " << opt.sweep_key << ": " << n - static_cast<std::size_t>(failed) << " of " << n
            << " runs completed; wrote " << (l.out_dir / "sweep.csv").string() << '\n';
        return failed ? kExitSolver : kExitOk;
    });
}

CriterionResult config_hs_bound_check(const RunConfig& cfg, int samples, std::uint64_t seed)
{
    CriterionResult r{"hs_bound", "noise", "config noise respects its declared Hilbert-Schmidt bound", "config", {}};
    const SolverConfig sc = cfg.build_solver_config();
    const ModeBasis basis(sc.grid, sc.noise.mode_count());
    const double declared = sc.noise.declared_bound();
    r.checks.push_back(check_le("certified_bound", sc.noise.certified_bound(basis), declared));
    const auto nb = check_noise_bounds(sc.noise, basis, samples, seed);
    r.checks.push_back(check_le("sampled_growth_ratio", nb.worst_growth_ratio, declared));
    r.checks.push_back(check_le("sampled_lipschitz_ratio", nb.worst_lipschitz_ratio, declared));
    return r;
}

CriterionResult config_potential_check(const RunConfig& cfg, double probe_radius)
{
    CriterionResult r{"potentials", "convex_core", "config potentials satisfy the standing assumptions", "config", {}};
    const SolverConfig sc = cfg.build_solver_config();
    const auto add = [&](const std::string& name, const Potential& p) {
        for (const auto& e : validate_potential(p, probe_radius, 256).entries) {
            r.checks.push_back(check_flag(name + ":" + e.check, e.passed));
        }
    };
    if (sc.gamma) {
        add("gamma", *sc.gamma);
    }
    if (sc.beta) {
        add("beta", *sc.beta);
    }
    if (r.checks.empty()) {
        r.checks.push_back(check_flag("no_potentials_configured", true));
    }
    return r;
}

namespace {

struct VerifyItem {
    std::string id;
    std::string family;
};

// Canonical order of everything cmd_verify can run.
const std::vector<VerifyItem>& verify_items()
{
    static const std::vector<VerifyItem> items{
        {"C1", "convex_core"}, {"C2", "convex_core"}, {"potentials", "convex_core"}, {"C3", "grid"},
        {"hs_bound", "noise"}, {"C4", "solver"},      {"C5", "solver"},              {"C6", "verify"},
        {"C7", "verify"},      {"C8", "verify"},      {"C9", "verify"},              {"C10", "cli"},
    };
    return items;
}

std::vector<std::string> resolve_selection(const std::vector<std::string>& tokens)
{
    std::vector<bool> chosen(verify_items().size(), false);
    for (const auto& t : tokens) {
        bool matched = false;
        for (std::size_t i = 0; i < verify_items().size(); ++i) {
            const auto& it = verify_items()[i];
            if (t == "all" || t == it.id || t == it.family) {
                chosen[i] = true;
                matched = true;
            }
        }
        if (!matched) {
            throw ConfigError("select", 0, "unknown criterion or family '" + t + "'");
        }
    }
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        if (chosen[i]) {
            ids.push_back(verify_items()[i].id);
        }
    }
    return ids;
}

} // namespace

int cmd_verify(const CommandOptions& opt, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        const Loaded l = load(opt);
        const auto ids = resolve_selection(opt.select.value_or(l.config.verify.select));
        AcceptanceOptions ao;
        ao.seed = opt.seed.value_or(l.config.verify.seed);
        ao.jobs = opt.jobs;
        ao.paths = l.config.verify.paths;

        std::vector<CriterionResult> results;
        for (const auto& id : ids) {
            if (id == "potentials") {
                results.push_back(config_potential_check(l.config, l.config.verify.probe_radius));
            } else if (id == "hs_bound") {
                results.push_back(config_hs_bound_check(l.config, l.config.verify.hs_samples, ao.seed));
            } else if (id == "C10") {
                results.push_back(criterion_reproducibility(ao));
            } else {
                for (const auto& spec : library_criteria()) {
                    if (spec.id == id) {
                        results.push_back(spec.run(ao));
                    }
                }
            }
        }

        int failed = 0;
        auto f = open_output(l.out_dir, "verify.csv");
        write_header(f, "verify", l.config, ao.seed, {"paths=" + std::to_string(ao.paths)});
        f << "criterion,family,provenance,check,measured,relation,threshold,result\n";
        for (const auto& r : results) {
            failed += r.pass() ? 0 : 1;
            out << format_criterion_line(r) << '\n';
            for (const auto& c : r.checks) {
                out << "    " << (c.pass ? "pass " : "FAIL ") << c.name << ": " << format_double(c.measured) << ' '
                    << c.relation << ' ' << format_double(c.threshold) << '\n';
                f << r.id << ',' << r.family << ',' << r.provenance << ',' << csv_safe(c.name) << ','
                  << format_double(c.measured) << ',' << c.relation << ',' << format_double(c.threshold) << ','
                  << (c.pass ? "PASS" : "FAIL") << '\n';
            }
        }
        out << "verify: " << results.size() - static_cast<std::size_t>(failed) << " of " << results.size()
            << " criteria passed\n";
        return failed ? kExitFail : kExitOk;
    });
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Regularized stochastic PDE solver and verification harness"};
    app.require_subcommand(1);
    CommandOptions opt;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::string select;
    std::string values;

    const auto common = [&](CLI::App* sub) {
        sub->add_option("config", opt.config, "config file")->required();
        sub->add_option("--seed", seed, "master seed override");
        sub->add_option("--out", out_dir, "output directory override");
        sub->add_option("--jobs", opt.jobs, "worker threads for independent runs");
    };
    CLI::App* run = app.add_subcommand("run", "integrate one path");
    common(run);
    CLI::App* sweep = app.add_subcommand("sweep", "repeat the run over a list of parameter values");
    common(sweep);
    sweep->add_option("--key", opt.sweep_key, "lambda_yosida, dt, h or mode_count")->required();
    sweep->add_option("--values", values, "comma-separated values")->required();
    CLI::App* verify = app.add_subcommand("verify", "run acceptance criteria and config checks");
    common(verify);
    verify->add_option("--select", select, "comma-separated criteria ids or families");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }
    const auto given = [](CLI::App* sub, const char* name) { return sub->count(name) > 0; };
    CLI::App* active = app.get_subcommands().front();
    if (given(active, "--seed")) {
        opt.seed = seed;
    }
    if (given(active, "--out")) {
        opt.out_dir = out_dir;
    }
    const auto split = [](const std::string& s) {
        std::vector<std::string> items;
        std::stringstream in(s);
        std::string item;
        while (std::getline(in, item, ',')) {
            items.push_back(item);
        }
        return items;
    };
    if (active == verify && given(verify, "--select")) {
        opt.select = split(select);
    }
    if (active == sweep) {
        for (const auto& v : split(values)) {
            try {
                std::size_t used = 0;
                opt.sweep_values.push_back(std::stod(v, &used));
                if (used != v.size()) {
                    throw std::invalid_argument(v);
                }
            } catch (const std::exception&) {
                err << "config error: --values: not a number: '" << v << "'\n";
                return kExitConfig;
            }
        }
        return cmd_sweep(opt, out, err);
    }
    return active == run ? cmd_run(opt, out, err) : cmd_verify(opt, out, err);
}

namespace {

std::string read_bytes(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Number of files (by name) whose bytes differ between two output directories.
int differing_files(const fs::path& a, const fs::path& b)
{
    std::map<std::string, std::string> left;
    for (const auto& e : fs::directory_iterator(a)) {
        left[e.path().filename().string()] = read_bytes(e.path());
    }
    int diff = 0;
    std::size_t seen = 0;
    for (const auto& e : fs::directory_iterator(b)) {
        ++seen;
        const auto it = left.find(e.path().filename().string());
        if (it == left.end() || it->second != read_bytes(e.path())) {
            ++diff;
        }
    }
    return diff + static_cast<int>(left.size() > seen ? left.size() - seen : 0);
}

const char* kReproConfig = R"(# catalog quadratic case with a sign-graph reaction and additive noise
[grid]
nodes = 32
length = 1.0

[potentials]
gamma = power
gamma.p = 2
beta = abs

[noise]
modes = 4
amplitude_c = 0.5
amplitude_q = 1
declared_bound = 10

[solver]
lambda_yosida = 0.0625
dt = 0.015625
horizon = 0.25
initial = eigenmode
initial.kx = 1
initial.amplitude = 2
seed = 17

[verify]
select = C1,C3,hs_bound
paths = 20
)";

} // namespace

CriterionResult criterion_reproducibility(const AcceptanceOptions& opt)
{
    CriterionResult r{"C10", "cli", "repeated run, sweep and verify executions are byte-identical", "default", {}};
    const fs::path root = fs::temp_directory_path()
                        / ("dnspde-repro-" + hex64(opt.seed) + "-"
                           + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    fs::create_directories(root);
    {
        std::ofstream cfg(root / "repro.ini", std::ios::binary);
        cfg << kReproConfig;
    }
    const auto twice = [&](const std::string& name, auto command) {
        std::string printed[2];
        int codes[2];
        for (int k = 0; k < 2; ++k) {
            CommandOptions o;
            o.config = root / "repro.ini";
            o.out_dir = root / (name + std::to_string(k));
            o.jobs = opt.jobs;
            o.seed = opt.seed;
            o.sweep_key = "lambda_yosida";
            o.sweep_values = {0.25, 0.125, 0.0625};
            std::ostringstream out;
            std::ostringstream err;
            codes[k] = command(o, out, err);
            printed[k] = out.str() + err.str();
        }
        int diff = differing_files(root / (name + "0"), root / (name + "1"));
        r.checks.push_back(check_le(name + "_differing_files", diff, 0.0));
        r.checks.push_back(check_le(name + "_exit_code", std::max(codes[0], codes[1]), 0.0));
        return printed[0] == printed[1];
    };
    (void)twice("run", cmd_run);
    (void)twice("sweep", cmd_sweep);
    const bool same_verify_table = twice("verify", cmd_verify);
    r.checks.push_back(check_flag("verify_table_identical", same_verify_table));
    std::error_code ec;
    fs::remove_all(root, ec);
    return r;
}

} // namespace dnspde
