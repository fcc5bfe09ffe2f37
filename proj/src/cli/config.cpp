#include "dnspde/cli.hpp"
#include "dnspde/format.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace dnspde {

ConfigError::ConfigError(std::string origin, int line, const std::string& message)
    : Error(line > 0 ? origin + ":" + std::to_string(line) + ": " + message : origin + ": " + message), line_(line)
{
}

namespace {

const std::set<std::string> kSections{"grid", "potentials", "noise", "solver", "verify", "output"};
const std::set<std::string> kRequiredSections{"grid", "potentials", "solver"};

std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
};

struct Section {
    int line = 0;
    std::map<std::string, Entry> entries;
};

class Reader {
public:
    Reader(std::string origin, std::map<std::string, Section> sections)
        : origin_(std::move(origin)), sections_(std::move(sections))
    {
    }

    [[nodiscard]] bool has_section(const std::string& s) const { return sections_.count(s) != 0; }
    [[nodiscard]] int section_line(const std::string& s) const
    {
        const auto it = sections_.find(s);
        return it == sections_.end() ? 0 : it->second.line;
    }

    [[nodiscard]] bool has(const std::string& s, const std::string& key) const
    {
        const auto it = sections_.find(s);
        return it != sections_.end() && it->second.entries.count(key) != 0;
    }

    int line_of(const std::string& s, const std::string& key) const
    {
        return has(s, key) ? sections_.at(s).entries.at(key).line : section_line(s);
    }

    std::optional<std::string> text(const std::string& s, const std::string& key)
    {
        const auto it = sections_.find(s);
        if (it == sections_.end()) {
            return std::nullopt;
        }
        const auto e = it->second.entries.find(key);
        if (e == it->second.entries.end()) {
            return std::nullopt;
        }
        e->second.used = true;
        return e->second.value;
    }

    std::string required_text(const std::string& s, const std::string& key)
    {
        auto v = text(s, key);
        if (!v) {
            throw ConfigError(origin_, section_line(s), "[" + s + "] is missing required key '" + key + "'");
        }
        return *v;
    }

    double to_double(const std::string& s, const std::string& key, const std::string& v) const
    {
        double out = 0.0;
        const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
        if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(out)) {
            fail(s, key, "expected a finite number, got '" + v + "'");
        }
        return out;
    }

    long long to_integer(const std::string& s, const std::string& key, const std::string& v) const
    {
        long long out = 0;
        const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
        if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
            fail(s, key, "expected an integer, got '" + v + "'");
        }
        return out;
    }

    std::optional<double> number(const std::string& s, const std::string& key)
    {
        const auto v = text(s, key);
        return v ? std::optional<double>(to_double(s, key, *v)) : std::nullopt;
    }

    double required_number(const std::string& s, const std::string& key)
    {
        return to_double(s, key, required_text(s, key));
    }

    std::optional<long long> integer(const std::string& s, const std::string& key)
    {
        const auto v = text(s, key);
        return v ? std::optional<long long>(to_integer(s, key, *v)) : std::nullopt;
    }

    std::optional<std::uint64_t> unsigned_integer(const std::string& s, const std::string& key)
    {
        const auto v = text(s, key);
        if (!v) {
            return std::nullopt;
        }
        std::uint64_t out = 0;
        const auto r = std::from_chars(v->data(), v->data() + v->size(), out);
        if (r.ec != std::errc() || r.ptr != v->data() + v->size()) {
            fail(s, key, "expected a nonnegative integer, got '" + *v + "'");
        }
        return out;
    }

    std::optional<bool> boolean(const std::string& s, const std::string& key)
    {
        const auto v = text(s, key);
        if (!v) {
            return std::nullopt;
        }
        if (*v == "true") {
            return true;
        }
        if (*v == "false") {
            return false;
        }
        fail(s, key, "expected true or false, got '" + *v + "'");
    }

    std::vector<std::string> list(const std::string& s, const std::string& key)
    {
        std::vector<std::string> out;
        const auto v = text(s, key);
        if (!v) {
            return out;
        }
        std::stringstream in(*v);
        std::string item;
        while (std::getline(in, item, ',')) {
            item = trim(item);
            if (item.empty()) {
                fail(s, key, "empty list item");
            }
            out.push_back(item);
        }
        return out;
    }

    [[noreturn]] void fail(const std::string& s, const std::string& key, const std::string& message) const
    {
        throw ConfigError(origin_, line_of(s, key), "[" + s + "] " + key + ": " + message);
    }

    /// Every key must have been consumed.
    void reject_unknown() const
    {
        for (const auto& [name, sec] : sections_) {
            for (const auto& [key, e] : sec.entries) {
                if (!e.used) {
                    throw ConfigError(origin_, e.line, "unknown key '" + key + "' in [" + name + "]");
                }
            }
        }
    }

    [[nodiscard]] const std::string& origin() const { return origin_; }

private:
    std::string origin_;
    std::map<std::string, Section> sections_;
};

std::map<std::string, Section> tokenize(const std::string& text, const std::string& origin)
{
    std::map<std::string, Section> sections;
    std::istringstream in(text);
    std::string raw;
    std::string current;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string s = trim(raw);
        if (s.empty() || s.front() == '#' || s.front() == ';') {
            continue;
        }
        if (s.front() == '[') {
            if (s.back() != ']') {
                throw ConfigError(origin, line, "malformed section header '" + s + "'");
            }
            current = trim(std::string_view(s).substr(1, s.size() - 2));
            if (!kSections.count(current)) {
                throw ConfigError(origin, line, "unknown section [" + current + "]");
            }
            if (sections.count(current)) {
                throw ConfigError(origin, line, "duplicate section [" + current + "]");
            }
            sections[current].line = line;
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin, line, "expected key = value, got '" + s + "'");
        }
        if (current.empty()) {
            throw ConfigError(origin, line, "key outside of any section");
        }
        const std::string key = trim(std::string_view(s).substr(0, eq));
        const std::string value = trim(std::string_view(s).substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(origin, line, "empty key");
        }
        if (value.empty()) {
            throw ConfigError(origin, line, "empty value for '" + key + "'");
        }
        auto& entries = sections[current].entries;
        if (entries.count(key)) {
            throw ConfigError(origin, line, "duplicate key '" + key + "' in [" + current + "]");
        }
        entries[key] = {value, line, false};
    }
    for (const auto& s : kRequiredSections) {
        if (!sections.count(s)) {
            throw ConfigError(origin, 0, "missing required section [" + s + "]");
        }
    }
    return sections;
}

// Keys that may accompany each profile kind.
const std::map<std::string, std::vector<std::string>> kProfileKeys{
    {"none", {}},
    {"power", {"p", "scale"}},
    {"abs", {"scale"}},
    {"huberized", {"threshold", "scale"}},
    {"exp_cosh", {"scale"}},
    {"piecewise", {"right_slope", "left_slope"}},
    {"sampled", {"file"}},
};

ProfileSpec read_profile(Reader& r, const std::string& name, bool flux)
{
    ProfileSpec spec;
    const std::string sec = "potentials";
    spec.kind = flux ? r.required_text(sec, name) : r.text(sec, name).value_or("none");
    spec.line = r.line_of(sec, name);
    const auto allowed = kProfileKeys.find(spec.kind);
    if (allowed == kProfileKeys.end()) {
        r.fail(sec, name, "unknown profile kind '" + spec.kind + "'");
    }
    const auto permitted = [&](const std::string& k) {
        return std::find(allowed->second.begin(), allowed->second.end(), k) != allowed->second.end();
    };
    for (const std::string k : {"p", "scale", "threshold", "right_slope", "left_slope", "file"}) {
        const std::string key = name + "." + k;
        if (!r.has(sec, key)) {
            continue;
        }
        if (!permitted(k)) {
            r.fail(sec, key, "not a parameter of kind '" + spec.kind + "'");
        }
        if (k == "file") {
            spec.file = r.required_text(sec, key);
        } else {
            const double v = r.required_number(sec, key);
            if (k == "p") {
                spec.p = v;
            } else if (k == "scale") {
                spec.scale = v;
            } else if (k == "threshold") {
                spec.threshold = v;
            } else if (k == "right_slope") {
                spec.right_slope = v;
            } else {
                spec.left_slope = v;
            }
        }
    }
    if (spec.kind == "sampled" && spec.file.empty()) {
        r.fail(sec, name, "kind 'sampled' needs " + name + ".file");
    }
    if (flux) {
        spec.structure = r.text(sec, name + ".structure").value_or("");
        if (!spec.structure.empty() && spec.structure != "scalar" && spec.structure != "radial"
            && spec.structure != "separable") {
            r.fail(sec, name + ".structure", "expected scalar, radial or separable");
        }
    }
    return spec;
}

void read_noise(Reader& r, NoiseSpec& n)
{
    const std::string sec = "noise";
    if (!r.has_section(sec)) {
        return;
    }
    n.present = true;
    n.line = r.section_line(sec);
    n.modes = static_cast<int>(r.integer(sec, "modes").value_or(1));
    const auto amps = r.list(sec, "amplitudes");
    for (const auto& a : amps) {
        n.amplitudes.push_back(r.to_double(sec, "amplitudes", a));
    }
    const auto c = r.number(sec, "amplitude_c");
    const auto q = r.number(sec, "amplitude_q");
    if (!amps.empty() && (c || q)) {
        r.fail(sec, "amplitudes", "give either amplitudes or amplitude_c/amplitude_q, not both");
    }
    if (!amps.empty()) {
        if (r.has(sec, "modes") && static_cast<int>(amps.size()) != n.modes) {
            r.fail(sec, "amplitudes", "list length differs from modes");
        }
        n.modes = static_cast<int>(amps.size());
    } else {
        if (!c) {
            r.fail(sec, "amplitude_c", "missing; give amplitudes or amplitude_c");
        }
        n.amplitude_c = *c;
        n.amplitude_q = q.value_or(1.0);
    }
    n.gain = r.text(sec, "gain").value_or("constant");
    const std::map<std::string, std::vector<std::string>> gain_keys{
        {"constant", {"level"}},
        {"clipped_linear", {"offset", "slope", "cap"}},
        {"bounded_smooth", {"offset", "amplitude"}},
    };
    const auto g = gain_keys.find(n.gain);
    if (g == gain_keys.end()) {
        r.fail(sec, "gain", "unknown gain '" + n.gain + "'");
    }
    for (const std::string k : {"level", "offset", "slope", "cap", "amplitude"}) {
        const std::string key = "gain." + k;
        if (!r.has(sec, key)) {
            continue;
        }
        if (std::find(g->second.begin(), g->second.end(), k) == g->second.end()) {
            r.fail(sec, key, "not a parameter of gain '" + n.gain + "'");
        }
        const double v = r.required_number(sec, key);
        if (k == "level") {
            n.gain_level = v;
        } else if (k == "offset") {
            n.gain_offset = v;
        } else if (k == "slope") {
            n.gain_slope = v;
        } else if (k == "cap") {
            n.gain_cap = v;
        } else {
            n.gain_amplitude = v;
        }
    }
    n.declared_bound = r.required_number(sec, "declared_bound");
    n.smoothing_delta = r.number(sec, "smoothing_delta");
    if (const auto m = r.integer(sec, "smoothing_m")) {
        if (!n.smoothing_delta) {
            r.fail(sec, "smoothing_m", "needs smoothing_delta");
        }
        n.smoothing_m = static_cast<int>(*m);
    }
}

void read_initial(Reader& r, RunConfig& c)
{
    const std::string sec = "solver";
    const std::string kind = r.text(sec, "initial").value_or("zero");
    const auto kx = r.integer(sec, "initial.kx");
    const auto ky = r.integer(sec, "initial.ky");
    const auto amp = r.number(sec, "initial.amplitude");
    const auto file = r.text(sec, "initial.file");
    if (kind == "zero") {
        if (kx || ky || amp || file) {
            r.fail(sec, "initial", "zero initial datum takes no parameters");
        }
        c.initial = InitialDatum::zero();
    } else if (kind == "eigenmode") {
        if (file) {
            r.fail(sec, "initial.file", "not a parameter of an eigenmode datum");
        }
        c.initial = InitialDatum::eigenmode(static_cast<int>(kx.value_or(1)), static_cast<int>(ky.value_or(1)),
                                            amp.value_or(1.0));
    } else if (kind == "file") {
        if (kx || ky || amp) {
            r.fail(sec, "initial", "a file datum takes only initial.file");
        }
        if (!file) {
            r.fail(sec, "initial", "file datum needs initial.file");
        }
        c.initial = InitialDatum::from_file(c.base_dir / *file);
    } else {
        r.fail(sec, "initial", "expected zero, eigenmode or file, got '" + kind + "'");
    }
}

ScalarProfile build_profile(const ProfileSpec& s, const std::filesystem::path& base)
{
    if (s.kind == "power") {
        return ScalarProfile::power(s.p, s.scale);
    }
    if (s.kind == "abs") {
        return ScalarProfile::abs(s.scale);
    }
    if (s.kind == "huberized") {
        return ScalarProfile::huberized(s.threshold, s.scale);
    }
    if (s.kind == "exp_cosh") {
        return ScalarProfile::exp_cosh(s.scale);
    }
    if (s.kind == "piecewise") {
        return ScalarProfile::piecewise(s.right_slope, s.left_slope);
    }
    return ScalarProfile::load_sampled(base / s.file);
}

} // namespace

RunConfig parse_config(const std::string& text, const std::string& origin, const std::filesystem::path& base_dir)
{
    Reader r(origin, tokenize(text, origin));
    RunConfig c;
    c.origin = origin;
    c.base_dir = base_dir;
    c.checksum = fnv1a(text);

    const auto positive_int = [&](const std::string& s, const std::string& key, long long v) {
        if (v < 1 || v > 1'000'000) {
            r.fail(s, key, "expected a positive integer");
        }
        return static_cast<int>(v);
    };

    c.nodes_x = positive_int("grid", "nodes", r.to_integer("grid", "nodes", r.required_text("grid", "nodes")));
    if (const auto ny = r.integer("grid", "nodes_y")) {
        c.nodes_y = positive_int("grid", "nodes_y", *ny);
    }
    c.length_x = r.number("grid", "length").value_or(1.0);
    if (const auto ly = r.number("grid", "length_y")) {
        if (!c.nodes_y) {
            r.fail("grid", "length_y", "needs nodes_y");
        }
        c.length_y = *ly;
    }

    c.gamma = read_profile(r, "gamma", true);
    c.beta = read_profile(r, "beta", false);
    c.symmetry_bound = r.number("potentials", "symmetry_bound").value_or(kDefaultSymmetryBound);

    read_noise(r, c.noise);

    const std::string sv = "solver";
    if (const auto s = r.text(sv, "scheme")) {
        try {
            c.scheme = parse_scheme(*s);
        } catch (const Error& e) {
            r.fail(sv, "scheme", e.what());
        }
    }
    c.lambda_yosida = r.required_number(sv, "lambda_yosida");
    c.lambda_visc = r.number(sv, "lambda_visc");
    c.dt = r.required_number(sv, "dt");
    c.horizon = r.required_number(sv, "horizon");
    c.inner_tol = r.number(sv, "inner_tol").value_or(c.inner_tol);
    if (const auto it = r.integer(sv, "inner_max_iter")) {
        c.inner_max_iter = positive_int(sv, "inner_max_iter", *it);
    }
    c.check_graph = r.boolean(sv, "check_graph").value_or(true);
    c.seed = r.unsigned_integer(sv, "seed").value_or(0);
    read_initial(r, c);

    const std::string vf = "verify";
    if (r.has(vf, "select")) {
        c.verify.select = r.list(vf, "select");
    }
    if (const auto p = r.integer(vf, "paths")) {
        c.verify.paths = positive_int(vf, "paths", *p);
        if (c.verify.paths < 2) {
            r.fail(vf, "paths", "needs at least 2 paths for a standard error");
        }
    }
    c.verify.seed = r.unsigned_integer(vf, "seed").value_or(c.verify.seed);
    if (const auto h = r.integer(vf, "hs_samples")) {
        c.verify.hs_samples = positive_int(vf, "hs_samples", *h);
    }
    c.verify.probe_radius = r.number(vf, "probe_radius").value_or(c.verify.probe_radius);

    if (const auto d = r.text("output", "dir")) {
        c.output_dir = *d;
    }

    r.reject_unknown();

    (void)c.build_solver_config();
    return c;
}

DirichletGrid RunConfig::grid() const
{
    return nodes_y ? DirichletGrid::rectangle(length_x, length_y, nodes_x, *nodes_y)
                   : DirichletGrid::interval(length_x, nodes_x);
}

SolverConfig RunConfig::build_solver_config() const
{
    const auto at = [&](int line, const std::string& what, const auto& make) {
        try {
            return make();
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(origin, line, what + ": " + e.what());
        }
    };
    const DirichletGrid g = at(0, "[grid]", [&] { return grid(); });
    SolverConfig cfg(g);
    if (gamma.kind != "none") {
        cfg.gamma = at(gamma.line, "gamma", [&] {
            const ScalarProfile p = build_profile(gamma, base_dir);
            std::string structure = gamma.structure;
            if (structure.empty()) {
                structure = g.dimension() == 1 ? "scalar" : "separable";
            }
            if (structure == "scalar") {
                return Potential::scalar(p, symmetry_bound);
            }
            if (structure == "radial") {
                return Potential::radial(g.dimension(), p, symmetry_bound);
            }
            return Potential::separable(std::vector<ScalarProfile>(static_cast<std::size_t>(g.dimension()), p),
                                        symmetry_bound);
        });
    }
    if (beta.kind != "none") {
        cfg.beta = at(beta.line, "beta",
                      [&] { return Potential::scalar(build_profile(beta, base_dir), symmetry_bound); });
    }
    if (noise.present) {
        cfg.noise = at(noise.line, "[noise]", [&] {
            std::vector<double> amps = noise.amplitudes;
            if (amps.empty()) {
                amps = NoiseModel::power_law(noise.modes, noise.amplitude_c, noise.amplitude_q);
            }
            Gain gain = Gain::constant(noise.gain_level);
            if (noise.gain == "clipped_linear") {
                gain = Gain::clipped_linear(noise.gain_offset, noise.gain_slope, noise.gain_cap);
            } else if (noise.gain == "bounded_smooth") {
                gain = Gain::bounded_smooth(noise.gain_offset, noise.gain_amplitude);
            }
            NoiseModel m(std::move(amps), gain, noise.declared_bound);
            if (noise.smoothing_delta) {
                m = smooth_noise(m, *noise.smoothing_delta, noise.smoothing_m, g);
            }
            return m;
        });
    }
    cfg.lambda_yosida = lambda_yosida;
    cfg.lambda_visc = lambda_visc;
    cfg.dt = dt;
    cfg.horizon = horizon;
    cfg.scheme = scheme;
    cfg.inner_tol = inner_tol;
    cfg.inner_max_iter = inner_max_iter;
    cfg.initial = initial;
    at(0, "[solver]", [&] {
        cfg.validate();
        return 0;
    });
    return cfg;
}

RunConfig load_config(const std::filesystem::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw ConfigError(file.string(), 0, "cannot read config file");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), file.string(), file.parent_path().empty() ? "." : file.parent_path());
}

} // namespace dnspde
