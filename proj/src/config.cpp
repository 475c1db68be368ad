#include "ksgd/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace ksgd {

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

bool parse_double(std::string_view s, double& out)
{
    s = std::string_view(s).substr(s.find_first_not_of(' ') == std::string_view::npos ? s.size()
                                                                                       : s.find_first_not_of(' '));
    while (!s.empty() && s.back() == ' ')
        s.remove_suffix(1);
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    if (s.empty())
        return false;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

const std::regex& axis_pattern()
{
    static const std::regex re(R"(sweep\.axis\.(\d+)\.(key|values))");
    return re;
}

bool is_known_key(const std::string& key)
{
    static const std::set<std::string> known = [] {
        std::set<std::string> s;
        for (const auto& doc : config_keys())
            if (doc.key.find('<') == std::string::npos)
                s.insert(doc.key);
        return s;
    }();
    return known.count(key) != 0 || std::regex_match(key, axis_pattern());
}

InitialKind initial_kind(const Config& c, const std::string& prefix, double side, double default_k)
{
    const std::string kind = c.text(prefix, "constant");
    const std::string p = prefix + ".";
    std::vector<std::string> allowed;
    InitialKind out;
    if (kind == "constant") {
        out = ConstantInit{c.number(p + "k", default_k)};
        allowed = {"k"};
    } else if (kind == "bump") {
        out = GaussianBumpInit{c.number(p + "center_x", side / 2), c.number(p + "center_y", side / 2),
                               c.number(p + "width", 0.1 * side), c.number(p + "amplitude", 1.0),
                               c.number(p + "floor", 0.0)};
        allowed = {"center_x", "center_y", "width", "amplitude", "floor"};
    } else if (kind == "checkerboard") {
        out = CheckerboardInit{c.number(p + "amplitude", 1.0), c.number(p + "floor", 0.0)};
        allowed = {"amplitude", "floor"};
    } else if (kind == "noise") {
        const double seed = c.number(p + "seed", 1.0);
        if (seed < 0.0 || seed != static_cast<double>(static_cast<std::uint64_t>(seed)))
            throw ConfigError(c.line_of(p + "seed"), p + "seed must be a nonnegative integer");
        out = SeededNoiseInit{static_cast<std::uint64_t>(seed), c.number(p + "floor", 0.0),
                              c.number(p + "amplitude", 1.0)};
        allowed = {"seed", "floor", "amplitude"};
    } else {
        throw ConfigError(c.line_of(prefix),
                          prefix + " must be one of constant, bump, checkerboard, noise (got '" + kind + "')");
    }
    for (const auto& [key, entry] : c.entries()) {
        if (key.rfind(p, 0) != 0)
            continue;
        const std::string leaf = key.substr(p.size());
        if (std::find(allowed.begin(), allowed.end(), leaf) == allowed.end())
            throw ConfigError(entry.line, "key '" + key + "' does not apply to " + prefix + " kind " + kind);
    }
    return out;
}

void check_source_keys(const Config& c, const std::string& kind_key, const std::string& kind,
                       const std::vector<std::string>& keys, bool active)
{
    if (active)
        return;
    for (const auto& k : keys)
        if (c.has(k))
            throw ConfigError(c.line_of(k), "key '" + k + "' does not apply to " + kind_key + " = " + kind);
}

}  // namespace

ConfigError::ConfigError(int line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line)
{
}

const std::vector<ConfigKeyDoc>& config_keys()
{
    static const std::vector<ConfigKeyDoc> keys = {
        {"grid.dim", "2", "spatial dimension (1 or 2)"},
        {"grid.n", "", "cells per axis (required, >= 3)"},
        {"grid.side", "1.0", "side length of the square domain"},
        {"model.chi", "1.0", "taxis sensitivity"},
        {"model.tau", "", "0 = parabolic-elliptic, 1 = fully parabolic (required)"},
        {"source.f", "\"logistic\"", "reaction kind: logistic | none"},
        {"source.a", "", "logistic growth rate (required for logistic)"},
        {"source.b", "", "logistic death rate (required for logistic)"},
        {"source.alpha", "", "growth exponent (required for logistic)"},
        {"source.beta", "", "death exponent (required for logistic)"},
        {"source.g", "\"gradpower\"", "damping kind: gradpower | none"},
        {"source.c", "", "damping strength (required for gradpower)"},
        {"source.gamma", "", "damping exponent (required for gradpower)"},
        {"estimates.c2", "1.0", "free constant C2 in f(s) <= C1 - C2 s"},
        {"solver.dt_init", "1e-4", "first time step"},
        {"solver.dt_min", "1e-12", "time step floor"},
        {"solver.dt_max", "1e-2", "time step ceiling"},
        {"solver.cfl_safety", "0.5", "safety factor on the step constraints"},
        {"solver.t_end", "1.0", "final time"},
        {"solver.linear_tol", "1e-10", "relative residual target of the linear solves"},
        {"solver.linear_max_iter", "500", "iteration cap of the linear solves"},
        {"solver.blowup_threshold", "1e8", "L-infinity level treated as blow-up"},
        {"solver.sink_fraction_cap", "0.5", "max fraction of a cell the damping may remove per step"},
        {"solver.output_every", "10", "record diagnostics every this many steps"},
        {"solver.preconditioner", "\"cosine\"", "cosine | jacobi | none"},
        {"scenario.name", "\"scenario\"", "label used in outputs"},
        {"scenario.u0", "\"constant\"", "initial density kind: constant | bump | checkerboard | noise"},
        {"scenario.u0.k", "1.0", "constant value"},
        {"scenario.u0.center_x", "side/2", "bump center"},
        {"scenario.u0.center_y", "side/2", "bump center"},
        {"scenario.u0.width", "0.1*side", "bump width"},
        {"scenario.u0.amplitude", "1.0", "bump / checkerboard / noise amplitude"},
        {"scenario.u0.floor", "0.0", "constant offset added everywhere"},
        {"scenario.u0.seed", "1", "noise seed (overridden by KSGD_SEED)"},
        {"scenario.v0", "\"constant\"", "initial signal kind (tau = 1 only), same menu as u0"},
        {"scenario.v0.k", "0.0", "constant value"},
        {"scenario.v0.center_x", "side/2", "bump center"},
        {"scenario.v0.center_y", "side/2", "bump center"},
        {"scenario.v0.width", "0.1*side", "bump width"},
        {"scenario.v0.amplitude", "1.0", "amplitude"},
        {"scenario.v0.floor", "0.0", "offset"},
        {"scenario.v0.seed", "1", "noise seed"},
        {"diagnostics.p", "2.0", "exponent of the energy monitors"},
        {"diagnostics.p_list", "1, 2, 4", "exponents of the recorded L^p norms"},
        {"diagnostics.msr_q", "p+1", "exponent of the weighted maximal-regularity integrals"},
        {"diagnostics.mass_headroom", "0.02", "relative headroom of the mass-bound monitor"},
        {"sweep.max_runs", "4096", "cap on the number of sweep combinations"},
        {"sweep.axis.<i>.key", "", "parameter varied by sweep axis i"},
        {"sweep.axis.<i>.values", "", "comma-separated values of sweep axis i"},
    };
    return keys;
}

Config Config::parse(std::string_view text)
{
    Config cfg;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        // strip comments outside quotes
        bool in_quote = false;
        std::size_t cut = raw.size();
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] == '"')
                in_quote = !in_quote;
            else if (raw[i] == '#' && !in_quote) {
                cut = i;
                break;
            }
        }
        const std::string line = trim(std::string_view(raw).substr(0, cut));
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(line_no, "expected 'key = value', got '" + line + "'");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty())
            throw ConfigError(line_no, "missing key before '='");
        if (!is_known_key(key))
            throw ConfigError(line_no, "unknown key '" + key + "'");
        if (cfg.entries_.count(key))
            throw ConfigError(line_no, "duplicate key '" + key + "' (first set on line "
                                           + std::to_string(cfg.entries_[key].line) + ")");
        bool quoted = false;
        if (!value.empty() && value.front() == '"') {
            if (value.size() < 2 || value.back() != '"')
                throw ConfigError(line_no, "unterminated string for key '" + key + "'");
            value = value.substr(1, value.size() - 2);
            quoted = true;
        }
        if (value.empty() && !quoted)
            throw ConfigError(line_no, "missing value for key '" + key + "'");
        cfg.entries_[key] = {value, quoted, line_no};
    }
    return cfg;
}

Config Config::load(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError(0, "cannot read configuration file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

int Config::line_of(const std::string& key) const
{
    const auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
}

double Config::number(const std::string& key, std::optional<double> fallback) const
{
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        if (!fallback)
            throw ConfigError(0, "missing required key '" + key + "'");
        return *fallback;
    }
    double v = 0.0;
    if (it->second.quoted || !parse_double(it->second.value, v))
        throw ConfigError(it->second.line, "key '" + key + "' expects a number, got '" + it->second.value + "'");
    return v;
}

int Config::integer(const std::string& key, std::optional<int> fallback) const
{
    const double v = number(key, fallback ? std::optional<double>(*fallback) : std::nullopt);
    if (v != static_cast<double>(static_cast<long long>(v)) || v < -2e9 || v > 2e9)
        throw ConfigError(line_of(key), "key '" + key + "' expects an integer");
    return static_cast<int>(v);
}

std::string Config::text(const std::string& key, std::optional<std::string> fallback) const
{
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        if (!fallback)
            throw ConfigError(0, "missing required key '" + key + "'");
        return *fallback;
    }
    return it->second.value;
}

std::vector<double> Config::list(const std::string& key, std::optional<std::vector<double>> fallback) const
{
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        if (!fallback)
            throw ConfigError(0, "missing required key '" + key + "'");
        return *fallback;
    }
    std::string s = it->second.value;
    if (!s.empty() && s.front() == '[' && s.back() == ']')
        s = s.substr(1, s.size() - 2);
    std::vector<double> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        double v = 0.0;
        if (!parse_double(trim(item), v))
            throw ConfigError(it->second.line, "key '" + key + "' expects a comma-separated list of numbers");
        out.push_back(v);
    }
    if (out.empty())
        throw ConfigError(it->second.line, "key '" + key + "' has an empty list");
    return out;
}

Scenario build_scenario(const Config& c)
{
    Scenario s;
    try {
        s.grid = GridSpec(c.integer("grid.dim", 2), c.integer("grid.n"), c.number("grid.side", 1.0));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(c.line_of("grid.n"), e.what());
    }
    s.name = c.text("scenario.name", "scenario");
    s.params.chi = c.number("model.chi", 1.0);
    s.params.tau = c.integer("model.tau");
    if (s.params.tau != 0 && s.params.tau != 1)
        throw ConfigError(c.line_of("model.tau"), "model.tau must be 0 or 1");

    const std::vector<std::string> logistic_keys{"source.a", "source.b", "source.alpha", "source.beta"};
    const std::string f_kind = c.text("source.f", "logistic");
    if (f_kind == "logistic") {
        s.params.source.f = PolynomialLogistic{c.number("source.a"), c.number("source.b"), c.number("source.alpha"),
                                               c.number("source.beta")};
    } else if (f_kind == "none") {
        s.params.source.f = CustomReaction{"none", [](double) { return 0.0; }};
    } else {
        throw ConfigError(c.line_of("source.f"), "source.f must be logistic or none (got '" + f_kind + "')");
    }
    check_source_keys(c, "source.f", f_kind, logistic_keys, f_kind == "logistic");

    const std::string g_kind = c.text("source.g", "gradpower");
    if (g_kind == "gradpower") {
        s.params.source.g = GradientPower{c.number("source.c"), c.number("source.gamma")};
    } else if (g_kind == "none") {
        s.params.source.g = CustomDamping{"none", [](std::span<const double>) { return 0.0; }};
    } else {
        throw ConfigError(c.line_of("source.g"), "source.g must be gradpower or none (got '" + g_kind + "')");
    }
    check_source_keys(c, "source.g", g_kind, {"source.c", "source.gamma"}, g_kind == "gradpower");

    s.C2 = c.number("estimates.c2", 1.0);
    if (!(s.C2 > 0.0))
        throw ConfigError(c.line_of("estimates.c2"), "estimates.c2 must be positive");

    SolverConfig& cfg = s.cfg;
    cfg.dt_init = c.number("solver.dt_init", cfg.dt_init);
    cfg.dt_min = c.number("solver.dt_min", cfg.dt_min);
    cfg.dt_max = c.number("solver.dt_max", cfg.dt_max);
    cfg.cfl_safety = c.number("solver.cfl_safety", cfg.cfl_safety);
    cfg.t_end = c.number("solver.t_end", cfg.t_end);
    cfg.linear_tol = c.number("solver.linear_tol", cfg.linear_tol);
    cfg.linear_max_iter = c.integer("solver.linear_max_iter", cfg.linear_max_iter);
    cfg.blowup_threshold = c.number("solver.blowup_threshold", cfg.blowup_threshold);
    cfg.sink_fraction_cap = c.number("solver.sink_fraction_cap", cfg.sink_fraction_cap);
    cfg.output_every = c.integer("solver.output_every", cfg.output_every);
    const std::string pre = c.text("solver.preconditioner", "cosine");
    if (pre == "cosine")
        cfg.preconditioner = Preconditioner::Cosine;
    else if (pre == "jacobi")
        cfg.preconditioner = Preconditioner::Jacobi;
    else if (pre == "none")
        cfg.preconditioner = Preconditioner::None;
    else
        throw ConfigError(c.line_of("solver.preconditioner"), "solver.preconditioner must be cosine, jacobi or none");
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(0, std::string("solver settings: ") + e.what());
    }

    s.u0 = initial_kind(c, "scenario.u0", s.grid.side(), 1.0);
    s.v0 = initial_kind(c, "scenario.v0", s.grid.side(), 0.0);

    s.monitors.p = c.number("diagnostics.p", 2.0);
    s.monitors.p_list = c.list("diagnostics.p_list", std::vector<double>{1.0, 2.0, 4.0});
    for (double p : s.monitors.p_list)
        if (!(p >= 1.0))
            throw ConfigError(c.line_of("diagnostics.p_list"), "diagnostics.p_list entries must be >= 1");
    if (!(s.monitors.p >= 1.0))
        throw ConfigError(c.line_of("diagnostics.p"), "diagnostics.p must be >= 1");
    if (c.has("diagnostics.msr_q"))
        s.monitors.msr_q = c.number("diagnostics.msr_q");
    mass_headroom(c);
    return s;
}

double mass_headroom(const Config& c)
{
    const double h = c.number("diagnostics.mass_headroom", 0.02);
    if (!(h >= 0.0))
        throw ConfigError(c.line_of("diagnostics.mass_headroom"), "diagnostics.mass_headroom must be >= 0");
    return h;
}

SweepSpec build_sweep(const Config& c, int max_parallel)
{
    SweepSpec spec;
    spec.base = build_scenario(c);
    spec.max_parallel = max_parallel;
    const double cap = c.number("sweep.max_runs", 4096.0);
    if (!(cap >= 1.0))
        throw ConfigError(c.line_of("sweep.max_runs"), "sweep.max_runs must be >= 1");
    spec.max_runs = static_cast<std::size_t>(cap);

    std::map<int, std::pair<std::optional<std::string>, std::optional<std::vector<double>>>> axes;
    for (const auto& [key, entry] : c.entries()) {
        std::smatch m;
        if (!std::regex_match(key, m, axis_pattern()))
            continue;
        auto& axis = axes[std::stoi(m[1].str())];
        if (m[2] == "key")
            axis.first = entry.value;
        else
            axis.second = c.list(key);
    }
    for (const auto& [index, axis] : axes) {
        const std::string prefix = "sweep.axis." + std::to_string(index);
        if (!axis.first)
            throw ConfigError(c.line_of(prefix + ".values"), prefix + ".key is missing");
        if (!axis.second)
            throw ConfigError(c.line_of(prefix + ".key"), prefix + ".values is missing");
        Scenario probe = spec.base;
        try {
            apply_parameter(probe, *axis.first, axis.second->front());
        } catch (const std::invalid_argument& e) {
            throw ConfigError(c.line_of(prefix + ".key"), e.what());
        }
        spec.axes.push_back({*axis.first, *axis.second});
    }
    std::size_t total = 1;
    for (const auto& a : spec.axes)
        total *= a.values.size();
    if (total > spec.max_runs)
        throw ConfigError(c.line_of("sweep.max_runs"),
                          "sweep has " + std::to_string(total) + " combinations, above sweep.max_runs");
    return spec;
}

}  // namespace ksgd
