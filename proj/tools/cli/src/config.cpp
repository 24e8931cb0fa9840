#include "dqpt_cli/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <regex>
#include <set>
#include <sstream>

#include "dqpt/errors.hpp"

namespace dqpt::cli {
namespace {

void check_keys(const YAML::Node& node, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!node.IsMap()) throw ConfigError("'" + where + "' must be a mapping");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!ok.contains(key)) throw ConfigError("unknown key '" + key + "' in '" + where + "'");
    }
}

double real_of(const YAML::Node& node, const std::string& where) {
    if (!node.IsScalar()) throw ConfigError("'" + where + "' must be a number");
    try {
        return parse_extended_real(node.Scalar());
    } catch (const ConfigError&) {
        throw ConfigError("'" + where + "' is not a number: " + node.Scalar());
    }
}

double real_or(const YAML::Node& parent, const char* key, double fallback, const std::string& where) {
    const auto n = parent[key];
    return n ? real_of(n, where + "." + key) : fallback;
}

std::size_t count_of(const YAML::Node& node, const std::string& where) {
    const double v = real_of(node, where);
    if (!(v >= 0.0) || v != std::floor(v) || v > 1e15) throw ConfigError("'" + where + "' must be a nonnegative integer");
    return static_cast<std::size_t>(v);
}

std::size_t count_or(const YAML::Node& parent, const char* key, std::size_t fallback, const std::string& where) {
    const auto n = parent[key];
    return n ? count_of(n, where + "." + key) : fallback;
}

bool bool_or(const YAML::Node& parent, const char* key, bool fallback, const std::string& where) {
    const auto n = parent[key];
    if (!n) return fallback;
    try {
        return n.as<bool>();
    } catch (const YAML::Exception&) {
        throw ConfigError("'" + where + "." + key + "' must be true or false");
    }
}

AxisConfig axis_of(const YAML::Node& node, const std::string& where, AxisConfig fallback) {
    if (!node) return fallback;
    check_keys(node, where, {"min", "max", "n"});
    AxisConfig a;
    a.min = real_or(node, "min", fallback.min, where);
    a.max = real_or(node, "max", fallback.max, where);
    a.count = count_or(node, "n", fallback.count, where);
    return a;
}

StageConfig stage_of(const YAML::Node& node, const std::string& where, const std::filesystem::path& dir) {
    if (!node) throw ConfigError("missing stage '" + where + "'");
    if (!node.IsMap() || !node["kind"]) throw ConfigError("stage '" + where + "' needs a 'kind'");
    StageConfig s;
    const auto kind = node["kind"].as<std::string>();
    if (kind == "ssh") {
        check_keys(node, where, {"kind", "j1", "j2"});
        if (!node["j1"] || !node["j2"]) throw ConfigError("SSH stage '" + where + "' needs j1 and j2");
        s.kind = DispersionKind::Ssh;
        s.ssh = {real_of(node["j1"], where + ".j1"), real_of(node["j2"], where + ".j2")};
    } else if (kind == "kitaev") {
        check_keys(node, where, {"kind", "M", "m", "c"});
        if (!node["m"] || !node["c"]) throw ConfigError("Kitaev stage '" + where + "' needs m and c");
        s.kind = DispersionKind::Kitaev;
        s.kitaev = {real_or(node, "M", 1.0, where), real_of(node["m"], where + ".m"), real_of(node["c"], where + ".c")};
    } else if (kind == "tabulated") {
        check_keys(node, where, {"kind", "file"});
        if (!node["file"]) throw ConfigError("tabulated stage '" + where + "' needs a file");
        s.kind = DispersionKind::Tabulated;
        s.table = dir / node["file"].as<std::string>();
    } else {
        throw ConfigError("unknown model kind '" + kind + "' in '" + where + "'");
    }
    return s;
}

RunConfig parse_root(const YAML::Node& root, const std::filesystem::path& dir) {
    RunConfig c;
    c.source_dir = dir;
    if (!root || root.IsNull()) return c;
    check_keys(root, "config", {"model", "temperature", "tau", "grid", "time", "output", "critical", "kinks",
                                "diagram", "deviation", "oracle", "batch"});

    if (const auto m = root["model"]) {
        check_keys(m, "model", {"h0", "h1", "h2"});
        c.stages = std::array<StageConfig, 3>{stage_of(m["h0"], "model.h0", dir), stage_of(m["h1"], "model.h1", dir),
                                              stage_of(m["h2"], "model.h2", dir)};
    }
    if (const auto t = root["temperature"]) {
        check_keys(t, "temperature", {"T", "beta"});
        if (t["T"] && t["beta"]) throw ConfigError("give either temperature.T or temperature.beta, not both");
        if (t["T"]) {
            const double T = real_of(t["T"], "temperature.T");
            c.beta = T == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / T;
            if (T < 0.0) c.beta = -1.0;  // rejected later as an invalid parameter
        } else if (t["beta"]) {
            c.beta = real_of(t["beta"], "temperature.beta");
        } else {
            throw ConfigError("temperature needs T or beta");
        }
    }
    if (const auto t = root["tau"]) {
        if (!t.IsScalar()) throw ConfigError("'tau' must be a number or tau_star:n=<int>,kc=<index>");
        c.tau = parse_tau_spec(t.Scalar());
    }
    if (const auto g = root["grid"]) {
        check_keys(g, "grid", {"N", "pin_critical"});
        c.n_modes = count_or(g, "N", c.n_modes, "grid");
        c.pin_critical = bool_or(g, "pin_critical", c.pin_critical, "grid");
    }
    if (const auto t = root["time"]) {
        check_keys(t, "time", {"t_max", "n_steps"});
        c.t_max = real_or(t, "t_max", c.t_max, "time");
        c.n_steps = count_or(t, "n_steps", c.n_steps, "time");
    }
    if (const auto o = root["output"]) {
        if (!o.IsScalar()) throw ConfigError("'output' must be a directory path");
        c.output_dir = dir / o.Scalar();
    }
    if (const auto cr = root["critical"]) {
        check_keys(cr, "critical", {"n_max", "tol", "tau_match_tol", "tau_near_tol", "n_scan"});
        c.critical.n_max = static_cast<int>(count_or(cr, "n_max", static_cast<std::size_t>(c.critical.n_max), "critical"));
        c.critical.tol = real_or(cr, "tol", c.critical.tol, "critical");
        c.critical.tau_match_tol = real_or(cr, "tau_match_tol", c.critical.tau_match_tol, "critical");
        c.critical.tau_near_tol = real_or(cr, "tau_near_tol", c.critical.tau_near_tol, "critical");
        c.critical.n_scan = count_or(cr, "n_scan", c.critical.n_scan, "critical");
    }
    if (const auto k = root["kinks"]) {
        check_keys(k, "kinks", {"threshold", "window"});
        c.kinks.threshold = real_or(k, "threshold", c.kinks.threshold, "kinks");
        c.kinks.window = count_or(k, "window", c.kinks.window, "kinks");
    }
    if (const auto d = root["diagram"]) {
        check_keys(d, "diagram", {"model", "r1", "r2", "m1", "c1", "c2", "m2"});
        DiagramConfig dc;
        if (!d["model"]) throw ConfigError("diagram needs a model (ssh or kitaev)");
        dc.model = d["model"].as<std::string>();
        if (dc.model != "ssh" && dc.model != "kitaev") throw ConfigError("diagram.model must be ssh or kitaev");
        dc.r1 = axis_of(d["r1"], "diagram.r1", dc.r1);
        dc.r2 = axis_of(d["r2"], "diagram.r2", dc.r2);
        dc.m1 = real_or(d, "m1", dc.m1, "diagram");
        dc.c1 = real_or(d, "c1", dc.c1, "diagram");
        dc.c2 = axis_of(d["c2"], "diagram.c2", dc.c2);
        dc.m2 = axis_of(d["m2"], "diagram.m2", dc.m2);
        c.diagram = dc;
    }
    if (const auto d = root["deviation"]) {
        check_keys(d, "deviation", {"kc", "n", "epsilons", "eps_min", "eps_max", "count", "mirror"});
        auto& dv = c.deviation;
        dv.kc = count_or(d, "kc", dv.kc, "deviation");
        dv.n = static_cast<int>(count_or(d, "n", static_cast<std::size_t>(dv.n), "deviation"));
        if (const auto e = d["epsilons"]) {
            if (!e.IsSequence()) throw ConfigError("deviation.epsilons must be a list");
            for (std::size_t i = 0; i < e.size(); ++i) dv.epsilons.push_back(real_of(e[i], "deviation.epsilons"));
        }
        dv.eps_min = real_or(d, "eps_min", dv.eps_min, "deviation");
        dv.eps_max = real_or(d, "eps_max", dv.eps_max, "deviation");
        dv.count = count_or(d, "count", dv.count, "deviation");
        dv.mirror = bool_or(d, "mirror", dv.mirror, "deviation");
    }
    if (const auto o = root["oracle"]) {
        check_keys(o, "oracle", {"draws", "seed"});
        c.oracle.draws = count_or(o, "draws", c.oracle.draws, "oracle");
        c.oracle.seed = count_or(o, "seed", c.oracle.seed, "oracle");
    }
    if (const auto b = root["batch"]) {
        if (!b.IsSequence()) throw ConfigError("'batch' must be a list of override mappings");
        for (std::size_t i = 0; i < b.size(); ++i) {
            if (!b[i].IsMap()) throw ConfigError("each batch entry must be a mapping");
            ScheduleOverride ov;
            for (const auto& kv : b[i]) {
                const auto key = kv.first.as<std::string>();
                ov.values.emplace_back(key, real_of(kv.second, "batch." + key));
            }
            c.batch.push_back(std::move(ov));
        }
    }
    return c;
}

}  // namespace

std::string TauSpec::describe() const {
    if (literal) {
        std::ostringstream os;
        os.precision(17);
        os << *literal;
        return os.str();
    }
    return "tau_star:n=" + std::to_string(n) + ",kc=" + std::to_string(kc);
}

TauSpec parse_tau_spec(const std::string& text) {
    static const std::regex symbolic(R"(^\s*tau_star\s*:\s*n\s*=\s*(\d+)\s*,\s*kc\s*=\s*(\d+)\s*$)");
    std::smatch m;
    TauSpec spec;
    if (std::regex_match(text, m, symbolic)) {
        spec.n = std::stoi(m[1].str());
        spec.kc = static_cast<std::size_t>(std::stoul(m[2].str()));
        return spec;
    }
    try {
        spec.literal = parse_extended_real(text);
    } catch (const ConfigError&) {
        throw ConfigError("'tau' must be a number or tau_star:n=<int>,kc=<index>, got '" + text + "'");
    }
    return spec;
}

double parse_extended_real(const std::string& text) {
    std::string s = text;
    s.erase(0, s.find_first_not_of(" \t"));
    s.erase(s.find_last_not_of(" \t") + 1);
    std::string lower = s;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (lower == "inf" || lower == "+inf" || lower == ".inf" || lower == "+.inf" || lower == "infinity") {
        return std::numeric_limits<double>::infinity();
    }
    if (lower == "-inf" || lower == "-.inf") return -std::numeric_limits<double>::infinity();
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError("not a number: '" + text + "'");
    }
    if (pos != s.size() || std::isnan(v)) throw ConfigError("not a number: '" + text + "'");
    return v;
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& source_dir) {
    try {
        return parse_root(YAML::Load(text), source_dir);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
}

RunConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read config file " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), file.parent_path().empty() ? std::filesystem::path(".") : file.parent_path());
}

TabulatedDispersion load_table(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read dispersion table " + file.string());
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("dispersion table is empty: " + file.string());
    std::vector<double> momenta;
    std::vector<BlochSample> samples;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::stringstream ls(line);
        std::string cell;
        std::vector<double> v;
        while (std::getline(ls, cell, ',')) v.push_back(parse_extended_real(cell));
        if (v.size() != 6) {
            throw ConfigError(file.string() + ":" + std::to_string(lineno) + ": expected k,e,delta,nx,ny,nz");
        }
        momenta.push_back(v[0]);
        samples.push_back(BlochSample::from_gap(v[1], v[2], {v[3], v[4], v[5]}));
    }
    return TabulatedDispersion(std::move(momenta), std::move(samples));
}

BlochDispersion build_dispersion(const StageConfig& stage) {
    switch (stage.kind) {
        case DispersionKind::Ssh: return BlochDispersion::ssh(stage.ssh);
        case DispersionKind::Kitaev: return BlochDispersion::kitaev(stage.kitaev);
        case DispersionKind::Tabulated: return BlochDispersion::tabulated(load_table(stage.table));
    }
    throw ConfigError("unknown model kind");
}

Temperature build_temperature(const RunConfig& config) {
    if (!config.beta) throw ConfigError("config needs a 'temperature' section");
    return Temperature::from_beta(*config.beta);
}

ResolvedSchedule build_schedule(const RunConfig& config) {
    if (!config.stages) throw ConfigError("config needs a 'model' section with h0, h1, h2");
    if (!config.tau) throw ConfigError("config needs 'tau'");
    auto h0 = build_dispersion((*config.stages)[0]);
    auto h1 = build_dispersion((*config.stages)[1]);
    auto h2 = build_dispersion((*config.stages)[2]);
    const TauSpec& spec = *config.tau;
    if (!spec.symbolic()) return {QuenchSchedule(h0, h1, h2, *spec.literal), false};

    // critical momenta do not depend on tau; resolve with a placeholder
    const QuenchSchedule probe(h0, h1, h2, 1.0);
    const auto report = check_metamorphic_conditions(probe, build_temperature(config), config.critical);
    if (spec.kc >= report.momenta.size()) {
        throw InvalidParameter("tau_star: critical momentum index " + std::to_string(spec.kc) + " out of range (" +
                               std::to_string(report.momenta.size()) + " found)");
    }
    const double tau = metamorphic_tau(report.momenta[spec.kc].omega1, spec.n);
    return {QuenchSchedule(std::move(h0), std::move(h1), std::move(h2), tau), true};
}

}  // namespace dqpt::cli
