#include "qat/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <unistd.h>

#ifndef QAT_SCENARIO_DIR
#define QAT_SCENARIO_DIR "scenarios"
#endif

namespace qat {

namespace {

const std::vector<std::string> kScenarios{"fig2", "fig3-left", "fig3-right", "convergence", "custom"};
const std::set<std::string> kTopKeys{"scenario", "eta",     "tones",       "window_omega", "n_max",
                                     "n_max_check", "cutoff", "tolerance", "samples",      "seed",
                                     "orders",   "channels", "alpha",      "gate",         "span",
                                     "design",   "eta_sweep", "thresholds", "output_dir",  "fixed"};
const std::set<std::string> kToneKeys{"rabi", "sideband", "beat", "beat_windows", "phi_plus", "phi_minus", "window"};
const std::set<std::string> kChannels{"reference", "reference_carrier", "effective", "qat"};
const std::vector<std::string> kRequiredCustom{"eta", "tones", "gate"};

int line_of(const YAML::Node& n) { return n.Mark().is_null() ? -1 : n.Mark().line + 1; }

template <typename T>
T as(const YAML::Node& n, const std::string& key) {
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError("invalid value for '" + key + "'", line_of(n));
    }
}

void check_keys(const YAML::Node& map, const std::set<std::string>& allowed, const std::string& where) {
    if (!map.IsMap()) throw ConfigError("'" + where + "' must be a mapping", line_of(map));
    for (auto it = map.begin(); it != map.end(); ++it) {
        const std::string key = it->first.as<std::string>();
        if (!allowed.count(key)) {
            throw ConfigError("unknown key '" + key + "' in " + where, line_of(it->first));
        }
    }
}

ToneSpec parse_tone(const YAML::Node& n) {
    check_keys(n, kToneKeys, "tone");
    ToneSpec t;
    if (!n["rabi"]) throw ConfigError("tone requires 'rabi'", line_of(n));
    t.rabi = as<double>(n["rabi"], "rabi");
    if (n["sideband"]) t.sideband = as<int>(n["sideband"], "sideband");
    if (n["beat"] && n["beat_windows"]) {
        throw ConfigError("tone sets both 'beat' and 'beat_windows'", line_of(n));
    }
    if (n["beat"]) {
        t.beat = as<double>(n["beat"], "beat");
    } else if (n["beat_windows"]) {
        t.beat_windows = as<int>(n["beat_windows"], "beat_windows");
    } else {
        throw ConfigError("tone requires 'beat' or 'beat_windows'", line_of(n));
    }
    if (n["phi_plus"]) t.phi_plus = as<double>(n["phi_plus"], "phi_plus");
    if (n["phi_minus"]) t.phi_minus = as<double>(n["phi_minus"], "phi_minus");
    if (n["window"]) {
        const auto w = as<std::string>(n["window"], "window");
        try {
            t.windowed = window_kind_from_string(w) == WindowKind::sin4;
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what(), line_of(n["window"]));
        }
    }
    return t;
}

// Applies every key of `root` onto cfg. `fixed` lists keys a preset locks.
void apply(RunConfig& cfg, const YAML::Node& root, const std::set<std::string>& fixed, bool is_preset,
           const std::string& scenario) {
    check_keys(root, kTopKeys, "config");
    for (auto it = root.begin(); it != root.end(); ++it) {
        const std::string key = it->first.as<std::string>();
        const YAML::Node v = it->second;
        if (key == "scenario") continue;
        if (key == "fixed") {
            if (!is_preset) throw ConfigError("'fixed' is only allowed in preset files", line_of(it->first));
            continue;
        }
        if (!is_preset && fixed.count(key)) {
            throw ConfigError("key '" + key + "' is fixed by preset '" + scenario +
                                  "'; use scenario: custom to change it",
                              line_of(it->first));
        }
        if (!is_preset) cfg.overrides.push_back(key);

        if (key == "eta") {
            cfg.eta = as<double>(v, key);
        } else if (key == "tones") {
            if (!v.IsSequence() || v.size() == 0) throw ConfigError("'tones' must be a non-empty list", line_of(v));
            cfg.tones.clear();
            for (const auto& t : v) cfg.tones.push_back(parse_tone(t));
        } else if (key == "window_omega") {
            cfg.window_omega = as<double>(v, key);
        } else if (key == "n_max") {
            cfg.n_max = as<int>(v, key);
        } else if (key == "n_max_check") {
            cfg.n_max_check = as<int>(v, key);
        } else if (key == "cutoff") {
            cfg.cutoff = as<double>(v, key);
        } else if (key == "tolerance") {
            cfg.tolerance = as<double>(v, key);
        } else if (key == "samples") {
            const long s = as<long>(v, key);
            if (s < 2) throw ConfigError("'samples' must be >= 2", line_of(v));
            cfg.samples = static_cast<std::size_t>(s);
        } else if (key == "seed") {
            cfg.seed = as<std::uint64_t>(v, key);
        } else if (key == "orders") {
            cfg.orders = as<std::vector<int>>(v, key);
        } else if (key == "channels") {
            cfg.channels = as<std::vector<std::string>>(v, key);
            for (const auto& c : cfg.channels) {
                if (!kChannels.count(c)) throw ConfigError("unknown channel '" + c + "'", line_of(v));
            }
        } else if (key == "alpha") {
            check_keys(v, {"re", "im"}, "alpha");
            cfg.alpha = Complex(v["re"] ? as<double>(v["re"], "alpha.re") : 0.0,
                                v["im"] ? as<double>(v["im"], "alpha.im") : 0.0);
        } else if (key == "gate") {
            check_keys(v, {"loops", "window", "time"}, "gate");
            if (v.size() != 1) throw ConfigError("'gate' needs exactly one of loops, window, time", line_of(v));
            if (v["loops"]) {
                cfg.gate = {"loops", as<int>(v["loops"], "gate.loops"), 0.0};
            } else if (v["window"]) {
                if (!as<bool>(v["window"], "gate.window")) throw ConfigError("'gate.window' must be true", line_of(v));
                cfg.gate = {"window", 0, 0.0};
            } else {
                cfg.gate = {"time", 0, as<double>(v["time"], "gate.time")};
            }
        } else if (key == "span") {
            cfg.span = as<double>(v, key);
        } else if (key == "design") {
            try {
                cfg.design = design_kind_from_string(as<std::string>(v, key));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what(), line_of(v));
            }
        } else if (key == "eta_sweep") {
            cfg.eta_sweep = as<std::vector<double>>(v, key);
        } else if (key == "thresholds") {
            check_keys(v, {"gate_fidelity_min", "gate_fidelity_max", "process_fidelity_min", "ufast_max"},
                       "thresholds");
            if (v["gate_fidelity_min"]) cfg.thresholds.gate_fidelity_min = as<double>(v["gate_fidelity_min"], key);
            if (v["gate_fidelity_max"]) cfg.thresholds.gate_fidelity_max = as<double>(v["gate_fidelity_max"], key);
            if (v["process_fidelity_min"])
                cfg.thresholds.process_fidelity_min = as<double>(v["process_fidelity_min"], key);
            if (v["ufast_max"]) cfg.thresholds.ufast_max = as<double>(v["ufast_max"], key);
        } else if (key == "output_dir") {
            cfg.output_dir = as<std::string>(v, key);
        }
    }
}

YAML::Node load_yaml(const std::string& text, const std::string& origin) {
    try {
        return YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(origin + ": " + e.msg, e.mark.line + 1);
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig build(const YAML::Node& root, const std::string& origin) {
    if (!root.IsNull() && !root.IsMap()) throw ConfigError(origin + ": top level must be a mapping", line_of(root));
    std::string scenario = "custom";
    if (root.IsMap() && root["scenario"]) {
        scenario = as<std::string>(root["scenario"], "scenario");
        if (std::find(kScenarios.begin(), kScenarios.end(), scenario) == kScenarios.end()) {
            throw ConfigError("unknown scenario '" + scenario + "'", line_of(root["scenario"]));
        }
    }
    RunConfig cfg;
    std::set<std::string> fixed;
    if (scenario != "custom") {
        const std::string path = preset_directory() + "/" + scenario + ".yaml";
        const YAML::Node preset = load_yaml(read_file(path), path);
        if (preset["fixed"]) {
            for (const auto& k : preset["fixed"]) fixed.insert(k.as<std::string>());
        }
        apply(cfg, preset, {}, true, scenario);
    }
    cfg.scenario = scenario;
    if (root.IsMap()) apply(cfg, root, fixed, false, scenario);
    if (scenario == "custom") {
        std::vector<std::string> missing;
        for (const auto& k : kRequiredCustom) {
            if (!root.IsMap() || !root[k]) missing.push_back(k);
        }
        if (!missing.empty()) {
            std::string list;
            for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
            throw ConfigError(origin + ": custom scenario is missing required fields: " + list,
                              root.IsNull() ? 1 : line_of(root));
        }
    }
    if (cfg.n_max_check <= 0 || (std::find(cfg.overrides.begin(), cfg.overrides.end(), "n_max_check") ==
                                     cfg.overrides.end() &&
                                 std::find(cfg.overrides.begin(), cfg.overrides.end(), "n_max") != cfg.overrides.end())) {
        cfg.n_max_check = cfg.n_max + 16;
    }
    cfg.validate();
    return cfg;
}

void emit_optional(YAML::Emitter& e, const char* key, const std::optional<double>& v) {
    if (v) e << YAML::Key << key << YAML::Value << *v;
}

}  // namespace

ConfigError::ConfigError(const std::string& message, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

int RunConfig::max_order() const { return orders.empty() ? 0 : *std::max_element(orders.begin(), orders.end()); }

bool RunConfig::has_channel(const std::string& name) const {
    return std::find(channels.begin(), channels.end(), name) != channels.end();
}

MsModel RunConfig::model() const { return model(eta, n_max); }

MsModel RunConfig::model(double eta_value, int n_max_value) const {
    return make_model(eta_value, n_max_value, max_order(), tones, window_omega, false);
}

double RunConfig::gate_time() const {
    if (gate.mode == "time") return gate.time;
    if (gate.mode == "window") return 2.0 * std::numbers::pi / window_omega.value();
    const MsModel m = model();
    return 2.0 * std::numbers::pi * gate.loops / m.tones.front().beat();
}

double RunConfig::span_end() const { return span.value_or(gate_time()); }

void RunConfig::validate() const {
    if (!(eta > 0.0 && eta < 1.0)) throw ConfigError("eta must lie in (0, 1)");
    if (tones.empty()) throw ConfigError("at least one tone is required");
    for (const auto& t : tones) {
        if (!(t.rabi > 0.0)) throw ConfigError("tone rabi must be positive");
        if (t.sideband != 1 && t.sideband != 2) throw ConfigError("tone sideband must be 1 or 2");
        if (!t.beat_windows && !(t.beat > 0.0)) throw ConfigError("tone beat must be positive");
        if (t.beat_windows && *t.beat_windows <= 0) throw ConfigError("tone beat_windows must be positive");
        if ((t.windowed || t.beat_windows) && !(window_omega && *window_omega > 0.0)) {
            throw ConfigError("windowed tones need a positive window_omega");
        }
    }
    if (n_max < 1) throw ConfigError("n_max must be >= 1");
    if (n_max_check <= n_max) throw ConfigError("n_max_check must exceed n_max");
    if (!(cutoff > 0.0 && cutoff < 1.0)) throw ConfigError("cutoff must lie in (0, 1)");
    if (!(tolerance >= 1e-13 && tolerance <= 1e-6)) throw ConfigError("tolerance must lie in [1e-13, 1e-6]");
    if (orders.empty()) throw ConfigError("orders must not be empty");
    for (int n : orders) {
        if (n < 1 || n > 4) throw ConfigError("QAT orders must lie in [1, 4]");
    }
    if (!has_channel("reference")) throw ConfigError("the reference channel is required");
    if (gate.mode == "loops" && gate.loops < 1) throw ConfigError("gate.loops must be >= 1");
    if (gate.mode == "window" && !window_omega) throw ConfigError("gate.window requires window_omega");
    if (gate.mode == "time" && !(gate.time > 0.0)) throw ConfigError("gate.time must be positive");
    if (span && !(*span > 0.0)) throw ConfigError("span must be positive");
    for (double e : eta_sweep) {
        if (!(e > 0.0 && e < 1.0)) throw ConfigError("eta_sweep values must lie in (0, 1)");
    }
    try {
        (void)model();
    } catch (const MsConfigurationError& e) {
        throw ConfigError(e.what());
    }
    if (gate_time() > span_end() * (1.0 + 1e-12)) throw ConfigError("span must cover the gate time");
}

std::vector<std::string> preset_names() { return {"fig2", "fig3-left", "fig3-right", "convergence"}; }

std::string preset_directory() {
    if (const char* env = std::getenv("QATSIM_SCENARIOS")) return env;
    std::error_code ec;
    const auto exe = std::filesystem::read_symlink("/proc/self/exe", ec);
    if (!ec) {
        const auto dir = exe.parent_path() / "scenarios";
        if (std::filesystem::exists(dir / "fig2.yaml")) return dir.string();
    }
    return QAT_SCENARIO_DIR;
}

RunConfig validate_config(const std::string& path) { return config_from_string(read_file(path), path); }

RunConfig config_from_string(const std::string& text, const std::string& origin) {
    return build(load_yaml(text, origin), origin);
}

RunConfig load_preset(const std::string& name) { return config_from_string("scenario: " + name + "\n", name); }

std::string config_echo(const RunConfig& c) {
    YAML::Emitter e;
    e.SetDoublePrecision(15);
    e << YAML::BeginMap;
    e << YAML::Key << "scenario" << YAML::Value << c.scenario;
    e << YAML::Key << "eta" << YAML::Value << c.eta;
    e << YAML::Key << "tones" << YAML::Value << YAML::BeginSeq;
    for (const auto& t : c.tones) {
        e << YAML::BeginMap;
        e << YAML::Key << "rabi" << YAML::Value << t.rabi;
        e << YAML::Key << "sideband" << YAML::Value << t.sideband;
        if (t.beat_windows) {
            e << YAML::Key << "beat_windows" << YAML::Value << *t.beat_windows;
        } else {
            e << YAML::Key << "beat" << YAML::Value << t.beat;
        }
        e << YAML::Key << "phi_plus" << YAML::Value << t.phi_plus;
        e << YAML::Key << "phi_minus" << YAML::Value << t.phi_minus;
        e << YAML::Key << "window" << YAML::Value << (t.windowed ? "sin4" : "flat");
        e << YAML::EndMap;
    }
    e << YAML::EndSeq;
    emit_optional(e, "window_omega", c.window_omega);
    e << YAML::Key << "n_max" << YAML::Value << c.n_max;
    e << YAML::Key << "n_max_check" << YAML::Value << c.n_max_check;
    e << YAML::Key << "cutoff" << YAML::Value << c.cutoff;
    e << YAML::Key << "tolerance" << YAML::Value << c.tolerance;
    e << YAML::Key << "samples" << YAML::Value << c.samples;
    e << YAML::Key << "seed" << YAML::Value << c.seed;
    e << YAML::Key << "orders" << YAML::Value << YAML::Flow << c.orders;
    e << YAML::Key << "channels" << YAML::Value << YAML::Flow << c.channels;
    e << YAML::Key << "alpha" << YAML::Value << YAML::BeginMap << YAML::Key << "re" << YAML::Value << c.alpha.real()
      << YAML::Key << "im" << YAML::Value << c.alpha.imag() << YAML::EndMap;
    e << YAML::Key << "gate" << YAML::Value << YAML::BeginMap;
    if (c.gate.mode == "loops") e << YAML::Key << "loops" << YAML::Value << c.gate.loops;
    if (c.gate.mode == "window") e << YAML::Key << "window" << YAML::Value << true;
    if (c.gate.mode == "time") e << YAML::Key << "time" << YAML::Value << c.gate.time;
    e << YAML::EndMap;
    if (c.span) e << YAML::Key << "span" << YAML::Value << *c.span;
    e << YAML::Key << "design" << YAML::Value << to_string(c.design);
    if (!c.eta_sweep.empty()) e << YAML::Key << "eta_sweep" << YAML::Value << YAML::Flow << c.eta_sweep;
    e << YAML::Key << "thresholds" << YAML::Value << YAML::BeginMap;
    emit_optional(e, "gate_fidelity_min", c.thresholds.gate_fidelity_min);
    emit_optional(e, "gate_fidelity_max", c.thresholds.gate_fidelity_max);
    emit_optional(e, "process_fidelity_min", c.thresholds.process_fidelity_min);
    emit_optional(e, "ufast_max", c.thresholds.ufast_max);
    e << YAML::EndMap;
    e << YAML::Key << "output_dir" << YAML::Value << c.output_dir;
    e << YAML::Key << "overrides" << YAML::Value << YAML::Flow << c.overrides;
    e << YAML::EndMap;
    return e.c_str();
}

}  // namespace qat
