#include "qat/config.hpp"
#include "qat/pipeline.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace qat;

namespace {

std::string error_of(const std::string& text) {
    try {
        config_from_string(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kSmallCustom = R"(scenario: custom
eta: 0.1
tones:
  - {rabi: 1.0, sideband: 1, beat: 0.383, phi_plus: 0.7853981633974483}
alpha: {re: 0.0, im: 0.5}
gate: {loops: 1}
n_max: 8
n_max_check: 12
samples: 24
orders: [1, 2]
channels: [reference, qat]
)";

}  // namespace

TEST_CASE("presets") {
    const auto names = preset_names();
    for (const char* n : {"fig2", "fig3-left", "fig3-right", "convergence"}) {
        CHECK(std::find(names.begin(), names.end(), n) != names.end());
    }
    SUBCASE("fig2 carries the figure parameters") {
        const RunConfig c = load_preset("fig2");
        CHECK(c.scenario == "fig2");
        CHECK(c.eta == 0.1);
        REQUIRE(c.tones.size() == 1);
        CHECK(c.tones[0].beat == 0.383);
        CHECK(c.tones[0].rabi == 1.0);
        CHECK(c.tones[0].phi_plus == doctest::Approx(std::numbers::pi / 4));
        CHECK(c.tones[0].phi_minus == 0.0);
        CHECK(c.overrides.empty());
        CHECK(c.gate_time() == doctest::Approx(2.0 * std::numbers::pi * 3 / 0.383));
    }
    SUBCASE("fig3-right is the shaped two-tone gate") {
        const RunConfig c = load_preset("fig3-right");
        REQUIRE(c.tones.size() == 2);
        CHECK(c.tones[1].rabi / c.tones[0].rabi == doctest::Approx(0.7885).epsilon(1e-3));
        REQUIRE(c.window_omega.has_value());
        CHECK(c.gate_time() == doctest::Approx(2.0 * std::numbers::pi / *c.window_omega));
        CHECK(c.thresholds.gate_fidelity_min == 0.9993);
        CHECK(c.max_order() == 4);
    }
    CHECK_THROWS_AS(load_preset("fig9"), ConfigError);
}

TEST_CASE("overrides and validation") {
    SUBCASE("n_max override on fig3-right is echoed") {
        const RunConfig c = config_from_string("scenario: fig3-right\nn_max: 64\n");
        CHECK(c.n_max == 64);
        CHECK(c.n_max_check >= 80);
        CHECK(std::find(c.overrides.begin(), c.overrides.end(), "n_max") != c.overrides.end());
        const std::string echo = config_echo(c);
        CHECK(echo.find("n_max: 64") != std::string::npos);
        CHECK(echo.find("overrides") != std::string::npos);
    }
    SUBCASE("empty custom config lists the required fields") {
        const std::string e = error_of("scenario: custom\n");
        CHECK(e.find("missing required fields") != std::string::npos);
        for (const char* f : {"eta", "tones", "gate"}) CHECK(e.find(f) != std::string::npos);
        CHECK(error_of("") == e.substr(0, 0) + error_of(""));
        CHECK_FALSE(error_of("").empty());
    }
    SUBCASE("unknown key is reported with its line") {
        const std::string e = error_of("scenario: fig2\nsamples: 100\nbogus: 3\n");
        CHECK(e.find("line 3") != std::string::npos);
        CHECK(e.find("bogus") != std::string::npos);
        const std::string t = error_of("scenario: custom\neta: 0.1\ntones:\n  - {rabi: 1, beat: 0.3, colour: red}\n");
        CHECK(t.find("colour") != std::string::npos);
        CHECK(t.find("line 4") != std::string::npos);
    }
    SUBCASE("preset conflicts are explicit") {
        const std::string e = error_of("scenario: fig2\neta: 0.2\n");
        CHECK(e.find("fixed by preset 'fig2'") != std::string::npos);
        CHECK(e.find("scenario: custom") != std::string::npos);
        CHECK(error_of("scenario: custom\nfixed: [eta]\n").find("only allowed in preset") != std::string::npos);
    }
    SUBCASE("out-of-range values") {
        CHECK_FALSE(error_of("scenario: fig2\norders: [5]\n").empty());
        CHECK_FALSE(error_of("scenario: fig2\ntolerance: 1.0e-3\n").empty());
        CHECK_FALSE(error_of("scenario: fig2\nchannels: [qat2]\n").empty());
        CHECK_FALSE(error_of("scenario: fig2\nsamples: 1\n").empty());
        CHECK_FALSE(error_of("scenario: fig2\nspan: 10\n").empty());
        CHECK_FALSE(error_of("scenario: fig2\nsamples: abc\n").empty());
        CHECK_FALSE(error_of("scenario: [unterminated\n").empty());
        CHECK_THROWS_AS(validate_config("/nonexistent/config.yaml"), ConfigError);
    }
    SUBCASE("custom scenario") {
        const RunConfig c = config_from_string(kSmallCustom);
        CHECK(c.scenario == "custom");
        CHECK(c.alpha == Complex(0.0, 0.5));
        CHECK(c.gate_time() == doctest::Approx(2.0 * std::numbers::pi / 0.383));
        CHECK(c.model().tones[0].beat() == doctest::Approx(0.383));
    }
}

TEST_CASE("scenario grid and channel labels") {
    const auto g = scenario_grid(10.0, 13.0, 11);
    CHECK(g.front() == 0.0);
    CHECK(g[10] == doctest::Approx(10.0));
    CHECK(g.back() >= 13.0 - 1e-12);
    CHECK(g.size() == 14);
    CHECK(scenario_grid(10.0, 10.0, 5).size() == 5);

    RunConfig c = load_preset("fig3-left");
    std::vector<std::string> names;
    for (const auto& l : channel_labels(c)) names.push_back(l.name());
    CHECK(names == std::vector<std::string>{"reference", "reference_carrier", "qat1", "qat2", "qat3", "qat4"});
    c = load_preset("fig2");
    names.clear();
    for (const auto& l : channel_labels(c)) names.push_back(l.name());
    CHECK(names == std::vector<std::string>{"reference", "eff1", "eff2"});
}

TEST_CASE("small scenario runs end to end and is deterministic") {
    const RunConfig c = config_from_string(kSmallCustom);
    PipelineOptions o;
    const ScenarioResult r = run_scenario(c, o);
    CHECK(r.grid.size() == c.samples);
    for (const auto& inv : r.invariants) {
        INFO(inv.name << " = " << inv.value);
        CHECK(inv.passed());
    }
    CHECK(r.min_process_fidelity > 0.99);
    CHECK(r.min_process_fidelity <= 1.0 + 1e-9);
    CHECK(r.truncation_drift < 1e-6);
    CHECK(r.integrator_drift < 1e-6);

    const auto base = std::filesystem::temp_directory_path() / "qat_config_test";
    write_artifacts(c, r, {}, (base / "a").string());
    write_artifacts(c, run_scenario(c, o), {}, (base / "b").string());
    const std::string a = read_text(base / "a" / "timeseries.csv");
    CHECK_FALSE(a.empty());
    CHECK(a == read_text(base / "b" / "timeseries.csv"));
    CHECK(a.rfind("s,", 0) == 0);
    const std::string summary = read_text(base / "a" / "summary.txt");
    for (const char* key : {"eta: 0.1", "beat: 0.383", "rabi: 1", "n_max: 8", "tolerance", "seed", "gate_fidelity"}) {
        INFO(std::string(key));
        CHECK(summary.find(key) != std::string::npos);
    }
    CHECK_FALSE(read_text(base / "a" / "expansion.json").empty());
    if (!std::getenv("QAT_KEEP")) std::filesystem::remove_all(base);
}
