#pragma once

#include "qat/fidelity.hpp"
#include "qat/msgate.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qat {

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& message, int line = -1);
    int line() const { return line_; }

private:
    int line_;
};

struct GateSpec {
    std::string mode{"loops"};  // loops | window | time
    int loops{3};               // s_g = 2 pi loops / beat of the first tone
    double time{0.0};           // explicit s_g
};

struct Thresholds {
    std::optional<double> gate_fidelity_min;
    std::optional<double> gate_fidelity_max;
    std::optional<double> process_fidelity_min;
    std::optional<double> ufast_max;
};

struct RunConfig {
    std::string scenario{"custom"};
    double eta{0.1};
    std::vector<ToneSpec> tones;
    std::optional<double> window_omega;
    int n_max{40};
    int n_max_check{56};
    double cutoff{0.5};
    double tolerance{1e-11};
    std::size_t samples{2000};  // per gate
    std::uint64_t seed{1};
    std::vector<int> orders{4};
    std::vector<std::string> channels{"reference", "qat"};
    Complex alpha{0.0, 0.0};
    GateSpec gate;
    std::optional<double> span;
    DesignKind design{DesignKind::stabilizer};
    std::vector<double> eta_sweep;
    Thresholds thresholds;
    std::string output_dir{"qatsim_out"};
    std::vector<std::string> overrides;  // keys changed relative to the preset

    int max_order() const;
    bool has_channel(const std::string& name) const;
    MsModel model() const;
    MsModel model(double eta, int n_max) const;
    double gate_time() const;
    double span_end() const;
    void validate() const;
};

std::vector<std::string> preset_names();
std::string preset_directory();  // next to the executable, else the source tree

// Parses a YAML config: applies the scenario preset (if any), then overrides.
RunConfig validate_config(const std::string& path);
RunConfig config_from_string(const std::string& text, const std::string& origin = "<string>");
RunConfig load_preset(const std::string& name);

// Normalized YAML echo of every config value.
std::string config_echo(const RunConfig& config);

}  // namespace qat
