// qatsim: scenario runner for the QAT Molmer-Sorensen pipeline.
//
//   qatsim run --scenario fig3-right --out out/fig3
//   qatsim run --config my.yaml -v
//   qatsim validate --config my.yaml
//   qatsim calibrate --scenario fig3-right --lo 0.9 --hi 1.1
//
// Exit codes: 0 success, 1 config error, 2 runtime invariant violation, 3 threshold miss.

#include "qat/config.hpp"
#include "qat/diagnostics.hpp"
#include "qat/pipeline.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iomanip>
#include <iostream>

namespace {

enum Exit { kOk = 0, kConfig = 1, kInvariant = 2, kThreshold = 3 };

struct Common {
    std::string config_path;
    std::string scenario;
    std::optional<int> n_max;
    std::optional<std::size_t> samples;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool quiet{false};
    bool verbose{false};
};

void add_common(CLI::App* cmd, Common& c) {
    auto* cfg = cmd->add_option("-c,--config", c.config_path, "YAML run configuration");
    auto* sc = cmd->add_option("-s,--scenario", c.scenario, "preset scenario (fig2, fig3-left, fig3-right, convergence)");
    cfg->excludes(sc);
    cmd->add_option("--n-max", c.n_max, "Fock cutoff override");
    cmd->add_option("--samples", c.samples, "output samples per gate override");
    cmd->add_option("--seed", c.seed, "seed override for sampled checks");
    cmd->add_option("-o,--out", c.out, "output directory override");
    cmd->add_flag("-q,--quiet", c.quiet, "only print errors");
    cmd->add_flag("-v,--verbose", c.verbose, "print progress messages");
}

qat::RunConfig load(const Common& c) {
    qat::RunConfig cfg;
    if (!c.config_path.empty()) {
        cfg = qat::validate_config(c.config_path);
    } else if (!c.scenario.empty()) {
        cfg = qat::load_preset(c.scenario);
    } else {
        throw qat::ConfigError("either --config or --scenario is required");
    }
    if (c.n_max) {
        cfg.n_max = *c.n_max;
        cfg.n_max_check = std::max(cfg.n_max_check, cfg.n_max + 16);
        cfg.overrides.push_back("n_max");
    }
    if (c.samples) {
        cfg.samples = *c.samples;
        cfg.overrides.push_back("samples");
    }
    if (c.seed) {
        cfg.seed = *c.seed;
        cfg.overrides.push_back("seed");
    }
    if (!c.out.empty()) {
        cfg.output_dir = c.out;
        cfg.overrides.push_back("output_dir");
    }
    if (cfg.samples < 2) throw qat::ConfigError("samples must be >= 2");
    cfg.validate();
    return cfg;
}

void install_diagnostics(const Common& c) {
    qat::diag::set_handler([quiet = c.quiet, verbose = c.verbose](qat::diag::Level level, std::string_view msg) {
        if (level == qat::diag::Level::warning && !quiet) std::cerr << "warning: " << msg << '\n';
        if (level == qat::diag::Level::info && verbose) std::cerr << msg << '\n';
    });
}

// Error of every order must decrease at each eta.
std::vector<std::string> convergence_misses(const std::vector<qat::ConvergenceRow>& rows) {
    std::vector<std::string> misses;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].eta == rows[i - 1].eta && !(rows[i].error < rows[i - 1].error)) {
            std::ostringstream out;
            out << "convergence not monotone at eta=" << rows[i].eta << ": N=" << rows[i].order << " error "
                << rows[i].error << " >= N=" << rows[i - 1].order << " error " << rows[i - 1].error;
            misses.push_back(out.str());
        }
    }
    return misses;
}

int run(const Common& c, bool drifts) {
    const qat::RunConfig cfg = load(c);
    const auto t0 = std::chrono::steady_clock::now();
    qat::diag::info("running scenario " + cfg.scenario);
    qat::PipelineOptions options;
    options.drifts = drifts;
    qat::ScenarioResult result = qat::run_scenario(cfg, options);
    std::vector<qat::ConvergenceRow> rows;
    if (!cfg.eta_sweep.empty()) {
        qat::diag::info("running convergence sweep");
        rows = qat::convergence_sweep(cfg);
        for (auto& m : convergence_misses(rows)) result.threshold_misses.push_back(std::move(m));
    }
    qat::write_artifacts(cfg, result, rows, cfg.output_dir);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (!c.quiet) {
        std::cout << std::setprecision(8);
        std::cout << "scenario " << cfg.scenario << " (" << secs << " s) -> " << cfg.output_dir << '\n';
        std::cout << "  gate fidelity at s_g = " << result.gate_time << ": " << result.gate.formatted() << '\n';
        if (!result.fidelity_channel.empty()) {
            std::cout << "  " << result.fidelity_channel << " min process fidelity: " << result.min_process_fidelity
                      << ", state fidelity at s_g: " << result.gate.approximation << '\n';
        }
        if (!result.ufast_deviation.empty()) {
            std::cout << "  U_fast deviation at s_g: " << result.ufast_gate_state << '\n';
        }
        for (const auto& r : rows) {
            std::cout << "  convergence eta=" << r.eta << " N=" << r.order << " error=" << r.error << '\n';
        }
    }
    bool invariants_ok = true;
    for (const auto& inv : result.invariants) {
        if (!inv.passed()) {
            invariants_ok = false;
            std::cerr << "invariant violated: " << inv.name << " = " << inv.value << " (tol " << inv.tolerance
                      << ")\n";
        }
    }
    if (!invariants_ok) return kInvariant;
    for (const auto& m : result.threshold_misses) std::cerr << "threshold miss: " << m << '\n';
    return result.threshold_misses.empty() ? kOk : kThreshold;
}

int validate(const Common& c) {
    const qat::RunConfig cfg = load(c);
    if (!c.quiet) std::cout << qat::config_echo(cfg) << '\n';
    return kOk;
}

int calibrate(const Common& c, double lo, double hi, double tol) {
    const qat::RunConfig cfg = load(c);
    const double scale = qat::calibrate_rabi_scale(cfg, lo, hi, tol);
    std::cout << std::setprecision(10) << "rabi scale: " << scale << '\n';
    for (std::size_t t = 0; t < cfg.tones.size(); ++t) {
        std::cout << "tone" << t + 1 << ".rabi: " << cfg.tones[t].rabi * scale << '\n';
    }
    std::cout << "gate population: " << qat::gate_population(cfg, scale) << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"QAT Molmer-Sorensen gate simulator"};
    app.require_subcommand(1);

    Common run_opts, validate_opts, cal_opts;
    bool no_drifts = false;
    auto* run_cmd = app.add_subcommand("run", "run a scenario and write artifacts");
    add_common(run_cmd, run_opts);
    run_cmd->add_flag("--no-drifts", no_drifts, "skip the truncation and integrator drift re-runs");

    auto* val_cmd = app.add_subcommand("validate", "parse a config and print the normalized echo");
    add_common(val_cmd, validate_opts);

    double lo = 0.9, hi = 1.1, tol = 1e-4;
    auto* cal_cmd = app.add_subcommand("calibrate", "scale the Rabi couplings for maximal gate population");
    add_common(cal_cmd, cal_opts);
    cal_cmd->add_option("--lo", lo, "lower scale bound");
    cal_cmd->add_option("--hi", hi, "upper scale bound");
    cal_cmd->add_option("--tol", tol, "bracket tolerance");

    app.add_subcommand("presets", "list preset scenarios")->callback([] {
        for (const auto& name : qat::preset_names()) std::cout << name << '\n';
        std::cout << "(from " << qat::preset_directory() << ")\n";
    });

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            install_diagnostics(run_opts);
            return run(run_opts, !no_drifts);
        }
        if (*val_cmd) {
            install_diagnostics(validate_opts);
            return validate(validate_opts);
        }
        if (*cal_cmd) {
            install_diagnostics(cal_opts);
            return calibrate(cal_opts, lo, hi, tol);
        }
    } catch (const qat::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const qat::MsConfigurationError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const qat::QatInvariantError& e) {
        std::cerr << "invariant violation in qat (order " << e.order() << ", " << e.invariant() << "): " << e.what()
                  << '\n';
        return kInvariant;
    } catch (const qat::IntegrationError& e) {
        std::cerr << "invariant violation in propagate: " << e.what() << '\n';
        return kInvariant;
    }
    return kOk;
}
