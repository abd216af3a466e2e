#pragma once

#include "qat/config.hpp"
#include "qat/expansion.hpp"
#include "qat/fidelity.hpp"
#include "qat/invariants.hpp"
#include "qat/msgate.hpp"

#include <map>
#include <string>
#include <vector>

namespace qat {

// Every MS operator is block diagonal in the eigenbasis of J_{phi,y} (eigenvalues
// -1, 0, 0, +1). The pipeline therefore works per sector on the Fock space and only
// keeps the propagated motional state U_m(s)|alpha> for each sector and sample.
struct SectorExpansion {
    double m{0.0};
    QatExpansion expansion;
};

// Propagated motional states: states[k][i] = U_{m_k}(grid[i]) |alpha>.
struct SectorStates {
    std::vector<std::vector<Vector>> states;
    IntegratorStats stats;
};

struct ChannelLabel {
    std::string kind;  // reference | reference_carrier | effective | qat
    int order{0};      // QAT order for effective / qat channels

    std::string name() const;  // "reference", "eff2", "qat4", ...
};

struct PipelineOptions {
    bool drifts{true};      // truncation and integrator self-convergence re-runs
    bool invariants{true};  // structural invariant suite
};

struct ScenarioResult {
    std::vector<double> grid;
    double gate_time{0.0};
    std::size_t gate_index{0};
    std::vector<std::string> channels;  // ordered channel names
    std::map<std::string, std::vector<double>> bell;               // per channel
    std::map<std::string, std::vector<double>> process_fidelity;   // channel vs reference
    std::vector<double> ufast_deviation;  // max_psi ||(U_fast(s) - I) psi|| for the top qat order
    std::map<std::string, IntegratorStats> stats;
    GateFidelity gate;
    std::string fidelity_channel;  // channel used for the approximation quality
    double min_process_fidelity{1.0};
    double ufast_gate_state{0.0};
    double ufast_gate_operator{0.0};  // max_m ||U_fast,m(s_g) - I||_2
    double truncation_drift{0.0};
    double integrator_drift{0.0};
    InvariantReport invariants;
    std::vector<SectorExpansion> expansions;
    std::vector<std::string> threshold_misses;
};

struct ConvergenceRow {
    double eta{0.0};
    int order{0};
    double error{0.0};  // sqrt(1 - F_avg) at the final time
};

class SectorEngine {
public:
    SectorEngine(const MsModel& model, Complex alpha, double cutoff, const IntegratorOptions& options);

    const MsModel& model() const { return model_; }
    const std::vector<QubitSector>& sectors() const { return sectors_; }
    const Vector& motional_ref() const { return alpha_; }

    // Solves QAT to the model's max order in every nonzero sector (cached).
    const std::vector<SectorExpansion>& expansions();

    SectorStates reference(const std::vector<double>& grid, bool include_carrier) const;
    // Effective and full QAT states for one order; `ufast` receives the per-sector
    // states (U_fast(s) - I)|alpha> when non-null.
    void qat(int order, const std::vector<double>& grid, SectorStates* effective, SectorStates* full,
             std::vector<std::vector<Vector>>* ufast = nullptr);

    // Composite state sum_m (P_m |q>) ⊗ v_m for one sample.
    Vector composite(const Vector& qubits, const SectorStates& s, std::size_t sample) const;
    std::vector<Vector> sample(const SectorStates& s, std::size_t i) const;

private:
    MsModel model_;
    Vector alpha_;
    double cutoff_;
    IntegratorOptions options_;
    std::vector<QubitSector> sectors_;
    std::vector<SectorExpansion> expansions_;
};

std::vector<ChannelLabel> channel_labels(const RunConfig& config);

// Uniform grid with the gate time on a sample, extended with the same spacing to the span end.
std::vector<double> scenario_grid(double gate_time, double span_end, std::size_t samples_per_gate);

ScenarioResult run_scenario(const RunConfig& config, const PipelineOptions& options = {});

// Final-time QAT error against the reference for every (eta, order) in the sweep.
std::vector<ConvergenceRow> convergence_sweep(const RunConfig& config);

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Reference Bell population at the gate time for the config's tones with all Rabi
// couplings scaled by `scale`.
double gate_population(const RunConfig& config, double scale);

// Golden-section search for the Rabi scale in [lo, hi] maximizing gate_population.
double calibrate_rabi_scale(const RunConfig& config, double lo, double hi, double tol = 1e-4);

// Writes timeseries.csv, summary.txt, expansion.json (and convergence.csv when rows are given).
void write_artifacts(const RunConfig& config, const ScenarioResult& result,
                     const std::vector<ConvergenceRow>& convergence, const std::string& directory);

}  // namespace qat
