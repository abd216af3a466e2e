#include "qat/pipeline.hpp"

#include "qat/diagnostics.hpp"
#include "qat/serialize.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

namespace qat {

namespace {

void accumulate(IntegratorStats& total, const IntegratorStats& part) {
    total.steps += part.steps;
    total.failed_steps += part.failed_steps;
    total.rhs_evaluations += part.rhs_evaluations;
    total.rel_tol = part.rel_tol;
    total.max_unitarity_drift = std::max(total.max_unitarity_drift, part.max_unitarity_drift);
    total.reprojections += part.reprojections;
}

Vector ground_pair() {
    Vector gg = Vector::Zero(4);
    gg(3) = 1.0;  // |gg>, |g> = index 1 per ion
    return gg;
}

std::string sector_tag(double m) {
    std::ostringstream out;
    out << "[m=" << std::showpos << static_cast<int>(std::lround(m)) << "] ";
    return out.str();
}

IntegratorOptions integrator_options(double rel_tol) {
    IntegratorOptions o;
    o.rel_tol = rel_tol;
    return o;
}

// Population of |phi+> in the composite state built from per-sector motional states.
double bell_of(const SectorEngine& engine, const SectorStates& s, std::size_t i) {
    return bell_population(engine.model().spec(), engine.composite(ground_pair(), s, i));
}

// max over design states of ||sum_m P_m q ⊗ w_m||, the w_m being mutually orthogonal blocks.
double design_deviation(const std::vector<QubitSector>& sectors, const std::vector<Vector>& w, DesignKind kind) {
    double worst = 0.0;
    for (const auto& q : two_qubit_design(kind)) {
        double acc = 0.0;
        for (std::size_t k = 0; k < sectors.size(); ++k) {
            acc += (sectors[k].projector * q).squaredNorm() * w[k].squaredNorm();
        }
        worst = std::max(worst, std::sqrt(acc));
    }
    return worst;
}

RunConfig scaled(const RunConfig& config, double scale) {
    RunConfig c = config;
    for (auto& t : c.tones) t.rabi *= scale;
    return c;
}

InvariantReport scenario_invariants(const RunConfig& config, const MsModel& model,
                                    const std::vector<SectorExpansion>& expansions, double s_max) {
    std::mt19937_64 rng(config.seed);
    InvariantReport report;
    auto tagged = [&](const std::string& tag, InvariantResult r) {
        r.name = tag + r.name;
        report.push_back(std::move(r));
    };
    for (const auto& se : expansions) {
        const std::string tag = sector_tag(se.m);
        const PerturbativeSeries h = build_sector_interaction(model, se.m);
        tagged(tag, check_series_hermiticity(h, rng, s_max));
        for (auto& r : check_expansion(se.expansion, rng, s_max)) tagged(tag, std::move(r));
        tagged(tag, check_projector_laws(h.at(1), config.cutoff));
        InvariantResult c = check_series_commutator(h.at(1), h.at(std::min(2, h.max_order())), rng, s_max);
        c.name += " (H1, H" + std::to_string(std::min(2, h.max_order())) + ")";
        tagged(tag, c);
        if (se.expansion.has_phi(1)) {
            InvariantResult p = check_series_commutator(se.expansion.phi[1], h.at(1), rng, s_max);
            p.name += " (Phi1, H1)";
            tagged(tag, p);
        }
    }
    report.push_back(check_carrier_commutation(model, rng, s_max));
    return report;
}

}  // namespace

std::string ChannelLabel::name() const {
    if (kind == "effective") return "eff" + std::to_string(order);
    if (kind == "qat") return "qat" + std::to_string(order);
    return kind;
}

SectorEngine::SectorEngine(const MsModel& model, Complex alpha, double cutoff, const IntegratorOptions& options)
    : model_(model), alpha_(coherent_state(model.n_max, alpha)), cutoff_(cutoff), options_(options) {
    model_.validate();
    if (!model_.shared_phi_plus()) {
        throw MsConfigurationError("sector pipeline requires one phi_plus shared by all tones");
    }
    sectors_ = sector_decomposition(qubit_spin_ops(2, model_.tones.front().phi_plus).j_phi_y);
}

const std::vector<SectorExpansion>& SectorEngine::expansions() {
    if (!expansions_.empty()) return expansions_;
    QatOptions options;
    options.cutoff = cutoff_;
    for (const auto& sector : sectors_) {
        if (sector.eigenvalue == 0.0) continue;
        const PerturbativeSeries h = build_sector_interaction(model_, sector.eigenvalue);
        expansions_.push_back({sector.eigenvalue, run(h, model_.max_order, options)});
    }
    return expansions_;
}

SectorStates SectorEngine::reference(const std::vector<double>& grid, bool include_carrier) const {
    SectorStates out;
    out.stats.rel_tol = options_.rel_tol;
    for (const auto& sector : sectors_) {
        std::vector<Vector> states;
        states.reserve(grid.size());
        if (sector.eigenvalue == 0.0) {
            states.assign(grid.size(), alpha_);
        } else {
            accumulate(out.stats, integrate_schrodinger(
                                      sector_reference_hamiltonian(model_, sector.eigenvalue, include_carrier),
                                      alpha_.size(), grid, options_,
                                      [&](std::size_t, double, const Matrix& u) { states.push_back(u * alpha_); }));
        }
        out.states.push_back(std::move(states));
    }
    return out;
}

void SectorEngine::qat(int order, const std::vector<double>& grid, SectorStates* effective, SectorStates* full,
                       std::vector<std::vector<Vector>>* ufast) {
    const auto& ex = expansions();
    std::size_t e = 0;
    for (const auto& sector : sectors_) {
        std::vector<Vector> eff, qat, dev;
        if (sector.eigenvalue == 0.0) {
            eff.assign(grid.size(), alpha_);
            qat.assign(grid.size(), alpha_);
            dev.assign(grid.size(), Vector::Zero(alpha_.size()));
        } else {
            const QatExpansion view = truncated(ex.at(e++).expansion, order);
            const IntegratorStats st = assemble_qat(
                view, model_.lambda(), grid, options_,
                [&](std::size_t, double, const Matrix& f, const Matrix& u_eff, const Matrix& u_qat) {
                    if (effective) eff.push_back(u_eff * alpha_);
                    if (full) qat.push_back(u_qat * alpha_);
                    if (ufast) dev.push_back(f * alpha_ - alpha_);
                });
            if (effective) accumulate(effective->stats, st);
            if (full) accumulate(full->stats, st);
        }
        if (effective) effective->states.push_back(std::move(eff));
        if (full) full->states.push_back(std::move(qat));
        if (ufast) ufast->push_back(std::move(dev));
    }
}

Vector SectorEngine::composite(const Vector& qubits, const SectorStates& s, std::size_t sample) const {
    Vector out = Vector::Zero(4 * alpha_.size());
    for (std::size_t k = 0; k < sectors_.size(); ++k) {
        out += product_state(sectors_[k].projector * qubits, s.states[k][sample]);
    }
    return out;
}

std::vector<Vector> SectorEngine::sample(const SectorStates& s, std::size_t i) const {
    std::vector<Vector> out;
    out.reserve(s.states.size());
    for (const auto& st : s.states) out.push_back(st[i]);
    return out;
}

std::vector<ChannelLabel> channel_labels(const RunConfig& config) {
    std::vector<ChannelLabel> labels{{"reference", 0}};
    if (config.has_channel("reference_carrier")) labels.push_back({"reference_carrier", 0});
    std::vector<int> orders = config.orders;
    std::sort(orders.begin(), orders.end());
    orders.erase(std::unique(orders.begin(), orders.end()), orders.end());
    for (const char* kind : {"effective", "qat"}) {
        if (!config.has_channel(kind)) continue;
        for (int n : orders) labels.push_back({kind, n});
    }
    return labels;
}

std::vector<double> scenario_grid(double gate_time, double span_end, std::size_t samples_per_gate) {
    if (samples_per_gate < 2) throw std::invalid_argument("scenario_grid: at least two samples per gate");
    const double ds = gate_time / static_cast<double>(samples_per_gate - 1);
    std::vector<double> grid = uniform_grid(0.0, gate_time, samples_per_gate);
    const auto extra = static_cast<std::size_t>(std::ceil((span_end - gate_time) / ds - 1e-9));
    for (std::size_t k = 1; k <= extra; ++k) grid.push_back(gate_time + static_cast<double>(k) * ds);
    return grid;
}

ScenarioResult run_scenario(const RunConfig& config, const PipelineOptions& options) {
    config.validate();
    const MsModel model = config.model();
    ScenarioResult result;
    result.gate_time = config.gate_time();
    result.grid = scenario_grid(result.gate_time, config.span_end(), config.samples);
    result.gate_index = config.samples - 1;
    const auto& grid = result.grid;

    SectorEngine engine(model, config.alpha, config.cutoff, integrator_options(config.tolerance));
    const auto& sectors = engine.sectors();
    const auto labels = channel_labels(config);
    const int top = config.max_order();
    const bool has_qat = config.has_channel("qat");

    std::map<std::string, SectorStates> states;
    std::vector<std::vector<Vector>> ufast;
    for (const auto& label : labels) {
        const std::string name = label.name();
        if (states.count(name)) continue;
        if (label.kind == "reference" || label.kind == "reference_carrier") {
            states[name] = engine.reference(grid, label.kind == "reference_carrier");
            continue;
        }
        const bool want_eff = config.has_channel("effective");
        SectorStates eff, full;
        engine.qat(label.order, grid, want_eff ? &eff : nullptr, has_qat ? &full : nullptr,
                   has_qat && label.order == top ? &ufast : nullptr);
        if (want_eff) states["eff" + std::to_string(label.order)] = std::move(eff);
        if (has_qat) states["qat" + std::to_string(label.order)] = std::move(full);
    }

    const SectorStates& ref = states.at("reference");
    for (const auto& label : labels) {
        const std::string name = label.name();
        result.channels.push_back(name);
        const SectorStates& st = states.at(name);
        result.stats[name] = st.stats;
        auto& bell = result.bell[name];
        bell.reserve(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) bell.push_back(bell_of(engine, st, i));
        if (label.kind == "reference") continue;
        auto& fid = result.process_fidelity[name];
        fid.reserve(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            fid.push_back(
                avg_process_fidelity_sectors(sectors, engine.sample(ref, i), engine.sample(st, i), config.design));
        }
    }

    if (has_qat) {
        result.ufast_deviation.reserve(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            std::vector<Vector> w;
            for (const auto& sec : ufast) w.push_back(sec[i]);
            result.ufast_deviation.push_back(design_deviation(sectors, w, config.design));
        }
        result.ufast_gate_state = result.ufast_deviation[result.gate_index];
        for (const auto& se : engine.expansions()) {
            const Matrix f = u_fast(truncated(se.expansion, top), result.gate_time, model.lambda());
            result.ufast_gate_operator =
                std::max(result.ufast_gate_operator,
                         op_norm(f - Matrix::Identity(f.rows(), f.cols()), NormKind::spectral));
        }
    }

    const std::string approx = has_qat ? "qat" + std::to_string(top)
                                       : (config.has_channel("effective") ? "eff" + std::to_string(top) : "");
    result.gate.gate = result.bell.at("reference")[result.gate_index];
    if (!approx.empty()) {
        result.fidelity_channel = approx;
        const Vector r = engine.composite(ground_pair(), ref, result.gate_index);
        const Vector q = engine.composite(ground_pair(), states.at(approx), result.gate_index);
        result.gate.approximation = std::norm(r.dot(q));
        const auto& fid = result.process_fidelity.at(approx);
        result.min_process_fidelity = *std::min_element(fid.begin(), fid.end());
    }

    if (options.drifts) {
        const std::vector<double> gate_grid = uniform_grid(0.0, result.gate_time, 2);
        {
            SectorEngine check(config.model(config.eta, config.n_max_check), config.alpha, config.cutoff,
                               integrator_options(config.tolerance));
            const SectorStates s = check.reference(gate_grid, false);
            result.truncation_drift = std::abs(bell_of(check, s, 1) - result.gate.gate);
        }
        {
            SectorEngine half(model, config.alpha, config.cutoff,
                              integrator_options(std::max(config.tolerance / 2.0, 1e-13)));
            const SectorStates s = half.reference(gate_grid, false);
            result.integrator_drift = std::abs(bell_of(half, s, 1) - result.gate.gate);
        }
        result.gate.uncertainty = std::hypot(result.truncation_drift, result.integrator_drift);
    }

    if (has_qat || config.has_channel("effective")) result.expansions = engine.expansions();

    if (options.invariants) {
        result.invariants = scenario_invariants(config, model, engine.expansions(), config.span_end());
        double drift = 0.0;
        for (const auto& [name, st] : result.stats) drift = std::max(drift, st.max_unitarity_drift);
        result.invariants.push_back({"unitarity", drift, 1e-9});
    }

    const auto& th = config.thresholds;
    auto miss = [&](const std::string& what, double value, double bound) {
        std::ostringstream out;
        out << std::setprecision(10) << what << " = " << value << " (bound " << bound << ")";
        result.threshold_misses.push_back(out.str());
    };
    if (th.gate_fidelity_min && result.gate.gate < *th.gate_fidelity_min) {
        miss("gate fidelity", result.gate.gate, *th.gate_fidelity_min);
    }
    if (th.gate_fidelity_max && result.gate.gate > *th.gate_fidelity_max) {
        miss("gate fidelity", result.gate.gate, *th.gate_fidelity_max);
    }
    if (th.process_fidelity_min && !approx.empty() && result.min_process_fidelity < *th.process_fidelity_min) {
        miss("min process fidelity", result.min_process_fidelity, *th.process_fidelity_min);
    }
    if (th.ufast_max && has_qat && result.ufast_gate_state > *th.ufast_max) {
        miss("U_fast deviation at s_g", result.ufast_gate_state, *th.ufast_max);
    }
    return result;
}

std::vector<ConvergenceRow> convergence_sweep(const RunConfig& config) {
    config.validate();
    std::vector<double> etas = config.eta_sweep.empty() ? std::vector<double>{config.eta} : config.eta_sweep;
    std::vector<int> orders = config.orders;
    std::sort(orders.begin(), orders.end());
    orders.erase(std::unique(orders.begin(), orders.end()), orders.end());
    const std::vector<double> grid = uniform_grid(0.0, config.gate_time(), 2);
    std::vector<ConvergenceRow> rows;
    for (double eta : etas) {
        SectorEngine engine(config.model(eta, config.n_max), config.alpha, config.cutoff,
                            integrator_options(config.tolerance));
        const SectorStates ref = engine.reference(grid, false);
        for (int n : orders) {
            SectorStates full;
            engine.qat(n, grid, nullptr, &full);
            const double f = avg_process_fidelity_sectors(engine.sectors(), engine.sample(ref, 1),
                                                          engine.sample(full, 1), config.design);
            rows.push_back({eta, n, std::sqrt(std::max(0.0, 1.0 - f))});
        }
    }
    return rows;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need >= 2 paired points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

double gate_population(const RunConfig& config, double scale) {
    const RunConfig c = scaled(config, scale);
    SectorEngine engine(c.model(), c.alpha, c.cutoff, integrator_options(c.tolerance));
    const SectorStates s = engine.reference(uniform_grid(0.0, c.gate_time(), 2), false);
    return bell_of(engine, s, 1);
}

double calibrate_rabi_scale(const RunConfig& config, double lo, double hi, double tol) {
    if (!(lo > 0.0 && hi > lo)) throw std::invalid_argument("calibrate_rabi_scale: need 0 < lo < hi");
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = gate_population(config, c), fd = gate_population(config, d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = gate_population(config, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = gate_population(config, d);
        }
        diag::info("calibrate: bracket [" + std::to_string(a) + ", " + std::to_string(b) + "]");
    }
    return 0.5 * (a + b);
}

void write_artifacts(const RunConfig& config, const ScenarioResult& r, const std::vector<ConvergenceRow>& convergence,
                     const std::string& directory) {
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    const fs::path dir(directory);

    if (!r.grid.empty()) {
        std::ofstream csv(dir / "timeseries.csv");
        csv << "s";
        for (const auto& c : r.channels) csv << ",bell_" << c;
        for (const auto& c : r.channels) {
            if (r.process_fidelity.count(c)) csv << ",favg_" << c;
        }
        if (!r.ufast_deviation.empty()) csv << ",ufast_deviation";
        csv << '\n' << std::setprecision(12);
        for (std::size_t i = 0; i < r.grid.size(); ++i) {
            csv << r.grid[i];
            for (const auto& c : r.channels) csv << ',' << r.bell.at(c)[i];
            for (const auto& c : r.channels) {
                if (r.process_fidelity.count(c)) csv << ',' << r.process_fidelity.at(c)[i];
            }
            if (!r.ufast_deviation.empty()) csv << ',' << r.ufast_deviation[i];
            csv << '\n';
        }
    }

    std::ofstream sum(dir / "summary.txt");
    sum << std::setprecision(12);
    sum << "scenario: " << config.scenario << '\n';
    if (!r.grid.empty()) {
        const MsModel model = config.model();
        sum << "gate_time: " << r.gate_time << '\n';
        sum << "span_end: " << r.grid.back() << '\n';
        sum << "samples: " << r.grid.size() << '\n';
        sum << "lambda: " << model.lambda() << '\n';
        for (std::size_t t = 0; t < model.tones.size(); ++t) {
            const auto& tone = model.tones[t];
            sum << "tone" << t + 1 << ".rabi: " << tone.rabi << '\n';
            sum << "tone" << t + 1 << ".detuning: " << tone.detuning.to_string() << " = " << tone.detuning.value()
                << '\n';
            sum << "tone" << t + 1 << ".beat: " << tone.beat() << '\n';
            sum << "tone" << t + 1 << ".window: " << to_string(tone.window.kind) << '\n';
        }
        sum << "gate_fidelity: " << r.gate.formatted() << '\n';
        sum << "gate_fidelity_value: " << r.gate.gate << '\n';
        if (!r.fidelity_channel.empty()) {
            sum << "approximation_channel: " << r.fidelity_channel << '\n';
            sum << "approximation_fidelity: " << r.gate.approximation << '\n';
            sum << "min_process_fidelity: " << r.min_process_fidelity << '\n';
        }
        if (!r.ufast_deviation.empty()) {
            sum << "ufast_deviation_at_gate: " << r.ufast_gate_state << '\n';
            sum << "ufast_operator_norm_at_gate: " << r.ufast_gate_operator << '\n';
        }
        sum << "truncation_drift: " << r.truncation_drift << '\n';
        sum << "integrator_drift: " << r.integrator_drift << '\n';
        for (const auto& [name, st] : r.stats) {
            sum << "integrator." << name << ": steps=" << st.steps << " failed=" << st.failed_steps
                << " rhs=" << st.rhs_evaluations << " rel_tol=" << st.rel_tol
                << " max_unitarity_drift=" << st.max_unitarity_drift << " reprojections=" << st.reprojections
                << '\n';
        }
        for (const auto& inv : r.invariants) {
            sum << "invariant: " << (inv.passed() ? "ok   " : "FAIL ") << inv.name << " = " << inv.value
                << " (tol " << inv.tolerance << ")\n";
        }
        for (const auto& m : r.threshold_misses) sum << "threshold_miss: " << m << '\n';
    }
    for (const auto& row : convergence) {
        sum << "convergence: eta=" << row.eta << " N=" << row.order << " error=" << row.error << '\n';
    }
    sum << "config:\n";
    std::istringstream echo(config_echo(config));
    for (std::string line; std::getline(echo, line);) sum << "  " << line << '\n';

    if (!r.expansions.empty()) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& se : r.expansions) {
            arr.push_back({{"sector", se.m}, {"expansion", nlohmann::json::parse(expansion_to_json(se.expansion))}});
        }
        std::ofstream(dir / "expansion.json") << arr.dump(1) << '\n';
    }

    if (!convergence.empty()) {
        std::ofstream csv(dir / "convergence.csv");
        csv << "eta,order,error\n" << std::setprecision(12);
        for (const auto& row : convergence) csv << row.eta << ',' << row.order << ',' << row.error << '\n';
    }
}

}  // namespace qat
