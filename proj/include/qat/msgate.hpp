#pragma once

#include "qat/fourier.hpp"
#include "qat/propagate.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qat {

class MsConfigurationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class WindowKind { flat, sin4 };
std::string to_string(WindowKind kind);
WindowKind window_kind_from_string(const std::string& name);

// Amplitude envelope expressed as harmonics of the window frequency.
struct PulseWindow {
    WindowKind kind{WindowKind::flat};
    double omega{0.0};  // Lambda_omega; unused for flat windows

    // (h, c_h) with w(s) = sum_h c_h e^{i h omega s}.
    std::vector<std::pair<int, double>> harmonics() const;
    double value(double s) const;
    double peak() const { return 1.0; }
};

struct DriveTone {
    double rabi{1.0};        // Lambda_Omega
    int sideband{1};         // k in Lambda_delta = k - Lambda_Delta
    FrequencyVector detuning;  // Lambda_Delta over the model bases
    double phi_plus{0.0};
    double phi_minus{0.0};
    PulseWindow window;

    double beat() const { return sideband - detuning.value(); }
};

struct MsModel {
    double eta{0.1};  // = lambda
    std::vector<DriveTone> tones;
    int n_max{40};
    int max_order{4};
    bool include_carrier{false};
    BasesPtr bases;

    double lambda() const { return eta; }
    HilbertSpec spec() const { return HilbertSpec(2, n_max); }
    void validate() const;
    bool shared_phi_plus() const;
};

// High-level tone description; the beat is either a real value or an exact
// multiple of the window frequency.
struct ToneSpec {
    double rabi{1.0};
    int sideband{1};
    double beat{0.0};
    std::optional<int> beat_windows;
    double phi_plus{0.7853981633974483};
    double phi_minus{0.0};
    bool windowed{false};
};

MsModel make_model(double eta, int n_max, int max_order, const std::vector<ToneSpec>& tones,
                   std::optional<double> window_omega = std::nullopt, bool include_carrier = false);

// Single flat tone near the first red/blue sideband pair with beat delta.
MsModel flat_model(double eta, double rabi, double delta, double phi_plus, double phi_minus, int n_max,
                   int max_order);

struct ShapedParameters {
    double delta2{0.107};
    double rabi_ratio{0.7885};
    int delta1_over_delta2{3};
    int delta2_over_omega{3};
};

// Two sin^4-windowed tones: tone 1 at Lambda_Delta = 1 - 9 omega, tone 2 at
// Lambda_Delta = 2 - 3 omega with Omega2 = 0.7885 Omega1, omega = delta2 / 3.
MsModel shaped_scenario(double eta, double rabi1, int n_max = 40, int max_order = 4,
                        const ShapedParameters& params = {});
double shaped_gate_time(const ShapedParameters& params = {});

// Orders 0..max_order of H_I on the full qubits ⊗ Fock space; order 0 (carrier)
// only when include_carrier is set.
PerturbativeSeries build_interaction(const MsModel& model);
// Same series restricted to the J_{phi,y} = m eigenspace (Fock-only operators).
PerturbativeSeries build_sector_interaction(const MsModel& model, double m);

// Exact (unexpanded) interaction Hamiltonian with the matrix-exponential displacement.
HamiltonianFn reference_hamiltonian(const MsModel& model, bool include_carrier);
HamiltonianFn sector_reference_hamiltonian(const MsModel& model, double m, bool include_carrier);

struct FirstOrderSolution {
    Complex alpha_ms;
    double theta;
    Matrix u;
};
// Closed-form first-order propagator at slow time tau = eta s (single flat tone).
FirstOrderSolution analytic_first_order(const MsModel& model, double tau);

enum class SupplementKind { h_eff, phi };
// Closed-form order-n coefficient (lambda^n stripped) for a single flat tone:
// H_eff for n = 1..4, Phi for n = 1..3.
Matrix analytic_supplement(const MsModel& model, SupplementKind kind, int n, double s);

// Counter-rotating displacement amplitude i eta ∫^s Lambda'_Omega(s') G*(s') e^{2is'} ds'
// with the integration constant dropped (first tone).
Complex alpha_cr(const MsModel& model, double s);

}  // namespace qat
