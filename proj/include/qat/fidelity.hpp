#pragma once

#include "qat/propagate.hpp"

#include <map>
#include <string>
#include <vector>

namespace qat {

enum class DesignKind { stabilizer, pauli_product };
std::string to_string(DesignKind kind);
DesignKind design_kind_from_string(const std::string& name);

// Two-qubit Pauli-eigenstate ensembles. `stabilizer` is the 60 two-qubit
// stabilizer states (an exact 2-design); `pauli_product` is the 36 products of
// single-qubit Pauli eigenstates.
const std::vector<Vector>& two_qubit_design(DesignKind kind);

Vector bell_phi_plus();  // (|ee> + |gg>) / sqrt(2)

// <phi+| Tr_motion |psi><psi| |phi+>.
double bell_population(const HilbertSpec& spec, const Vector& state);

// Mean |<psi|U† V|psi>|^2 over design states ⊗ motional_ref.
double avg_process_fidelity(const HilbertSpec& spec, const Matrix& u, const Matrix& v, const Vector& motional_ref,
                            DesignKind kind = DesignKind::stabilizer);

// Same average for block-diagonal propagators U = sum_m P_m ⊗ U_m, given only the
// propagated motional states u_ref[m] = U_m |ref>, v_ref[m] = V_m |ref>.
double avg_process_fidelity_sectors(const std::vector<QubitSector>& sectors, const std::vector<Vector>& u_ref,
                                    const std::vector<Vector>& v_ref, DesignKind kind = DesignKind::stabilizer);

// Haar average (|Tr(U† V)|^2 + d) / (d (d + 1)) for qubit-only unitaries.
double haar_average_fidelity(const Matrix& u, const Matrix& v);

struct GateFidelity {
    double gate{0.0};           // reference Bell population at s_g
    double approximation{0.0};  // |<U_ref psi0 | U_qat psi0>|^2 at s_g
    double uncertainty{0.0};
    std::string formatted() const;
};

// Uncertainty combines the truncation drift and integrator self-convergence drift in quadrature.
GateFidelity gate_fidelity(const HilbertSpec& spec, const PropagatorTrace& trace_ref, const PropagatorTrace& trace_qat,
                           const Vector& initial, double s_g, double truncation_drift = 0.0,
                           double integrator_drift = 0.0);

// "0.9998(5)" style: the uncertainty in units of the last printed digit.
std::string format_with_uncertainty(double value, double uncertainty);

struct FidelityReport {
    std::vector<double> grid;
    std::map<std::string, std::vector<double>> bell_population;  // per channel
    std::map<std::string, std::vector<double>> process_fidelity;  // per channel pair
    std::map<std::string, double> gate_scalars;
    double truncation_drift{0.0};
    double integrator_drift{0.0};
};

}  // namespace qat
