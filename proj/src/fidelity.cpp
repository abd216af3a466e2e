#include "qat/fidelity.hpp"

#include <array>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace qat {

namespace {

constexpr double kUnitarityGuard = 1e-6;

std::vector<Matrix> two_qubit_paulis() {
    Matrix i2 = Matrix::Identity(2, 2), x(2, 2), y(2, 2), z(2, 2);
    x << 0, 1, 1, 0;
    y << 0, -kI, kI, 0;
    z << 1, 0, 0, -1;
    const std::array<Matrix, 4> p{i2, x, y, z};
    std::vector<Matrix> r;
    for (const auto& a : p) {
        for (const auto& b : p) r.push_back(kron(a, b));
    }
    return r;
}

std::vector<Vector> build_stabilizer_states() {
    // Candidates: entries in {0, ±1, ±i}, first nonzero entry 1; a state is a
    // stabilizer state iff exactly four signed Paulis (identity included) fix it.
    const std::array<Complex, 5> vals{0.0, 1.0, -1.0, kI, -kI};
    const auto paulis = two_qubit_paulis();
    std::vector<Vector> states;
    for (int code = 1; code < 625; ++code) {
        Vector v(4);
        int c = code;
        for (int k = 0; k < 4; ++k) {
            v(k) = vals[static_cast<std::size_t>(c % 5)];
            c /= 5;
        }
        Index first = 0;
        while (v(first) == 0.0) ++first;
        if (v(first) != 1.0) continue;
        v.normalize();
        int stabilizers = 0;
        for (const auto& p : paulis) {
            const double e = std::abs((v.adjoint() * p * v)(0, 0));
            if (std::abs(e - 1.0) < 1e-12) ++stabilizers;
        }
        if (stabilizers == 4) states.push_back(v);
    }
    return states;
}

std::vector<Vector> build_product_states() {
    const double r = 1.0 / std::sqrt(2.0);
    std::vector<Vector> single;
    auto make = [](Complex a, Complex b) {
        Vector v(2);
        v << a, b;
        return v;
    };
    single.push_back(make(r, r));
    single.push_back(make(r, -r));
    single.push_back(make(r, r * kI));
    single.push_back(make(r, -r * kI));
    single.push_back(make(1.0, 0.0));
    single.push_back(make(0.0, 1.0));
    std::vector<Vector> states;
    for (const auto& a : single) {
        for (const auto& b : single) {
            Vector v(4);
            v << a(0) * b(0), a(0) * b(1), a(1) * b(0), a(1) * b(1);
            states.push_back(v);
        }
    }
    return states;
}

void require_unitary(const Matrix& u, const char* which) {
    if (u.rows() != u.cols() || unitarity_residual(u) > kUnitarityGuard) {
        throw std::invalid_argument(std::string("avg_process_fidelity: ") + which + " is not unitary");
    }
}

}  // namespace

std::string to_string(DesignKind kind) { return kind == DesignKind::stabilizer ? "stabilizer" : "pauli_product"; }

DesignKind design_kind_from_string(const std::string& name) {
    if (name == "stabilizer") return DesignKind::stabilizer;
    if (name == "pauli_product") return DesignKind::pauli_product;
    throw std::invalid_argument("unknown design '" + name + "' (expected stabilizer or pauli_product)");
}

const std::vector<Vector>& two_qubit_design(DesignKind kind) {
    static const std::vector<Vector> stabilizer = build_stabilizer_states();
    static const std::vector<Vector> product = build_product_states();
    return kind == DesignKind::stabilizer ? stabilizer : product;
}

Vector bell_phi_plus() {
    Vector v = Vector::Zero(4);
    v(0) = v(3) = 1.0 / std::sqrt(2.0);
    return v;
}

double bell_population(const HilbertSpec& spec, const Vector& state) {
    if (spec.n_qubits != 2) {
        throw std::invalid_argument("bell_population: requires two qubits");
    }
    if (state.size() != spec.dim()) {
        throw std::invalid_argument("bell_population: state dimension mismatch");
    }
    if (std::abs(state.norm() - 1.0) > 1e-6) {
        throw std::invalid_argument("bell_population: state is not normalized");
    }
    Eigen::Map<const Matrix> m(state.data(), spec.fock_dim(), spec.qubit_dim());
    const Matrix rho = m.transpose() * m.conjugate();
    const Vector phi = bell_phi_plus();
    return std::real((phi.adjoint() * rho * phi)(0, 0));
}

double avg_process_fidelity(const HilbertSpec& spec, const Matrix& u, const Matrix& v, const Vector& motional_ref,
                            DesignKind kind) {
    if (u.rows() != spec.dim() || v.rows() != spec.dim()) {
        throw std::invalid_argument("avg_process_fidelity: operator dimension mismatch");
    }
    if (motional_ref.size() != spec.fock_dim() || std::abs(motional_ref.norm() - 1.0) > 1e-6) {
        throw std::invalid_argument("avg_process_fidelity: motional reference must be a normalized Fock vector");
    }
    require_unitary(u, "U");
    require_unitary(v, "V");
    const Matrix w = u.adjoint() * v;
    double acc = 0.0;
    const auto& design = two_qubit_design(kind);
    for (const auto& q : design) {
        const Vector psi = product_state(q, motional_ref);
        acc += std::norm(psi.dot(w * psi));
    }
    return acc / static_cast<double>(design.size());
}

double avg_process_fidelity_sectors(const std::vector<QubitSector>& sectors, const std::vector<Vector>& u_ref,
                                    const std::vector<Vector>& v_ref, DesignKind kind) {
    if (sectors.size() != u_ref.size() || sectors.size() != v_ref.size()) {
        throw std::invalid_argument("avg_process_fidelity_sectors: one propagated state per sector required");
    }
    std::vector<Complex> overlaps(sectors.size());
    for (std::size_t m = 0; m < sectors.size(); ++m) overlaps[m] = u_ref[m].dot(v_ref[m]);
    double acc = 0.0;
    const auto& design = two_qubit_design(kind);
    for (const auto& q : design) {
        Complex amp = 0.0;
        for (std::size_t m = 0; m < sectors.size(); ++m) {
            amp += q.dot(sectors[m].projector * q) * overlaps[m];
        }
        acc += std::norm(amp);
    }
    return acc / static_cast<double>(design.size());
}

double haar_average_fidelity(const Matrix& u, const Matrix& v) {
    const double d = static_cast<double>(u.rows());
    return (std::norm((u.adjoint() * v).trace()) + d) / (d * (d + 1.0));
}

std::string GateFidelity::formatted() const { return format_with_uncertainty(gate, uncertainty); }

GateFidelity gate_fidelity(const HilbertSpec& spec, const PropagatorTrace& trace_ref, const PropagatorTrace& trace_qat,
                           const Vector& initial, double s_g, double truncation_drift, double integrator_drift) {
    const std::size_t i = trace_ref.index_of(s_g);
    const std::size_t j = trace_qat.index_of(s_g);
    const Vector ref = trace_ref.channel(Channel::reference)[i] * initial;
    const Vector qat = trace_qat.channel(Channel::qat)[j] * initial;
    GateFidelity g;
    g.gate = bell_population(spec, ref);
    g.approximation = std::norm(ref.dot(qat));
    g.uncertainty = std::hypot(truncation_drift, integrator_drift);
    return g;
}

std::string format_with_uncertainty(double value, double uncertainty) {
    std::ostringstream out;
    if (!(uncertainty > 0.0) || !std::isfinite(uncertainty)) {
        out << std::fixed << std::setprecision(6) << value;
        return out.str();
    }
    int decimals = std::max(0, static_cast<int>(-std::floor(std::log10(uncertainty))));
    long digit = std::lround(uncertainty * std::pow(10.0, decimals));
    if (digit >= 10 && decimals > 0) {
        --decimals;
        digit = std::lround(uncertainty * std::pow(10.0, decimals));
    }
    out << std::fixed << std::setprecision(decimals) << value << "(" << digit << ")";
    return out.str();
}

}  // namespace qat
