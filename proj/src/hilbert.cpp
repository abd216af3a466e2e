#include "qat/hilbert.hpp"

#include "qat/diagnostics.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qat {

namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

Matrix fock_annihilation(Index fock_dim) {
    Matrix a = Matrix::Zero(fock_dim, fock_dim);
    for (Index n = 1; n < fock_dim; ++n) {
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    return a;
}

Matrix matrix_power(const Matrix& m, int p) {
    Matrix r = Matrix::Identity(m.rows(), m.cols());
    for (int i = 0; i < p; ++i) {
        r = r * m;
    }
    return r;
}

// Single-qubit operator acting on ion `which` of an n-qubit register (ion 0 most significant).
Matrix single_site(int n_qubits, int which, const Matrix& op) {
    Matrix r = Matrix::Identity(1, 1);
    for (int i = 0; i < n_qubits; ++i) {
        r = kron(r, i == which ? op : Matrix(Matrix::Identity(2, 2)));
    }
    return r;
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* where) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        std::ostringstream msg;
        msg << where << ": dimension mismatch (" << a.rows() << "x" << a.cols() << " vs "
            << b.rows() << "x" << b.cols() << ")";
        throw std::invalid_argument(msg.str());
    }
}

void check_coherent_guard(int n_max, Complex alpha) {
    Vector psi = coherent_state(n_max, alpha);
    const int first_top = n_max + 1 - std::max(1, (n_max + 1) / 10);
    double top = 0.0;
    for (int n = first_top; n <= n_max; ++n) {
        top += std::norm(psi(n));
    }
    if (top > 1e-10) {
        std::ostringstream msg;
        msg << "displacement: |alpha|^2 = " << std::norm(alpha) << " leaves population " << top
            << " in the top 10% of Fock levels (n_max = " << n_max << ")";
        diag::warn(msg.str());
    }
}

}  // namespace

HilbertSpec::HilbertSpec(int qubits, int fock_max) : n_qubits(qubits), n_max(fock_max) { validate(); }

void HilbertSpec::validate() const {
    if (n_qubits < 0 || n_qubits > 8) {
        throw std::invalid_argument("HilbertSpec: n_qubits must be in [0, 8]");
    }
    if (n_max < 1) {
        throw std::invalid_argument("HilbertSpec: n_max must be >= 1");
    }
}

std::string to_string(NormKind kind) { return kind == NormKind::frobenius ? "frobenius" : "spectral"; }

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix r(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < a.cols(); ++j) {
            r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return r;
}

Matrix embed_qubit(const HilbertSpec& spec, const Matrix& qubit_op) {
    if (qubit_op.rows() != spec.qubit_dim() || qubit_op.cols() != spec.qubit_dim()) {
        throw std::invalid_argument("embed_qubit: operator does not match the qubit register");
    }
    return kron(qubit_op, Matrix::Identity(spec.fock_dim(), spec.fock_dim()));
}

Matrix embed_fock(const HilbertSpec& spec, const Matrix& fock_op) {
    if (fock_op.rows() != spec.fock_dim() || fock_op.cols() != spec.fock_dim()) {
        throw std::invalid_argument("embed_fock: operator does not match the Fock factor");
    }
    if (spec.n_qubits == 0) {
        return fock_op;
    }
    return kron(Matrix::Identity(spec.qubit_dim(), spec.qubit_dim()), fock_op);
}

Vector product_state(const Vector& qubits, const Vector& fock) {
    Vector r(qubits.size() * fock.size());
    for (Index q = 0; q < qubits.size(); ++q) {
        r.segment(q * fock.size(), fock.size()) = qubits(q) * fock;
    }
    return r;
}

SpinOps qubit_spin_ops(int n_qubits, double phi_plus) {
    if (n_qubits < 1) {
        throw std::invalid_argument("qubit_spin_ops: need at least one qubit");
    }
    Matrix sx(2, 2), sy(2, 2), sz(2, 2), sp(2, 2);
    sx << 0, 1, 1, 0;
    sy << 0, -kI, kI, 0;
    sz << 1, 0, 0, -1;
    sp << 0, 1, 0, 0;

    const Index d = Index{1} << n_qubits;
    SpinOps ops;
    ops.jx = ops.jy = ops.jz = ops.j_plus = Matrix::Zero(d, d);
    for (int i = 0; i < n_qubits; ++i) {
        ops.jx += 0.5 * single_site(n_qubits, i, sx);
        ops.jy += 0.5 * single_site(n_qubits, i, sy);
        ops.jz += 0.5 * single_site(n_qubits, i, sz);
        ops.j_plus += single_site(n_qubits, i, sp);
    }
    ops.j_minus = ops.j_plus.adjoint();
    ops.j_phi_y = std::sin(phi_plus) * ops.jx + std::cos(phi_plus) * ops.jy;
    return ops;
}

SpinOps build_spin_ops(const HilbertSpec& spec, double phi_plus) {
    spec.validate();
    SpinOps q = qubit_spin_ops(spec.n_qubits, phi_plus);
    return {embed_qubit(spec, q.jx),     embed_qubit(spec, q.jy),      embed_qubit(spec, q.jz),
            embed_qubit(spec, q.j_plus), embed_qubit(spec, q.j_minus), embed_qubit(spec, q.j_phi_y)};
}

BosonOps build_boson_ops(const HilbertSpec& spec) {
    spec.validate();
    const Matrix a = fock_annihilation(spec.fock_dim());
    const Matrix ad = a.adjoint();
    return {embed_fock(spec, a), embed_fock(spec, ad), embed_fock(spec, ad * a)};
}

Matrix displacement(const HilbertSpec& spec, Complex alpha) {
    spec.validate();
    check_coherent_guard(spec.n_max, alpha);
    const Matrix a = fock_annihilation(spec.fock_dim());
    const Matrix gen = alpha * a.adjoint() - std::conj(alpha) * a;
    return embed_fock(spec, matrix_exp(gen));
}

Vector coherent_state(int n_max, Complex alpha) {
    const Matrix a = fock_annihilation(n_max + 1);
    const Matrix gen = alpha * a.adjoint() - std::conj(alpha) * a;
    return matrix_exp(gen).col(0);
}

Vector fock_state(int n_max, int n) {
    if (n < 0 || n > n_max) {
        throw std::out_of_range("fock_state: level outside the truncated space");
    }
    Vector v = Vector::Zero(n_max + 1);
    v(n) = 1.0;
    return v;
}

Matrix displacement_taylor(const HilbertSpec& spec, int n, double theta) {
    spec.validate();
    if (n < 0) {
        throw std::invalid_argument("displacement_taylor: order must be >= 0");
    }
    const Matrix a = fock_annihilation(spec.fock_dim());
    const Matrix ad = a.adjoint();
    Matrix r = Matrix::Zero(spec.fock_dim(), spec.fock_dim());
    for (int k = 0; k <= n; ++k) {
        const Complex phase = std::polar(1.0, (n - 2 * k) * theta);
        r += phase / (factorial(n - k) * factorial(k)) * matrix_power(ad, n - k) * matrix_power(a, k);
    }
    return embed_fock(spec, r);
}

Matrix bessel_clifford(const HilbertSpec& spec, int k, double eta) {
    spec.validate();
    if (!(eta >= 0.0 && eta < 1.0)) {
        throw std::invalid_argument("bessel_clifford: eta must lie in [0, 1)");
    }
    const Matrix a = fock_annihilation(spec.fock_dim());
    const Matrix ad = a.adjoint();
    Matrix r = Matrix::Zero(spec.fock_dim(), spec.fock_dim());
    // a^n vanishes on the truncated space once n > n_max, so the series is finite.
    for (int n = (std::abs(k) - k) / 2; n <= spec.n_max; ++n) {
        const int power = 2 * n + k;
        const Complex c = std::pow(Complex(0.0, eta), power) / (factorial(n + k) * factorial(n));
        r += c * matrix_power(ad, n + k) * matrix_power(a, n);
    }
    return embed_fock(spec, std::exp(-0.5 * eta * eta) * r);
}

Matrix matrix_exp(const Matrix& a) {
    if (a.rows() != a.cols()) {
        throw std::invalid_argument("matrix_exp: matrix must be square");
    }
    return a.exp();
}

Matrix expm_hermitian(const Matrix& h, double t) {
    if (h.rows() != h.cols()) {
        throw std::invalid_argument("expm_hermitian: matrix must be square");
    }
    const Matrix sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("expm_hermitian: eigendecomposition failed");
    }
    const Eigen::VectorXd& w = solver.eigenvalues();
    Vector phases(w.size());
    for (Index i = 0; i < w.size(); ++i) {
        phases(i) = std::polar(1.0, -t * w(i));
    }
    const Matrix& v = solver.eigenvectors();
    return v * phases.asDiagonal() * v.adjoint();
}

Matrix commutator(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "commutator");
    return a * b - b * a;
}

double op_norm(const Matrix& a, NormKind kind) {
    if (kind == NormKind::frobenius) {
        return a.norm();
    }
    if (a.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues()(0);
}

double hermiticity_residual(const Matrix& a) { return (a - a.adjoint()).norm(); }

double unitarity_residual(const Matrix& u) {
    return (u.adjoint() * u - Matrix::Identity(u.cols(), u.cols())).norm();
}

std::vector<QubitSector> sector_decomposition(const Matrix& qubit_op, double tol) {
    if (hermiticity_residual(qubit_op) > 1e-12 * std::max(1.0, qubit_op.norm())) {
        throw std::invalid_argument("sector_decomposition: operator is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(qubit_op);
    const Eigen::VectorXd& w = solver.eigenvalues();
    const Matrix& v = solver.eigenvectors();
    std::vector<QubitSector> sectors;
    for (Index i = 0; i < w.size();) {
        Index j = i;
        while (j < w.size() && std::abs(w(j) - w(i)) <= tol) {
            ++j;
        }
        const Matrix basis = v.middleCols(i, j - i);
        double mean = w.segment(i, j - i).mean();
        if (std::abs(mean - std::round(mean)) <= tol) {
            mean = std::round(mean);
        }
        sectors.push_back({mean, basis * basis.adjoint()});
        i = j;
    }
    return sectors;
}

Matrix assemble_sectors(const HilbertSpec& spec, const std::vector<QubitSector>& sectors,
                        const std::vector<Matrix>& fock_blocks) {
    if (sectors.size() != fock_blocks.size()) {
        throw std::invalid_argument("assemble_sectors: one Fock block per sector required");
    }
    Matrix r = Matrix::Zero(spec.dim(), spec.dim());
    for (std::size_t i = 0; i < sectors.size(); ++i) {
        r += kron(sectors[i].projector, fock_blocks[i]);
    }
    return r;
}

}  // namespace qat
