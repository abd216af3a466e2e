#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

namespace qat {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr Complex kI{0.0, 1.0};

// Truncated qubits ⊗ Fock space. Composite index = q * (n_max + 1) + n, so the
// qubit register is the slow index. n_qubits = 0 gives a bare Fock space, which
// is what the per-sector solvers use.
struct HilbertSpec {
    int n_qubits{2};
    int n_max{40};

    HilbertSpec() = default;
    HilbertSpec(int qubits, int fock_max);

    void validate() const;
    Index qubit_dim() const { return Index{1} << n_qubits; }
    Index fock_dim() const { return n_max + 1; }
    Index dim() const { return qubit_dim() * fock_dim(); }
    bool operator==(const HilbertSpec&) const = default;
};

struct SpinOps {
    Matrix jx, jy, jz;
    Matrix j_plus, j_minus;
    Matrix j_phi_y;
};

struct BosonOps {
    Matrix a, a_dag, n_op;
};

enum class NormKind { frobenius, spectral };
std::string to_string(NormKind kind);

// Tensor helpers.
Matrix kron(const Matrix& a, const Matrix& b);
Matrix embed_qubit(const HilbertSpec& spec, const Matrix& qubit_op);
Matrix embed_fock(const HilbertSpec& spec, const Matrix& fock_op);
Vector product_state(const Vector& qubits, const Vector& fock);

// Spin operators. Qubit basis per ion: |e> = 0, |g> = 1, sigma_z = diag(1, -1),
// sigma_+ = |e><g|. J_k = (1/2) sum_i sigma_k^(i), J_± = sum_i sigma_±^(i).
SpinOps qubit_spin_ops(int n_qubits, double phi_plus);
SpinOps build_spin_ops(const HilbertSpec& spec, double phi_plus);

// Ladder operators on the Fock factor (embedded when spec has qubits).
BosonOps build_boson_ops(const HilbertSpec& spec);

// D(alpha) = exp(alpha a† - alpha* a) via matrix exponential. Warns when the
// coherent state |alpha> leaks into the top 10% of Fock levels.
Matrix displacement(const HilbertSpec& spec, Complex alpha);
Vector coherent_state(int n_max, Complex alpha);
Vector fock_state(int n_max, int n);

// n-th normal-ordered Taylor polynomial sum_k a†^{n-k} a^k / ((n-k)! k!) e^{i(n-2k)theta}.
Matrix displacement_taylor(const HilbertSpec& spec, int n, double theta);

// k-th Fourier coefficient of exp(i eta (a† e^{i theta} + a e^{-i theta})).
Matrix bessel_clifford(const HilbertSpec& spec, int k, double eta);

Matrix matrix_exp(const Matrix& a);
// exp(-i t H) for Hermitian H via eigendecomposition; exactly unitary up to roundoff.
Matrix expm_hermitian(const Matrix& h, double t = 1.0);
Matrix commutator(const Matrix& a, const Matrix& b);
double op_norm(const Matrix& a, NormKind kind = NormKind::frobenius);

double hermiticity_residual(const Matrix& a);
double unitarity_residual(const Matrix& u);

// Eigenspaces of a Hermitian qubit-only operator K; every operator of the form
// f(K) ⊗ B is block diagonal in them.
struct QubitSector {
    double eigenvalue{0.0};
    Matrix projector;  // qubit_dim × qubit_dim
};
std::vector<QubitSector> sector_decomposition(const Matrix& qubit_op, double tol = 1e-9);

// sum_m P_m ⊗ blocks[m]
Matrix assemble_sectors(const HilbertSpec& spec, const std::vector<QubitSector>& sectors,
                        const std::vector<Matrix>& fock_blocks);

}  // namespace qat
