#pragma once

#include "qat/expansion.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace qat {

// Writes H(s) into `out` (already sized dim × dim; contents overwritten).
using HamiltonianFn = std::function<void(double s, Matrix& out)>;

enum class Channel { reference, reference_carrier, effective, fast, qat };
std::string to_string(Channel channel);

enum class TimeParametrization { scaled_s, slow_tau };

struct IntegratorOptions {
    double rel_tol{1e-11};
    double initial_step{1e-2};
    double min_step{1e-13};
    double drift_failure{1e-6};  // unitarity drift that aborts the run
};

struct IntegratorStats {
    unsigned long steps{0};
    unsigned long failed_steps{0};
    unsigned long rhs_evaluations{0};
    double rel_tol{0.0};
    double max_unitarity_drift{0.0};
    int reprojections{0};
};

// Called at every output sample with the propagator U(s, grid[0]).
using SampleObserver = std::function<void(std::size_t index, double s, const Matrix& u)>;

struct PropagatorTrace {
    std::vector<double> grid;
    std::map<Channel, std::vector<Matrix>> channels;
    std::map<Channel, IntegratorStats> stats;

    const std::vector<Matrix>& channel(Channel c) const;
    bool has(Channel c) const { return channels.count(c) > 0; }
    // Adds the other trace's channels; both must share one grid.
    void merge(const PropagatorTrace& other);
    std::size_t index_of(double s, double tol = 1e-9) const;
    double max_unitarity_residual() const;
};

std::vector<double> uniform_grid(double s0, double s1, std::size_t samples);

class IntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Adaptive 8th-order Runge-Kutta (Prince-Dormand) on the propagator ODE i dU/ds = H(s) U,
// U(grid[0]) = I. Each grid point is an integration checkpoint.
IntegratorStats integrate_schrodinger(const HamiltonianFn& h, Index dim, const std::vector<double>& grid,
                                      const IntegratorOptions& options, const SampleObserver& observer);
PropagatorTrace integrate_schrodinger(const HamiltonianFn& h, Index dim, const std::vector<double>& grid,
                                      const IntegratorOptions& options = {});
// Series form: H(s) = sum_n lambda^n h.orders[n] over orders [first, last].
PropagatorTrace integrate_schrodinger(const PerturbativeSeries& h, double lambda, int first, int last,
                                      const std::vector<double>& grid, const IntegratorOptions& options = {});

// Evaluation closure over a merged series (shares the coefficients).
HamiltonianFn series_hamiltonian(FourierSeries series);

// exp(-i sum_{n=1}^{N-1} lambda^n Phi^(n)(s)).
Matrix u_fast(const QatExpansion& expansion, double s, double lambda);

IntegratorStats u_eff(const QatExpansion& expansion, double lambda, const std::vector<double>& grid,
                      const IntegratorOptions& options, const SampleObserver& observer,
                      TimeParametrization param = TimeParametrization::scaled_s);
PropagatorTrace u_eff(const QatExpansion& expansion, double lambda, const std::vector<double>& grid,
                      const IntegratorOptions& options = {},
                      TimeParametrization param = TimeParametrization::scaled_s);

// Receives U_fast(s), U_eff(s) and U_qat(s) = U_fast(s) U_eff(s) U_fast(s0)†.
using QatObserver = std::function<void(std::size_t index, double s, const Matrix& fast, const Matrix& eff,
                                       const Matrix& qat)>;
IntegratorStats assemble_qat(const QatExpansion& expansion, double lambda, const std::vector<double>& grid,
                             const IntegratorOptions& options, const QatObserver& observer);
PropagatorTrace assemble_qat(const QatExpansion& expansion, double lambda, const std::vector<double>& grid,
                             const IntegratorOptions& options = {});

}  // namespace qat
