#include "qat/propagate.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_odeiv2.h>

#include <cmath>
#include <memory>
#include <sstream>

namespace qat {

namespace {

struct OdeContext {
    const HamiltonianFn* h;
    Index dim;
    Matrix hbuf;
    unsigned long evaluations{0};
};

int schrodinger_rhs(double t, const double y[], double dydt[], void* params) {
    auto* ctx = static_cast<OdeContext*>(params);
    const Index d = ctx->dim;
    Eigen::Map<const Matrix> u(reinterpret_cast<const Complex*>(y), d, d);
    Eigen::Map<Matrix> du(reinterpret_cast<Complex*>(dydt), d, d);
    (*ctx->h)(t, ctx->hbuf);
    du.noalias() = ctx->hbuf * u;
    du *= -kI;
    ++ctx->evaluations;
    return GSL_SUCCESS;
}

struct DriverDeleter {
    void operator()(gsl_odeiv2_driver* d) const { gsl_odeiv2_driver_free(d); }
};

Matrix polar_unitary(const Matrix& u) {
    Eigen::JacobiSVD<Matrix> svd(u, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

void silence_gsl() {
    static const bool once = [] {
        gsl_set_error_handler_off();
        return true;
    }();
    (void)once;
}

}  // namespace

std::string to_string(Channel channel) {
    switch (channel) {
        case Channel::reference: return "reference";
        case Channel::reference_carrier: return "reference_carrier";
        case Channel::effective: return "effective";
        case Channel::fast: return "fast";
        case Channel::qat: return "qat";
    }
    return "unknown";
}

const std::vector<Matrix>& PropagatorTrace::channel(Channel c) const {
    auto it = channels.find(c);
    if (it == channels.end()) {
        throw std::out_of_range("PropagatorTrace: channel '" + to_string(c) + "' not present");
    }
    return it->second;
}

void PropagatorTrace::merge(const PropagatorTrace& other) {
    if (!grid.empty() && grid != other.grid) {
        throw std::invalid_argument("PropagatorTrace::merge: grid mismatch");
    }
    if (grid.empty()) grid = other.grid;
    for (const auto& [c, v] : other.channels) channels[c] = v;
    for (const auto& [c, st] : other.stats) stats[c] = st;
}

std::size_t PropagatorTrace::index_of(double s, double tol) const {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (std::abs(grid[i] - s) <= tol * std::max(1.0, std::abs(s))) return i;
    }
    std::ostringstream msg;
    msg << "PropagatorTrace: grid does not contain s = " << s;
    throw std::out_of_range(msg.str());
}

double PropagatorTrace::max_unitarity_residual() const {
    double worst = 0.0;
    for (const auto& [c, v] : channels) {
        for (const auto& u : v) worst = std::max(worst, unitarity_residual(u));
    }
    return worst;
}

std::vector<double> uniform_grid(double s0, double s1, std::size_t samples) {
    if (samples < 2) {
        throw std::invalid_argument("uniform_grid: need at least two samples");
    }
    if (!(s1 > s0)) {
        throw std::invalid_argument("uniform_grid: span must be increasing");
    }
    std::vector<double> g(samples);
    const double ds = (s1 - s0) / static_cast<double>(samples - 1);
    for (std::size_t i = 0; i < samples; ++i) g[i] = s0 + ds * static_cast<double>(i);
    g.back() = s1;
    return g;
}

IntegratorStats integrate_schrodinger(const HamiltonianFn& h, Index dim, const std::vector<double>& grid,
                                      const IntegratorOptions& options, const SampleObserver& observer) {
    if (!(options.rel_tol >= 1e-13 && options.rel_tol <= 1e-6)) {
        throw std::invalid_argument("integrate_schrodinger: rel_tol must lie in [1e-13, 1e-6]");
    }
    if (grid.empty()) {
        throw std::invalid_argument("integrate_schrodinger: empty time grid");
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw std::invalid_argument("integrate_schrodinger: grid must be strictly increasing");
        }
    }
    silence_gsl();

    OdeContext ctx{&h, dim, Matrix::Zero(dim, dim)};
    const std::size_t n_real = static_cast<std::size_t>(2 * dim * dim);
    gsl_odeiv2_system sys{schrodinger_rhs, nullptr, n_real, &ctx};
    const double h0 = std::min(options.initial_step, grid.size() > 1 ? grid[1] - grid[0] : options.initial_step);
    std::unique_ptr<gsl_odeiv2_driver, DriverDeleter> driver(gsl_odeiv2_driver_alloc_standard_new(
        &sys, gsl_odeiv2_step_rk8pd, h0, options.rel_tol, options.rel_tol, 1.0, 0.0));
    if (!driver) {
        throw std::runtime_error("integrate_schrodinger: failed to allocate the ODE driver");
    }
    gsl_odeiv2_driver_set_hmin(driver.get(), options.min_step);

    Matrix u = Matrix::Identity(dim, dim);
    IntegratorStats stats;
    stats.rel_tol = options.rel_tol;
    double t = grid.front();
    unsigned long failed_before_reset = 0;
    observer(0, t, u);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const int status = gsl_odeiv2_driver_apply(driver.get(), &t, grid[i], reinterpret_cast<double*>(u.data()));
        if (status != GSL_SUCCESS) {
            std::ostringstream msg;
            msg << "integrate_schrodinger: "
                << (status == GSL_ENOPROG ? "step-size underflow" : gsl_strerror(status)) << " near s = " << t;
            throw IntegrationError(msg.str());
        }
        stats.steps += driver->n;  // the driver counts steps per apply call
        const double drift = unitarity_residual(u);
        stats.max_unitarity_drift = std::max(stats.max_unitarity_drift, drift);
        if (drift > options.drift_failure) {
            std::ostringstream msg;
            msg << "integrate_schrodinger: unitarity drift " << drift << " at s = " << t;
            throw IntegrationError(msg.str());
        }
        if (drift > 10.0 * options.rel_tol) {
            u = polar_unitary(u);
            ++stats.reprojections;
            failed_before_reset += driver->e->failed_steps;
            gsl_odeiv2_driver_reset(driver.get());
        }
        observer(i, grid[i], u);
    }
    stats.failed_steps = failed_before_reset + driver->e->failed_steps;
    stats.rhs_evaluations = ctx.evaluations;
    return stats;
}

PropagatorTrace integrate_schrodinger(const HamiltonianFn& h, Index dim, const std::vector<double>& grid,
                                      const IntegratorOptions& options) {
    PropagatorTrace trace;
    trace.grid = grid;
    auto& samples = trace.channels[Channel::reference];
    samples.reserve(grid.size());
    trace.stats[Channel::reference] = integrate_schrodinger(
        h, dim, grid, options, [&](std::size_t, double, const Matrix& u) { samples.push_back(u); });
    return trace;
}

PropagatorTrace integrate_schrodinger(const PerturbativeSeries& h, double lambda, int first, int last,
                                      const std::vector<double>& grid, const IntegratorOptions& options) {
    return integrate_schrodinger(series_hamiltonian(weighted_sum(h.orders, lambda, first, last)), h.dim(), grid,
                                 options);
}

HamiltonianFn series_hamiltonian(FourierSeries series) {
    auto shared = std::make_shared<const FourierSeries>(std::move(series));
    return [shared](double s, Matrix& out) {
        out.setZero();
        shared->evaluate_into(s, out);
    };
}

Matrix u_fast(const QatExpansion& expansion, double s, double lambda) {
    const Index d = expansion.dim();
    Matrix phi = Matrix::Zero(d, d);
    for (int n = 1; n <= expansion.max_order - 1; ++n) {
        if (!expansion.has_phi(n)) {
            throw std::invalid_argument("u_fast: dynamical phase order " + std::to_string(n) + " missing");
        }
        Matrix term = Matrix::Zero(d, d);
        expansion.phi[static_cast<std::size_t>(n)].evaluate_into(s, term);
        phi += std::pow(lambda, n) * term;
    }
    return expm_hermitian(phi, 1.0);
}

IntegratorStats u_eff(const QatExpansion& expansion, double lambda, const std::vector<double>& grid,
                      const IntegratorOptions& options, const SampleObserver& observer,
                      TimeParametrization param) {
    if (!(lambda > 0.0)) {
        throw std::invalid_argument("u_eff: lambda must be positive");
    }
    auto merged = std::make_shared<const FourierSeries>(
        weighted_sum(expansion.h_eff, lambda, 1, expansion.max_order));
    if (param == TimeParametrization::scaled_s) {
        HamiltonianFn h = [merged](double s, Matrix& out) {
            out.setZero();
            merged->evaluate_into(s, out);
        };
        return integrate_schrodinger(h, expansion.dim(), grid, options, observer);
    }
    // i lambda dU/dtau = H_eff(tau / lambda) U on the grid tau = lambda s.
    HamiltonianFn h = [merged, lambda](double tau, Matrix& out) {
        out.setZero();
        merged->evaluate_into(tau / lambda, out);
        out /= lambda;
    };
    std::vector<double> tau(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) tau[i] = lambda * grid[i];
    return integrate_schrodinger(h, expansion.dim(), tau, options,
                                 [&](std::size_t i, double, const Matrix& u) { observer(i, grid[i], u); });
}

PropagatorTrace u_eff(const QatExpansion& expansion, double lambda, const std::vector<double>& grid,
                      const IntegratorOptions& options, TimeParametrization param) {
    PropagatorTrace trace;
    trace.grid = grid;
    auto& samples = trace.channels[Channel::effective];
    trace.stats[Channel::effective] = u_eff(
        expansion, lambda, grid, options, [&](std::size_t, double, const Matrix& u) { samples.push_back(u); },
        param);
    return trace;
}

IntegratorStats assemble_qat(const QatExpansion& expansion, double lambda, const std::vector<double>& grid,
                             const IntegratorOptions& options, const QatObserver& observer) {
    if (expansion.max_order < 1) {
        throw std::invalid_argument("assemble_qat: expansion must have N >= 1");
    }
    const Matrix fast0_dag = u_fast(expansion, grid.front(), lambda).adjoint();
    return u_eff(expansion, lambda, grid, options, [&](std::size_t i, double s, const Matrix& eff) {
        const Matrix fast = u_fast(expansion, s, lambda);
        const Matrix qat = fast * eff * fast0_dag;
        observer(i, s, fast, eff, qat);
    });
}

PropagatorTrace assemble_qat(const QatExpansion& expansion, double lambda, const std::vector<double>& grid,
                             const IntegratorOptions& options) {
    PropagatorTrace trace;
    trace.grid = grid;
    auto& fast = trace.channels[Channel::fast];
    auto& eff = trace.channels[Channel::effective];
    auto& qat = trace.channels[Channel::qat];
    const IntegratorStats st = assemble_qat(
        expansion, lambda, grid, options,
        [&](std::size_t, double, const Matrix& f, const Matrix& e, const Matrix& q) {
            fast.push_back(f);
            eff.push_back(e);
            qat.push_back(q);
        });
    trace.stats[Channel::effective] = st;
    trace.stats[Channel::qat] = st;
    return trace;
}

}  // namespace qat
