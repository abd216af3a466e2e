#include "qat/invariants.hpp"

#include <algorithm>
#include <cmath>

namespace qat {

namespace {

// sum of mode norms: a time-independent bound on sup_s ||A(s)||.
double mode_norm_sum(const FourierSeries& a) {
    double acc = 0.0;
    for (const auto& [key, e] : a.entries()) acc += e.coeff.norm();
    return acc;
}

double series_distance(const FourierSeries& a, const FourierSeries& b) {
    FourierSeries d = a;
    d -= b;
    double worst = 0.0;
    for (const auto& [key, e] : d.entries()) worst = std::max(worst, e.coeff.norm());
    return worst;
}

}  // namespace

bool all_passed(const InvariantReport& report) {
    return std::all_of(report.begin(), report.end(), [](const InvariantResult& r) { return r.passed(); });
}

InvariantResult check_series_commutator(const FourierSeries& a, const FourierSeries& b, std::mt19937_64& rng,
                                        double s_max, int samples, double tol) {
    const FourierSeries c = series_commutator(a, b);
    // Windowed series nearly vanish at the pulse edges, so the pointwise norms are a
    // poor scale; the mode-sum bound keeps the ratio a roundoff measure.
    const double scale = std::max(2.0 * mode_norm_sum(a) * mode_norm_sum(b), 1e-300);
    std::uniform_real_distribution<double> dist(0.0, s_max);
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double s = dist(rng);
        const Matrix as = a.evaluate(s);
        const Matrix bs = b.evaluate(s);
        worst = std::max(worst, (c.evaluate(s) - commutator(as, bs)).norm() / scale);
    }
    return {"series commutator equivalence", worst, tol};
}

InvariantResult check_projector_laws(const FourierSeries& a, double cutoff, double tol) {
    const FourierSeries p = partial_average(a, cutoff);
    const FourierSeries q = fast_part(a, cutoff);
    const double scale = std::max(a.max_coeff_norm(), 1e-300);
    double worst = 0.0;
    worst = std::max(worst, series_distance(partial_average(p, cutoff), p));
    worst = std::max(worst, series_distance(fast_part(q, cutoff), q));
    worst = std::max(worst, partial_average(q, cutoff).max_coeff_norm());
    worst = std::max(worst, fast_part(p, cutoff).max_coeff_norm());
    worst = std::max(worst, series_distance(p + q, a));
    worst = std::max(worst, series_distance(partial_average(a.adjoint(), cutoff), p.adjoint()));
    return {"partial-average projector laws", worst / scale, tol};
}

InvariantResult check_hermitian_pairing(const std::string& name, const FourierSeries& a, double tol) {
    return {"hermitian pairing (" + name + ")", a.hermitian_pairing_residual(), tol};
}

InvariantReport check_expansion(const QatExpansion& ex, std::mt19937_64& rng, double s_max, int samples,
                                double tol) {
    InvariantReport report;
    std::uniform_real_distribution<double> dist(0.0, s_max);
    for (int n = 1; n <= ex.max_order; ++n) {
        const std::string ord = "order " + std::to_string(n);
        const auto& h = ex.h_eff[static_cast<std::size_t>(n)];
        report.push_back(check_hermitian_pairing("h_eff " + ord, h, tol));
        report.push_back({"h_eff cutoff compliance (" + ord + ")",
                          h.empty() ? 0.0 : std::max(0.0, h.max_abs_frequency() - ex.cutoff), 0.0});
        if (!ex.has_phi(n)) continue;
        const auto& phi = ex.phi[static_cast<std::size_t>(n)];
        report.push_back(check_hermitian_pairing("phi " + ord, phi, tol));
        report.push_back({"zero-mean phi (" + ord + ")", partial_average(phi, ex.cutoff).max_coeff_norm(), 0.0});
        if (n < static_cast<int>(ex.aux.size())) {
            const auto& aux = ex.aux[static_cast<std::size_t>(n)];
            double worst = 0.0;
            for (int i = 0; i < samples; ++i) {
                const double s = dist(rng);
                const Matrix lhs = phi.evaluate_derivative(s) + h.evaluate(s);
                const Matrix rhs = aux.evaluate(s);
                worst = std::max(worst, (lhs - rhs).norm() / std::max(1.0, rhs.norm()));
            }
            report.push_back({"homological residual (" + ord + ")", worst, tol});
        }
    }
    return report;
}

InvariantResult check_carrier_commutation(const MsModel& model, std::mt19937_64& rng, double s_max, int samples,
                                          double tol) {
    MsModel with_carrier = model;
    with_carrier.include_carrier = true;
    with_carrier.max_order = 1;
    const PerturbativeSeries h = build_interaction(with_carrier);
    const HamiltonianFn full = reference_hamiltonian(model, true);
    std::uniform_real_distribution<double> dist(0.0, s_max);
    Matrix hs(model.spec().dim(), model.spec().dim());
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double s = dist(rng);
        const Matrix c = h.at(0).evaluate(s);
        full(s, hs);
        const double scale = std::max(c.norm() * hs.norm(), 1e-300);
        worst = std::max(worst, commutator(c, hs).norm() / scale);
    }
    return {"carrier commutation", worst, tol};
}

InvariantResult check_series_hermiticity(const PerturbativeSeries& h, std::mt19937_64& rng, double s_max,
                                         int samples, double tol) {
    std::uniform_real_distribution<double> dist(0.0, s_max);
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double s = dist(rng);
        for (const auto& order : h.orders) {
            const Matrix m = order.evaluate(s);
            worst = std::max(worst, hermiticity_residual(m) / std::max(1.0, m.norm()));
        }
    }
    return {"hermiticity of built orders", worst, tol};
}

}  // namespace qat
