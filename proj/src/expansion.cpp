#include "qat/expansion.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <iomanip>
#include <sstream>

namespace qat {

namespace {

double binomial(int n, int k) {
    return std::round(std::tgamma(n + 1.0) / (std::tgamma(k + 1.0) * std::tgamma(n - k + 1.0)));
}

// Resolves S_k^(j) (or T_k^(j)) from the caller's tables, the expansion's cached
// tables, or by recursion.
class Recurrence {
public:
    Recurrence(const PerturbativeSeries& h, const QatExpansion& ex, RecurrenceTables& local)
        : h_(h), ex_(ex), local_(local) {}

    const FourierSeries& get(bool is_t, int k, int j) {
        if (k == 0) {
            if (is_t) {
                if (j >= static_cast<int>(ex_.h_eff.size()) || j < 1) {
                    throw std::invalid_argument("auxiliary_hamiltonian: effective Hamiltonian order " +
                                                std::to_string(j) + " is missing");
                }
                return ex_.h_eff[static_cast<std::size_t>(j)];
            }
            return h_.at(j);
        }
        auto& own = is_t ? local_.t : local_.s;
        const auto& cached = is_t ? ex_.tables.t : ex_.tables.s;
        const auto key = std::make_pair(k, j);
        if (auto it = own.find(key); it != own.end()) return it->second;
        if (auto it = cached.find(key); it != cached.end()) return it->second;

        FourierSeries sum(h_.bases(), h_.dim());
        for (int m = 1; m <= j - k; ++m) {
            if (!ex_.has_phi(m)) {
                throw std::invalid_argument("auxiliary_hamiltonian: dynamical phase order " +
                                            std::to_string(m) + " is missing");
            }
            FourierSeries c = series_commutator(ex_.phi[static_cast<std::size_t>(m)], get(is_t, k - 1, j - m));
            c *= kI;
            sum += c;
        }
        return own.emplace(key, canonicalize(sum)).first->second;
    }

private:
    const PerturbativeSeries& h_;
    const QatExpansion& ex_;
    RecurrenceTables& local_;
};

FourierSeries auxiliary_impl(int n, const PerturbativeSeries& h, const QatExpansion& so_far,
                             RecurrenceTables& tables) {
    if (n < 1) {
        throw std::invalid_argument("auxiliary_hamiltonian: order must be >= 1");
    }
    if (n > h.max_order()) {
        throw std::invalid_argument("auxiliary_hamiltonian: Hamiltonian order " + std::to_string(n) +
                                    " is not populated");
    }
    if (so_far.solved_orders() < n - 1) {
        throw std::invalid_argument("auxiliary_hamiltonian: lower orders missing (solved " +
                                    std::to_string(so_far.solved_orders()) + ", need " +
                                    std::to_string(n - 1) + ")");
    }
    Recurrence rec(h, so_far, tables);
    FourierSeries aux = h.at(n);
    for (int k = 1; k <= n - 1; ++k) {
        const double c = bernoulli(k) / std::tgamma(k + 1.0);
        if (c == 0.0) continue;
        FourierSeries s_k = rec.get(false, k, n);
        s_k *= c * ((k % 2 == 0) ? 1.0 : -1.0);
        FourierSeries t_k = rec.get(true, k, n);
        t_k *= -c;
        aux += s_k;
        aux += t_k;
    }
    return canonicalize(aux);
}

void fnv_mix(std::uint64_t& h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
}

void check_order_invariants(int n, const FourierSeries& phi, const FourierSeries& h_eff, double cutoff,
                            double pairing_tol, bool with_phi) {
    for (const auto& [key, e] : h_eff.entries()) {
        if (std::abs(e.value) > cutoff) {
            throw QatInvariantError(n, "h_eff cutoff", "mode at frequency " + std::to_string(e.value) +
                                                          " exceeds the cutoff");
        }
    }
    if (h_eff.hermitian_pairing_residual() > pairing_tol) {
        throw QatInvariantError(n, "hermitian pairing",
                                "h_eff residual " + std::to_string(h_eff.hermitian_pairing_residual()));
    }
    if (!with_phi) return;
    if (!phi.empty() && phi.min_abs_frequency() <= cutoff) {
        throw QatInvariantError(n, "zero-mean phi", "phi carries a slow or constant mode");
    }
    if (phi.hermitian_pairing_residual() > pairing_tol) {
        throw QatInvariantError(n, "hermitian pairing",
                                "phi residual " + std::to_string(phi.hermitian_pairing_residual()));
    }
}

}  // namespace

double bernoulli(int k) {
    if (k < 0) {
        throw std::invalid_argument("bernoulli: index must be >= 0");
    }
    std::vector<double> b(static_cast<std::size_t>(k) + 1, 0.0);
    b[0] = 1.0;
    for (int m = 1; m <= k; ++m) {
        double acc = 0.0;
        for (int j = 0; j < m; ++j) acc += binomial(m + 1, j) * b[static_cast<std::size_t>(j)];
        b[static_cast<std::size_t>(m)] = -acc / (m + 1);
    }
    const double v = b[static_cast<std::size_t>(k)];
    return (k >= 3 && k % 2 == 1) ? 0.0 : v;
}

bool QatExpansion::has_phi(int n) const {
    return n >= 1 && n < static_cast<int>(phi.size()) && phi[static_cast<std::size_t>(n)].dim() > 0;
}

QatInvariantError::QatInvariantError(int order, std::string invariant, const std::string& detail)
    : std::runtime_error("qat order " + std::to_string(order) + ": invariant '" + invariant +
                         "' violated: " + detail),
      order_(order),
      invariant_(std::move(invariant)) {}

FourierSeries auxiliary_hamiltonian(int n, const PerturbativeSeries& h, const QatExpansion& so_far) {
    RecurrenceTables local;
    return auxiliary_impl(n, h, so_far, local);
}

std::pair<FourierSeries, FourierSeries> solve_order(int n, const PerturbativeSeries& h,
                                                    const QatExpansion& so_far, double cutoff) {
    const FourierSeries aux = auxiliary_hamiltonian(n, h, so_far);
    return {canonicalize(antiderivative(fast_part(aux, cutoff))), canonicalize(partial_average(aux, cutoff))};
}

QatExpansion run(const PerturbativeSeries& h, int max_order, double cutoff) {
    QatOptions options;
    options.cutoff = cutoff;
    return run(h, max_order, options);
}

QatExpansion run(const PerturbativeSeries& h, int max_order, const QatOptions& options) {
    if (max_order < 1) {
        throw std::invalid_argument("qat::run: max order must be >= 1");
    }
    if (h.max_order() < max_order) {
        throw std::invalid_argument("qat::run: Hamiltonian orders 1.." + std::to_string(max_order) +
                                    " must be populated");
    }
    if (!(options.cutoff > 0.0 && options.cutoff < 1.0)) {
        throw std::invalid_argument("qat::run: cutoff must lie in (0, 1)");
    }
    if (!h.at(0).empty() && !options.ignore_carrier) {
        throw std::invalid_argument(
            "qat::run: order 0 (carrier) is populated; remove it or set ignore_carrier");
    }
    for (int n = 1; n <= max_order; ++n) {
        const double r = h.at(n).hermitian_pairing_residual();
        if (r > options.pairing_tol) {
            throw QatInvariantError(n, "hermitian input", "pairing residual " + std::to_string(r));
        }
    }

    QatExpansion ex;
    ex.max_order = max_order;
    ex.cutoff = options.cutoff;
    ex.provenance.input_hash = hash_series(h, 1, max_order);
    ex.provenance.cutoff = options.cutoff;
    ex.provenance.rel_amp_tol = options.rel_amp_tol;
    ex.provenance.pairing_tol = options.pairing_tol;
    ex.provenance.carrier_ignored = !h.at(0).empty();

    const FourierSeries empty(h.bases(), h.dim());
    ex.phi.push_back(empty);
    ex.h_eff.push_back(empty);
    ex.aux.push_back(empty);

    for (int n = 1; n <= max_order; ++n) {
        RecurrenceTables fresh;
        FourierSeries aux = auxiliary_impl(n, h, ex, fresh);
        for (auto& [key, v] : fresh.s) ex.tables.s.emplace(key, std::move(v));
        for (auto& [key, v] : fresh.t) ex.tables.t.emplace(key, std::move(v));

        const double tol = options.rel_amp_tol * aux.max_coeff_norm();
        FourierSeries h_eff = canonicalize(partial_average(aux, options.cutoff), tol);
        const bool with_phi = n < max_order || options.phi_at_max_order;
        FourierSeries phi = with_phi ? canonicalize(antiderivative(fast_part(aux, options.cutoff)), tol)
                                     : FourierSeries();
        check_order_invariants(n, phi, h_eff, options.cutoff, options.pairing_tol, with_phi);

        ex.aux.push_back(std::move(aux));
        ex.h_eff.push_back(std::move(h_eff));
        ex.phi.push_back(std::move(phi));
    }
    if (!options.keep_tables) {
        ex.tables = {};
    }
    return ex;
}

std::string hash_series(const PerturbativeSeries& h, int first, int last) {
    std::uint64_t d = 1469598103934665603ULL;
    for (int n = first; n <= last; ++n) {
        fnv_mix(d, &n, sizeof(n));
        for (const auto& [key, e] : h.at(n).entries()) {
            fnv_mix(d, key.data(), key.size() * sizeof(int));
            fnv_mix(d, e.coeff.data(), static_cast<std::size_t>(e.coeff.size()) * sizeof(Complex));
        }
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << d;
    return out.str();
}

QatExpansion truncated(const QatExpansion& expansion, int max_order) {
    if (max_order < 1 || max_order > expansion.max_order) {
        throw std::invalid_argument("truncated: order " + std::to_string(max_order) + " outside [1, " +
                                    std::to_string(expansion.max_order) + "]");
    }
    QatExpansion out;
    out.max_order = max_order;
    out.cutoff = expansion.cutoff;
    out.provenance = expansion.provenance;
    const auto keep = static_cast<std::size_t>(max_order) + 1;
    out.h_eff.assign(expansion.h_eff.begin(), expansion.h_eff.begin() + static_cast<long>(keep));
    out.phi.assign(expansion.phi.begin(),
                   expansion.phi.begin() + static_cast<long>(std::min(keep, expansion.phi.size())));
    if (!expansion.aux.empty()) {
        out.aux.assign(expansion.aux.begin(), expansion.aux.begin() + static_cast<long>(keep));
    }
    return out;
}

}  // namespace qat
