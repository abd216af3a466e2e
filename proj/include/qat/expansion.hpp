#pragma once

#include "qat/fourier.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qat {

// Bernoulli numbers with B_1 = -1/2 (the convention that yields +1/2 [iPhi1, H1 + Heff1] at order 2).
double bernoulli(int k);

struct QatOptions {
    double cutoff{0.5};
    double rel_amp_tol{kDefaultRelativeAmpTol};
    bool phi_at_max_order{true};  // diagnostic only; never used in propagator assembly
    bool ignore_carrier{false};   // skip a populated order 0 instead of rejecting it
    double pairing_tol{1e-10};
    bool keep_tables{false};
};

struct QatProvenance {
    std::string input_hash;
    double cutoff{0.0};
    double rel_amp_tol{0.0};
    double pairing_tol{0.0};
    std::string bernoulli_convention{"B1 = -1/2"};
    bool carrier_ignored{false};
};

// Memoized nested commutators S_k^(j) and T_k^(j), keyed by (k, j).
struct RecurrenceTables {
    std::map<std::pair<int, int>, FourierSeries> s;
    std::map<std::pair<int, int>, FourierSeries> t;
};

struct QatExpansion {
    int max_order{0};
    double cutoff{0.5};
    // Index n holds order n; index 0 is an empty placeholder.
    std::vector<FourierSeries> phi;
    std::vector<FourierSeries> h_eff;
    std::vector<FourierSeries> aux;
    RecurrenceTables tables;
    QatProvenance provenance;

    int solved_orders() const { return h_eff.empty() ? 0 : static_cast<int>(h_eff.size()) - 1; }
    bool has_phi(int n) const;
    const BasesPtr& bases() const { return h_eff.at(0).bases(); }
    Index dim() const { return h_eff.at(0).dim(); }
};

class QatInvariantError : public std::runtime_error {
public:
    QatInvariantError(int order, std::string invariant, const std::string& detail);
    int order() const { return order_; }
    const std::string& invariant() const { return invariant_; }

private:
    int order_;
    std::string invariant_;
};

FourierSeries auxiliary_hamiltonian(int n, const PerturbativeSeries& h, const QatExpansion& so_far);

// Returns (phi_n, h_eff_n).
std::pair<FourierSeries, FourierSeries> solve_order(int n, const PerturbativeSeries& h,
                                                    const QatExpansion& so_far, double cutoff);

QatExpansion run(const PerturbativeSeries& h, int max_order, double cutoff);
QatExpansion run(const PerturbativeSeries& h, int max_order, const QatOptions& options);

// View of an expansion at a lower order N (phi orders up to N, h_eff orders up to N).
QatExpansion truncated(const QatExpansion& expansion, int max_order);

// Stable FNV-1a digest of orders [first, last] (keys and coefficient bits).
std::string hash_series(const PerturbativeSeries& h, int first, int last);

}  // namespace qat
