#pragma once

#include "qat/expansion.hpp"
#include "qat/msgate.hpp"

#include <random>
#include <string>
#include <vector>

namespace qat {

struct InvariantResult {
    std::string name;
    double value{0.0};
    double tolerance{0.0};
    bool passed() const { return value <= tolerance; }
};

using InvariantReport = std::vector<InvariantResult>;

bool all_passed(const InvariantReport& report);

// Max over random s of ||[A, B](s) - [A(s), B(s)]|| / (2 |A| |B|), |A| = sum of mode norms.
InvariantResult check_series_commutator(const FourierSeries& a, const FourierSeries& b, std::mt19937_64& rng,
                                        double s_max, int samples = 20, double tol = 1e-10);

// P^2 = P, Q^2 = Q, PQ = 0, P + Q = identity, P commutes with conjugation.
InvariantResult check_projector_laws(const FourierSeries& a, double cutoff, double tol = 1e-12);

InvariantResult check_hermitian_pairing(const std::string& name, const FourierSeries& a, double tol = 1e-10);

// Homological residual, zero-mean phi, pairing and cutoff compliance for every order.
InvariantReport check_expansion(const QatExpansion& expansion, std::mt19937_64& rng, double s_max,
                                int samples = 20, double tol = 1e-10);

// Carrier (order 0) against the exact interaction Hamiltonian at random times.
InvariantResult check_carrier_commutation(const MsModel& model, std::mt19937_64& rng, double s_max,
                                          int samples = 20, double tol = 1e-10);

// Hermiticity of every built order evaluated at random times.
InvariantResult check_series_hermiticity(const PerturbativeSeries& h, std::mt19937_64& rng, double s_max,
                                         int samples = 20, double tol = 1e-12);

}  // namespace qat
