#include "qat/msgate.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace qat;

namespace {

constexpr double kPi = std::numbers::pi;

Matrix low_block(const Matrix& m, const HilbertSpec& spec, int keep) {
    std::vector<Index> idx;
    for (Index q = 0; q < spec.qubit_dim(); ++q)
        for (int n = 0; n <= keep; ++n) idx.push_back(q * spec.fock_dim() + n);
    return m(idx, idx);
}

Matrix evaluate_reference(const HamiltonianFn& h, Index dim, double s) {
    Matrix out = Matrix::Zero(dim, dim);
    h(s, out);
    return out;
}

Matrix series_at(const PerturbativeSeries& h, double lambda, int first, int last, double s) {
    return weighted_sum(h.orders, lambda, first, last).evaluate(s);
}

double truncation_error(double eta, int order) {
    const MsModel m = flat_model(eta, 1.0, 0.383, kPi / 4, 0.4, 16, order);
    const PerturbativeSeries h = build_interaction(m);
    const HamiltonianFn ref = reference_hamiltonian(m, false);
    double worst = 0.0;
    for (double s : {0.0, 0.9, 5.3}) {
        const Matrix d = series_at(h, eta, 1, order, s) - evaluate_reference(ref, m.spec().dim(), s);
        worst = std::max(worst, low_block(d, m.spec(), 3).norm());
    }
    return worst;
}

}  // namespace

TEST_CASE("pulse windows") {
    const PulseWindow w{WindowKind::sin4, 0.2};
    double sum = 0.0, peak = 0.0;
    for (const auto& [h, c] : w.harmonics()) {
        sum += c;
        peak += c * std::cos(h * kPi);
    }
    CHECK(w.harmonics().size() == 5);
    CHECK(sum == doctest::Approx(0.0).epsilon(1e-15));  // value at s = 0
    CHECK(peak == doctest::Approx(1.0));                // value at the window peak
    const double sg = 2.0 * kPi / w.omega;
    CHECK(std::abs(w.value(0.0)) < 1e-15);
    CHECK(std::abs(w.value(sg)) < 1e-15);
    CHECK(w.value(sg / 2.0) == doctest::Approx(1.0));
    for (double s : {0.3, 4.0, 17.0}) {
        double series = 0.0;
        for (const auto& [h, c] : w.harmonics()) series += c * std::cos(h * w.omega * s);
        CHECK(series == doctest::Approx(std::pow(std::sin(w.omega * s / 2.0), 4)));
    }
    // Vanishing derivatives at the edge: w(s) ~ (omega s / 2)^4.
    CHECK(w.value(1e-3) < 1e-14);
    CHECK(PulseWindow{}.value(123.0) == 1.0);
    CHECK(window_kind_from_string("sin4") == WindowKind::sin4);
    CHECK_THROWS(window_kind_from_string("gauss"));
}

TEST_CASE("shaped scenario parameters") {
    const MsModel m = shaped_scenario(0.1, 1.0);
    REQUIRE(m.tones.size() == 2);
    CHECK(m.tones[1].rabi / m.tones[0].rabi == doctest::Approx(0.7885));
    CHECK(m.tones[1].beat() == doctest::Approx(0.107));
    CHECK(m.tones[0].beat() == doctest::Approx(3.0 * 0.107));
    CHECK(m.tones[0].sideband == 1);
    CHECK(m.tones[1].sideband == 2);
    for (const auto& t : m.tones) {
        CHECK(t.window.kind == WindowKind::sin4);
        CHECK(t.window.omega == doctest::Approx(0.107 / 3.0));
    }
    CHECK(shaped_gate_time() == doctest::Approx(2.0 * kPi * 3.0 / 0.107));
    CHECK(m.tones[0].window.value(shaped_gate_time()) < 1e-15);
}

TEST_CASE("build_interaction structure") {
    const MsModel m = flat_model(0.1, 1.0, 0.383, kPi / 4, 0.4, 6, 4);
    const PerturbativeSeries h = build_interaction(m);
    const std::size_t inu = m.bases->index_of("nu"), idel = m.bases->index_of("delta1");

    SUBCASE("carrier off leaves order 0 empty") {
        CHECK(h.at(0).empty());
        MsModel c = m;
        c.include_carrier = true;
        CHECK_FALSE(build_interaction(c).at(0).empty());
    }
    SUBCASE("parity: order n carries +-Lambda_Delta + (n - 2k) nu only") {
        for (int n = 1; n <= 4; ++n) {
            for (const auto& [key, e] : h.at(n).entries()) {
                CAPTURE(n);
                // f = +-((n - 2k - 1) nu + delta), so nu + delta coefficients have the parity of n.
                CHECK(std::abs(key[idel]) == 1);
                const int shifted = key[inu] + key[idel];
                CHECK(std::abs(shifted - n) % 2 == 0);
                CHECK(std::abs(shifted) <= n);
            }
        }
    }
    SUBCASE("order 1 splits into the slow beat and the fast 2 - delta pair") {
        const FourierSeries slow = partial_average(h.at(1), 0.5);
        const FourierSeries fast = fast_part(h.at(1), 0.5);
        CHECK(slow.size() == 2);
        CHECK(fast.size() == 2);
        for (const auto& [key, e] : fast.entries()) CHECK(std::abs(std::abs(e.value) - (2.0 - 0.383)) < 1e-14);
        for (const auto& [key, e] : slow.entries()) CHECK(std::abs(std::abs(e.value) - 0.383) < 1e-14);
    }
    SUBCASE("every order is Hermitian at sampled times") {
        for (int n = 1; n <= 4; ++n)
            for (double s : {0.0, 2.2, 31.0}) CHECK(hermiticity_residual(h.at(n).evaluate(s)) < 1e-13);
    }
    SUBCASE("order 1 equals the first-order interaction") {
        const HilbertSpec spec = m.spec();
        const Matrix j = build_spin_ops(spec, kPi / 4).j_phi_y;
        const BosonOps b = build_boson_ops(spec);
        const double lp = std::exp(-0.005);
        for (double s : {0.0, 1.7, 12.0}) {
            const Complex g = std::polar(1.0, 0.383 * s + 0.4);
            const Matrix x = b.a_dag * (std::conj(g) * std::polar(1.0, 2.0 * s) + g);
            CHECK((h.at(1).evaluate(s) - (-lp * j * (x + x.adjoint()))).norm() < 1e-12);
        }
    }
}

TEST_CASE("expanded series approaches the exact Hamiltonian as eta^(N+1)") {
    for (int order : {1, 3}) {
        CAPTURE(order);
        const double e1 = truncation_error(0.1, order);
        const double e2 = truncation_error(0.05, order);
        CHECK(e1 < 10.0 * std::pow(0.1, order + 1));
        CHECK(std::log2(e1 / e2) > order + 1 - 0.2);
    }
    SUBCASE("s = 0 against the direct construction with the exact displacement") {
        const MsModel m = flat_model(0.1, 1.0, 0.383, kPi / 4, 0.0, 16, 4);
        const Matrix direct = evaluate_reference(reference_hamiltonian(m, false), m.spec().dim(), 0.0);
        const Matrix series = series_at(build_interaction(m), 0.1, 1, 4, 0.0);
        CHECK(low_block(series - direct, m.spec(), 3).norm() < 10.0 * std::pow(0.1, 5));
    }
}

TEST_CASE("carrier commutes with the interaction") {
    MsModel m = flat_model(0.1, 1.0, 0.383, kPi / 4, 0.4, 8, 2);
    m.include_carrier = true;
    const PerturbativeSeries h = build_interaction(m);
    const HamiltonianFn full = reference_hamiltonian(m, true);
    for (double s : {0.0, 0.8, 13.0}) {
        const Matrix carrier = h.at(0).evaluate(s);
        CHECK(carrier.norm() > 0.1);
        CHECK(commutator(carrier, evaluate_reference(full, m.spec().dim(), s)).norm() < 1e-10);
    }
}

TEST_CASE("sector decomposition reproduces the full interaction") {
    const MsModel m = shaped_scenario(0.1, 1.0, 6, 2);
    const HilbertSpec spec = m.spec();
    const auto sectors = sector_decomposition(qubit_spin_ops(2, m.tones[0].phi_plus).j_phi_y);
    REQUIRE(sectors.size() == 3);
    const PerturbativeSeries full = build_interaction(m);
    const HamiltonianFn full_ref = reference_hamiltonian(m, false);
    for (double s : {0.0, 20.0, 90.0}) {
        std::vector<Matrix> blocks, ref_blocks;
        for (const auto& sec : sectors) {
            blocks.push_back(series_at(build_sector_interaction(m, sec.eigenvalue), 0.1, 1, 2, s));
            ref_blocks.push_back(evaluate_reference(sector_reference_hamiltonian(m, sec.eigenvalue, false),
                                                    spec.fock_dim(), s));
        }
        CHECK((assemble_sectors(spec, sectors, blocks) - series_at(full, 0.1, 1, 2, s)).norm() < 1e-13);
        CHECK((assemble_sectors(spec, sectors, ref_blocks) - evaluate_reference(full_ref, spec.dim(), s)).norm() <
              1e-13);
    }
}

TEST_CASE("configuration errors") {
    ToneSpec t;
    t.beat_windows = 2;
    t.windowed = true;
    const MsModel m = make_model(0.1, 6, 2, {t}, 0.05);
    CHECK_THROWS_AS(build_interaction(m), MsConfigurationError);  // harmonic -2 hits the beat
    CHECK_THROWS_AS(make_model(0.1, 6, 2, {t}), MsConfigurationError);
    ToneSpec bad;
    bad.beat = -0.1;
    CHECK_THROWS_AS(make_model(0.1, 6, 2, {bad}), MsConfigurationError);
    bad.beat = 0.2;
    bad.rabi = 0.0;
    CHECK_THROWS_AS(make_model(0.1, 6, 2, {bad}), MsConfigurationError);
    bad.rabi = 1.0;
    bad.sideband = 3;
    CHECK_THROWS_AS(make_model(0.1, 6, 2, {bad}), MsConfigurationError);
    CHECK_THROWS_AS(flat_model(1.5, 1.0, 0.3, 0.0, 0.0, 6, 2), MsConfigurationError);
    CHECK_THROWS_AS(analytic_first_order(shaped_scenario(0.1, 1.0, 4, 2), 1.0), std::invalid_argument);
    const MsModel f = flat_model(0.1, 1.0, 0.383, kPi / 4, 0.0, 4, 4);
    CHECK_THROWS_AS(analytic_supplement(f, SupplementKind::h_eff, 5, 0.0), std::out_of_range);
    CHECK_THROWS_AS(analytic_supplement(f, SupplementKind::phi, 4, 0.0), std::out_of_range);
}

TEST_CASE("windowed model in the slow-window limit") {
    // Modewise: each flat mode splits into five harmonics weighted by c_h; near the window
    // peak the windowed Hamiltonian approaches the flat one.
    const double omega = 1e-4;
    ToneSpec t;
    t.beat = 0.383;
    t.phi_plus = kPi / 4;
    t.windowed = true;
    const MsModel win = make_model(0.1, 6, 2, {t}, omega);
    const MsModel flat = flat_model(0.1, 1.0, 0.383, kPi / 4, 0.0, 6, 2);
    const PerturbativeSeries hw = build_interaction(win), hf = build_interaction(flat);
    CHECK(hw.at(1).size() == 5 * hf.at(1).size());
    const double s = kPi / omega + 3.0;
    for (int n = 1; n <= 2; ++n) {
        const Matrix a = hw.at(n).evaluate(s), b = hf.at(n).evaluate(s);
        CHECK((a - b).norm() / b.norm() < 1e-6);
    }
}

TEST_CASE("first-order closed form") {
    const double eta = 0.1, delta = 0.383;
    const MsModel m = flat_model(eta, 1.0, delta, kPi / 4, 0.0, 20, 1);
    SUBCASE("tau = 0 is the identity") {
        const FirstOrderSolution sol = analytic_first_order(m, 0.0);
        CHECK(std::abs(sol.alpha_ms) == 0.0);
        CHECK(sol.theta == 0.0);
        CHECK((sol.u - Matrix::Identity(sol.u.rows(), sol.u.cols())).norm() < 1e-14);
    }
    SUBCASE("closed loop at Lambda_eps tau = 2 pi") {
        const double tau = 2.0 * kPi * eta / delta;
        const FirstOrderSolution sol = analytic_first_order(m, tau);
        CHECK(std::abs(sol.alpha_ms) < 1e-14);
        const double lp2 = std::exp(-eta * eta);
        CHECK(sol.theta == doctest::Approx(lp2 * tau * eta / delta));
    }
    SUBCASE("theta = pi/2 entangles |gg> into |phi+>") {
        // Choose the Rabi coupling so one loop closes with theta = pi/2.
        const double tau = 2.0 * kPi * eta / delta;
        const double rabi = std::sqrt(kPi / 2.0 * delta / (eta * tau)) * std::exp(eta * eta / 2.0);
        const MsModel g = flat_model(eta, rabi, delta, kPi / 4, 0.0, 8, 1);
        const FirstOrderSolution sol = analytic_first_order(g, tau);
        CHECK(sol.theta == doctest::Approx(kPi / 2.0));
        const HilbertSpec spec = g.spec();
        Vector gg = Vector::Zero(4);
        gg(3) = 1.0;
        Vector phi_plus = Vector::Zero(4);
        phi_plus(0) = 1.0 / std::sqrt(2.0);
        phi_plus(3) = 1.0 / std::sqrt(2.0);
        const Vector out = sol.u * product_state(gg, fock_state(8, 0));
        double pop = 0.0;
        for (int n = 0; n <= 8; ++n) {
            Complex amp = 0.0;
            for (Index q = 0; q < 4; ++q) amp += std::conj(phi_plus(q)) * out(q * spec.fock_dim() + n);
            pop += std::norm(amp);
        }
        CHECK(pop == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("closed-form supplement identities") {
    const double eta = 0.1, delta = 0.383;
    const MsModel m = flat_model(eta, 1.0, delta, kPi / 4, 0.3, 8, 4);
    const HilbertSpec spec = m.spec();
    const Matrix j = build_spin_ops(spec, kPi / 4).j_phi_y;
    const double lp = std::exp(-eta * eta / 2.0);
    SUBCASE("order-2 H_eff is the constant light shift") {
        const Matrix expected = lp * lp / (delta - 2.0) * j * j;
        for (double s : {0.0, 3.0}) CHECK((analytic_supplement(m, SupplementKind::h_eff, 2, s) - expected).norm() < 1e-14);
    }
    SUBCASE("order-2 Phi carries the J^2 mode of the stated amplitude") {
        const double amp = lp * lp / ((delta - 1.0) * (delta - 2.0));
        const double s = 0.7;
        const Matrix p0 = analytic_supplement(m, SupplementKind::phi, 2, s);
        // Project onto J^2 in the vacuum corner, where the a†a and a†^2 terms vanish.
        const Index d = spec.fock_dim();
        const Matrix j2 = j * j;
        const Complex got = p0(0, 3 * d) / j2(0, 3 * d);
        CHECK(std::abs(got - amp * std::sin(2.0 * ((delta - 1.0) * s + 0.3))) < 1e-14);
    }
}

TEST_CASE("counter-rotating amplitude") {
    const double eta = 0.1, delta = 0.383;
    const MsModel m = flat_model(eta, 1.0, delta, kPi / 4, 0.3, 8, 2);
    const double lp = std::exp(-eta * eta / 2.0);
    SUBCASE("flat amplitude") {
        for (double s : {0.0, 1.0, 40.0}) CHECK(std::abs(alpha_cr(m, s)) == doctest::Approx(eta * lp / (2.0 - delta)));
    }
    SUBCASE("lambda Phi1 = J (i alpha_cr a† + h.c.)") {
        const QatExpansion ex = run(build_interaction(m), 2, 0.5);
        const HilbertSpec spec = m.spec();
        const Matrix j = build_spin_ops(spec, kPi / 4).j_phi_y;
        const BosonOps b = build_boson_ops(spec);
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(0.0, 100.0);
        for (int i = 0; i < 10; ++i) {
            const double s = u(rng);
            const Matrix x = kI * alpha_cr(m, s) * b.a_dag;
            CHECK((eta * ex.phi[1].evaluate(s) - j * (x + x.adjoint())).norm() < 1e-13);
        }
    }
    SUBCASE("windowed harmonics") {
        const MsModel w = shaped_scenario(eta, 1.0, 4, 2);
        const double omega = w.tones[0].window.omega;
        CHECK(std::abs(alpha_cr(w, 0.0)) < 0.01 * eta);  // window weights sum to zero at the edge
        CHECK(std::abs(alpha_cr(w, kPi / omega)) > 0.9 * eta * lp / (2.0 - w.tones[0].beat()));
    }
}
