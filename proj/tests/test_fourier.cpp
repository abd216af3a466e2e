#include "qat/diagnostics.hpp"
#include "qat/fourier.hpp"
#include "qat/serialize.hpp"

#include <doctest.h>

#include <random>

using namespace qat;

namespace {

Matrix random_matrix(Index d, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix m(d, d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) m(i, j) = Complex(n(rng), n(rng));
    return m;
}

BasesPtr two_bases() { return make_bases({{"nu", 1.0}, {"delta", 0.383}}); }

// Random Hermitian-paired series with `modes` pairs plus a Hermitian constant.
FourierSeries random_series(const BasesPtr& bases, Index d, int modes, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> c(-3, 3);
    FourierSeries s(bases, d);
    const Matrix h = random_matrix(d, rng);
    s.add(FrequencyVector::zero(bases), 0.5 * (h + h.adjoint()));
    for (int k = 0; k < modes; ++k) {
        FrequencyVector f(bases, {c(rng), c(rng)});
        if (f.is_zero()) continue;
        s.add_hermitian(f, random_matrix(d, rng));
    }
    return s;
}

double series_eval_distance(const FourierSeries& a, const FourierSeries& b, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 50.0);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        const double s = u(rng);
        worst = std::max(worst, (a.evaluate(s) - b.evaluate(s)).norm());
    }
    return worst;
}

}  // namespace

TEST_CASE("base frequencies and frequency vectors") {
    const BasesPtr b = two_bases();
    CHECK(b->index_of("delta") == 1);
    CHECK_THROWS_AS(make_bases({{"nu", 1.0}, {"nu", 2.0}}), std::invalid_argument);
    CHECK_THROWS_AS(make_bases({{"nu", std::nan("")}}), std::invalid_argument);

    const FrequencyVector f(b, {2, -1});
    CHECK(f.value() == doctest::Approx(2.0 - 0.383));
    CHECK((-f).coeffs() == std::vector<int>{-2, 1});
    CHECK((-f).value() == doctest::Approx(-f.value()));
    CHECK((f + FrequencyVector::unit(b, "delta")).coeffs() == std::vector<int>{2, 0});
    CHECK((f * 3).value() == doctest::Approx(3.0 * f.value()));
    CHECK(f.to_string() == "2 nu - delta");
    CHECK(FrequencyVector::zero(b).is_zero());
    CHECK(FrequencyVector::zero(b).to_string() == "0");
}

TEST_CASE("series_commutator") {
    std::mt19937_64 rng(11);
    const BasesPtr b = two_bases();
    const Index d = 4;

    SUBCASE("[A, A] = 0 for a single mode") {
        FourierSeries a(b, d);
        a.add(FrequencyVector(b, {1, 0}), random_matrix(d, rng));
        CHECK(series_commutator(a, a).empty());
    }
    SUBCASE("commuting coefficients give the zero series") {
        Matrix diag1 = Matrix::Zero(d, d), diag2 = Matrix::Zero(d, d);
        for (Index i = 0; i < d; ++i) {
            diag1(i, i) = 1.0 + i;
            diag2(i, i) = Complex(0.5, -i);
        }
        FourierSeries a(b, d), c(b, d);
        a.add(FrequencyVector(b, {1, 0}), diag1);
        c.add(FrequencyVector(b, {0, 1}), diag2);
        CHECK(series_commutator(a, c).empty());
    }
    SUBCASE("two single modes combine at Lambda1 + Lambda2 with coefficient [h1, h2]") {
        const Matrix h1 = random_matrix(d, rng), h2 = random_matrix(d, rng);
        FourierSeries a(b, d), c(b, d);
        a.add(FrequencyVector(b, {2, -1}), h1);
        c.add(FrequencyVector(b, {-1, 3}), h2);
        const FourierSeries r = series_commutator(a, c);
        REQUIRE(r.size() == 1);
        const Matrix* coeff = r.find(FrequencyVector(b, {1, 2}));
        REQUIRE(coeff != nullptr);
        CHECK((*coeff - commutator(h1, h2)).norm() < 1e-13);
        for (double s : {0.0, 1.3, 17.0}) {
            CHECK((r.evaluate(s) - commutator(a.evaluate(s), c.evaluate(s))).norm() < 1e-12);
        }
    }
    SUBCASE("time-domain equivalence on random multi-mode series") {
        const FourierSeries a = random_series(b, 6, 5, rng);
        const FourierSeries c = random_series(b, 6, 4, rng);
        const FourierSeries r = series_commutator(a, c);
        std::uniform_real_distribution<double> u(0.0, 100.0);
        for (int i = 0; i < 20; ++i) {
            const double s = u(rng);
            const Matrix as = a.evaluate(s), cs = c.evaluate(s);
            CHECK((r.evaluate(s) - commutator(as, cs)).norm() <= 1e-10 * 2.0 * as.norm() * cs.norm());
        }
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(series_commutator(FourierSeries(b, 3), FourierSeries(b, 4)), std::invalid_argument);
    }
}

TEST_CASE("partial_average and fast_part") {
    std::mt19937_64 rng(5);
    const BasesPtr b = two_bases();
    const FourierSeries a = random_series(b, 3, 8, rng);

    SUBCASE("classification examples") {
        FourierSeries s(b, 2);
        const Matrix h = random_matrix(2, rng);
        s.add(FrequencyVector::zero(b), h + h.adjoint());
        s.add_hermitian(FrequencyVector(b, {2, -1}), h);  // 2 nu - delta = 1.617
        s.add_hermitian(FrequencyVector(b, {0, 1}), h);   // delta = 0.383
        const FourierSeries slow = partial_average(s, 0.5);
        CHECK(slow.find(FrequencyVector::zero(b)) != nullptr);
        CHECK(slow.find(FrequencyVector(b, {0, 1})) != nullptr);
        CHECK(slow.find(FrequencyVector(b, {0, -1})) != nullptr);
        CHECK(slow.find(FrequencyVector(b, {2, -1})) == nullptr);
        CHECK(slow.size() == 3);
        const FourierSeries fast = fast_part(s, 0.5);
        CHECK(fast.size() == 2);
        CHECK(fast.find(FrequencyVector(b, {-2, 1})) != nullptr);
    }
    SUBCASE("constant series has an empty fast part") {
        FourierSeries c(b, 3);
        c.add(FrequencyVector::zero(b), Matrix::Identity(3, 3));
        CHECK(fast_part(c, 0.5).empty());
        CHECK(partial_average(c, 0.5).size() == 1);
    }
    SUBCASE("split and recombine is exact modewise") {
        FourierSeries sum = partial_average(a, 0.5) + fast_part(a, 0.5);
        REQUIRE(sum.size() == a.size());
        for (const auto& [key, e] : a.entries()) CHECK((*sum.find(key) - e.coeff).norm() == 0.0);
    }
    SUBCASE("projector laws") {
        const FourierSeries p = partial_average(a, 0.5);
        const FourierSeries q = fast_part(a, 0.5);
        CHECK(partial_average(p, 0.5).size() == p.size());
        CHECK(fast_part(q, 0.5).size() == q.size());
        CHECK(partial_average(q, 0.5).empty());
        CHECK(fast_part(p, 0.5).empty());
        // Commutes with series conjugation.
        const FourierSeries lhs = partial_average(a.adjoint(), 0.5);
        const FourierSeries rhs = partial_average(a, 0.5).adjoint();
        CHECK(series_eval_distance(lhs, rhs, rng) < 1e-12);
    }
    SUBCASE("linearity") {
        const FourierSeries c = random_series(b, 3, 6, rng);
        const FourierSeries lhs = partial_average(a + Complex(2.0, -1.0) * c, 0.5);
        const FourierSeries rhs = partial_average(a, 0.5) + Complex(2.0, -1.0) * partial_average(c, 0.5);
        CHECK(series_eval_distance(lhs, rhs, rng) < 1e-11);
    }
    SUBCASE("cutoff must lie in (0, 1)") {
        CHECK_THROWS_AS(partial_average(a, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(partial_average(a, 1.0), std::invalid_argument);
    }
    SUBCASE("fragile classification is reported") {
        const BasesPtr edge = make_bases({{"nu", 1.0}, {"x", 0.5 + 1e-8}});
        FourierSeries s(edge, 2);
        s.add_hermitian(FrequencyVector(edge, {0, 1}), Matrix::Identity(2, 2));
        diag::ScopedCapture capture;
        (void)partial_average(s, 0.5);
        CHECK(!capture.warnings().empty());
    }
}

TEST_CASE("antiderivative") {
    std::mt19937_64 rng(3);
    const BasesPtr b = two_bases();

    SUBCASE("single mode at Lambda = 2 maps h to -i h / 2") {
        FourierSeries s(b, 2);
        const Matrix h = random_matrix(2, rng);
        s.add(FrequencyVector(b, {2, 0}), h);
        const FourierSeries p = antiderivative(s);
        CHECK((*p.find(FrequencyVector(b, {2, 0})) - (-kI * h / 2.0)).norm() < 1e-15);
    }
    SUBCASE("derivative reproduces the input") {
        const FourierSeries f = fast_part(random_series(b, 4, 8, rng), 0.5);
        const FourierSeries p = antiderivative(f);
        for (double s : {0.0, 0.7, 12.5, 33.0}) {
            CHECK((p.evaluate_derivative(s) - f.evaluate(s)).norm() < 1e-12 * std::max(1.0, f.evaluate(s).norm()));
        }
        CHECK(partial_average(p, 0.5).empty());  // zero mean
    }
    SUBCASE("constant modes are rejected") {
        FourierSeries s(b, 2);
        s.add(FrequencyVector::zero(b), Matrix::Identity(2, 2));
        CHECK_THROWS_AS(antiderivative(s), std::invalid_argument);
    }
}

TEST_CASE("evaluate") {
    std::mt19937_64 rng(9);
    const BasesPtr b = two_bases();
    CHECK(FourierSeries(b, 3).evaluate(1.0).norm() == 0.0);
    const FourierSeries a = random_series(b, 5, 6, rng);
    for (double s : {0.0, 2.0, 41.0}) CHECK(hermiticity_residual(a.evaluate(s)) < 1e-12);
    CHECK(a.hermitian_pairing_residual() == 0.0);
    // linear
    const FourierSeries c = random_series(b, 5, 3, rng);
    CHECK(((a + c).evaluate(1.7) - a.evaluate(1.7) - c.evaluate(1.7)).norm() < 1e-12);
    CHECK((evaluate(a, 0.3) - a.evaluate(0.3)).norm() == 0.0);
}

TEST_CASE("canonicalize") {
    std::mt19937_64 rng(21);
    const BasesPtr b = two_bases();
    const FourierSeries a = random_series(b, 4, 6, rng);

    SUBCASE("idempotent") {
        const FourierSeries once = canonicalize(a);
        const FourierSeries twice = canonicalize(once);
        REQUIRE(once.size() == twice.size());
        for (const auto& [key, e] : once.entries()) CHECK((*twice.find(key) - e.coeff).norm() == 0.0);
    }
    SUBCASE("equal frequencies merge") {
        FourierSeries s(b, 2);
        const Matrix h1 = random_matrix(2, rng), h2 = random_matrix(2, rng);
        s.add(FrequencyVector(b, {1, 1}), h1);
        s.add(FrequencyVector(b, {1, 1}), h2);
        CHECK(s.size() == 1);
        CHECK((*s.find(FrequencyVector(b, {1, 1})) - (h1 + h2)).norm() < 1e-15);
    }
    SUBCASE("amp_tol = 0 preserves evaluation") {
        CHECK(series_eval_distance(canonicalize(a, 0.0), a, rng) == 0.0);
    }
    SUBCASE("pairs are pruned together") {
        FourierSeries s(b, 2);
        s.add_hermitian(FrequencyVector(b, {1, 0}), Matrix::Identity(2, 2));
        s.add_hermitian(FrequencyVector(b, {0, 1}), 1e-20 * Matrix::Identity(2, 2));
        const FourierSeries c = canonicalize(s);
        CHECK(c.size() == 2);
        CHECK(c.hermitian_pairing_residual() == 0.0);
    }
}

TEST_CASE("weighted_sum") {
    const BasesPtr b = two_bases();
    PerturbativeSeries h(b, 2, 2);
    h.at(1).add_hermitian(FrequencyVector(b, {1, 0}), Matrix::Identity(2, 2));
    h.at(2).add(FrequencyVector::zero(b), Matrix::Identity(2, 2));
    const FourierSeries w = weighted_sum(h.orders, 0.1, 1, 2);
    CHECK((w.evaluate(0.0) - (0.2 + 0.01) * Matrix::Identity(2, 2)).norm() < 1e-15);
    CHECK(h.max_order() == 2);
}

TEST_CASE("series JSON round trip") {
    std::mt19937_64 rng(17);
    const BasesPtr b = two_bases();
    const FourierSeries a = random_series(b, 3, 4, rng);
    const FourierSeries r = series_from_json(series_to_json(a));
    CHECK(*r.bases() == *a.bases());
    REQUIRE(r.size() == a.size());
    for (const auto& [key, e] : a.entries()) CHECK((*r.find(key) - e.coeff).norm() == 0.0);
}
