#include "biascorr/binom.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace biascorr;
using namespace biascorr::binom;

namespace {

// n^s E(X/n - p)^s by direct summation.
Rational moment_oracle(int n, const Rational& p, int s) {
    Rational acc = 0;
    for (int x = 0; x <= n; ++x) {
        Rational w = Rational(binomial(n, x)) * ipow(p, x) * ipow(Rational(1 - p), n - x);
        acc += w * ipow(Rational(Rational(x, n) - p), s);
    }
    return acc * ipow(Rational(n), s);
}

}  // namespace

TEST_SUITE("binom") {

TEST_CASE("pmf") {
    auto w = pmf<Rational>(3, Rational(1, 3));
    CHECK(w[0] == Rational(8, 27));
    CHECK(w[1] == Rational(12, 27));
    CHECK(w[3] == Rational(1, 27));
    auto d = pmf<double>(2000, 0.3);
    double total = 0;
    for (double x : d) total += x;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pmf<double>(5, 0.0)[0] == 1.0);
    CHECK(pmf<double>(5, 1.0)[5] == 1.0);
}

TEST_CASE("Bernstein operator examples") {
    auto aff = funcs::make_affine(2, 1);
    CHECK(bernstein_apply<Rational>(aff, 7, Rational(3, 10)) == Rational(8, 5));
    CHECK(bernstein_apply<double>(funcs::make_entropy(), 1, 0.37) == 0.0);
    CHECK(bernstein_apply<Rational>(funcs::make_poly({0, 0, 1}), 10, Rational(1, 2)) == Rational(11, 40));
}

TEST_CASE("Bernstein reproduces affine functions exactly") {
    auto f = funcs::make_affine(Rational(-3, 7), Rational(5, 2));
    for (int n = 1; n <= 30; ++n) {
        for (const Rational& p : {Rational(0), Rational(1, 9), Rational(2, 5), Rational(1)}) {
            CHECK(bernstein_apply<Rational>(f, n, p) == f(p));
        }
    }
}

TEST_CASE("Bernstein preserves positivity") {
    for (const auto& f : {funcs::make_absdev(), funcs::make_entropy(), funcs::make_sawtooth()}) {
        for (int n : {1, 5, 20, 60}) {
            for (int i = 0; i <= 200; ++i) CHECK(bernstein_apply<double>(f, n, i / 200.0) >= -1e-15);
        }
    }
}

TEST_CASE("transition matrix") {
    auto a1 = transition_matrix<Rational>(1);
    CHECK(a1 == Matrix<Rational>{{1, 0}, {0, 1}});
    auto a2 = transition_matrix<Rational>(2);
    CHECK(a2[1] == std::vector<Rational>{Rational(1, 4), Rational(1, 2), Rational(1, 4)});
    for (int n = 1; n <= 15; ++n) {
        for (const auto& row : transition_matrix<Rational>(n)) {
            Rational s = 0;
            for (const auto& x : row) {
                CHECK(x >= 0);
                s += x;
            }
            CHECK(s == 1);
        }
    }
    PrecisionScope scope(256);
    for (const auto& row : transition_matrix<Real>(20)) {
        Real s = 0;
        for (const auto& x : row) s += x;
        CHECK(abs(Real(s - 1)) <= 21 * ldexp(Real(1), 1 - 256));
    }
}

TEST_CASE("eigenvalues") {
    auto l = eigenvalues<Rational>(20);
    CHECK(l[0] == 1);
    CHECK(l[1] == 1);
    CHECK(l[2] == Rational(19, 20));
    CHECK(l[20] == Rational(factorial(20)) / Rational(ipow(BigInt(20), 20)));
    CHECK(l[20].convert_to<double>() == doctest::Approx(2.3201e-8).epsilon(1e-4));
}

TEST_CASE("transition matrix is degree reducing") {
    for (int n = 1; n <= 10; ++n) {
        auto a = transition_matrix<Rational>(n);
        for (int k = 0; k <= n; ++k) {
            std::map<long, Rational> image;
            for (int i = 0; i <= n; ++i) {
                Rational acc = 0;
                for (int j = 0; j <= n; ++j) acc += a[i][j] * ipow(Rational(j, n), k);
                image[i] = acc;
            }
            for (long i = k + 1; i <= n; ++i) CHECK(backward_diff(image, i, k + 1) == 0);
        }
    }
}

TEST_CASE("central moment polynomials") {
    CHECK(central_moment_poly(0).terms() == std::map<BivariatePoly::Key, Rational>{{{0, 0}, 1}});
    CHECK(central_moment_poly(1).terms().empty());
    auto t2 = central_moment_poly(2);
    CHECK(t2.coefficient(1, 1) == 1);
    CHECK(t2.coefficient(2, 1) == -1);
    CHECK(t2.terms().size() == 2);
    auto t4 = central_moment_poly(4);
    for (int n = 2; n <= 10; ++n) {
        for (const Rational& p : {Rational(1, 10), Rational(1, 3), Rational(1, 2), Rational(7, 9)}) {
            const Rational v = p * (1 - p);
            CHECK(t4(p, Rational(n)) == 3 * n * n * v * v + n * v * (1 - 6 * v));
            CHECK(t4(p, Rational(n)) == moment_oracle(n, p, 4));
        }
    }
    for (int s = 0; s <= 10; ++s) {
        auto t = central_moment_poly(s);
        CHECK(t.p_degree() <= s);
        CHECK(t.n_degree() <= s / 2);
        for (int n : {2, 7, 12}) CHECK(t(Rational(2, 7), Rational(n)) == moment_oracle(n, Rational(2, 7), s));
    }
}

TEST_CASE("h coefficients") {
    const Polynomial v = Polynomial::variance_factor();
    auto h2 = h_coeffs(2);
    REQUIRE(h2.size() == 1);
    CHECK(h2.at(1) == v);
    auto h3 = h_coeffs(3);
    REQUIRE(h3.size() == 1);
    CHECK(h3.at(1) == v * Polynomial({1, -2}));
    auto h4 = h_coeffs(4);
    REQUIRE(h4.size() == 2);
    CHECK(h4.at(2) == Rational(3) * v * v);
    CHECK(h4.at(1) == v * (Polynomial::constant(1) - Rational(6) * v));
    CHECK(h_coeff_bound(2, 1) == doctest::Approx(std::pow(8 * std::exp(1.0), 2)));
}

TEST_CASE("BivariatePoly json round trip") {
    auto t6 = central_moment_poly(6);
    auto j = t6.to_json();
    CHECK(j.is_array());
    CHECK(j[0].contains("p_degree"));
    CHECK(j[0].contains("numerator"));
    CHECK(BivariatePoly::from_json(j) == t6);
}

TEST_CASE("truncated moments") {
    CHECK(truncated_moment<Rational>(2, Rational(1, 2), Rational(2, 5), 1, Side::plus) == Rational(1, 5));
    for (int n : {1, 5, 17}) {
        CHECK(truncated_moment<Rational>(n, Rational(3, 8), Rational(0), 1, Side::plus) == Rational(3, 8));
        for (int u : {1, 2, 3}) CHECK(truncated_moment<Rational>(n, Rational(3, 8), Rational(1), u, Side::plus) == 0);
    }
    // u = 0 is a tail probability
    CHECK(truncated_moment<Rational>(2, Rational(1, 2), Rational(1, 2), 0, Side::plus) == Rational(3, 4));
    CHECK(truncated_moment<Rational>(2, Rational(1, 2), Rational(1, 2), 0, Side::minus) == Rational(3, 4));
    CHECK(truncated_moment<Rational>(2, Rational(1, 2), Rational(2, 5), 1, Side::minus) == Rational(1, 10));
}

TEST_CASE("backward differences") {
    std::map<long, Rational> sq, cst, fact;
    for (long n = 0; n <= 10; ++n) {
        sq[n] = n * n;
        cst[n] = 7;
        fact[n] = Rational(factorial(static_cast<unsigned>(n)));
    }
    CHECK(backward_diff(sq, 6, 2) == 2);
    CHECK(backward_diff(cst, 6, 1) == 0);
    CHECK(backward_diff(fact, 4, 2) == 14);
    CHECK_THROWS(backward_diff(sq, 1, 3));

    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        const int s = 1 + trial % 6;
        std::vector<Rational> c(s);
        for (auto& x : c) x = Rational(std::uniform_int_distribution<int>(-9, 9)(rng), 4);
        Polynomial poly(c);
        std::map<long, Rational> seq;
        for (long n = 0; n <= 20; ++n) seq[n] = poly(Rational(n));
        CHECK(backward_diff(seq, 20, s) == 0);
    }
}

TEST_CASE("envelope") {
    EnvelopeConstants c;
    auto r0 = envelope_check<double>(30, 0.4, 0.4, 0, 0, c);
    CHECK(r0.value <= 1.0);
    double tail = 0;
    auto w30 = pmf<double>(30, 0.4);
    for (int k = 12; k <= 30; ++k) tail += w30[k];
    CHECK(r0.value == doctest::Approx(tail));
    auto c11 = calibrate_envelope(1, 1);
    CHECK(c11.c2 == 0.25);
    auto r = envelope_check<double>(40, 0.1, 0.3, 1, 1, c11);
    CHECK(r.ratio <= 1.0);
    const int n = 40;
    for (double t : {1 - 0.5 / n, 1 - 0.2 / n}) {
        for (double p : {0.05, 0.3, 0.9}) {
            for (int u = 0; u <= 2; ++u) {
                for (int s = 0; s <= 2; ++s) {
                    auto cs = calibrate_envelope(u, s);
                    auto rec = envelope_check<double>(n, p, t, u, s, cs);
                    CHECK(rec.value <= cs.c1 * std::pow(1 - t, u) * std::pow(1 - p, s) * std::pow(p, n - s) * (1 + 1e-9));
                }
            }
        }
    }
}

TEST_CASE("Chernoff bounds") {
    for (int n : {5, 20, 60}) {
        for (const Rational& p : {Rational(1, 10), Rational(1, 2), Rational(4, 5)}) {
            const double mu = n * p.convert_to<double>();
            Rational exact = chernoff_exact_tail(n, p, Rational(1), Tail::lower);
            CHECK(exact == ipow(Rational(1 - p), n));
            CHECK(chernoff_bound(n, p.convert_to<double>(), 1.0, Tail::lower) == doctest::Approx(std::exp(-mu / 2)));
            CHECK(exact.convert_to<double>() <= std::exp(-mu / 2));
        }
    }
    CHECK(chernoff_bound(10, 0.5, 1.0, Tail::upper) == doctest::Approx(0.1889).epsilon(1e-3));
    CHECK(chernoff_exact_tail(10, Rational(1, 2), Rational(1), Tail::upper) == Rational(1, 1024));
    // lower tail at beta = 1/2, n = 10, p = 1/2 is P(X <= 2.5) = 56/1024
    CHECK(chernoff_exact_tail(10, Rational(1, 2), Rational(1, 2), Tail::lower) == Rational(56, 1024));
}

}
