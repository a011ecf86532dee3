#include "biascorr/binom.hpp"
#include "biascorr/jackknife.hpp"
#include "biascorr/smoothness.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace biascorr;
using namespace biascorr::smoothness;

using QRV = DiscreteRV<Rational>;

TEST_SUITE("smoothness") {

TEST_CASE("symmetric differences") {
    auto sq = funcs::make_poly({0, 0, 1});
    for (const Rational& x : {Rational(1, 2), Rational(1, 3), Rational(3, 5)}) {
        for (const Rational& h : {Rational(1, 10), Rational(1, 20)}) CHECK(symmetric_diff<Rational>(sq, 2, h, x) == 2 * h * h);
    }
    CHECK(symmetric_diff<Rational>(sq, 2, Rational(1, 5), Rational(19, 20)) == 0);
    CHECK(symmetric_diff<Rational>(sq, 1, Rational(1, 5), Rational(1, 20)) == 0);
    CHECK(symmetric_diff<Rational>(funcs::make_absdev(), 2, Rational(1, 5), Rational(1, 2)) == Rational(2, 5));
    CHECK_THROWS(symmetric_diff<Rational>(sq, 0, Rational(1, 5), Rational(1, 2)));
}

TEST_CASE("moduli") {
    ModulusOptions small{16, 201};
    for (int r = 1; r <= 3; ++r) {
        std::vector<Rational> c(r, Rational(1, 3));
        auto f = funcs::make_poly(c);
        CHECK(dt_modulus<Rational>(f, r, Rational(1, 4), small).value == 0);
        CHECK(classical_modulus<Rational>(f, r, Rational(1, 4), small).value == 0);
    }
    auto sq = funcs::make_poly({0, 0, 1});
    for (double t : {0.5, 0.25, 0.1, 0.01}) {
        auto res = dt_modulus<double>(sq, 2, t);
        CHECK(res.value == doctest::Approx(t * t / 2).epsilon(1e-9));
        CHECK(res.h_grid == 64);
        CHECK(res.x_grid == 4001);
    }
}

TEST_CASE("modulus is monotone in t") {
    ModulusOptions opts{64, 1001};
    for (const auto& f : {funcs::make_entropy(), funcs::make_absdev(), funcs::make_power(Rational(1, 2))}) {
        for (int r : {1, 2, 3}) {
            double prev = -1;
            for (int j = 10; j >= 1; --j) {
                double v = dt_modulus<double>(f, r, std::ldexp(1.0, -j), opts).value;
                CHECK(v >= prev);
                prev = v;
            }
        }
    }
}

TEST_CASE("entropy modulus band") {
    std::vector<double> ratios;
    for (int j = 3; j <= 9; ++j) {
        const double t = std::ldexp(1.0, -j);
        ratios.push_back(dt_modulus<double>(funcs::make_entropy(), 2, t).value / (t * t));
    }
    for (double r : ratios) {
        CHECK(r <= 3 * ratios.front());
        CHECK(r >= ratios.front() / 3);
    }
}

TEST_CASE("rate fit") {
    std::vector<std::pair<double, double>> inv, isq;
    for (double n : {10.0, 20.0, 40.0, 80.0}) {
        inv.emplace_back(n, 3 / n);
        isq.emplace_back(n, 3 / std::sqrt(n));
    }
    CHECK(rate_fit(inv).slope == doctest::Approx(-1).epsilon(1e-12));
    CHECK(rate_fit(isq).slope == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(rate_fit(inv).residual < 1e-12);
    CHECK_THROWS(rate_fit({{1, 1}, {2, 2}}));
    CHECK_THROWS(rate_fit({{1, 1}, {2, 0}, {3, 1}}));

    std::vector<std::pair<double, double>> ent;
    for (int n : {50, 100, 200, 400, 800}) {
        ent.emplace_back(n, jackknife::bias_curve<double>(funcs::make_entropy(), jackknife::scheme_general({n})).sup_abs);
    }
    CHECK(rate_fit(ent).slope == doctest::Approx(-1).epsilon(0.05));
}

TEST_CASE("discrete random variables") {
    QRV x({{Rational(0), Rational(1, 2)}, {Rational(2), Rational(1, 2)}});
    CHECK(x.mean() == 1);
    CHECK(x.variance() == 1);
    CHECK_THROWS(QRV({{Rational(0), Rational(1, 2)}}));
    CHECK_THROWS(QRV({{Rational(0), Rational(3, 2)}, {Rational(1), Rational(-1, 2)}}));
    CHECK_THROWS(QRV({}));
}

TEST_CASE("Jensen gap") {
    auto deg = jensen_gap_check(funcs::make_entropy(), DiscreteRV<double>({{0.3, 1.0}}));
    CHECK(deg.gap == 0.0);
    CHECK(deg.holds);
    auto sq = jensen_gap_check(funcs::make_poly({0, 0, 1}), QRV({{Rational(0), Rational(1, 2)}, {Rational(1), Rational(1, 2)}}));
    CHECK(sq.gap == Rational(1, 4));
    CHECK(sq.bound.convert_to<double>() == doctest::Approx(1.875).epsilon(1e-6));
    CHECK(sq.holds);

    auto w = binom::pmf<double>(10, 0.3);
    std::vector<DiscreteRV<double>::Atom> atoms;
    for (int k = 0; k <= 10; ++k) atoms.push_back({k / 10.0, w[k]});
    CHECK(jensen_gap_check(funcs::make_entropy(), DiscreteRV<double>(atoms)).holds);

    std::mt19937_64 rng(9);
    ModulusOptions opts{32, 801};
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<DiscreteRV<double>::Atom> a;
        double total = 0;
        for (int i = 0; i < 3; ++i) {
            a.push_back({std::uniform_real_distribution<double>(0, 1)(rng), std::uniform_real_distribution<double>(0.1, 1)(rng)});
            total += a.back().prob;
        }
        for (auto& at : a) at.prob /= total;
        for (const auto& f : {funcs::make_entropy(), funcs::make_absdev(), funcs::make_power(Rational(1, 2)), funcs::make_exp()}) {
            CHECK(jensen_gap_check(f, DiscreteRV<double>(a), opts).holds);
        }
    }
}

TEST_CASE("entropy functional bounds") {
    PrecisionScope scope(256);
    auto c = ent_bounds(QRV({{Rational(3), Rational(1)}}));
    CHECK(c.ent == 0);
    CHECK(c.all_hold);
    auto u = ent_bounds(QRV({{Rational(0), Rational(1, 2)}, {Rational(2), Rational(1, 2)}}));
    CHECK(abs(Real(u.ent - log(Real(2)))) < Real(1e-70));
    CHECK(abs(Real(u.upper_sqrtvar - 1)) < Real(1e-70));
    CHECK(abs(Real(u.lower_varsqrt - Real(1) / 2)) < Real(1e-70));
    CHECK(u.all_hold);
    CHECK_THROWS(ent_bounds(QRV({{Rational(0), Rational(1)}})));

    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<QRV::Atom> a;
        for (int i = 0; i < 4; ++i) a.push_back({Rational(std::uniform_int_distribution<int>(1, 40)(rng), 8), Rational(1, 4)});
        CHECK(ent_bounds(QRV(a)).all_hold);
    }
}

TEST_CASE("divergences") {
    PrecisionScope scope(256);
    QRV p({{Rational(0), Rational(2, 5)}, {Rational(1), Rational(3, 5)}});
    QRV q({{Rational(0), Rational(1, 2)}, {Rational(1), Rational(1, 2)}});
    auto same = divergences(q, q);
    CHECK(same.tv == 0);
    CHECK(same.hellinger_sq == 0);
    CHECK(same.kl == 0);
    CHECK(same.chi_sq == 0);
    auto d = divergences(p, q);
    CHECK(d.kl.convert_to<double>() == doctest::Approx(0.6 * std::log(1.2) + 0.4 * std::log(0.8)).epsilon(1e-12));
    CHECK(d.kl.convert_to<double>() == doctest::Approx(0.02014).epsilon(1e-3));
    CHECK(d.tv.convert_to<double>() == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(d.chi_sq.convert_to<double>() == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(d.chain_holds);
    QRV r({{Rational(0), Rational(1)}, {Rational(1), Rational(0)}});
    QRV s({{Rational(0), Rational(1, 2)}, {Rational(1), Rational(1, 2)}});
    CHECK_THROWS(divergences(s, r));

    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<QRV::Atom> a, b;
        std::vector<int> wa(5), wb(5);
        int ta = 0, tb = 0;
        for (int i = 0; i < 5; ++i) {
            ta += (wa[i] = std::uniform_int_distribution<int>(0, 9)(rng));
            tb += (wb[i] = std::uniform_int_distribution<int>(1, 9)(rng));
        }
        if (ta == 0) ta = wa[0] = 1;
        for (int i = 0; i < 5; ++i) {
            a.push_back({Rational(i), Rational(wa[i], ta)});
            b.push_back({Rational(i), Rational(wb[i], tb)});
        }
        CHECK(divergences(QRV(a), QRV(b)).chain_holds);
    }
}

}
