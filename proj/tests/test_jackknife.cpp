#include "biascorr/binom.hpp"
#include "biascorr/jackknife.hpp"
#include "biascorr/smoothness.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace biascorr;
using namespace biascorr::jackknife;

namespace {

std::vector<Rational> rationals(std::initializer_list<long> v) {
    std::vector<Rational> out;
    for (long x : v) out.emplace_back(x);
    return out;
}

}  // namespace

TEST_SUITE("jackknife") {

TEST_CASE("scheme coefficients") {
    for (long n : {5, 10, 31}) {
        auto s = scheme_general({n - 1, n});
        CHECK(s.coeffs == rationals({-(n - 1), n}));
    }
    auto half = scheme_general({6, 12});
    CHECK(half.coeffs == rationals({-1, 2}));
    CHECK(half.sum_abs == 3);
    CHECK(half.K == 2);
    auto one = scheme_general({9});
    CHECK(one.coeffs == rationals({1}));
    CHECK(one.order == 1);

    auto d1 = scheme_delete_d(10, 2, 1);
    CHECK(d1.sizes == std::vector<long>{9, 10});
    CHECK(d1.coeffs == rationals({-9, 10}));
    auto d3 = scheme_delete_d(12, 3, 1);
    CHECK(d3.sizes == std::vector<long>{10, 11, 12});
    Rational total = 0;
    for (const auto& c : d3.coeffs) total += c;
    CHECK(total == 1);
    auto d6 = scheme_delete_d(12, 2, 6);
    CHECK(d6.sizes == std::vector<long>{6, 12});
    CHECK(d6.coeffs == rationals({-1, 2}));
    CHECK(scheme_half(12).sizes == d6.sizes);

    CHECK_THROWS(scheme_general({5, 5}));
    CHECK_THROWS(scheme_general({6, 4}));
    CHECK_THROWS(scheme_general({}));
    CHECK_THROWS(scheme_half(11));
    CHECK_THROWS(scheme_delete_d(4, 3, 2));
}

TEST_CASE("bounded coefficient check") {
    auto a = bounded_coeff_check(scheme_half(20), 5);
    CHECK(a.sum_abs == 3);
    CHECK(a.satisfied);
    auto b = bounded_coeff_check(scheme_delete_d(10, 2, 1), 5);
    CHECK(b.sum_abs == 19);
    CHECK_FALSE(b.satisfied);
    auto c = bounded_coeff_check(scheme_general({7}), 1);
    CHECK(c.sum_abs == 1);
    CHECK(c.satisfied);
}

TEST_CASE("Vandermonde identities and the higher-power bound") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const int r = 1 + trial % 6;
        std::vector<long> sizes{std::uniform_int_distribution<long>(r, 40)(rng)};
        for (int i = 1; i < r; ++i) sizes.push_back(sizes.back() + std::uniform_int_distribution<long>(1, 9)(rng));
        auto s = scheme_general(sizes);
        CHECK(power_sum(s, 0) == 1);
        for (int rho = 1; rho < r; ++rho) CHECK(power_sum(s, rho) == 0);
        for (int rho = r; rho <= r + 4; ++rho) CHECK(abs_value(power_sum(s, rho)) <= higher_power_bound(s, rho));
    }
}

TEST_CASE("bias curves") {
    auto aff = funcs::make_affine(Rational(3, 2), Rational(-1, 4));
    SearchOptions exact;
    exact.grid_size = 101;
    for (const auto& s : {scheme_delete_d(10, 2, 1), scheme_half(10), scheme_general({3, 5, 8})}) {
        auto c = bias_curve<Rational>(aff, s, exact);
        CHECK(c.sup_abs == 0);
    }
    auto sq = funcs::make_poly({0, 0, 1});
    CHECK(bias_curve<Rational>(sq, scheme_half(14), exact).sup_abs == 0);
    CHECK(bias_curve<Rational>(sq, scheme_delete_d(9, 2, 1), exact).sup_abs == 0);

    auto plug = bias_curve<double>(funcs::make_entropy(), scheme_general({1}));
    CHECK(plug.sup_abs == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
    CHECK(plug.argmax_p == doctest::Approx(std::exp(-1.0)).epsilon(1e-4));
    CHECK(plug.refine_tol < 1e-6);
}

TEST_CASE("divided differences") {
    CHECK(divided_difference<Rational>(rationals({1, 2, 3}), rationals({1, 4, 9})) == 1);
    CHECK(divided_difference<Rational>(rationals({2, 5, 7}), rationals({3, 3, 3})) == 0);
    CHECK(divided_difference<Rational>(rationals({0, 1, 2, 4}), rationals({0, 1, 8, 64})) == 1);

    auto cube = funcs::make_poly({0, 0, 0, 1});
    auto s = scheme_general({4, 6, 8});
    CHECK(divided_diff_bias<Rational>(cube, s, Rational(1, 2)) == jackknife_bias<Rational>(cube, s, Rational(1, 2)));
    auto plug = scheme_general({7});
    CHECK(divided_diff_bias<Rational>(cube, plug, Rational(2, 9)) == jackknife_bias<Rational>(cube, plug, Rational(2, 9)));
    CHECK(divided_diff_bias<Rational>(funcs::make_affine(2, 1), s, Rational(1, 3)) == 0);
}

TEST_CASE("operator-sum bias equals divided-difference bias at random rational p") {
    std::mt19937_64 rng(3);
    auto pwl = funcs::make_pwl({{Rational(0), Rational(1)}, {Rational(1, 3), Rational(-1)}, {Rational(1), Rational(2)}});
    for (const auto& f : {pwl, funcs::make_sawtooth(24), funcs::make_poly({1, -1, 0, 0, 2})}) {
        for (const auto& s : {scheme_general({8, 12, 24}), scheme_delete_d(20, 3, 2), scheme_general({5, 9, 13, 17})}) {
            for (int i = 0; i < 50; ++i) {
                const long den = std::uniform_int_distribution<long>(1, 97)(rng);
                Rational p(std::uniform_int_distribution<long>(0, den)(rng), den);
                CHECK(jackknife_bias<Rational>(f, s, p) == divided_diff_bias<Rational>(f, s, p));
            }
        }
    }
}

TEST_CASE("mean-value check") {
    std::map<long, Rational> sq, pw;
    for (long n = 0; n <= 12; ++n) {
        sq[n] = n * n;
        pw[n] = Rational(BigInt(1) << n);
    }
    auto a = meanvalue_check(sq, {3, 5, 9});
    CHECK(a.dd == 1);
    CHECK(a.max_backward == 2);
    CHECK(a.holds);
    auto b = meanvalue_check(pw, {4, 5, 6});
    CHECK(b.dd == 8);
    CHECK(b.max_backward == 16);
    CHECK(b.holds);

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const int r = 1 + trial % 4;
        std::set<long> pts;
        while (static_cast<int>(pts.size()) < r + 1) pts.insert(std::uniform_int_distribution<long>(0, 25)(rng));
        std::vector<long> points(pts.begin(), pts.end());
        std::map<long, Rational> values;
        for (long x = points.front(); x <= points.back(); ++x) values[x] = std::uniform_int_distribution<long>(-20, 20)(rng);
        CHECK(meanvalue_check(values, points).holds);
    }
}

TEST_CASE("delete-1 point estimates on the variance gadget") {
    for (long n : {4, 7, 10, 50}) {
        auto f = funcs::make_variance_gadget(static_cast<int>(n));
        CHECK(delete1_r2_point_estimate<Rational>(0, n, f) == 0);
        CHECK(delete1_r2_point_estimate<Rational>(1, n, f) == Rational(2 * n - 2) + Rational(1, n));
        CHECK(delete1_r2_point_estimate<Rational>(2, n, f) == Rational(-2 * n + 5) - Rational(4, n));
    }
}

TEST_CASE("delete-1 variance") {
    for (long n : {3, 8, 15}) {
        const Rational p(2, 7);
        CHECK(delete1_r2_variance<Rational>(n, p, funcs::make_poly({Rational(5, 3)})) == 0);
        // for affine f the estimator collapses to f(X/n)
        auto aff = funcs::make_affine(3, -1);
        CHECK(delete1_r2_variance<Rational>(n, p, aff) == 9 * p * (1 - p) / n);
    }
    PrecisionScope scope(256);
    for (int n : {4, 10, 50}) {
        Rational v = delete1_r2_variance<Rational>(n, Rational(1, n), funcs::make_variance_gadget(n));
        CHECK(Real(v) >= Real(n) * n / exp(Real(1)));
    }
}

TEST_CASE("sawtooth blow-up at p = 1/n") {
    PrecisionScope scope(256);
    std::vector<std::pair<double, double>> pairs;
    for (int n : {100, 200, 400, 800}) {
        Real b = jackknife_bias<Real>(funcs::make_sawtooth(n), scheme_delete_d(n, 3, 1), Real(1) / n);
        pairs.emplace_back(n, std::abs(b.convert_to<double>()));
    }
    CHECK(smoothness::rate_fit(pairs).slope == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("adversarial smooth construction") {
    const double p0 = 0.2;
    std::vector<std::pair<double, double>> pairs;
    for (int n : {64, 128, 256, 512}) {
        auto scheme = scheme_delete_d(n, 3, 1);
        auto f = adversarial_smooth(n, scheme, 1, p0);
        CHECK(f(0.0) == 0.0);
        if (n == 64) {
            double worst = 0;
            const double h = 1e-5;
            for (int i = 0; i < 2000; ++i) {
                const double x = i / 2000.0;
                worst = std::max(worst, std::abs(f(x + h) - f(x)) / h);
            }
            CHECK(worst <= 1.0 + 1e-6);
        }
        pairs.emplace_back(n, std::abs(jackknife_bias<double>(f, scheme, p0)));
    }
    CHECK(std::abs(smoothness::rate_fit(pairs).slope - 1.0) <= 0.3);
    CHECK_THROWS(adversarial_smooth(64, scheme_delete_d(64, 3, 1), 4, p0));
}

}
