#include "biascorr/funcs.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace biascorr;
using funcs::Function1D;

TEST_SUITE("funcs") {

TEST_CASE("rational literals") {
    CHECK(parse_rational("3/4") == Rational(3, 4));
    CHECK(parse_rational("-0.25") == Rational(-1, 4));
    CHECK(parse_rational("1e-3") == Rational(1, 1000));
    CHECK(parse_rational("2.5E2") == Rational(250));
    CHECK(parse_rational("0.0625") == Rational(1, 16));
    CHECK(parse_rational("010") == Rational(10));
    CHECK(parse_rational("0.000") == 0);
    CHECK(format_rational(Rational(-6, 8)) == "-3/4");
    CHECK(format_rational(Rational(5)) == "5");
    CHECK_THROWS(parse_rational("abc"));
    CHECK_THROWS(parse_rational("1/0"));
}

TEST_CASE("catalog values") {
    auto ent = funcs::make_entropy();
    CHECK(ent(0.5) == doctest::Approx(std::log(2.0) / 2).epsilon(1e-15));
    CHECK(ent(0.0) == 0.0);
    CHECK(ent(1.0) == 0.0);
    {
        PrecisionScope scope(256);
        Real v = ent(Real(1) / 2);
        Real ref = log(Real(2)) / 2;
        CHECK(abs(Real(v - ref)) < ldexp(Real(1), -250));
    }
    auto ad = funcs::make_absdev();
    CHECK(ad(0.5) == 0.0);
    CHECK(ad(Rational(1, 2)) == 0);
    CHECK(ad(Rational(1, 5)) == Rational(3, 10));
    CHECK(funcs::make_power(Rational(1, 2))(0.25) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(funcs::catalog_get("entropy").name() == "entropy");
    CHECK_THROWS(funcs::catalog_get("nope"));
}

TEST_CASE("sawtooth nodes") {
    auto f = funcs::make_sawtooth();
    CHECK(f(Rational(1, 2)) == 1);
    CHECK(f(Rational(1, 3)) == 0);
    CHECK(f(Rational(5, 12)) == Rational(1, 2));
    CHECK(f(Rational(1, 4)) == 1);
    CHECK(f(Rational(1, 7)) == 0);
    CHECK(f(Rational(0)) == 0);
    CHECK(f(1.0 / 3) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("variance gadget nodes") {
    for (int n : {4, 10, 50}) {
        auto f = funcs::make_variance_gadget(n);
        CHECK(f(Rational(1, n)) == 1);
        CHECK(f(Rational(2, n)) == -1);
        CHECK(f(Rational(1)) == 0);
    }
    CHECK_THROWS(funcs::make_variance_gadget(3));
}

TEST_CASE("declared sup bounds hold on a fine grid") {
    for (const auto& f : {funcs::make_sawtooth(), funcs::make_sawtooth(400), funcs::make_variance_gadget(10),
                          funcs::make_variance_gadget(50)}) {
        double worst = 0;
        for (int i = 0; i <= 100000; ++i) worst = std::max(worst, std::abs(f(i / 100000.0)));
        CHECK(worst <= 1.0 + 1e-12);
    }
}

TEST_CASE("piecewise linear is exact, clamped and has the node sup norm") {
    std::istringstream csv("x,y\n1/10,2\n0.5,-3\n9/10,1/2\n");
    auto nodes = funcs::read_pwl_csv(csv);
    funcs::PiecewiseLinear pl(nodes);
    CHECK(pl(Rational(3, 10)) == Rational(-1, 2));
    CHECK(pl(Rational(0)) == 2);
    CHECK(pl(Rational(1)) == Rational(1, 2));
    CHECK(pl.sup_norm() == 3);
    CHECK(pl(0.7) == doctest::Approx(-1.25));

    std::istringstream bad("x,y\n0.5,1\n0.2,0\n");
    CHECK_THROWS(funcs::read_pwl_csv(bad));
    std::istringstream out_of_range("x,y\n0,1\n1.5,0\n");
    CHECK_THROWS(funcs::read_pwl_csv(out_of_range));
}

TEST_CASE("function specs") {
    CHECK(funcs::parse_function_spec("affine:2,1")(Rational(3, 10)) == Rational(8, 5));
    CHECK(funcs::parse_function_spec("poly:0,0,1")(Rational(1, 3)) == Rational(1, 9));
    CHECK(funcs::parse_function_spec("power:0.5")(0.25) == doctest::Approx(0.5));
    CHECK(funcs::parse_function_spec("xlog:1,1")(0.5) == doctest::Approx(0.5 * std::log(4.0)));
    CHECK(funcs::parse_function_spec("variance_gadget:10")(Rational(1, 10)) == 1);
    CHECK(funcs::parse_function_spec("sawtooth")(Rational(1, 2)) == 1);
    CHECK(funcs::parse_function_spec("exp")(0.0) == doctest::Approx(1.0));
    CHECK_THROWS(funcs::parse_function_spec("power:x"));
    CHECK_THROWS(funcs::parse_function_spec("unknown"));
    CHECK_THROWS(funcs::parse_function_spec("pwl:/nonexistent/file.csv"));
}

TEST_CASE("analytic derivatives match central differences") {
    PrecisionScope scope(256);
    const Real h = ldexp(Real(1), -20);
    const Real tol = ldexp(Real(1), -30);
    std::vector<Function1D> fs{funcs::make_entropy(), funcs::make_power(Rational(1, 2)),
                               funcs::make_exp(),
                               funcs::make_poly({1, -2, 0, 3, 1})};
    for (const auto& f : fs) {
        CAPTURE(f.name());
        REQUIRE(f.max_derivative_order() >= 2);
        for (int k : {3, 5, 7}) {
            Real p = Real(k) / 10;
            for (int order = 1; order <= 2; ++order) {
                Real fd = (f.derivative(order - 1, Real(p + h)) - f.derivative(order - 1, Real(p - h))) / (2 * h);
                CHECK(abs(Real(fd - f.derivative(order, p))) < tol);
            }
        }
    }
}

TEST_CASE("singular derivatives are reported") {
    CHECK_THROWS_AS(funcs::make_entropy().derivative(1, 0.0), SingularDerivative);
    CHECK_THROWS_AS(funcs::make_power(Rational(1, 2)).derivative(1, 0.0), SingularDerivative);
    CHECK_THROWS_AS(funcs::make_absdev().derivative(1, 0.5), DomainError);
}

TEST_CASE("rational evaluability") {
    CHECK(funcs::make_sawtooth().rational_evaluable());
    CHECK(funcs::make_poly({1, 2}).rational_evaluable());
    CHECK(funcs::make_variance_gadget(10).rational_evaluable());
    CHECK_FALSE(funcs::make_entropy().rational_evaluable());
    CHECK_THROWS(funcs::make_entropy()(Rational(1, 2)));
}

}
