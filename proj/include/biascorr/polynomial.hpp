#pragma once

#include "biascorr/numeric.hpp"

#include <vector>

namespace biascorr {

/// Univariate polynomial with exact rational coefficients in the monomial
/// basis, coefficient i multiplying p^i. Trailing zeros are trimmed.
class Polynomial {
  public:
    Polynomial() = default;
    explicit Polynomial(std::vector<Rational> coeffs);
    static Polynomial constant(const Rational& c);
    static Polynomial monomial(unsigned degree, const Rational& c = 1);
    /// p(1-p)
    static Polynomial variance_factor();

    /// -1 for the zero polynomial.
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    bool is_zero() const { return coeffs_.empty(); }
    const std::vector<Rational>& coefficients() const { return coeffs_; }
    Rational coefficient(unsigned i) const { return i < coeffs_.size() ? coeffs_[i] : Rational(0); }

    Polynomial derivative() const;

    template <class T>
    T operator()(const T& p) const {
        T acc = from_int<T>(0);
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
            acc = acc * p + from_rational<T>(*it);
        }
        return acc;
    }

    Polynomial& operator+=(const Polynomial& o);
    Polynomial& operator-=(const Polynomial& o);
    Polynomial& operator*=(const Rational& c);
    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator*(Polynomial a, const Rational& c) { return a *= c; }
    friend Polynomial operator*(const Rational& c, Polynomial a) { return a *= c; }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.coeffs_ == b.coeffs_; }

  private:
    void trim();
    std::vector<Rational> coeffs_;
};

}  // namespace biascorr
