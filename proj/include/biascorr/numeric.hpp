#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

namespace biascorr {

using BigInt = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;
using Real = boost::multiprecision::mpfr_float;

inline constexpr unsigned kDefaultBits = 256;
inline constexpr unsigned kDoubleBits = 53;

/// Error raised for invalid arguments to numerical routines.
class DomainError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a derivative is requested at a point where it does not exist.
class SingularDerivative : public DomainError {
  public:
    using DomainError::DomainError;
};

/// Scoped working precision for `Real`. Values constructed inside the scope
/// carry at least `bits` mantissa bits.
class PrecisionScope {
  public:
    explicit PrecisionScope(unsigned bits);
    ~PrecisionScope();
    PrecisionScope(const PrecisionScope&) = delete;
    PrecisionScope& operator=(const PrecisionScope&) = delete;

  private:
    unsigned saved_digits10_;
};

unsigned current_bits();

template <class T>
inline constexpr bool is_exact_v = std::is_same_v<T, Rational>;

template <class T>
T from_rational(const Rational& q) {
    if constexpr (std::is_same_v<T, Rational>) {
        return q;
    } else if constexpr (std::is_same_v<T, double>) {
        return q.convert_to<double>();
    } else {
        return T(q);
    }
}

template <class T>
T from_int(long long v) {
    if constexpr (std::is_same_v<T, double>) {
        return static_cast<double>(v);
    } else {
        return T(v);
    }
}

template <class T>
T from_bigint(const BigInt& v) {
    if constexpr (std::is_same_v<T, double>) {
        return v.convert_to<double>();
    } else {
        return T(v);
    }
}

/// Ratio a/b of integers in the scalar type T, exact for Rational.
template <class T>
T ratio(long long a, long long b) {
    if constexpr (std::is_same_v<T, Rational>) {
        return Rational(a) / Rational(b);
    } else {
        return from_int<T>(a) / from_int<T>(b);
    }
}

template <class T>
double to_double(const T& v) {
    if constexpr (std::is_same_v<T, double>) {
        return v;
    } else {
        return v.template convert_to<double>();
    }
}

/// Convert between scalar types. Real -> Rational is exact (binary fraction).
template <class To, class From>
To convert(const From& v) {
    if constexpr (std::is_same_v<To, From>) {
        return v;
    } else if constexpr (std::is_same_v<To, double>) {
        return to_double(v);
    } else if constexpr (std::is_same_v<To, Rational> && std::is_same_v<From, double>) {
        return Rational(v);
    } else if constexpr (std::is_same_v<To, Rational>) {
        Rational out;
        mpfr_get_q(out.backend().data(), v.backend().data());
        return out;
    } else {
        return To(v);
    }
}

template <class T>
T abs_value(const T& v) {
    return v < 0 ? T(-v) : v;
}

/// Integer power by repeated squaring; exact for Rational.
template <class T>
T ipow(T base, unsigned long e) {
    T result = from_int<T>(1);
    while (e > 0) {
        if (e & 1U) result *= base;
        e >>= 1U;
        if (e > 0) base *= base;
    }
    return result;
}

BigInt binomial(unsigned n, unsigned k);
BigInt factorial(unsigned n);

/// Parses `a/b`, integers and decimal literals (with optional exponent)
/// into an exact rational.
Rational parse_rational(std::string_view text);

/// Renders a rational as `a/b` (or `a` when the denominator is 1).
std::string format_rational(const Rational& q);

/// Decimal rendering with `digits` significant digits.
std::string format_real(const Real& v, int digits = 40);

}  // namespace biascorr
