#include "biascorr/numeric.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace biascorr {

namespace {

unsigned digits10_for_bits(unsigned bits) {
    return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
}

}  // namespace

PrecisionScope::PrecisionScope(unsigned bits) : saved_digits10_(Real::default_precision()) {
    if (bits < 2) throw DomainError("precision must be at least 2 bits");
    Real::default_precision(digits10_for_bits(bits));
}

PrecisionScope::~PrecisionScope() { Real::default_precision(saved_digits10_); }

unsigned current_bits() {
    Real probe;
    return static_cast<unsigned>(mpfr_get_prec(probe.backend().data()));
}

BigInt binomial(unsigned n, unsigned k) {
    if (k > n) return 0;
    BigInt out;
    mpz_bin_uiui(out.backend().data(), n, k);
    return out;
}

BigInt factorial(unsigned n) {
    BigInt out;
    mpz_fac_ui(out.backend().data(), n);
    return out;
}

Rational parse_rational(std::string_view text) {
    std::string s(text);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    size_t start = 0;
    while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
    s = s.substr(start);
    if (s.empty()) throw DomainError("empty numeric literal");

    if (auto slash = s.find('/'); slash != std::string::npos) {
        Rational num = parse_rational(s.substr(0, slash));
        Rational den = parse_rational(s.substr(slash + 1));
        if (den == 0) throw DomainError("zero denominator in '" + s + "'");
        return num / den;
    }

    size_t i = 0;
    bool negative = false;
    if (s[i] == '+' || s[i] == '-') {
        negative = s[i] == '-';
        ++i;
    }
    std::string digits;
    long long scale = 0;
    bool seen_point = false;
    bool seen_digit = false;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits.push_back(c);
            seen_digit = true;
            if (seen_point) --scale;
        } else if (c == '.' && !seen_point) {
            seen_point = true;
        } else if (c == 'e' || c == 'E') {
            break;
        } else {
            throw DomainError("malformed numeric literal '" + s + "'");
        }
    }
    if (!seen_digit) throw DomainError("malformed numeric literal '" + s + "'");
    if (i < s.size()) {
        std::string exponent = s.substr(i + 1);
        if (exponent.empty()) throw DomainError("malformed exponent in '" + s + "'");
        size_t used = 0;
        long long e = 0;
        try {
            e = std::stoll(exponent, &used);
        } catch (const std::exception&) {
            throw DomainError("malformed exponent in '" + s + "'");
        }
        if (used != exponent.size()) throw DomainError("malformed exponent in '" + s + "'");
        scale += e;
    }
    const size_t nz = digits.find_first_not_of('0');
    Rational value{BigInt(nz == std::string::npos ? std::string("0") : digits.substr(nz))};
    BigInt ten_pow = 1;
    for (long long k = 0; k < (scale < 0 ? -scale : scale); ++k) ten_pow *= 10;
    if (scale < 0) {
        value /= Rational(ten_pow);
    } else {
        value *= Rational(ten_pow);
    }
    return negative ? Rational(-value) : value;
}

std::string format_rational(const Rational& q) {
    BigInt num = boost::multiprecision::numerator(q);
    BigInt den = boost::multiprecision::denominator(q);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

std::string format_real(const Real& v, int digits) {
    std::ostringstream os;
    os.precision(digits);
    os << v;
    return os.str();
}

}  // namespace biascorr
