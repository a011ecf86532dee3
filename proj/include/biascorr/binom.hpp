#pragma once

// Binomial-model machinery: pmf, Bernstein operator, transition matrix,
// central moments, truncated moments, backward differences and tail bounds.

#include "biascorr/funcs.hpp"
#include "biascorr/numeric.hpp"
#include "biascorr/polynomial.hpp"

#include <map>
#include <json.hpp>
#include <utility>
#include <vector>

namespace biascorr::binom {

/// pmf of B(n,p) at k = 0..n. Exact for Rational; the double path works in
/// log space so tails underflow gracefully instead of producing NaN.
template <class T>
std::vector<T> pmf(int n, const T& p);

/// Node values f(k/n), k = 0..n.
template <class T>
std::vector<T> node_values(const funcs::Function1D& f, int n);

/// Bernstein form sum_k c_k C(n,k) p^k (1-p)^{n-k} for given node coefficients.
template <class T>
T bernstein_form(const std::vector<T>& coeffs, const T& p);

/// B_n[f](p) = E_p f(X/n).
template <class T>
T bernstein_apply(const funcs::Function1D& f, int n, const T& p);

/// Caches node values so that repeated evaluation costs one pmf per point.
template <class T>
class BernsteinEvaluator {
  public:
    BernsteinEvaluator(const funcs::Function1D& f, int n) : n_(n), nodes_(node_values<T>(f, n)) {}
    int n() const { return n_; }
    const std::vector<T>& nodes() const { return nodes_; }
    T operator()(const T& p) const { return bernstein_form(nodes_, p); }

  private:
    int n_;
    std::vector<T> nodes_;
};

template <class T>
using Matrix = std::vector<std::vector<T>>;

/// A[i][k] = C(n,k)(i/n)^k(1-i/n)^{n-k}.
template <class T>
Matrix<T> transition_matrix(int n);

/// lambda_k = prod_{j<k}(1 - j/n), k = 0..n.
template <class T>
std::vector<T> eigenvalues(int n);

/// Polynomial in (p, n) with exact coefficients, keyed by (p degree, n degree).
class BivariatePoly {
  public:
    using Key = std::pair<int, int>;

    void add(int p_degree, int n_degree, const Rational& c);
    Rational coefficient(int p_degree, int n_degree) const;
    const std::map<Key, Rational>& terms() const { return terms_; }

    int p_degree() const;
    int n_degree() const;

    /// Coefficient of n^j as a polynomial in p.
    Polynomial n_coefficient(int j) const;

    template <class T>
    T operator()(const T& p, const T& n) const {
        T acc = from_int<T>(0);
        for (const auto& [key, c] : terms_) {
            acc += from_rational<T>(c) * ipow(p, key.first) * ipow(n, key.second);
        }
        return acc;
    }

    nlohmann::json to_json() const;
    static BivariatePoly from_json(const nlohmann::json& j);

    friend bool operator==(const BivariatePoly& a, const BivariatePoly& b) { return a.terms_ == b.terms_; }

  private:
    std::map<Key, Rational> terms_;
};

/// T_{n,s}(p) = n^s E_p(X/n - p)^s.
BivariatePoly central_moment_poly(int s);

/// j -> h_{j,s}(p), the coefficient of n^j in T_{n,s}, for j = 1..floor(s/2).
std::map<int, Polynomial> h_coeffs(int s);

/// (4es)^s / j!
double h_coeff_bound(int s, int j);

enum class Side { plus, minus };

/// E_p (X/n - t)_+^u (plus) or E_p (t - X/n)_+^u (minus); u = 0 gives the
/// tail probability P(X/n >= t) or P(X/n <= t).
template <class T>
T truncated_moment(int n, const T& p, const T& t, int u, Side side = Side::plus);

/// sum_k (-1)^k C(s,k) G_{n-k}.
template <class T>
T backward_diff(const std::map<long, T>& seq, long n, int s);

struct EnvelopeConstants {
    double c1 = 1.0;
    double c2 = 0.25;
};

struct EnvelopeRecord {
    double value = 0;
    double bound = 0;
    double ratio = 0;
};

/// Envelope shape for |Delta^s A_{n,u}(t)|, t >= p, with the given constants.
double envelope_bound(int n, double p, double t, int u, int s, const EnvelopeConstants& c);

/// Compares |Delta^s A_{n,u}(t)| with the envelope. Requires t >= p, n >= 2s.
template <class T>
EnvelopeRecord envelope_check(int n, const T& p, const T& t, int u, int s, const EnvelopeConstants& c);

/// Fits c1 at n_ref as the largest value/shape ratio over a (p, t) lattice
/// with c2 held fixed.
EnvelopeConstants calibrate_envelope(int u, int s, int n_ref = 20, double c2 = 0.25, int lattice = 40);

enum class Tail { lower, upper };

/// Chernoff bounds for X ~ B(n,p), mu = np:
/// lower P(X <= (1-b)mu) <= exp(-b^2 mu / 2), 0 < b <= 1;
/// upper P(X >= (1+b)mu) <= exp(-b^2 mu / 3) for b <= 1, exp(-b^2 mu / (2+b)) otherwise.
double chernoff_bound(int n, double p, double beta, Tail tail);

/// Exact P(X <= (1-b)np) or P(X >= (1+b)np).
Rational chernoff_exact_tail(int n, const Rational& p, const Rational& beta, Tail tail);

}  // namespace biascorr::binom
