#pragma once

// Taylor-series bias correction.

#include "biascorr/curve.hpp"
#include "biascorr/funcs.hpp"
#include "biascorr/polynomial.hpp"

#include <json.hpp>
#include <map>
#include <vector>

namespace biascorr::taylor {

/// sum_l q_l(p) g^{(l)}(p), stored as l -> q_l.
class LinearDifferentialForm {
  public:
    LinearDifferentialForm() = default;
    /// The form g itself.
    static LinearDifferentialForm identity();

    void add(int order, const Polynomial& q);
    const std::map<int, Polynomial>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    /// -1 for the zero form.
    int max_order() const { return terms_.empty() ? -1 : terms_.rbegin()->first; }
    int min_order() const { return terms_.empty() ? -1 : terms_.begin()->first; }
    int max_poly_degree() const;

    LinearDifferentialForm differentiate() const;

    template <class T>
    T evaluate(const funcs::Function1D& f, const T& p) const {
        T acc = from_int<T>(0);
        for (const auto& [order, q] : terms_) acc += q(p) * f.derivative(order, p);
        return acc;
    }

    LinearDifferentialForm& operator+=(const LinearDifferentialForm& o);
    LinearDifferentialForm& operator*=(const Rational& c);
    friend LinearDifferentialForm operator+(LinearDifferentialForm a, const LinearDifferentialForm& b) {
        return a += b;
    }
    friend LinearDifferentialForm operator*(const Rational& c, LinearDifferentialForm a) { return a *= c; }
    friend bool operator==(const LinearDifferentialForm& a, const LinearDifferentialForm& b) {
        return a.terms_ == b.terms_;
    }

    nlohmann::json to_json() const;
    static LinearDifferentialForm from_json(const nlohmann::json& j);

  private:
    std::map<int, Polynomial> terms_;
};

/// T_j[g] = sum_{i=j+1}^{2j} g^{(i)} / i! * h_{i-j,i}(p).
LinearDifferentialForm apply_T(int j, const LinearDifferentialForm& g);

/// t_0 = f, t_i = -sum_{j=1}^{i} T_j[t_{i-j}], i < k.
std::vector<LinearDifferentialForm> construction_sequence(int k);

/// sum_{i<k} n^{-i} t_i(phat)
template <class T>
T taylor_estimate(const funcs::Function1D& f, int k, int n, const T& phat);

/// Estimates at phat = x/n, x = 0..n.
template <class T>
std::vector<T> taylor_atoms(const funcs::Function1D& f, int k, int n);

template <class T>
T taylor_bias(const funcs::Function1D& f, int k, int n, const T& p);

template <class T>
BiasCurve<T> taylor_bias_curve(const funcs::Function1D& f, int k, int n, const SearchOptions& opts = {});

/// S_j = prod_{l<j} (X - l)/(n - l), unbiased for p^j.
template <class T>
T falling_factorial_unbiased(long X, long n, int j);

/// sum_{i=0}^{2k-1} f^{(i)}(X1/n1)/i! sum_j C(i,j) S_j(X2) (-X1/n1)^{i-j}
template <class T>
T sample_split_estimate(long X1, long n1, long X2, long n2, const funcs::Function1D& f, int k);

/// Exact bias by summing over (X1, X2).
template <class T>
T sample_split_bias(const funcs::Function1D& f, int k, long n1, long n2, const T& p);

template <class T>
BiasCurve<T> sample_split_bias_curve(const funcs::Function1D& f, int k, long n1, long n2,
                                     const SearchOptions& opts = {});

}  // namespace biascorr::taylor
