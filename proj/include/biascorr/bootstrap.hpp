#pragma once

// Iterated bootstrap bias correction in node space.

#include "biascorr/binom.hpp"
#include "biascorr/curve.hpp"
#include "biascorr/funcs.hpp"

#include <vector>

namespace biascorr::bootstrap {

template <class T>
struct NodeVector {
    int n = 0;
    std::vector<T> values;
    /// Mantissa bits the values were computed with (0 for exact).
    unsigned bits = 0;
};

/// After m rounds the bias is e_m(p) = f(p) - sum_k u_k C(n,k) p^k (1-p)^{n-k},
/// where u_1 = v (node values of f) and u_{m+1} = v + (I - A) u_m.
template <class T>
struct BootstrapState {
    funcs::Function1D f;
    int n = 0;
    long m = 0;
    NodeVector<T> v;
    NodeVector<T> u;
};

template <class T>
BootstrapState<T> initial_state(const funcs::Function1D& f, int n);

/// Advances the state by `steps` rounds using the given transition matrix.
template <class T>
void advance(BootstrapState<T>& state, const binom::Matrix<T>& a, long steps);

/// State after m rounds. For Real the caller's working precision applies.
template <class T>
BootstrapState<T> iterate_bias(const funcs::Function1D& f, int n, long m);

template <class T>
T e_m_eval(const BootstrapState<T>& state, const T& p);

template <class T>
BiasCurve<T> sup_e_m(const BootstrapState<T>& state, const SearchOptions& opts = {});

struct TraceRow {
    long m = 0;
    Real sup_abs;
    Real argmax_p;
    bool refined = false;
    double tol = 0.0;
};

struct TraceOptions {
    int grid = 4001;
    /// Golden-section refinement on every k-th emitted row.
    int refine_every = 100;
    unsigned bits = kDefaultBits;
};

/// sup_p |e_m(p)| at m = 1, 1 + stride, ... <= m_max.
std::vector<TraceRow> trace_sup(const funcs::Function1D& f, int n, long m_max, long stride,
                                const TraceOptions& opts = {});

/// Lagrange interpolant at i/n in barycentric second form with weights
/// (-1)^i C(n,i). Evaluation at a node returns the node value.
template <class T>
class LagrangeInterpolant {
  public:
    LagrangeInterpolant(const funcs::Function1D& f, int n);
    LagrangeInterpolant(std::vector<T> node_values);
    int n() const { return static_cast<int>(values_.size()) - 1; }
    const std::vector<T>& node_values() const { return values_; }
    T operator()(const T& p) const;

  private:
    std::vector<T> nodes_;
    std::vector<T> values_;
    std::vector<T> weights_;
};

template <class T>
LagrangeInterpolant<T> lagrange_interpolant(const funcs::Function1D& f, int n) {
    return LagrangeInterpolant<T>(f, n);
}

/// sup_p |f - L_n f| on a uniform grid plus refinement, in Real at `bits`.
BiasCurve<Real> lagrange_sup_gap(const funcs::Function1D& f, int n, int grid_size = 100001,
                                 unsigned bits = kDefaultBits);

/// sup over the grid of |e_m - (f - L_n f)|.
Real limit_gap(const funcs::Function1D& f, int n, long m, int grid_size = 4001, unsigned bits = kDefaultBits);

/// (1 - lambda_k)^m
template <class T>
T eig_mode_decay(int n, int k, long m);

/// Solves A x = b by Gaussian elimination with partial pivoting.
template <class T>
std::vector<T> solve(binom::Matrix<T> a, std::vector<T> b);

}  // namespace biascorr::bootstrap
