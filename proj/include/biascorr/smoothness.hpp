#pragma once

// Moduli of smoothness, rate fits, Jensen-gap and entropy-functional bounds,
// and divergences between discrete distributions.

#include "biascorr/funcs.hpp"
#include "biascorr/numeric.hpp"

#include <utility>
#include <vector>

namespace biascorr::smoothness {

/// sum_k (-1)^k C(r,k) f(x + r h/2 - k h), or 0 when x +- r h/2 leaves [0,1].
template <class T>
T symmetric_diff(const funcs::Function1D& f, int r, const T& h, const T& x);

struct ModulusOptions {
    /// h_j = t 2^{-j/8}, j = 0..h_samples-1
    int h_samples = 64;
    int x_samples = 4001;
};

/// Lattice supremum; a lower bound for the true modulus.
template <class T>
struct ModulusResult {
    int r = 0;
    T t{};
    T value{};
    int h_grid = 0;
    int x_grid = 0;
    T argmax_x{};
    T argmax_h{};
};

/// Ditzian-Totik modulus with step h sqrt(x(1-x)).
template <class T>
ModulusResult<T> dt_modulus(const funcs::Function1D& f, int r, const T& t, const ModulusOptions& opts = {});

/// Classical modulus (constant step h).
template <class T>
ModulusResult<T> classical_modulus(const funcs::Function1D& f, int r, const T& t, const ModulusOptions& opts = {});

struct RateFit {
    double slope = 0;
    double intercept = 0;
    /// Root-mean-square residual on the log scale.
    double residual = 0;
};

/// Least squares of log(value) on log(n).
RateFit rate_fit(const std::vector<std::pair<double, double>>& pairs);

template <class T>
class DiscreteRV {
  public:
    struct Atom {
        T value;
        T prob;
    };

    explicit DiscreteRV(std::vector<Atom> atoms);
    const std::vector<Atom>& atoms() const { return atoms_; }

    template <class Fn>
    T expect(Fn&& fn) const {
        T acc = from_int<T>(0);
        for (const auto& a : atoms_) acc += a.prob * fn(a.value);
        return acc;
    }
    T mean() const;
    T variance() const;

  private:
    std::vector<Atom> atoms_;
};

template <class T>
struct JensenRecord {
    T gap{};
    T bound{};
    bool holds = false;
};

/// gap = |E f(X) - f(E X)|, bound = 15 omega^2(f, sqrt(Var X)/2).
template <class T>
JensenRecord<T> jensen_gap_check(const funcs::Function1D& f, const DiscreteRV<T>& x,
                                 const ModulusOptions& opts = {});

struct EntRecord {
    Real ent;
    Real upper_log;
    Real upper_sqrtvar;
    Real lower_hell;
    Real lower_varsqrt;
    Real lower_tv;
    bool all_hold = false;
};

/// Ent(X) = E[X ln X] - E[X] ln E[X] with its upper and lower bounds.
template <class T>
EntRecord ent_bounds(const DiscreteRV<T>& x);

struct DivergenceRecord {
    Real tv;
    Real hellinger_sq;
    Real kl;
    Real chi_sq;
    bool chain_holds = false;
};

/// Atoms are matched by value; P must be absolutely continuous w.r.t. Q.
template <class T>
DivergenceRecord divergences(const DiscreteRV<T>& p, const DiscreteRV<T>& q);

}  // namespace biascorr::smoothness
