#pragma once

// General r-jackknife schemes and their exact bias analysis.

#include "biascorr/curve.hpp"
#include "biascorr/funcs.hpp"
#include "biascorr/numeric.hpp"

#include <map>
#include <vector>

namespace biascorr::jackknife {

struct JackknifeScheme {
    std::vector<long> sizes;
    std::vector<Rational> coeffs;
    int order = 0;
    /// n_r / n_1
    Rational K;
    Rational sum_abs;
};

/// C_i = prod_{j != i} n_i / (n_i - n_j). Requires strictly increasing sizes
/// with n_1 >= r; the moment identities are verified before returning.
JackknifeScheme scheme_general(const std::vector<long>& sizes);

/// Sizes n_i = n - (r - i) d.
JackknifeScheme scheme_delete_d(long n, int r, long d);

/// Sizes (n/2, n); n must be even.
JackknifeScheme scheme_half(long n);

/// sum_i C_i / n_i^rho
Rational power_sum(const JackknifeScheme& scheme, int rho);

/// (rho-1)^{r-1} / ((r-1)! n_1^rho)
Rational higher_power_bound(const JackknifeScheme& scheme, int rho);

struct CoeffCheck {
    Rational sum_abs;
    bool satisfied = false;
};

CoeffCheck bounded_coeff_check(const JackknifeScheme& scheme, const Rational& threshold);

/// sum_i C_i B_{n_i}[f](p) - f(p)
template <class T>
T jackknife_bias(const funcs::Function1D& f, const JackknifeScheme& scheme, const T& p);

template <class T>
BiasCurve<T> bias_curve(const funcs::Function1D& f, const JackknifeScheme& scheme, const SearchOptions& opts = {});

/// sum_i v_i / prod_{j != i}(x_i - x_j)
template <class T>
T divided_difference(const std::vector<T>& points, const std::vector<T>& values);

/// Divided difference over n_1..n_r of G_m = m^{r-1}(B_m[f](p) - f(p)).
template <class T>
T divided_diff_bias(const funcs::Function1D& f, const JackknifeScheme& scheme, const T& p);

struct MeanValueRecord {
    Rational dd;
    Rational max_backward;
    bool holds = false;
};

/// Compares |f[x_0..x_r]| with max |Delta^r f(x)| / r! over x in [x_0 + r, x_r],
/// i.e. over backward differences that only touch points of [x_0, x_r].
MeanValueRecord meanvalue_check(const std::map<long, Rational>& values, const std::vector<long>& points);

/// Delete-1 2-jackknife value at X successes out of n.
template <class T>
T delete1_r2_point_estimate(long X, long n, const funcs::Function1D& f);

/// Var over X ~ B(n,p) of the delete-1 2-jackknife.
template <class T>
T delete1_r2_variance(long n, const T& p, const funcs::Function1D& f);

/// Smooth function whose s-th derivative follows the sign of
/// sum_i C_i E_{p0}(X_i/n_i - t)_+^{s-1} for t >= p0, mollified with a
/// triangular kernel of half-width min(mollify_width, n^{-2r}/4). All
/// derivatives up to order s are bounded by 1 and vanish at 0.
funcs::Function1D adversarial_smooth(int n, const JackknifeScheme& scheme, int s, double p0,
                                     double mollify_width = 1e-3);

}  // namespace biascorr::jackknife
