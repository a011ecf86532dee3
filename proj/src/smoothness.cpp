#include "biascorr/smoothness.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace biascorr::smoothness {

namespace {

// sqrt evaluated in Real and, for exact mode, rationalized.
template <class T>
T sqrt_value(const T& v) {
    if constexpr (std::is_same_v<T, double>) {
        return std::sqrt(v);
    } else if constexpr (std::is_same_v<T, Real>) {
        return T(sqrt(v));
    } else {
        return convert<Rational>(Real(sqrt(Real(v))));
    }
}

template <class T>
T pow2_fraction(int j) {
    if constexpr (std::is_same_v<T, double>) {
        return std::pow(2.0, -j / 8.0);
    } else {
        Real v = pow(Real(2), Real(-j) / 8);
        return convert<T>(v);
    }
}

Real tolerance() { return pow(Real(2), -static_cast<int>(current_bits()) + 24); }

template <class T>
ModulusResult<T> lattice_modulus(const funcs::Function1D& f, int r, const T& t, const ModulusOptions& opts,
                                 bool weighted) {
    if (r < 1) throw DomainError("modulus: r must be at least 1");
    if (!(t > 0)) throw DomainError("modulus: t must be positive");
    if (opts.h_samples < 1 || opts.x_samples < 2) throw DomainError("modulus: lattice too small");
    ModulusResult<T> out;
    out.r = r;
    out.t = t;
    out.h_grid = opts.h_samples;
    out.x_grid = opts.x_samples;
    out.value = from_int<T>(0);
    std::vector<T> xs(opts.x_samples), phi(opts.x_samples);
    for (int i = 0; i < opts.x_samples; ++i) {
        xs[i] = ratio<T>(i, opts.x_samples - 1);
        phi[i] = weighted ? sqrt_value<T>(T(xs[i] * (1 - xs[i]))) : from_int<T>(1);
    }
    for (int j = 0; j < opts.h_samples; ++j) {
        T h = T(t * pow2_fraction<T>(j));
        for (int i = 0; i < opts.x_samples; ++i) {
            if (phi[i] == 0) continue;
            T v = abs_value(symmetric_diff<T>(f, r, T(h * phi[i]), xs[i]));
            if (v > out.value) {
                out.value = v;
                out.argmax_x = xs[i];
                out.argmax_h = h;
            }
        }
    }
    return out;
}

}  // namespace

template <class T>
T symmetric_diff(const funcs::Function1D& f, int r, const T& h, const T& x) {
    if (r < 1) throw DomainError("symmetric_diff: r must be at least 1");
    if (!(h > 0)) throw DomainError("symmetric_diff: h must be positive");
    T half = T(from_int<T>(r) * h / 2);
    if (x - half < 0 || x + half > 1) return from_int<T>(0);
    T acc = from_int<T>(0);
    for (int k = 0; k <= r; ++k) {
        T term = from_bigint<T>(binomial(r, k)) * f(T(x + half - from_int<T>(k) * h));
        if (k % 2 == 0) {
            acc += term;
        } else {
            acc -= term;
        }
    }
    return acc;
}

template <class T>
ModulusResult<T> dt_modulus(const funcs::Function1D& f, int r, const T& t, const ModulusOptions& opts) {
    return lattice_modulus(f, r, t, opts, true);
}

template <class T>
ModulusResult<T> classical_modulus(const funcs::Function1D& f, int r, const T& t, const ModulusOptions& opts) {
    return lattice_modulus(f, r, t, opts, false);
}

RateFit rate_fit(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.size() < 3) throw DomainError("rate_fit needs at least 3 pairs");
    double sx = 0, sy = 0;
    std::vector<double> xs, ys;
    for (const auto& [n, v] : pairs) {
        if (!(n > 0) || !(v > 0)) throw DomainError("rate_fit needs positive n and values");
        xs.push_back(std::log(n));
        ys.push_back(std::log(v));
        sx += xs.back();
        sy += ys.back();
    }
    const double m = static_cast<double>(xs.size());
    const double mx = sx / m, my = sy / m;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0) throw DomainError("rate_fit needs distinct n");
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        double e = ys[i] - fit.intercept - fit.slope * xs[i];
        ss += e * e;
    }
    fit.residual = std::sqrt(ss / m);
    return fit;
}

template <class T>
DiscreteRV<T>::DiscreteRV(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw DomainError("DiscreteRV needs at least one atom");
    T total = from_int<T>(0);
    for (const auto& a : atoms_) {
        if (a.prob < 0) throw DomainError("DiscreteRV: negative probability");
        total += a.prob;
    }
    if constexpr (is_exact_v<T>) {
        if (total != 1) throw DomainError("DiscreteRV: probabilities must sum to 1");
    } else {
        if (abs_value(T(total - 1)) > 1e-12) throw DomainError("DiscreteRV: probabilities must sum to 1");
    }
}

template <class T>
T DiscreteRV<T>::mean() const {
    return expect([](const T& v) { return v; });
}

template <class T>
T DiscreteRV<T>::variance() const {
    const T mu = mean();
    return expect([&](const T& v) { return T((v - mu) * (v - mu)); });
}

template <class T>
JensenRecord<T> jensen_gap_check(const funcs::Function1D& f, const DiscreteRV<T>& x, const ModulusOptions& opts) {
    for (const auto& a : x.atoms()) {
        if (a.value < 0 || a.value > 1) throw DomainError("jensen_gap_check: atoms must lie in [0,1]");
    }
    JensenRecord<T> rec;
    rec.gap = abs_value(T(x.expect([&](const T& v) { return f(v); }) - f(x.mean())));
    T var = x.variance();
    if (var == 0) {
        rec.bound = from_int<T>(0);
    } else {
        rec.bound = T(15 * classical_modulus<T>(f, 2, T(sqrt_value<T>(var) / 2), opts).value);
    }
    rec.holds = rec.gap <= rec.bound;
    return rec;
}

template <class T>
EntRecord ent_bounds(const DiscreteRV<T>& x) {
    std::vector<Real> vals, probs;
    for (const auto& a : x.atoms()) {
        if (a.value < 0) throw DomainError("ent_bounds: atoms must be nonnegative");
        vals.push_back(convert<Real>(a.value));
        probs.push_back(convert<Real>(a.prob));
    }
    Real ex = 0, exlogx = 0, esqrt = 0, ex2 = 0;
    for (size_t i = 0; i < vals.size(); ++i) {
        ex += probs[i] * vals[i];
        ex2 += probs[i] * vals[i] * vals[i];
        esqrt += probs[i] * sqrt(vals[i]);
        if (vals[i] > 0) exlogx += probs[i] * vals[i] * log(vals[i]);
    }
    if (ex <= 0) throw DomainError("ent_bounds: E[X] must be positive");
    Real var = ex2 - ex * ex;
    if (var < 0) var = 0;
    Real mad = 0;
    for (size_t i = 0; i < vals.size(); ++i) mad += probs[i] * abs(vals[i] / ex - 1);

    EntRecord rec;
    rec.ent = exlogx - ex * log(ex);
    rec.upper_log = ex * log1p(var / (ex * ex));
    rec.upper_sqrtvar = sqrt(var);
    rec.lower_hell = 2 * (ex - sqrt(ex) * esqrt);
    rec.lower_varsqrt = ex - esqrt * esqrt;
    rec.lower_tv = ex * mad * mad / 2;
    const Real tol = tolerance() * (1 + ex + rec.upper_sqrtvar);
    rec.all_hold = rec.ent <= rec.upper_log + tol && rec.upper_log <= rec.upper_sqrtvar + tol &&
                   rec.ent + tol >= rec.lower_hell && rec.lower_hell + tol >= rec.lower_varsqrt &&
                   rec.ent + tol >= rec.lower_tv;
    return rec;
}

template <class T>
DivergenceRecord divergences(const DiscreteRV<T>& p, const DiscreteRV<T>& q) {
    std::map<T, std::pair<Real, Real>> joint;
    for (const auto& a : p.atoms()) joint[a.value].first += convert<Real>(a.prob);
    for (const auto& a : q.atoms()) joint[a.value].second += convert<Real>(a.prob);
    DivergenceRecord rec;
    rec.tv = 0;
    rec.hellinger_sq = 0;
    rec.kl = 0;
    rec.chi_sq = -1;
    for (const auto& [value, pq] : joint) {
        const auto& [pp, qq] = pq;
        if (pp > 0 && qq == 0) throw DomainError("divergences: P is not absolutely continuous w.r.t. Q");
        rec.tv += abs(Real(pp - qq));
        Real d = sqrt(pp) - sqrt(qq);
        rec.hellinger_sq += d * d;
        if (pp > 0) {
            rec.kl += pp * log(pp / qq);
            rec.chi_sq += pp * pp / qq;
        }
    }
    rec.tv /= 2;
    if (rec.chi_sq < 0) rec.chi_sq = 0;
    if (rec.kl < 0) rec.kl = 0;
    const Real tol = tolerance();
    rec.chain_holds = rec.kl <= log1p(rec.chi_sq) + tol && rec.kl + tol >= 2 * rec.tv * rec.tv &&
                      rec.kl + tol >= rec.hellinger_sq;
    return rec;
}

#define BIASCORR_INSTANTIATE(T)                                                                                \
    template T symmetric_diff<T>(const funcs::Function1D&, int, const T&, const T&);                           \
    template ModulusResult<T> dt_modulus<T>(const funcs::Function1D&, int, const T&, const ModulusOptions&);   \
    template ModulusResult<T> classical_modulus<T>(const funcs::Function1D&, int, const T&,                    \
                                                   const ModulusOptions&);                                     \
    template class DiscreteRV<T>;                                                                              \
    template JensenRecord<T> jensen_gap_check<T>(const funcs::Function1D&, const DiscreteRV<T>&,               \
                                                 const ModulusOptions&);                                       \
    template EntRecord ent_bounds<T>(const DiscreteRV<T>&);                                                    \
    template DivergenceRecord divergences<T>(const DiscreteRV<T>&, const DiscreteRV<T>&);

BIASCORR_INSTANTIATE(double)
BIASCORR_INSTANTIATE(Real)
BIASCORR_INSTANTIATE(Rational)

#undef BIASCORR_INSTANTIATE

}  // namespace biascorr::smoothness
