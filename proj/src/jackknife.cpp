#include "biascorr/jackknife.hpp"

#include "biascorr/binom.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace biascorr::jackknife {

JackknifeScheme scheme_general(const std::vector<long>& sizes) {
    if (sizes.empty()) throw DomainError("scheme needs at least one sample size");
    const int r = static_cast<int>(sizes.size());
    for (size_t i = 1; i < sizes.size(); ++i) {
        if (sizes[i] <= sizes[i - 1]) throw DomainError("scheme sizes must be strictly increasing");
    }
    if (sizes.front() < r) throw DomainError("scheme requires n_1 >= r");

    JackknifeScheme out;
    out.sizes = sizes;
    out.order = r;
    out.K = Rational(sizes.back(), sizes.front());
    out.sum_abs = 0;
    for (int i = 0; i < r; ++i) {
        Rational c = 1;
        for (int j = 0; j < r; ++j) {
            if (j != i) c *= Rational(sizes[i]) / Rational(sizes[i] - sizes[j]);
        }
        out.coeffs.push_back(c);
        out.sum_abs += abs_value(c);
    }
    if (power_sum(out, 0) != 1) throw DomainError("scheme coefficients do not sum to 1");
    for (int rho = 1; rho < r; ++rho) {
        if (power_sum(out, rho) != 0) throw DomainError("scheme violates moment identity");
    }
    return out;
}

JackknifeScheme scheme_delete_d(long n, int r, long d) {
    if (r < 1 || d < 1) throw DomainError("delete-d scheme needs r >= 1 and d >= 1");
    if (n - (r - 1) * d < 1) throw DomainError("delete-d scheme needs n - (r-1)d >= 1");
    std::vector<long> sizes;
    for (int i = 1; i <= r; ++i) sizes.push_back(n - (r - i) * d);
    return scheme_general(sizes);
}

JackknifeScheme scheme_half(long n) {
    if (n < 4 || n % 2 != 0) throw DomainError("half scheme needs an even n >= 4");
    return scheme_general({n / 2, n});
}

Rational power_sum(const JackknifeScheme& scheme, int rho) {
    Rational acc = 0;
    for (size_t i = 0; i < scheme.sizes.size(); ++i) {
        acc += scheme.coeffs[i] / Rational(ipow(BigInt(scheme.sizes[i]), rho));
    }
    return acc;
}

Rational higher_power_bound(const JackknifeScheme& scheme, int rho) {
    const int r = scheme.order;
    return Rational(ipow(BigInt(rho - 1), r - 1)) /
           Rational(factorial(r - 1) * ipow(BigInt(scheme.sizes.front()), rho));
}

CoeffCheck bounded_coeff_check(const JackknifeScheme& scheme, const Rational& threshold) {
    return {scheme.sum_abs, scheme.sum_abs <= threshold};
}

template <class T>
T jackknife_bias(const funcs::Function1D& f, const JackknifeScheme& scheme, const T& p) {
    T acc = T(-f(p));
    for (size_t i = 0; i < scheme.sizes.size(); ++i) {
        acc += from_rational<T>(scheme.coeffs[i]) * binom::bernstein_apply(f, static_cast<int>(scheme.sizes[i]), p);
    }
    return acc;
}

template <class T>
BiasCurve<T> bias_curve(const funcs::Function1D& f, const JackknifeScheme& scheme, const SearchOptions& opts) {
    std::vector<binom::BernsteinEvaluator<T>> evals;
    std::vector<T> coeffs;
    for (size_t i = 0; i < scheme.sizes.size(); ++i) {
        evals.emplace_back(f, static_cast<int>(scheme.sizes[i]));
        coeffs.push_back(from_rational<T>(scheme.coeffs[i]));
    }
    ScalarFn<T> fn = [&](const T& p) {
        T acc = T(-f(p));
        for (size_t i = 0; i < evals.size(); ++i) acc += coeffs[i] * evals[i](p);
        return acc;
    };
    return sup_search<T>(fn, opts);
}

template <class T>
T divided_difference(const std::vector<T>& points, const std::vector<T>& values) {
    if (points.empty() || points.size() != values.size()) {
        throw DomainError("divided_difference: points and values must be nonempty and of equal length");
    }
    T acc = from_int<T>(0);
    for (size_t i = 0; i < points.size(); ++i) {
        T denom = from_int<T>(1);
        for (size_t j = 0; j < points.size(); ++j) {
            if (j == i) continue;
            if (points[i] == points[j]) throw DomainError("divided_difference: duplicate points");
            denom *= points[i] - points[j];
        }
        acc += values[i] / denom;
    }
    return acc;
}

template <class T>
T divided_diff_bias(const funcs::Function1D& f, const JackknifeScheme& scheme, const T& p) {
    const unsigned r = static_cast<unsigned>(scheme.order);
    std::vector<T> points, values;
    T fp = f(p);
    for (long m : scheme.sizes) {
        T mt = from_int<T>(m);
        points.push_back(mt);
        values.push_back(T(ipow(mt, r - 1) * (binom::bernstein_apply(f, static_cast<int>(m), p) - fp)));
    }
    return divided_difference(points, values);
}

MeanValueRecord meanvalue_check(const std::map<long, Rational>& values, const std::vector<long>& points) {
    if (points.size() < 2) throw DomainError("meanvalue_check needs at least two points");
    for (size_t i = 1; i < points.size(); ++i) {
        if (points[i] <= points[i - 1]) throw DomainError("meanvalue_check: points must be increasing");
    }
    const int r = static_cast<int>(points.size()) - 1;
    std::vector<Rational> xs, ys;
    for (long x : points) {
        auto it = values.find(x);
        if (it == values.end()) throw DomainError("meanvalue_check: missing value at " + std::to_string(x));
        xs.emplace_back(x);
        ys.push_back(it->second);
    }
    MeanValueRecord rec;
    rec.dd = divided_difference(xs, ys);
    rec.max_backward = 0;
    for (long x = points.front() + r; x <= points.back(); ++x) {
        rec.max_backward = std::max(rec.max_backward, abs_value(binom::backward_diff(values, x, r)));
    }
    rec.holds = abs_value(rec.dd) <= rec.max_backward / Rational(factorial(r));
    return rec;
}

template <class T>
T delete1_r2_point_estimate(long X, long n, const funcs::Function1D& f) {
    if (n < 2) throw DomainError("delete-1 estimate needs n >= 2");
    if (X < 0 || X > n) throw DomainError("X must lie in [0, n]");
    T out = T(from_int<T>(n) * f(ratio<T>(X, n)));
    T inner = from_int<T>(0);
    if (n - X > 0) inner += from_int<T>(n - X) * f(ratio<T>(X, n - 1));
    if (X > 0) inner += from_int<T>(X) * f(ratio<T>(X - 1, n - 1));
    out -= ratio<T>(n - 1, n) * inner;
    return out;
}

template <class T>
T delete1_r2_variance(long n, const T& p, const funcs::Function1D& f) {
    auto w = binom::pmf<T>(static_cast<int>(n), p);
    T m1 = from_int<T>(0), m2 = from_int<T>(0);
    for (long x = 0; x <= n; ++x) {
        T v = delete1_r2_point_estimate<T>(x, n, f);
        m1 += w[x] * v;
        m2 += w[x] * v * v;
    }
    return T(m2 - m1 * m1);
}

namespace {

class AdversarialModel final : public funcs::FunctionModel {
  public:
    AdversarialModel(int s, double width, std::vector<Rational> breaks, std::vector<int> jumps)
        : s_(s), width_(width), breaks_(std::move(breaks)), jumps_(std::move(jumps)) {
        for (const auto& b : breaks_) breaks_d_.push_back(b.convert_to<double>());
    }

    double eval(double p) const override { return integral<double>(p, s_); }
    Real eval(const Real& p) const override { return integral<Real>(p, s_); }
    int max_derivative_order() const override { return s_; }
    double deriv(int order, double p) const override { return integral<double>(p, s_ - order); }
    Real deriv(int order, const Real& p) const override { return integral<Real>(p, s_ - order); }

  private:
    // q-fold antiderivative of the mollified step function.
    template <class T>
    T integral(const T& x, int q) const {
        const int m = q + 2;
        const T w = T(width_);
        const T mfact = from_bigint<T>(factorial(m));
        T acc = from_int<T>(0);
        for (size_t j = 0; j < jumps_.size(); ++j) {
            T b;
            if constexpr (std::is_same_v<T, double>) {
                b = breaks_d_[j];
            } else {
                b = T(breaks_[j]);
            }
            T y = T(x - b);
            if (y <= -w) break;
            T term;
            if (y >= w) {
                term = from_int<T>(0);
                for (int k = 2; k <= m; k += 2) {
                    term += from_bigint<T>(binomial(m, k)) * ipow(y, m - k) * ipow(w, k - 2);
                }
                term = T(2 * term / mfact);
            } else {
                T plus = y > 0 ? ipow(y, m) : from_int<T>(0);
                term = T((ipow(T(y + w), m) - 2 * plus) / (w * w * mfact));
            }
            acc += jumps_[j] * term;
        }
        return acc;
    }

    int s_;
    double width_;
    std::vector<Rational> breaks_;
    std::vector<double> breaks_d_;
    std::vector<int> jumps_;
};

}  // namespace

funcs::Function1D adversarial_smooth(int n, const JackknifeScheme& scheme, int s, double p0, double mollify_width) {
    const int r = scheme.order;
    if (s < 1 || s > 2 * r - 3) throw DomainError("adversarial_smooth requires 1 <= s <= 2r-3");
    if (!(p0 > 0 && p0 < 1)) throw DomainError("adversarial_smooth requires p0 in (0,1)");
    if (!(mollify_width > 0)) throw DomainError("mollify width must be positive");
    const double width = std::min(mollify_width, std::pow(static_cast<double>(n), -2.0 * r) / 4);

    PrecisionScope scope(256);
    const Rational p0q(p0);
    std::set<Rational> cuts{p0q, Rational(1)};
    for (long m : scheme.sizes) {
        for (long k = 0; k <= m; ++k) {
            Rational x(k, m);
            if (x > p0q) cuts.insert(x);
        }
    }
    std::vector<Rational> edges(cuts.begin(), cuts.end());
    if (s >= 2) {
        const int sub = 4;
        std::vector<Rational> fine;
        for (size_t i = 0; i + 1 < edges.size(); ++i) {
            for (int k = 0; k < sub; ++k) fine.push_back(edges[i] + (edges[i + 1] - edges[i]) * Rational(k, sub));
        }
        fine.push_back(edges.back());
        edges = std::move(fine);
    }

    std::vector<std::vector<Real>> weights;
    for (long m : scheme.sizes) weights.push_back(binom::pmf<Real>(static_cast<int>(m), Real(p0q)));
    auto signed_sum = [&](const Real& t) {
        Real acc = 0;
        for (size_t i = 0; i < scheme.sizes.size(); ++i) {
            const long m = scheme.sizes[i];
            Real inner = 0;
            for (long k = 0; k <= m; ++k) {
                Real x = Real(k) / m;
                if (x < t) continue;
                inner += weights[i][k] * ipow(Real(x - t), s - 1);
            }
            acc += Real(scheme.coeffs[i]) * inner;
        }
        return acc;
    };

    std::vector<Rational> breaks;
    std::vector<int> jumps;
    int prev = 0;
    for (size_t i = 0; i + 1 < edges.size(); ++i) {
        const Rational midq = (edges[i] + edges[i + 1]) / 2;
        Real mid(midq);
        Real v = signed_sum(mid);
        int g = v > 0 ? 1 : (v < 0 ? -1 : 0);
        if (g != prev) {
            breaks.push_back(edges[i]);
            jumps.push_back(g - prev);
            prev = g;
        }
    }

    std::string name = "adversarial:n=" + std::to_string(n) + ",s=" + std::to_string(s);
    funcs::Function1D f(name, std::make_shared<AdversarialModel>(s, width, std::move(breaks), std::move(jumps)));
    std::ostringstream notes;
    notes << "mollifier half-width " << width;
    f.with_smoothness({s, 1.0}).with_notes(notes.str());
    return f;
}

#define BIASCORR_INSTANTIATE(T)                                                                              \
    template T jackknife_bias<T>(const funcs::Function1D&, const JackknifeScheme&, const T&);                \
    template BiasCurve<T> bias_curve<T>(const funcs::Function1D&, const JackknifeScheme&, const SearchOptions&); \
    template T divided_difference<T>(const std::vector<T>&, const std::vector<T>&);                          \
    template T divided_diff_bias<T>(const funcs::Function1D&, const JackknifeScheme&, const T&);             \
    template T delete1_r2_point_estimate<T>(long, long, const funcs::Function1D&);                           \
    template T delete1_r2_variance<T>(long, const T&, const funcs::Function1D&);

BIASCORR_INSTANTIATE(double)
BIASCORR_INSTANTIATE(Real)
BIASCORR_INSTANTIATE(Rational)

#undef BIASCORR_INSTANTIATE

}  // namespace biascorr::jackknife
