#include "biascorr/binom.hpp"

#include <algorithm>
#include <cmath>

namespace biascorr::binom {

namespace {

void check_probability(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p must lie in [0,1]");
}

template <class T>
void check_probability(const T& p) {
    if (p < 0 || p > 1) throw DomainError("p must lie in [0,1]");
}

std::vector<double> pmf_double(int n, double p) {
    std::vector<double> out(n + 1, 0.0);
    if (p == 0.0) {
        out[0] = 1.0;
        return out;
    }
    if (p == 1.0) {
        out[n] = 1.0;
        return out;
    }
    const double q = 1.0 - p;
    const double lp = std::log(p);
    const double lq = std::log1p(-p);
    int mode = std::clamp(static_cast<int>(std::floor((n + 1) * p)), 0, n);
    double lmode = std::lgamma(n + 1.0) - std::lgamma(mode + 1.0) - std::lgamma(n - mode + 1.0) + mode * lp +
                   (n - mode) * lq;
    out[mode] = std::exp(lmode);
    const double odds = p / q;
    for (int k = mode; k < n && out[k] > 0.0; ++k) out[k + 1] = out[k] * odds * (n - k) / (k + 1.0);
    for (int k = mode; k > 0 && out[k] > 0.0; --k) out[k - 1] = out[k] / odds * k / (n - k + 1.0);
    double total = 0.0;
    for (double w : out) total += w;
    for (double& w : out) w /= total;
    return out;
}

}  // namespace

template <class T>
std::vector<T> pmf(int n, const T& p) {
    if (n < 0) throw DomainError("pmf: n must be nonnegative");
    check_probability(p);
    if constexpr (std::is_same_v<T, double>) {
        return pmf_double(n, p);
    } else {
        T q = T(1 - p);
        std::vector<T> qpow(n + 1);
        qpow[0] = from_int<T>(1);
        for (int k = 1; k <= n; ++k) qpow[k] = T(qpow[k - 1] * q);
        std::vector<T> out(n + 1);
        T ppow = from_int<T>(1);
        BigInt c = 1;
        for (int k = 0; k <= n; ++k) {
            out[k] = T(from_bigint<T>(c) * ppow * qpow[n - k]);
            ppow *= p;
            c = c * (n - k) / (k + 1);
        }
        return out;
    }
}

template <class T>
std::vector<T> node_values(const funcs::Function1D& f, int n) {
    if (n < 1) throw DomainError("n must be at least 1");
    if constexpr (std::is_same_v<T, Rational>) {
        if (!f.rational_evaluable()) throw DomainError(f.name() + " is not evaluable in exact mode");
    }
    std::vector<T> out(n + 1);
    for (int k = 0; k <= n; ++k) out[k] = f(ratio<T>(k, n));
    return out;
}

template <class T>
T bernstein_form(const std::vector<T>& coeffs, const T& p) {
    if (coeffs.empty()) throw DomainError("bernstein_form: empty coefficient vector");
    auto w = pmf<T>(static_cast<int>(coeffs.size()) - 1, p);
    T acc = from_int<T>(0);
    for (size_t k = 0; k < coeffs.size(); ++k) acc += coeffs[k] * w[k];
    return acc;
}

template <class T>
T bernstein_apply(const funcs::Function1D& f, int n, const T& p) {
    check_probability(p);
    return bernstein_form(node_values<T>(f, n), p);
}

template <class T>
Matrix<T> transition_matrix(int n) {
    if (n < 1) throw DomainError("transition_matrix: n must be at least 1");
    Matrix<T> a;
    a.reserve(n + 1);
    for (int i = 0; i <= n; ++i) a.push_back(pmf<T>(n, ratio<T>(i, n)));
    return a;
}

template <class T>
std::vector<T> eigenvalues(int n) {
    if (n < 1) throw DomainError("eigenvalues: n must be at least 1");
    std::vector<T> out(n + 1);
    out[0] = from_int<T>(1);
    for (int k = 1; k <= n; ++k) out[k] = T(out[k - 1] * (1 - ratio<T>(k - 1, n)));
    return out;
}

void BivariatePoly::add(int p_degree, int n_degree, const Rational& c) {
    if (p_degree < 0 || n_degree < 0) throw DomainError("BivariatePoly: negative degree");
    if (c == 0) return;
    Key key{p_degree, n_degree};
    auto it = terms_.find(key);
    if (it == terms_.end()) {
        terms_.emplace(key, c);
    } else {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }
}

Rational BivariatePoly::coefficient(int p_degree, int n_degree) const {
    auto it = terms_.find({p_degree, n_degree});
    return it == terms_.end() ? Rational(0) : it->second;
}

int BivariatePoly::p_degree() const {
    int d = -1;
    for (const auto& [key, c] : terms_) d = std::max(d, key.first);
    return d;
}

int BivariatePoly::n_degree() const {
    int d = -1;
    for (const auto& [key, c] : terms_) d = std::max(d, key.second);
    return d;
}

Polynomial BivariatePoly::n_coefficient(int j) const {
    std::vector<Rational> coeffs(std::max(p_degree(), 0) + 1, Rational(0));
    for (const auto& [key, c] : terms_) {
        if (key.second == j) coeffs[key.first] = c;
    }
    return Polynomial(std::move(coeffs));
}

nlohmann::json BivariatePoly::to_json() const {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [key, c] : terms_) {
        out.push_back({{"p_degree", key.first},
                       {"n_degree", key.second},
                       {"numerator", boost::multiprecision::numerator(c).str()},
                       {"denominator", boost::multiprecision::denominator(c).str()}});
    }
    return out;
}

BivariatePoly BivariatePoly::from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw DomainError("BivariatePoly json must be an array");
    BivariatePoly out;
    for (const auto& term : j) {
        BigInt num(term.at("numerator").get<std::string>());
        BigInt den(term.at("denominator").get<std::string>());
        if (den == 0) throw DomainError("BivariatePoly json: zero denominator");
        out.add(term.at("p_degree").get<int>(), term.at("n_degree").get<int>(), Rational(num, den));
    }
    return out;
}

namespace {

BivariatePoly times_variance_factor(const BivariatePoly& a) {
    BivariatePoly out;
    for (const auto& [key, c] : a.terms()) {
        out.add(key.first + 1, key.second, c);
        out.add(key.first + 2, key.second, -c);
    }
    return out;
}

}  // namespace

BivariatePoly central_moment_poly(int s) {
    if (s < 0) throw DomainError("central_moment_poly: s must be nonnegative");
    BivariatePoly prev;  // T_{n,0}
    prev.add(0, 0, 1);
    BivariatePoly cur;  // T_{n,1} = 0
    if (s == 0) return prev;
    for (int k = 1; k < s; ++k) {
        // T_{k+1} = p(1-p)(d/dp T_k + n k T_{k-1})
        BivariatePoly inner;
        for (const auto& [key, c] : cur.terms()) {
            if (key.first > 0) inner.add(key.first - 1, key.second, c * key.first);
        }
        for (const auto& [key, c] : prev.terms()) inner.add(key.first, key.second + 1, c * k);
        BivariatePoly next = times_variance_factor(inner);
        prev = std::move(cur);
        cur = std::move(next);
    }
    return cur;
}

std::map<int, Polynomial> h_coeffs(int s) {
    if (s < 2) throw DomainError("h_coeffs: s must be at least 2");
    auto t = central_moment_poly(s);
    std::map<int, Polynomial> out;
    for (int j = 1; j <= s / 2; ++j) out.emplace(j, t.n_coefficient(j));
    return out;
}

double h_coeff_bound(int s, int j) {
    return std::pow(4.0 * std::exp(1.0) * s, s) / std::tgamma(j + 1.0);
}

template <class T>
T truncated_moment(int n, const T& p, const T& t, int u, Side side) {
    if (n < 1) throw DomainError("truncated_moment: n must be at least 1");
    if (u < 0) throw DomainError("truncated_moment: u must be nonnegative");
    check_probability(p);
    check_probability(t);
    auto w = pmf<T>(n, p);
    T acc = from_int<T>(0);
    for (int k = 0; k <= n; ++k) {
        T x = ratio<T>(k, n);
        bool inside = side == Side::plus ? !(x < t) : !(x > t);
        if (!inside) continue;
        T d = side == Side::plus ? T(x - t) : T(t - x);
        acc += w[k] * ipow(d, static_cast<unsigned long>(u));
    }
    return acc;
}

template <class T>
T backward_diff(const std::map<long, T>& seq, long n, int s) {
    if (s < 0) throw DomainError("backward_diff: s must be nonnegative");
    T acc = from_int<T>(0);
    for (int k = 0; k <= s; ++k) {
        auto it = seq.find(n - k);
        if (it == seq.end()) throw DomainError("backward_diff: missing value at " + std::to_string(n - k));
        T term = from_bigint<T>(binomial(s, k)) * it->second;
        if (k % 2 == 0) {
            acc += term;
        } else {
            acc -= term;
        }
    }
    return acc;
}

double envelope_bound(int n, double p, double t, int u, int s, const EnvelopeConstants& c) {
    if (t < p) throw DomainError("envelope: requires t >= p");
    const double nd = n;
    const int umin = std::min(u, 1);
    if (t > 1.0 - 1.0 / nd) return c.c1 * std::pow(1 - t, u) * std::pow(1 - p, s) * std::pow(p, n - s);
    if (p <= 1.0 / nd) {
        double tail = t > 0 ? std::min(1.0 / std::sqrt(nd * t), 1.0) : 1.0;
        return c.c1 * (std::pow(nd, -(u + s - 1)) * p + std::pow(nd, -u) * std::pow(p, umin) * tail) *
               std::exp(-c.c2 * nd * t);
    }
    if (p <= 0.5) {
        double tail = std::min(1.0 / std::sqrt(nd * t), 1.0);
        return c.c1 * (std::pow(nd, -(u / 2.0 + s)) * std::pow(p, u / 2.0) + std::pow(nd, -u) * std::pow(p, umin) * tail) *
               std::exp(-c.c2 * nd * (t - p) * (t - p) / t);
    }
    double tail = std::min(1.0 / std::sqrt(nd * (1 - t)), 1.0);
    return c.c1 *
           (std::pow(nd, -(u / 2.0 + s)) * std::pow(1 - p, u / 2.0) + std::pow(nd, -u) * std::pow(1 - p, umin) * tail) *
           std::exp(-c.c2 * nd * (t - p) * (t - p) / (1 - p));
}

template <class T>
EnvelopeRecord envelope_check(int n, const T& p, const T& t, int u, int s, const EnvelopeConstants& c) {
    if (t < p) throw DomainError("envelope_check: requires t >= p");
    if (s < 0 || u < 0) throw DomainError("envelope_check: s and u must be nonnegative");
    if (n < 2 * s || n < 1) throw DomainError("envelope_check: requires n >= 2s");
    std::map<long, T> seq;
    for (int k = 0; k <= s; ++k) seq[n - k] = truncated_moment<T>(n - k, p, t, u, Side::plus);
    EnvelopeRecord rec;
    rec.value = to_double(abs_value(backward_diff(seq, n, s)));
    rec.bound = envelope_bound(n, to_double(p), to_double(t), u, s, c);
    if (rec.bound > 0) {
        rec.ratio = rec.value / rec.bound;
    } else {
        rec.ratio = rec.value == 0 ? 0.0 : HUGE_VAL;
    }
    return rec;
}

EnvelopeConstants calibrate_envelope(int u, int s, int n_ref, double c2, int lattice) {
    PrecisionScope scope(128);
    EnvelopeConstants unit{1.0, c2};
    double c1 = 0.0;
    for (int i = 1; i < lattice; ++i) {
        Real p = ratio<Real>(i, lattice);
        for (int j = i; j <= lattice; ++j) {
            Real t = ratio<Real>(j, lattice);
            auto rec = envelope_check<Real>(n_ref, p, t, u, s, unit);
            if (rec.bound > 0) c1 = std::max(c1, rec.ratio);
        }
    }
    return {c1 > 0 ? c1 : 1.0, c2};
}

double chernoff_bound(int n, double p, double beta, Tail tail) {
    if (n < 1) throw DomainError("chernoff_bound: n must be at least 1");
    check_probability(p);
    if (!(beta > 0)) throw DomainError("chernoff_bound: beta must be positive");
    const double mu = n * p;
    if (tail == Tail::lower) {
        if (beta > 1) throw DomainError("chernoff_bound: lower tail requires beta <= 1");
        return std::exp(-beta * beta * mu / 2);
    }
    if (beta <= 1) return std::exp(-beta * beta * mu / 3);
    return std::exp(-beta * beta * mu / (2 + beta));
}

Rational chernoff_exact_tail(int n, const Rational& p, const Rational& beta, Tail tail) {
    auto w = pmf<Rational>(n, p);
    Rational mu = p * n;
    Rational acc = 0;
    for (int k = 0; k <= n; ++k) {
        bool in = tail == Tail::lower ? Rational(k) <= (1 - beta) * mu : Rational(k) >= (1 + beta) * mu;
        if (in) acc += w[k];
    }
    return acc;
}

#define BIASCORR_INSTANTIATE(T)                                                                      \
    template std::vector<T> pmf<T>(int, const T&);                                                   \
    template std::vector<T> node_values<T>(const funcs::Function1D&, int);                           \
    template T bernstein_form<T>(const std::vector<T>&, const T&);                                   \
    template T bernstein_apply<T>(const funcs::Function1D&, int, const T&);                          \
    template Matrix<T> transition_matrix<T>(int);                                                    \
    template std::vector<T> eigenvalues<T>(int);                                                     \
    template T truncated_moment<T>(int, const T&, const T&, int, Side);                              \
    template T backward_diff<T>(const std::map<long, T>&, long, int);                                \
    template EnvelopeRecord envelope_check<T>(int, const T&, const T&, int, int, const EnvelopeConstants&);

BIASCORR_INSTANTIATE(double)
BIASCORR_INSTANTIATE(Real)
BIASCORR_INSTANTIATE(Rational)

#undef BIASCORR_INSTANTIATE

}  // namespace biascorr::binom
