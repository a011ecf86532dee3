#include "biascorr/taylor.hpp"

#include "biascorr/binom.hpp"

namespace biascorr::taylor {

LinearDifferentialForm LinearDifferentialForm::identity() {
    LinearDifferentialForm out;
    out.add(0, Polynomial::constant(1));
    return out;
}

void LinearDifferentialForm::add(int order, const Polynomial& q) {
    if (order < 0) throw DomainError("form: negative derivative order");
    if (q.is_zero()) return;
    auto it = terms_.find(order);
    if (it == terms_.end()) {
        terms_.emplace(order, q);
    } else {
        it->second += q;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

int LinearDifferentialForm::max_poly_degree() const {
    int d = -1;
    for (const auto& [order, q] : terms_) d = std::max(d, q.degree());
    return d;
}

LinearDifferentialForm LinearDifferentialForm::differentiate() const {
    LinearDifferentialForm out;
    for (const auto& [order, q] : terms_) {
        out.add(order, q.derivative());
        out.add(order + 1, q);
    }
    return out;
}

LinearDifferentialForm& LinearDifferentialForm::operator+=(const LinearDifferentialForm& o) {
    for (const auto& [order, q] : o.terms_) add(order, q);
    return *this;
}

LinearDifferentialForm& LinearDifferentialForm::operator*=(const Rational& c) {
    if (c == 0) {
        terms_.clear();
        return *this;
    }
    for (auto& [order, q] : terms_) q *= c;
    return *this;
}

nlohmann::json LinearDifferentialForm::to_json() const {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [order, q] : terms_) {
        nlohmann::json coeffs = nlohmann::json::array();
        for (const auto& c : q.coefficients()) coeffs.push_back(format_rational(c));
        out.push_back({{"order", order}, {"poly", coeffs}});
    }
    return out;
}

LinearDifferentialForm LinearDifferentialForm::from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw DomainError("form json must be an array");
    LinearDifferentialForm out;
    for (const auto& term : j) {
        std::vector<Rational> coeffs;
        for (const auto& c : term.at("poly")) coeffs.push_back(parse_rational(c.get<std::string>()));
        out.add(term.at("order").get<int>(), Polynomial(std::move(coeffs)));
    }
    return out;
}

LinearDifferentialForm apply_T(int j, const LinearDifferentialForm& g) {
    if (j < 1) throw DomainError("apply_T: j must be at least 1");
    LinearDifferentialForm out;
    LinearDifferentialForm d = g;
    for (int i = 1; i <= 2 * j; ++i) {
        d = d.differentiate();
        if (i < j + 1) continue;
        auto h = binom::h_coeffs(i);
        const Polynomial& hq = h.at(i - j);
        const Rational inv_fact = Rational(1) / Rational(factorial(i));
        for (const auto& [order, q] : d.terms()) out.add(order, q * hq * inv_fact);
    }
    return out;
}

std::vector<LinearDifferentialForm> construction_sequence(int k) {
    if (k < 1) throw DomainError("construction_sequence: k must be at least 1");
    std::vector<LinearDifferentialForm> t{LinearDifferentialForm::identity()};
    for (int i = 1; i < k; ++i) {
        LinearDifferentialForm ti;
        for (int j = 1; j <= i; ++j) ti += apply_T(j, t[i - j]);
        ti *= Rational(-1);
        t.push_back(std::move(ti));
    }
    return t;
}

namespace {

void require_derivatives(const funcs::Function1D& f, int order) {
    if (f.max_derivative_order() < order) {
        throw DomainError(f.name() + ": needs derivatives up to order " + std::to_string(order));
    }
}

template <class T>
T estimate_with(const std::vector<LinearDifferentialForm>& t, const funcs::Function1D& f, int n, const T& phat) {
    T acc = from_int<T>(0);
    T scale = from_int<T>(1);
    const T inv_n = ratio<T>(1, n);
    for (const auto& form : t) {
        acc += scale * form.evaluate(f, phat);
        scale *= inv_n;
    }
    return acc;
}

}  // namespace

template <class T>
T taylor_estimate(const funcs::Function1D& f, int k, int n, const T& phat) {
    if (n < 1) throw DomainError("taylor_estimate: n must be at least 1");
    auto t = construction_sequence(k);
    if (k > 1) require_derivatives(f, 2 * (k - 1));
    return estimate_with(t, f, n, phat);
}

template <class T>
std::vector<T> taylor_atoms(const funcs::Function1D& f, int k, int n) {
    if (n < 1) throw DomainError("taylor_atoms: n must be at least 1");
    auto t = construction_sequence(k);
    if (k > 1) require_derivatives(f, 2 * (k - 1));
    std::vector<T> out(n + 1);
    for (int x = 0; x <= n; ++x) out[x] = estimate_with(t, f, n, ratio<T>(x, n));
    return out;
}

template <class T>
T taylor_bias(const funcs::Function1D& f, int k, int n, const T& p) {
    return T(binom::bernstein_form(taylor_atoms<T>(f, k, n), p) - f(p));
}

template <class T>
BiasCurve<T> taylor_bias_curve(const funcs::Function1D& f, int k, int n, const SearchOptions& opts) {
    const auto atoms = taylor_atoms<T>(f, k, n);
    ScalarFn<T> fn = [&](const T& p) { return T(binom::bernstein_form(atoms, p) - f(p)); };
    return sup_search<T>(fn, opts);
}

template <class T>
T falling_factorial_unbiased(long X, long n, int j) {
    if (j < 0 || j > n) throw DomainError("falling_factorial_unbiased: need 0 <= j <= n");
    if (X < 0 || X > n) throw DomainError("falling_factorial_unbiased: X must lie in [0, n]");
    T acc = from_int<T>(1);
    for (int l = 0; l < j; ++l) acc *= ratio<T>(X - l, n - l);
    return acc;
}

template <class T>
T sample_split_estimate(long X1, long n1, long X2, long n2, const funcs::Function1D& f, int k) {
    if (k < 1) throw DomainError("sample_split_estimate: k must be at least 1");
    const int top = 2 * k - 1;
    if (n2 < top) throw DomainError("sample_split_estimate: second half needs n2 >= 2k-1");
    if (X1 < 0 || X1 > n1) throw DomainError("X1 must lie in [0, n1]");
    require_derivatives(f, top);
    const T p1 = ratio<T>(X1, n1);
    std::vector<T> s(top + 1);
    for (int j = 0; j <= top; ++j) s[j] = falling_factorial_unbiased<T>(X2, n2, j);
    T acc = from_int<T>(0);
    for (int i = 0; i <= top; ++i) {
        T inner = from_int<T>(0);
        for (int j = 0; j <= i; ++j) {
            inner += from_bigint<T>(binomial(i, j)) * s[j] * ipow(T(-p1), i - j);
        }
        acc += f.derivative(i, p1) / from_bigint<T>(factorial(i)) * inner;
    }
    return acc;
}

namespace {

template <class T>
std::vector<std::vector<T>> split_table(const funcs::Function1D& f, int k, long n1, long n2) {
    std::vector<std::vector<T>> table(n1 + 1, std::vector<T>(n2 + 1));
    for (long x1 = 0; x1 <= n1; ++x1) {
        for (long x2 = 0; x2 <= n2; ++x2) table[x1][x2] = sample_split_estimate<T>(x1, n1, x2, n2, f, k);
    }
    return table;
}

template <class T>
T split_bias_from_table(const std::vector<std::vector<T>>& table, const funcs::Function1D& f, long n1, long n2,
                        const T& p) {
    auto w1 = binom::pmf<T>(static_cast<int>(n1), p);
    auto w2 = binom::pmf<T>(static_cast<int>(n2), p);
    T acc = from_int<T>(0);
    for (long x1 = 0; x1 <= n1; ++x1) {
        T inner = from_int<T>(0);
        for (long x2 = 0; x2 <= n2; ++x2) inner += w2[x2] * table[x1][x2];
        acc += w1[x1] * inner;
    }
    return T(acc - f(p));
}

}  // namespace

template <class T>
T sample_split_bias(const funcs::Function1D& f, int k, long n1, long n2, const T& p) {
    return split_bias_from_table(split_table<T>(f, k, n1, n2), f, n1, n2, p);
}

template <class T>
BiasCurve<T> sample_split_bias_curve(const funcs::Function1D& f, int k, long n1, long n2,
                                     const SearchOptions& opts) {
    const auto table = split_table<T>(f, k, n1, n2);
    ScalarFn<T> fn = [&](const T& p) { return split_bias_from_table(table, f, n1, n2, p); };
    return sup_search<T>(fn, opts);
}

#define BIASCORR_INSTANTIATE(T)                                                                              \
    template T taylor_estimate<T>(const funcs::Function1D&, int, int, const T&);                             \
    template std::vector<T> taylor_atoms<T>(const funcs::Function1D&, int, int);                             \
    template T taylor_bias<T>(const funcs::Function1D&, int, int, const T&);                                 \
    template BiasCurve<T> taylor_bias_curve<T>(const funcs::Function1D&, int, int, const SearchOptions&);    \
    template T falling_factorial_unbiased<T>(long, long, int);                                               \
    template T sample_split_estimate<T>(long, long, long, long, const funcs::Function1D&, int);              \
    template T sample_split_bias<T>(const funcs::Function1D&, int, long, long, const T&);                    \
    template BiasCurve<T> sample_split_bias_curve<T>(const funcs::Function1D&, int, long, long,              \
                                                     const SearchOptions&);

BIASCORR_INSTANTIATE(double)
BIASCORR_INSTANTIATE(Real)
BIASCORR_INSTANTIATE(Rational)

#undef BIASCORR_INSTANTIATE

}  // namespace biascorr::taylor
