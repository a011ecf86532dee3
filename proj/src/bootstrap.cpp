#include "biascorr/bootstrap.hpp"

#include <algorithm>

namespace biascorr::bootstrap {

namespace {

template <class T>
unsigned bits_of() {
    if constexpr (std::is_same_v<T, double>) {
        return kDoubleBits;
    } else if constexpr (std::is_same_v<T, Real>) {
        return current_bits();
    } else {
        return 0;
    }
}

}  // namespace

template <class T>
BootstrapState<T> initial_state(const funcs::Function1D& f, int n) {
    auto v = binom::node_values<T>(f, n);
    NodeVector<T> nv{n, v, bits_of<T>()};
    return BootstrapState<T>{f, n, 1, nv, nv};
}

template <class T>
void advance(BootstrapState<T>& state, const binom::Matrix<T>& a, long steps) {
    const int n = state.n;
    if (static_cast<int>(a.size()) != n + 1) throw DomainError("advance: matrix size mismatch");
    std::vector<T>& u = state.u.values;
    const std::vector<T>& v = state.v.values;
    std::vector<T> next(n + 1);
    T au;
    for (long step = 0; step < steps; ++step) {
        for (int i = 0; i <= n; ++i) {
            au = from_int<T>(0);
            for (int k = 0; k <= n; ++k) au += a[i][k] * u[k];
            next[i] = v[i] + u[i] - au;
        }
        std::swap(u, next);
    }
    state.m += steps;
}

template <class T>
BootstrapState<T> iterate_bias(const funcs::Function1D& f, int n, long m) {
    if (m < 1) throw DomainError("iterate_bias: m must be at least 1");
    auto state = initial_state<T>(f, n);
    if (m > 1) advance(state, binom::transition_matrix<T>(n), m - 1);
    return state;
}

template <class T>
T e_m_eval(const BootstrapState<T>& state, const T& p) {
    if (p < 0 || p > 1) throw DomainError("e_m_eval: p must lie in [0,1]");
    return T(state.f(p) - binom::bernstein_form(state.u.values, p));
}

template <class T>
BiasCurve<T> sup_e_m(const BootstrapState<T>& state, const SearchOptions& opts) {
    ScalarFn<T> fn = [&](const T& p) { return e_m_eval(state, p); };
    return sup_search<T>(fn, opts);
}

std::vector<TraceRow> trace_sup(const funcs::Function1D& f, int n, long m_max, long stride,
                                const TraceOptions& opts) {
    if (stride < 1) throw DomainError("trace_sup: stride must be at least 1");
    if (m_max < 1) throw DomainError("trace_sup: m_max must be at least 1");
    if (opts.grid < 2) throw DomainError("trace_sup: grid needs at least 2 points");
    PrecisionScope scope(opts.bits);

    const int N = opts.grid;
    std::vector<Real> fvals(N);
    std::vector<std::vector<Real>> basis(N);
    for (int j = 0; j < N; ++j) {
        Real p = ratio<Real>(j, N - 1);
        fvals[j] = f(p);
        basis[j] = binom::pmf<Real>(n, p);
    }

    auto state = initial_state<Real>(f, n);
    const auto a = binom::transition_matrix<Real>(n);
    std::vector<TraceRow> rows;
    Real acc, best;
    long emitted = 0;
    for (long m = 1; m <= m_max; m += stride) {
        if (m > 1) advance(state, a, stride);
        int best_j = 0;
        best = -1;
        for (int j = 0; j < N; ++j) {
            acc = fvals[j];
            for (int k = 0; k <= n; ++k) acc -= state.u.values[k] * basis[j][k];
            if (acc < 0) acc = -acc;
            if (acc > best) {
                best = acc;
                best_j = j;
            }
        }
        TraceRow row{m, best, ratio<Real>(best_j, N - 1), false, 1.0 / (N - 1)};
        if (opts.refine_every > 0 && emitted % opts.refine_every == 0) {
            ScalarFn<Real> fn = [&](const Real& p) { return e_m_eval(state, p); };
            Real lo = ratio<Real>(std::max(best_j - 1, 0), N - 1);
            Real hi = ratio<Real>(std::min(best_j + 1, N - 1), N - 1);
            const int iterations = 40;
            auto [x, v] = golden_max<Real>(fn, lo, hi, iterations);
            if (v > row.sup_abs) {
                row.sup_abs = v;
                row.argmax_p = x;
            }
            row.refined = true;
            row.tol = to_double(Real(hi - lo)) * std::pow(0.6180339887498949, iterations);
        }
        rows.push_back(std::move(row));
        ++emitted;
    }
    return rows;
}

template <class T>
LagrangeInterpolant<T>::LagrangeInterpolant(const funcs::Function1D& f, int n)
    : LagrangeInterpolant(binom::node_values<T>(f, n)) {}

template <class T>
LagrangeInterpolant<T>::LagrangeInterpolant(std::vector<T> node_values) : values_(std::move(node_values)) {
    if (values_.size() < 2) throw DomainError("lagrange interpolant needs n >= 1");
    const int n = static_cast<int>(values_.size()) - 1;
    for (int i = 0; i <= n; ++i) {
        nodes_.push_back(ratio<T>(i, n));
        T w = from_bigint<T>(binomial(n, i));
        weights_.push_back(i % 2 == 0 ? w : T(-w));
    }
}

template <class T>
T LagrangeInterpolant<T>::operator()(const T& p) const {
    T num = from_int<T>(0), den = from_int<T>(0);
    for (size_t i = 0; i < nodes_.size(); ++i) {
        T d = T(p - nodes_[i]);
        if (d == 0) return values_[i];
        T c = T(weights_[i] / d);
        num += c * values_[i];
        den += c;
    }
    return T(num / den);
}

BiasCurve<Real> lagrange_sup_gap(const funcs::Function1D& f, int n, int grid_size, unsigned bits) {
    PrecisionScope scope(bits);
    LagrangeInterpolant<Real> l(f, n);
    ScalarFn<Real> fn = [&](const Real& p) { return Real(f(p) - l(p)); };
    SearchOptions opts;
    opts.grid_size = grid_size;
    opts.keep_values = false;
    return sup_search<Real>(fn, opts);
}

Real limit_gap(const funcs::Function1D& f, int n, long m, int grid_size, unsigned bits) {
    PrecisionScope scope(bits);
    auto state = iterate_bias<Real>(f, n, m);
    LagrangeInterpolant<Real> l(f, n);
    Real best = 0;
    for (int j = 0; j < grid_size; ++j) {
        Real p = ratio<Real>(j, grid_size - 1);
        Real d = abs_value(Real(l(p) - binom::bernstein_form(state.u.values, p)));
        if (d > best) best = d;
    }
    return best;
}

template <class T>
T eig_mode_decay(int n, int k, long m) {
    if (k < 0 || k > n) throw DomainError("eig_mode_decay: k must lie in [0, n]");
    if (m < 0) throw DomainError("eig_mode_decay: m must be nonnegative");
    auto lambda = binom::eigenvalues<T>(n);
    return ipow(T(1 - lambda[k]), static_cast<unsigned long>(m));
}

template <class T>
std::vector<T> solve(binom::Matrix<T> a, std::vector<T> b) {
    const size_t n = b.size();
    if (a.size() != n) throw DomainError("solve: dimension mismatch");
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < n; ++r) {
            if (abs_value(a[r][col]) > abs_value(a[piv][col])) piv = r;
        }
        if (a[piv][col] == 0) throw DomainError("solve: singular matrix");
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (size_t r = col + 1; r < n; ++r) {
            T factor = T(a[r][col] / a[col][col]);
            if (factor == 0) continue;
            for (size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
            b[r] -= factor * b[col];
        }
    }
    std::vector<T> x(n);
    for (size_t i = n; i-- > 0;) {
        T acc = b[i];
        for (size_t c = i + 1; c < n; ++c) acc -= a[i][c] * x[c];
        x[i] = T(acc / a[i][i]);
    }
    return x;
}

#define BIASCORR_INSTANTIATE(T)                                                                  \
    template BootstrapState<T> initial_state<T>(const funcs::Function1D&, int);                  \
    template void advance<T>(BootstrapState<T>&, const binom::Matrix<T>&, long);                 \
    template BootstrapState<T> iterate_bias<T>(const funcs::Function1D&, int, long);             \
    template T e_m_eval<T>(const BootstrapState<T>&, const T&);                                  \
    template BiasCurve<T> sup_e_m<T>(const BootstrapState<T>&, const SearchOptions&);            \
    template class LagrangeInterpolant<T>;                                                       \
    template T eig_mode_decay<T>(int, int, long);                                                \
    template std::vector<T> solve<T>(binom::Matrix<T>, std::vector<T>);

BIASCORR_INSTANTIATE(double)
BIASCORR_INSTANTIATE(Real)
BIASCORR_INSTANTIATE(Rational)

#undef BIASCORR_INSTANTIATE

}  // namespace biascorr::bootstrap
