#include "biascorr/curve.hpp"

#include <algorithm>
#include <thread>

namespace biascorr {

template <class T>
std::pair<T, T> golden_max(const ScalarFn<T>& fn, T lo, T hi, int iterations) {
    const T ratio_inv = T((sqrt(from_int<T>(5)) - 1) / 2);
    T a = lo, b = hi;
    T c = T(b - ratio_inv * (b - a));
    T d = T(a + ratio_inv * (b - a));
    T fc = abs_value(fn(c));
    T fd = abs_value(fn(d));
    for (int i = 0; i < iterations; ++i) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = T(b - ratio_inv * (b - a));
            fc = abs_value(fn(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = T(a + ratio_inv * (b - a));
            fd = abs_value(fn(d));
        }
    }
    return fc > fd ? std::pair<T, T>{c, fc} : std::pair<T, T>{d, fd};
}

template <>
std::pair<Rational, Rational> golden_max(const ScalarFn<Rational>&, Rational, Rational, int) {
    throw DomainError("golden-section refinement is not available in exact mode");
}

template <class T>
BiasCurve<T> sup_search(const ScalarFn<T>& fn, const SearchOptions& opts) {
    if (opts.grid_size < 2) throw DomainError("sup_search: grid needs at least 2 points");
    const int N = opts.grid_size;
    BiasCurve<T> out;
    out.grid.resize(N);
    out.values.resize(N);
    for (int i = 0; i < N; ++i) out.grid[i] = ratio<T>(i, N - 1);

    if constexpr (std::is_same_v<T, double>) {
        unsigned threads = opts.threads ? opts.threads : std::max(1U, std::thread::hardware_concurrency());
        threads = std::min<unsigned>(threads, static_cast<unsigned>(N));
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                for (int i = static_cast<int>(w); i < N; i += static_cast<int>(threads)) out.values[i] = fn(out.grid[i]);
            });
        }
        for (auto& th : pool) th.join();
    } else {
        for (int i = 0; i < N; ++i) out.values[i] = fn(out.grid[i]);
    }

    int best = 0;
    T best_abs = abs_value(out.values[0]);
    for (int i = 1; i < N; ++i) {
        T a = abs_value(out.values[i]);
        if (a > best_abs) {
            best_abs = a;
            best = i;
        }
    }
    out.sup_abs = best_abs;
    out.argmax_p = out.grid[best];
    out.refine_tol = 1.0 / (N - 1);

    if constexpr (!is_exact_v<T>) {
        if (opts.refine) {
            T lo = out.grid[std::max(best - 1, 0)];
            T hi = out.grid[std::min(best + 1, N - 1)];
            auto [x, v] = golden_max<T>(fn, lo, hi, opts.iterations);
            out.refine_tol = to_double(T(hi - lo)) * std::pow(0.6180339887498949, opts.iterations);
            if (v > out.sup_abs) {
                out.sup_abs = v;
                out.argmax_p = x;
            }
        }
    }
    if (!opts.keep_values) {
        out.grid.clear();
        out.values.clear();
    }
    return out;
}

template std::pair<double, double> golden_max<double>(const ScalarFn<double>&, double, double, int);
template std::pair<Real, Real> golden_max<Real>(const ScalarFn<Real>&, Real, Real, int);
template BiasCurve<double> sup_search<double>(const ScalarFn<double>&, const SearchOptions&);
template BiasCurve<Real> sup_search<Real>(const ScalarFn<Real>&, const SearchOptions&);
template BiasCurve<Rational> sup_search<Rational>(const ScalarFn<Rational>&, const SearchOptions&);

}  // namespace biascorr
