#pragma once

// Sup-norm search of a bias function over [0,1].

#include "biascorr/numeric.hpp"

#include <functional>
#include <vector>

namespace biascorr {

template <class T>
struct BiasCurve {
    std::vector<T> grid;
    std::vector<T> values;
    T sup_abs{};
    T argmax_p{};
    /// Width of the final bracket around argmax_p (grid spacing if unrefined).
    double refine_tol = 0.0;
};

struct SearchOptions {
    int grid_size = 20001;
    bool refine = true;
    int iterations = 40;
    /// Worker threads for double evaluation; 0 picks the hardware count.
    unsigned threads = 0;
    bool keep_values = true;
};

template <class T>
using ScalarFn = std::function<T(const T&)>;

/// Uniform grid on [0,1], then golden-section refinement of |fn| on the two
/// cells adjacent to the best grid point. Exact mode never refines.
template <class T>
BiasCurve<T> sup_search(const ScalarFn<T>& fn, const SearchOptions& opts = {});

/// Golden-section maximization of |fn| on [lo, hi]; returns (argmax, |fn|).
template <class T>
std::pair<T, T> golden_max(const ScalarFn<T>& fn, T lo, T hi, int iterations);

}  // namespace biascorr
