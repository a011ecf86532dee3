#include "biascorr/acceptance.hpp"
#include "biascorr/binom.hpp"
#include "biascorr/bootstrap.hpp"
#include "biascorr/io.hpp"
#include "biascorr/jackknife.hpp"
#include "biascorr/smoothness.hpp"
#include "biascorr/taylor.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <random>

using namespace biascorr;
using nlohmann::json;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string function = "entropy";
    unsigned bits = 0;
    int grid = 0;
    std::string out;
    std::string mode = "float";
    unsigned long seed = 1;
    std::string config;
};

void add_common(CLI::App* sub, Common& c, const std::string& default_function) {
    c.function = default_function;
    sub->add_option("--function", c.function, "function spec, e.g. entropy, power:0.5, poly:0,1, pwl:file.csv")
        ->capture_default_str();
    sub->add_option("--bits", c.bits, "working precision in bits (default from BIAS_PRECISION_BITS)");
    sub->add_option("--grid", c.grid, "grid size");
    sub->add_option("--out", c.out, "output CSV path (metadata goes to the .meta.json sibling)");
    sub->add_option("--mode", c.mode, "exact or float")->check(CLI::IsMember({"exact", "float"}))->capture_default_str();
    sub->add_option("--seed", c.seed, "seed for randomized sweeps")->capture_default_str();
    sub->add_option("--config", c.config, "JSON config file; command-line flags take precedence");
}

unsigned resolve_bits(const Common& c, unsigned fallback) {
    if (c.bits) return c.bits;
    if (const char* env = std::getenv("BIAS_PRECISION_BITS")) {
        try {
            const long v = std::stol(env);
            if (v < 2) throw ConfigError("BIAS_PRECISION_BITS must be at least 2");
            return static_cast<unsigned>(v);
        } catch (const std::logic_error&) {
            throw ConfigError(std::string("BIAS_PRECISION_BITS is not an integer: ") + env);
        }
    }
    return fallback;
}

std::vector<long> parse_long_list(const std::string& text, const std::string& what) {
    std::vector<long> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            size_t used = 0;
            out.push_back(std::stol(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::logic_error&) {
            throw ConfigError(what + ": '" + item + "' is not an integer");
        }
    }
    if (out.empty()) throw ConfigError(what + " is empty");
    return out;
}

std::pair<int, int> parse_range(const std::string& text, const std::string& what) {
    const auto pos = text.find("..");
    if (pos == std::string::npos) throw ConfigError(what + " must look like a..b");
    auto lo = parse_long_list(text.substr(0, pos), what);
    auto hi = parse_long_list(text.substr(pos + 2), what);
    if (lo.size() != 1 || hi.size() != 1 || lo[0] > hi[0]) throw ConfigError(what + " must look like a..b with a <= b");
    return {static_cast<int>(lo[0]), static_cast<int>(hi[0])};
}

/// Dispatches to double, Real (bits > 53) or Rational (exact mode).
template <class F>
auto with_scalar(const std::string& mode, unsigned bits, F&& fn) {
    if (mode == "exact") return fn(Rational{});
    if (bits <= kDoubleBits) return fn(double{});
    PrecisionScope scope(bits);
    return fn(Real{});
}

funcs::Function1D load_function(const Common& c) {
    try {
        return funcs::parse_function_spec(c.function);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("bad --function: ") + e.what());
    }
}

void require_exact_capable(const Common& c, const funcs::Function1D& f) {
    if (c.mode == "exact" && !f.rational_evaluable()) {
        throw ConfigError("function '" + f.name() + "' cannot be evaluated exactly; use --mode float");
    }
}

std::string timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

json echo_options(const CLI::App* sub) {
    json j = json::object();
    for (const CLI::Option* opt : sub->get_options()) {
        const std::string name = opt->get_single_name();
        if (name.empty() || name == "help") continue;
        if (opt->get_type_size() == 0) {
            j[name] = opt->count() > 0;
        } else if (opt->count() > 0) {
            j[name] = opt->results().back();
        } else if (!opt->get_default_str().empty()) {
            j[name] = opt->get_default_str();
        } else {
            j[name] = nullptr;
        }
    }
    return j;
}

void emit(const CLI::App* sub, const Common& c, unsigned bits, const std::string& default_out, const io::Row& header,
          const std::vector<io::Row>& rows, json summary) {
    const std::string path = c.out.empty() ? default_out : c.out;
    io::write_csv(path, header, rows);
    json meta{{"command", sub->get_name()},
              {"config", echo_options(sub)},
              {"function", c.function},
              {"mode", c.mode},
              {"bits", bits},
              {"seed", c.seed},
              {"version", io::kVersion},
              {"timestamp", timestamp()},
              {"summary", std::move(summary)}};
    io::write_json(io::meta_path(path), meta);
    std::cout << "wrote " << path << " (" << rows.size() << " rows) and " << io::meta_path(path) << "\n";
}

template <class T>
std::string num(const T& v) {
    return io::format_value(v);
}

// ---------------------------------------------------------------- jackknife

struct JackknifeArgs {
    Common c;
    long n = 0;
    std::string n_list;
    int r = 2;
    long d = 1;
    std::string scheme;
    std::string sizes;
    std::string at_p;
    std::string d_sweep;
};

jackknife::JackknifeScheme build_scheme(const JackknifeArgs& a, const CLI::App* sub, long n, long d) {
    try {
        if (!a.sizes.empty()) return jackknife::scheme_general(parse_long_list(a.sizes, "--sizes"));
        if (a.scheme == "half") {
            if (sub->count("--r") && a.r != 2) throw ConfigError("--scheme half is a 2-jackknife; drop --r");
            if (n % 2) throw ConfigError("--scheme half needs even n, got " + std::to_string(n));
            return jackknife::scheme_half(n);
        }
        return jackknife::scheme_delete_d(n, a.r, d);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid scheme: ") + e.what());
    }
}

template <class T>
T eval_point(const std::string& at_p, long n) {
    if (at_p == "inv_n") return ratio<T>(1, n);
    return from_rational<T>(parse_rational(at_p));
}

int cmd_jackknife(const CLI::App* sub, JackknifeArgs& a) {
    auto f = load_function(a.c);
    require_exact_capable(a.c, f);
    const unsigned bits = resolve_bits(a.c, kDoubleBits);
    const int nsel = (a.n > 0) + !a.n_list.empty() + !a.sizes.empty();
    if (nsel != 1) throw ConfigError("give exactly one of --n, --n-list or --sizes");
    if (!a.sizes.empty() && (sub->count("--delete") || !a.scheme.empty() || !a.d_sweep.empty())) {
        throw ConfigError("--sizes fixes the scheme; it cannot be combined with --delete, --scheme or --d-sweep");
    }
    if (!a.scheme.empty() && a.scheme != "half" && a.scheme != "delete") {
        throw ConfigError("--scheme must be half or delete");
    }
    if (a.scheme == "half" && (sub->count("--delete") || !a.d_sweep.empty())) {
        throw ConfigError("--scheme half cannot be combined with --delete or --d-sweep");
    }
    if (a.r < 1) throw ConfigError("--r must be at least 1");
    if (a.d < 1) throw ConfigError("--delete must be at least 1");
    if (!a.at_p.empty() && a.at_p != "inv_n") {
        try {
            Rational p = parse_rational(a.at_p);
            if (p < 0 || p > 1) throw ConfigError("--at-p must lie in [0,1]");
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError("--at-p must be inv_n or a number in [0,1]");
        }
    }

    std::vector<long> ns;
    if (!a.n_list.empty()) ns = parse_long_list(a.n_list, "--n-list");
    if (a.n > 0) ns = {a.n};
    std::vector<long> ds{a.d};
    if (!a.d_sweep.empty()) ds = parse_long_list(a.d_sweep, "--d-sweep");
    const bool table = !a.n_list.empty() || !a.d_sweep.empty();

    SearchOptions opts;
    opts.grid_size = a.c.grid > 0 ? a.c.grid : (a.c.mode == "exact" ? 201 : 20001);
    if (opts.grid_size < 2) throw ConfigError("--grid must be at least 2");

    return with_scalar(a.c.mode, bits, [&](auto tag) {
        using T = decltype(tag);
        std::vector<io::Row> rows;
        io::Row header;
        json summary = json::object();
        if (!a.sizes.empty()) {
            auto scheme = build_scheme(a, sub, 0, 0);
            summary["sizes"] = scheme.sizes;
            if (!a.at_p.empty()) {
                T p = eval_point<T>(a.at_p, scheme.sizes.back());
                T b = jackknife::jackknife_bias<T>(f, scheme, p);
                header = {"p", "bias"};
                rows.push_back({num(p), num(b)});
            } else {
                auto curve = jackknife::bias_curve<T>(f, scheme, opts);
                header = {"p", "bias"};
                for (size_t i = 0; i < curve.grid.size(); ++i) rows.push_back({num(curve.grid[i]), num(curve.values[i])});
                summary["sup_abs_bias"] = to_double(curve.sup_abs);
                summary["argmax_p"] = to_double(curve.argmax_p);
                std::cout << "sup_abs_bias = " << num(curve.sup_abs) << " at p = " << num(curve.argmax_p) << "\n";
            }
        } else if (table) {
            const bool sweep = !a.d_sweep.empty();
            header = a.at_p.empty() ? io::Row{"n", "sup_abs_bias", "argmax_p"} : io::Row{"n", "p", "bias"};
            if (sweep) header.insert(header.begin(), "d");
            json fits = json::object();
            for (long d : ds) {
                std::vector<std::pair<double, double>> pairs;
                for (long n : ns) {
                    auto scheme = build_scheme(a, sub, n, d);
                    io::Row row;
                    if (sweep) row.push_back(std::to_string(d));
                    if (a.at_p.empty()) {
                        opts.keep_values = false;
                        auto curve = jackknife::bias_curve<T>(f, scheme, opts);
                        row.insert(row.end(), {std::to_string(n), num(curve.sup_abs), num(curve.argmax_p)});
                        pairs.emplace_back(n, to_double(curve.sup_abs));
                    } else {
                        T p = eval_point<T>(a.at_p, n);
                        T b = jackknife::jackknife_bias<T>(f, scheme, p);
                        row.insert(row.end(), {std::to_string(n), num(p), num(b)});
                        pairs.emplace_back(n, std::abs(to_double(b)));
                    }
                    rows.push_back(std::move(row));
                }
                bool positive = pairs.size() >= 3;
                for (const auto& pr : pairs) positive = positive && pr.second > 0;
                if (positive) {
                    auto fit = smoothness::rate_fit(pairs);
                    const std::string key = sweep ? "d=" + std::to_string(d) : "fit";
                    fits[key] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"residual", fit.residual}};
                    std::cout << (sweep ? "d = " + std::to_string(d) + ": " : "") << "fitted log-log slope = " << fit.slope
                              << "\n";
                }
            }
            summary["rate_fits"] = fits;
        } else {
            auto scheme = build_scheme(a, sub, ns[0], ds[0]);
            header = {"p", "bias"};
            if (!a.at_p.empty()) {
                T p = eval_point<T>(a.at_p, ns[0]);
                T b = jackknife::jackknife_bias<T>(f, scheme, p);
                rows.push_back({num(p), num(b)});
                std::cout << "bias at p = " << num(p) << ": " << num(b) << "\n";
            } else {
                auto curve = jackknife::bias_curve<T>(f, scheme, opts);
                for (size_t i = 0; i < curve.grid.size(); ++i) rows.push_back({num(curve.grid[i]), num(curve.values[i])});
                summary["sup_abs_bias"] = to_double(curve.sup_abs);
                summary["argmax_p"] = to_double(curve.argmax_p);
                summary["refine_tol"] = curve.refine_tol;
                std::cout << "sup_abs_bias = " << num(curve.sup_abs) << " at p = " << num(curve.argmax_p) << "\n";
            }
        }
        emit(sub, a.c, bits, "jackknife.csv", header, rows, summary);
        return 0;
    });
}

// ---------------------------------------------------------------- bootstrap

struct BootstrapArgs {
    Common c;
    int n = 20;
    long m_max = 1000;
    long stride = 1;
    int refine_every = 100;
    int limit_grid = 100001;
    bool limit_gap = false;
};

int cmd_bootstrap(const CLI::App* sub, BootstrapArgs& a) {
    auto f = load_function(a.c);
    require_exact_capable(a.c, f);
    const unsigned bits = resolve_bits(a.c, kDefaultBits);
    if (a.n < 1) throw ConfigError("--n must be at least 1");
    if (a.m_max < 1) throw ConfigError("--m-max must be at least 1");
    if (a.stride < 1) throw ConfigError("--stride must be at least 1");
    if (a.limit_grid < 2) throw ConfigError("--limit-grid must be at least 2");
    if (a.c.mode == "exact" && a.m_max > 200) throw ConfigError("--mode exact supports --m-max up to 200");
    if (a.c.mode == "exact" && a.limit_gap) throw ConfigError("--limit-gap runs in float mode only");
    const int grid = a.c.grid > 0 ? a.c.grid : (a.c.mode == "exact" ? 201 : 4001);
    if (grid < 2) throw ConfigError("--grid must be at least 2");

    json summary = json::object();
    if (a.limit_gap) {
        Real gap = bootstrap::limit_gap(f, a.n, a.m_max, grid, bits);
        summary["limit_gap"] = to_double(gap);
        std::cout << "limit_gap(m = " << a.m_max << ") = " << format_real(gap, 10) << "\n";
        emit(sub, a.c, bits, "bootstrap_limit_gap.csv", {"n", "m", "limit_gap"},
             {{std::to_string(a.n), std::to_string(a.m_max), format_real(gap, 30)}}, summary);
        return 0;
    }

    std::vector<io::Row> rows;
    if (a.c.mode == "exact") {
        auto state = bootstrap::initial_state<Rational>(f, a.n);
        const auto mat = binom::transition_matrix<Rational>(a.n);
        SearchOptions opts;
        opts.grid_size = grid;
        opts.refine = false;
        opts.keep_values = false;
        for (long m = 1; m <= a.m_max; m += a.stride) {
            if (m > 1) bootstrap::advance(state, mat, a.stride);
            auto curve = bootstrap::sup_e_m<Rational>(state, opts);
            rows.push_back({std::to_string(m), num(curve.sup_abs), num(curve.argmax_p), "false"});
        }
    } else {
        bootstrap::TraceOptions opts;
        opts.grid = grid;
        opts.refine_every = a.refine_every;
        opts.bits = bits;
        for (const auto& r : bootstrap::trace_sup(f, a.n, a.m_max, a.stride, opts)) {
            rows.push_back({std::to_string(r.m), format_real(r.sup_abs, 30), format_real(r.argmax_p, 30),
                            r.refined ? "true" : "false"});
        }
    }
    auto limit = bootstrap::lagrange_sup_gap(f, a.n, a.limit_grid, bits);
    rows.push_back({"limit", format_real(limit.sup_abs, 30), format_real(limit.argmax_p, 30), "true"});
    summary["limit"] = to_double(limit.sup_abs);
    summary["limit_argmax_p"] = to_double(limit.argmax_p);
    summary["n"] = a.n;
    summary["m_max"] = a.m_max;
    summary["stride"] = a.stride;
    summary["grid"] = grid;
    std::cout << "last sup_abs_bias (m = " << rows[rows.size() - 2][0] << ") = " << rows[rows.size() - 2][1] << "\n"
              << "limit sup|f - L_n f| = " << format_real(limit.sup_abs, 10) << "\n";
    emit(sub, a.c, bits, "bootstrap_trace.csv", {"m", "sup_abs_bias", "argmax_p", "refined"}, rows, summary);
    return 0;
}

// ---------------------------------------------------------------- taylor

struct TaylorArgs {
    Common c;
    int k = 2;
    long n = 0;
    std::string n_list;
    bool split = false;
};

int cmd_taylor(const CLI::App* sub, TaylorArgs& a) {
    auto f = load_function(a.c);
    require_exact_capable(a.c, f);
    const unsigned bits = resolve_bits(a.c, kDoubleBits);
    if ((a.n > 0) == !a.n_list.empty()) throw ConfigError("give exactly one of --n or --n-list");
    if (a.k < 1) throw ConfigError("--k must be at least 1");
    SearchOptions opts;
    opts.grid_size = a.c.grid > 0 ? a.c.grid : (a.c.mode == "exact" ? 201 : 20001);
    if (opts.grid_size < 2) throw ConfigError("--grid must be at least 2");
    std::vector<long> ns = a.n > 0 ? std::vector<long>{a.n} : parse_long_list(a.n_list, "--n-list");
    for (long n : ns) {
        if (n < (a.split ? 2 : 1)) throw ConfigError("sample sizes must be at least " + std::to_string(a.split ? 2 : 1));
    }

    return with_scalar(a.c.mode, bits, [&](auto tag) {
        using T = decltype(tag);
        auto curve_for = [&](long n) {
            if (a.split) return taylor::sample_split_bias_curve<T>(f, a.k, (n + 1) / 2, n / 2, opts);
            return taylor::taylor_bias_curve<T>(f, a.k, static_cast<int>(n), opts);
        };
        std::vector<io::Row> rows;
        json summary = json::object();
        if (a.n > 0) {
            auto curve = curve_for(a.n);
            for (size_t i = 0; i < curve.grid.size(); ++i) rows.push_back({num(curve.grid[i]), num(curve.values[i])});
            summary["sup_abs_bias"] = to_double(curve.sup_abs);
            summary["argmax_p"] = to_double(curve.argmax_p);
            std::cout << "sup_abs_bias = " << num(curve.sup_abs) << " at p = " << num(curve.argmax_p) << "\n";
            emit(sub, a.c, bits, "taylor.csv", {"p", "bias"}, rows, summary);
            return 0;
        }
        opts.keep_values = false;
        std::vector<std::pair<double, double>> pairs;
        for (long n : ns) {
            auto curve = curve_for(n);
            rows.push_back({std::to_string(n), num(curve.sup_abs), num(curve.argmax_p)});
            pairs.emplace_back(n, to_double(curve.sup_abs));
        }
        bool positive = pairs.size() >= 3;
        for (const auto& pr : pairs) positive = positive && pr.second > 0;
        if (positive) {
            auto fit = smoothness::rate_fit(pairs);
            summary["fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"residual", fit.residual}};
            std::cout << "fitted log-log slope = " << fit.slope << "\n";
        }
        emit(sub, a.c, bits, "taylor.csv", {"n", "sup_abs_bias", "argmax_p"}, rows, summary);
        return 0;
    });
}

// ---------------------------------------------------------------- modulus

struct ModulusArgs {
    Common c;
    int r = 2;
    std::string t_ladder = "3..9";
    std::string t_list;
    int h_samples = 64;
    bool classical = false;
};

int cmd_modulus(const CLI::App* sub, ModulusArgs& a) {
    auto f = load_function(a.c);
    require_exact_capable(a.c, f);
    const unsigned bits = resolve_bits(a.c, kDoubleBits);
    if (a.r < 1) throw ConfigError("--r must be at least 1");
    if (a.h_samples < 1) throw ConfigError("--h-samples must be at least 1");
    smoothness::ModulusOptions opts;
    opts.h_samples = a.h_samples;
    opts.x_samples = a.c.grid > 0 ? a.c.grid : (a.c.mode == "exact" ? 201 : 4001);
    if (opts.x_samples < 2) throw ConfigError("--grid must be at least 2");

    std::vector<Rational> ts;
    if (!a.t_list.empty() && sub->count("--t-ladder")) throw ConfigError("give --t or --t-ladder, not both");
    if (!a.t_list.empty()) {
        std::stringstream ss(a.t_list);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                ts.push_back(parse_rational(item));
            } catch (const std::exception&) {
                throw ConfigError("--t: '" + item + "' is not a number");
            }
            if (ts.back() <= 0) throw ConfigError("--t values must be positive");
        }
    } else {
        auto [lo, hi] = parse_range(a.t_ladder, "--t-ladder");
        if (lo < 0 || hi > 60) throw ConfigError("--t-ladder exponents must lie in 0..60");
        for (int j = lo; j <= hi; ++j) ts.push_back(Rational(1) / Rational(BigInt(1) << j));
    }

    return with_scalar(a.c.mode, bits, [&](auto tag) {
        using T = decltype(tag);
        std::vector<io::Row> rows;
        std::vector<double> ratios;
        for (const auto& tq : ts) {
            T t = from_rational<T>(tq);
            auto res = a.classical ? smoothness::classical_modulus<T>(f, a.r, t, opts)
                                   : smoothness::dt_modulus<T>(f, a.r, t, opts);
            const double ratio_v = to_double(res.value) / std::pow(tq.convert_to<double>(), a.r);
            ratios.push_back(ratio_v);
            rows.push_back({num(t), num(res.value), io::format_double(ratio_v)});
        }
        json summary{{"r", a.r}, {"classical", a.classical}, {"h_samples", opts.h_samples}, {"x_samples", opts.x_samples}};
        auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
        if (*lo > 0) {
            summary["ratio_band"] = *hi / *lo;
            std::cout << "value/t^" << a.r << " band max/min = " << *hi / *lo << "\n";
        }
        emit(sub, a.c, bits, "modulus.csv", {"t", "value", "ratio"}, rows, summary);
        return 0;
    });
}

// ---------------------------------------------------------------- entbounds / divergences

struct SweepArgs {
    Common c;
    int random = 1000;
    int atoms = 4;
};

int cmd_entbounds(const CLI::App* sub, SweepArgs& a) {
    const unsigned bits = resolve_bits(a.c, kDefaultBits);
    if (a.random < 1) throw ConfigError("--random must be at least 1");
    if (a.atoms < 1) throw ConfigError("--atoms must be at least 1");
    if (sub->count("--mode") && a.c.mode == "float") throw ConfigError("entbounds always uses exact rational atoms");
    a.c.mode = "exact";
    PrecisionScope scope(bits);
    std::mt19937_64 rng(a.c.seed);
    auto uni = [&](long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); };
    std::vector<io::Row> rows;
    int holds = 0;
    for (int i = 0; i < a.random; ++i) {
        std::vector<long> w(a.atoms);
        long total = 0;
        for (auto& x : w) total += (x = uni(1, 20));
        std::vector<smoothness::DiscreteRV<Rational>::Atom> atoms;
        bool any_positive = false;
        for (int j = 0; j < a.atoms; ++j) {
            atoms.push_back({Rational(uni(0, 64), 16), Rational(w[j], total)});
            any_positive = any_positive || atoms.back().value > 0;
        }
        if (!any_positive) atoms[0].value = 1;
        auto rec = smoothness::ent_bounds(smoothness::DiscreteRV<Rational>(atoms));
        holds += rec.all_hold;
        rows.push_back({std::to_string(i), format_real(rec.ent, 20), format_real(rec.upper_log, 20),
                        format_real(rec.upper_sqrtvar, 20), format_real(rec.lower_hell, 20),
                        format_real(rec.lower_varsqrt, 20), format_real(rec.lower_tv, 20),
                        rec.all_hold ? "true" : "false"});
    }
    std::cout << "all_hold count = " << holds << " / " << a.random << "\n";
    emit(sub, a.c, bits, "entbounds.csv",
         {"case", "ent", "upper_log", "upper_sqrtvar", "lower_hell", "lower_varsqrt", "lower_tv", "all_hold"}, rows,
         {{"cases", a.random}, {"all_hold_count", holds}});
    return holds == a.random ? 0 : 1;
}

int cmd_divergences(const CLI::App* sub, SweepArgs& a) {
    const unsigned bits = resolve_bits(a.c, kDefaultBits);
    if (a.random < 1) throw ConfigError("--random must be at least 1");
    if (a.atoms < 2) throw ConfigError("--atoms must be at least 2");
    if (sub->count("--mode") && a.c.mode == "float") throw ConfigError("divergences always uses exact rational atoms");
    a.c.mode = "exact";
    PrecisionScope scope(bits);
    std::mt19937_64 rng(a.c.seed);
    auto uni = [&](long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); };
    std::vector<io::Row> rows;
    int holds = 0;
    for (int i = 0; i < a.random; ++i) {
        std::vector<long> wp(a.atoms), wq(a.atoms);
        long tp = 0, tq = 0;
        for (int j = 0; j < a.atoms; ++j) {
            tp += (wp[j] = uni(0, 20));
            tq += (wq[j] = uni(1, 20));
        }
        if (tp == 0) tp = wp[0] = 1;
        std::vector<smoothness::DiscreteRV<Rational>::Atom> pa, qa;
        for (int j = 0; j < a.atoms; ++j) {
            pa.push_back({Rational(j), Rational(wp[j], tp)});
            qa.push_back({Rational(j), Rational(wq[j], tq)});
        }
        auto rec = smoothness::divergences(smoothness::DiscreteRV<Rational>(pa), smoothness::DiscreteRV<Rational>(qa));
        holds += rec.chain_holds;
        rows.push_back({std::to_string(i), format_real(rec.tv, 20), format_real(rec.hellinger_sq, 20),
                        format_real(rec.kl, 20), format_real(rec.chi_sq, 20), rec.chain_holds ? "true" : "false"});
    }
    std::cout << "chain_holds count = " << holds << " / " << a.random << "\n";
    emit(sub, a.c, bits, "divergences.csv", {"case", "tv", "hellinger_sq", "kl", "chi_sq", "chain_holds"}, rows,
         {{"cases", a.random}, {"chain_holds_count", holds}});
    return holds == a.random ? 0 : 1;
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
    std::string references = std::string(BIASCORR_SOURCE_DIR) + "/references/acceptance.json";
    std::string only;
    std::string report = "verify_report.json";
    std::string config;
};

int cmd_verify(VerifyArgs& a) {
    json refs;
    try {
        refs = io::read_json(a.references);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("reference file: ") + e.what());
    }
    if (!refs.is_object() || !refs.contains("items") || !refs["items"].is_object()) {
        throw ConfigError("reference file '" + a.references + "' is corrupt: missing items object");
    }
    std::vector<std::string> only;
    if (!a.only.empty()) {
        std::stringstream ss(a.only);
        std::string item;
        while (std::getline(ss, item, ',')) only.push_back(item);
    }
    auto selected = acceptance::select(only);
    if (selected.empty()) throw ConfigError("--only matched no criterion");

    json report{{"version", io::kVersion}, {"references", a.references}, {"timestamp", timestamp()}};
    json items = json::array();
    std::vector<std::string> failed;
    for (const auto* c : selected) {
        auto r = acceptance::run(*c);
        json item{{"id", r.id},       {"group", r.group},     {"title", r.title},
                  {"detail", r.detail}, {"seconds", r.seconds}, {"measurements", r.measurements}};
        bool pass = r.pass;
        json checks = json::array();
        if (!refs["items"].contains(r.id)) {
            pass = false;
            checks.push_back({{"key", nullptr}, {"pass", false}, {"detail", "no reference entry"}});
        } else {
            for (const auto& chk : acceptance::compare_to_reference(r, refs["items"][r.id])) {
                pass = pass && chk.pass;
                checks.push_back({{"key", chk.key}, {"pass", chk.pass}, {"detail", chk.detail}});
                if (!chk.pass) std::cout << "  reference mismatch " << r.id << "." << chk.key << ": " << chk.detail << "\n";
            }
        }
        r.pass = pass;
        std::cout << acceptance::format_line(r) << std::endl;
        item["criterion_pass"] = r.pass;
        item["pass"] = pass;
        item["checks"] = checks;
        items.push_back(item);
        if (!pass) failed.push_back(r.id);
    }
    report["items"] = items;
    report["failed"] = failed;
    report["pass"] = failed.empty();
    io::write_json(a.report, report);
    std::cout << (failed.empty() ? "verify: all " + std::to_string(items.size()) + " items passed"
                                 : "verify: " + std::to_string(failed.size()) + " of " + std::to_string(items.size()) +
                                       " items failed")
              << "; report " << a.report << "\n";
    return failed.empty() ? 0 : 1;
}

// ---------------------------------------------------------------- config file

/// Expands `--config file.json` into flags for the chosen subcommand, placed
/// before the explicit flags so the latter win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    std::string path;
    for (size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            args.erase(args.begin() + i, args.begin() + i + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + i);
            break;
        }
    }
    if (path.empty()) return args;
    size_t sub_pos = 1;
    while (sub_pos < args.size() && args[sub_pos].rfind("-", 0) == 0) ++sub_pos;
    if (sub_pos >= args.size()) throw ConfigError("--config needs a subcommand");
    json cfg;
    try {
        cfg = io::read_json(path);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    const std::string& sub = args[sub_pos];
    if (!cfg.is_object()) throw ConfigError("config '" + path + "' must be a JSON object");
    if (!cfg.contains(sub)) return args;
    if (!cfg[sub].is_object()) throw ConfigError("config section '" + sub + "' must be an object");
    std::vector<std::string> extra;
    for (const auto& [key, value] : cfg[sub].items()) {
        const std::string flag = "--" + key;
        if (value.is_boolean()) {
            if (value.get<bool>()) extra.push_back(flag);
        } else if (value.is_string()) {
            extra.insert(extra.end(), {flag, value.get<std::string>()});
        } else if (value.is_number()) {
            extra.insert(extra.end(), {flag, value.dump()});
        } else if (value.is_array()) {
            std::string joined;
            for (const auto& v : value) joined += (joined.empty() ? "" : ",") + (v.is_string() ? v.get<std::string>() : v.dump());
            extra.insert(extra.end(), {flag, joined});
        } else {
            throw ConfigError("config key '" + key + "' has an unsupported type");
        }
    }
    args.insert(args.begin() + sub_pos + 1, extra.begin(), extra.end());
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bias of jackknife, bootstrap and Taylor bias-correction schemes under the binomial model"};
    app.set_version_flag("--version", io::kVersion);
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    JackknifeArgs ja;
    auto* jk = app.add_subcommand("jackknife", "jackknife bias curves and rate tables");
    add_common(jk, ja.c, "entropy");
    jk->add_option("--n", ja.n, "sample size");
    jk->add_option("--n-list", ja.n_list, "comma-separated sample sizes for a rate table");
    jk->add_option("--r", ja.r, "jackknife order")->capture_default_str();
    jk->add_option("--delete", ja.d, "delete-d scheme")->capture_default_str();
    jk->add_option("--scheme", ja.scheme, "half for the (n/2, n) scheme, delete for delete-d");
    jk->add_option("--sizes", ja.sizes, "explicit subsample sizes n_1 < ... < n_r");
    jk->add_option("--at-p", ja.at_p, "evaluate at p (inv_n or a number) instead of the sup");
    jk->add_option("--d-sweep", ja.d_sweep, "comma-separated delete sizes to sweep");

    BootstrapArgs ba;
    auto* bs = app.add_subcommand("bootstrap", "iterated bootstrap sup-bias trace");
    add_common(bs, ba.c, "absdev");
    bs->add_option("--n", ba.n, "sample size")->capture_default_str();
    bs->add_option("--m-max", ba.m_max, "largest iteration")->capture_default_str();
    bs->add_option("--stride", ba.stride, "emit every stride-th iteration")->capture_default_str();
    bs->add_option("--refine-every", ba.refine_every, "refine every k-th emitted row")->capture_default_str();
    bs->add_option("--limit-grid", ba.limit_grid, "grid for the Lagrange limit row")->capture_default_str();
    bs->add_flag("--limit-gap", ba.limit_gap, "report sup |e_m - (f - L_n f)| at m = m-max only");

    TaylorArgs ta;
    auto* ty = app.add_subcommand("taylor", "Taylor-series bias correction");
    add_common(ty, ta.c, "exp");
    ty->add_option("--k", ta.k, "correction order")->capture_default_str();
    ty->add_option("--n", ta.n, "sample size");
    ty->add_option("--n-list", ta.n_list, "comma-separated sample sizes for a rate table");
    ty->add_flag("--split", ta.split, "sample-splitting estimator with halves ceil(n/2), floor(n/2)");

    ModulusArgs ma;
    auto* md = app.add_subcommand("modulus", "Ditzian-Totik or classical moduli of smoothness");
    add_common(md, ma.c, "entropy");
    md->add_option("--r", ma.r, "order")->capture_default_str();
    md->add_option("--t-ladder", ma.t_ladder, "exponent range a..b for t = 2^-j")->capture_default_str();
    md->add_option("--t", ma.t_list, "explicit comma-separated t values");
    md->add_option("--h-samples", ma.h_samples, "geometric h samples in (0,t]")->capture_default_str();
    md->add_flag("--classical", ma.classical, "classical modulus (phi = 1)");

    SweepArgs ea;
    auto* eb = app.add_subcommand("entbounds", "entropy-functional inequality chain on random distributions");
    add_common(eb, ea.c, "entropy");
    eb->add_option("--random", ea.random, "number of random cases")->capture_default_str();
    eb->add_option("--atoms", ea.atoms, "atoms per distribution")->capture_default_str();

    SweepArgs da;
    auto* dv = app.add_subcommand("divergences", "divergence inequality chain on random pairs");
    add_common(dv, da.c, "entropy");
    dv->add_option("--random", da.random, "number of random pairs")->capture_default_str();
    dv->add_option("--atoms", da.atoms, "support size")->capture_default_str();

    VerifyArgs va;
    auto* vf = app.add_subcommand("verify", "replay the acceptance suite against stored references");
    vf->add_option("--references", va.references, "reference JSON")->capture_default_str();
    vf->add_option("--only", va.only, "comma-separated groups or ids");
    vf->add_option("--report", va.report, "JSON report path")->capture_default_str();
    vf->add_option("--config", va.config, "JSON config file; command-line flags take precedence");

    try {
        std::vector<std::string> args(argv, argv + argc);
        args = expand_config(std::move(args));
        std::vector<const char*> cargs;
        for (const auto& s : args) cargs.push_back(s.c_str());
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (*jk) return cmd_jackknife(jk, ja);
        if (*bs) return cmd_bootstrap(bs, ba);
        if (*ty) return cmd_taylor(ty, ta);
        if (*md) return cmd_modulus(md, ma);
        if (*eb) return cmd_entbounds(eb, ea);
        if (*dv) return cmd_divergences(dv, da);
        if (*vf) return cmd_verify(va);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
