#include "biascorr/acceptance.hpp"

#include "biascorr/binom.hpp"
#include "biascorr/bootstrap.hpp"
#include "biascorr/jackknife.hpp"
#include "biascorr/smoothness.hpp"
#include "biascorr/taylor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

namespace biascorr::acceptance {

namespace {

std::string fmt(double v, int digits = 6) {
    std::ostringstream os;
    os.precision(digits);
    os << v;
    return os.str();
}

std::string band_text(const std::vector<double>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i], 4);
    return s;
}

double band_ratio(const std::vector<double>& v) {
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi / *lo;
}

Outcome lagrange_limit() {
    auto c = bootstrap::lagrange_sup_gap(funcs::make_absdev(), 20, 100001, 256);
    const double gap = to_double(c.sup_abs);
    Outcome o;
    o.pass = std::abs(gap - 47.5945) <= 0.01;
    o.detail = "sup|f - L_20 f| = " + format_real(c.sup_abs, 10) + " at p = " + format_real(c.argmax_p, 8) +
               " (target 47.5945 +- 0.01)";
    o.measurements["gap"] = gap;
    return o;
}

Outcome trace_turning_points() {
    bootstrap::TraceOptions opts;
    const long stride = 20;
    auto rows = bootstrap::trace_sup(funcs::make_absdev(), 20, 20001, stride, opts);
    std::vector<double> s;
    for (const auto& r : rows) s.push_back(to_double(r.sup_abs));
    long first_min = -1, next_max = -1;
    size_t i_min = 0;
    for (size_t i = 1; i + 1 < s.size(); ++i) {
        if (s[i] < s[i - 1] && s[i] <= s[i + 1]) {
            first_min = rows[i].m;
            i_min = i;
            break;
        }
    }
    if (first_min > 0) {
        for (size_t i = i_min + 1; i + 1 < s.size(); ++i) {
            if (s[i] > s[i - 1] && s[i] >= s[i + 1]) {
                next_max = rows[i].m;
                break;
            }
        }
    }
    Outcome o;
    o.pass = first_min >= 1400 && first_min <= 2600 && next_max >= 8400 && next_max <= 15600;
    o.detail = "first local min at m = " + std::to_string(first_min) + " (window [1400,2600]), next local max at m = " +
               std::to_string(next_max) + " (window [8400,15600]), stride " + std::to_string(stride);
    o.measurements["first_min_m"] = first_min;
    o.measurements["next_max_m"] = next_max;
    return o;
}

Outcome bootstrap_limit_small_n() {
    Real gap = bootstrap::limit_gap(funcs::make_absdev(), 6, 100000, 4001, 256);
    Outcome o;
    o.pass = gap < Real(1e-3);
    o.detail = "limit_gap(absdev, n=6, m=1e5) = " + format_real(gap, 6) + " (< 1e-3)";
    o.measurements["limit_gap"] = to_double(gap);
    return o;
}

// e_m = e_{m-1} - B_n[e_{m-1}] evaluated as nested functions, with e_0 = f.
class DirectComposition {
  public:
    DirectComposition(const funcs::Function1D& f, int n) : f_(f), n_(n) {}

    Rational operator()(int m, const Rational& p) {
        if (m == 0) return f_(p);
        auto key = std::make_pair(m, p);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        auto w = binom::pmf<Rational>(n_, p);
        Rational acc = (*this)(m - 1, p);
        for (int k = 0; k <= n_; ++k) acc -= w[k] * (*this)(m - 1, Rational(k) / n_);
        memo_.emplace(key, acc);
        return acc;
    }

  private:
    const funcs::Function1D& f_;
    int n_;
    std::map<std::pair<int, Rational>, Rational> memo_;
};

Outcome bootstrap_invariance() {
    std::vector<funcs::Function1D> fs{
        funcs::make_pwl({{Rational(0), Rational(0)},
                         {Rational(1, 5), Rational(1, 2)},
                         {Rational(1, 2), Rational(-1, 3)},
                         {Rational(3, 4), Rational(1)},
                         {Rational(1), Rational(1, 4)}}),
        funcs::make_poly({0, 0, 0, 1})};
    const std::vector<Rational> probes{Rational(0),    Rational(1, 7), Rational(2, 9), Rational(1, 3),
                                       Rational(1, 2), Rational(5, 8), Rational(9, 10), Rational(1)};
    int checked = 0, mismatches = 0;
    for (const auto& f : fs) {
        for (int n = 1; n <= 8; ++n) {
            DirectComposition direct(f, n);
            auto state = bootstrap::initial_state<Rational>(f, n);
            const auto a = binom::transition_matrix<Rational>(n);
            for (int m = 1; m <= 5; ++m) {
                if (m > 1) bootstrap::advance(state, a, 1);
                for (const auto& p : probes) {
                    ++checked;
                    if (bootstrap::e_m_eval(state, p) != direct(m, p)) ++mismatches;
                }
            }
        }
    }
    Outcome o;
    o.pass = mismatches == 0 && checked > 0;
    o.detail = std::to_string(checked) + " exact comparisons (pwl, p^3; n<=8, m<=5), " + std::to_string(mismatches) +
               " mismatches";
    o.measurements["mismatches"] = mismatches;
    return o;
}

std::vector<double> scaled_sups(const funcs::Function1D& f, bool half, double alpha) {
    std::vector<double> out;
    for (int n : {50, 100, 200, 400, 800}) {
        auto scheme = half ? jackknife::scheme_half(n) : jackknife::scheme_delete_d(n, 2, 1);
        auto c = jackknife::bias_curve<double>(f, scheme);
        out.push_back(c.sup_abs * std::pow(n, alpha));
    }
    return out;
}

Outcome rate_band(const funcs::Function1D& f, double alpha, const std::string& label) {
    auto d1 = scaled_sups(f, false, alpha);
    auto hf = scaled_sups(f, true, alpha);
    const double b1 = band_ratio(d1), b2 = band_ratio(hf);
    Outcome o;
    o.pass = b1 <= 3 && b2 <= 3;
    o.detail = label + " delete-1 [" + band_text(d1) + "] max/min " + fmt(b1, 4) + "; (n/2,n) [" + band_text(hf) +
               "] max/min " + fmt(b2, 4) + " (band <= 3)";
    o.measurements["band_delete1"] = b1;
    o.measurements["band_half"] = b2;
    return o;
}

Outcome entropy_rate() { return rate_band(funcs::make_entropy(), 1.0, "n*sup"); }

Outcome power_rate() { return rate_band(funcs::make_power(Rational(1, 2)), 0.5, "n^(1/2)*sup"); }

Outcome delete1_blowup() {
    PrecisionScope scope(256);
    std::vector<std::pair<double, double>> pairs;
    std::string vals;
    for (int n : {100, 200, 400, 800}) {
        auto scheme = jackknife::scheme_delete_d(n, 3, 1);
        Real b = jackknife::jackknife_bias<Real>(funcs::make_sawtooth(n), scheme, Real(1) / n);
        pairs.emplace_back(n, std::abs(to_double(b)));
        vals += (vals.empty() ? "" : ",") + fmt(to_double(b), 6);
    }
    auto fit = smoothness::rate_fit(pairs);
    Outcome o;
    o.pass = std::abs(fit.slope - 2) <= 0.3;
    o.detail = "bias at p=1/n [" + vals + "], slope " + fmt(fit.slope, 4) + " (2 +- 0.3)";
    o.measurements["slope"] = fit.slope;
    return o;
}

Outcome variance_gadget() {
    PrecisionScope scope(256);
    const Real e = exp(Real(1));
    bool ok = true;
    double worst = HUGE_VAL;
    std::string vals;
    for (int n : {4, 10, 50}) {
        Rational v = jackknife::delete1_r2_variance<Rational>(n, Rational(1, n), funcs::make_variance_gadget(n));
        Real bound = Real(n) * n / e;
        Real vr(v);
        ok = ok && vr >= bound;
        worst = std::min(worst, to_double(Real(vr / bound)));
        vals += (vals.empty() ? "" : ", ") + std::string("n=") + std::to_string(n) + ": " + fmt(to_double(vr), 8) +
                " vs " + fmt(to_double(bound), 8);
    }
    Outcome o;
    o.pass = ok;
    o.detail = "Var vs n^2/e: " + vals;
    o.measurements["min_ratio"] = worst;
    return o;
}

Outcome vandermonde() {
    std::mt19937_64 rng(1);
    int violations = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int r = std::uniform_int_distribution<int>(1, 6)(rng);
        std::vector<long> sizes{std::uniform_int_distribution<long>(r, 60)(rng)};
        for (int i = 1; i < r; ++i) sizes.push_back(sizes.back() + std::uniform_int_distribution<long>(1, 20)(rng));
        auto scheme = jackknife::scheme_general(sizes);
        if (jackknife::power_sum(scheme, 0) != 1) ++violations;
        for (int rho = 1; rho < r; ++rho) {
            if (jackknife::power_sum(scheme, rho) != 0) ++violations;
        }
        for (int rho = r; rho <= r + 3; ++rho) {
            if (abs_value(jackknife::power_sum(scheme, rho)) > jackknife::higher_power_bound(scheme, rho)) ++violations;
        }
    }
    Outcome o;
    o.pass = violations == 0;
    o.detail = "200 random schemes (r<=6): " + std::to_string(violations) + " violations";
    o.measurements["violations"] = violations;
    return o;
}

Outcome central_moments() {
    PrecisionScope scope(256);
    int mismatches = 0, cases = 0;
    double worst_rel = 0;
    for (int s = 0; s <= 8; ++s) {
        auto poly = binom::central_moment_poly(s);
        for (int n = 2; n <= 50; ++n) {
            for (int k = 1; k <= 9; ++k) {
                Real p = Real(k) / 10;
                auto w = binom::pmf<Real>(n, p);
                Real oracle = 0;
                for (int x = 0; x <= n; ++x) oracle += w[x] * ipow(Real(Real(x) / n - p), s);
                oracle *= ipow(Real(n), s);
                Real value = poly(p, Real(n));
                Real err = abs(Real(value - oracle));
                Real scale = abs(oracle) + Real(1e-40);
                double rel = to_double(Real(err / scale));
                worst_rel = std::max(worst_rel, rel);
                ++cases;
                if (rel > 1e-10) ++mismatches;
            }
        }
    }
    int bound_violations = 0;
    for (int s = 2; s <= 10; ++s) {
        for (const auto& [j, h] : binom::h_coeffs(s)) {
            const double bound = binom::h_coeff_bound(s, j);
            for (int i = 0; i < 10000; ++i) {
                if (std::abs(h(i / 9999.0)) > bound) {
                    ++bound_violations;
                    break;
                }
            }
        }
    }
    Outcome o;
    o.pass = mismatches == 0 && bound_violations == 0;
    o.detail = std::to_string(cases) + " moment cases, worst relative error " + fmt(worst_rel, 3) + ", " +
               std::to_string(bound_violations) + " h-bound violations (s<=10)";
    o.measurements["mismatches"] = mismatches;
    o.measurements["bound_violations"] = bound_violations;
    return o;
}

double taylor_slope(const funcs::Function1D& f, int k) {
    std::vector<std::pair<double, double>> pairs;
    for (int n : {20, 40, 80, 160}) pairs.emplace_back(n, taylor::taylor_bias_curve<double>(f, k, n).sup_abs);
    return smoothness::rate_fit(pairs).slope;
}

Outcome taylor_order() {
    auto p4 = funcs::make_poly({0, 0, 0, 0, 1});
    auto ex = funcs::make_exp();
    const double a = taylor_slope(p4, 2), b = taylor_slope(ex, 2);
    const double c = taylor_slope(p4, 1), d = taylor_slope(ex, 1);
    Outcome o;
    o.pass = std::abs(a + 2) <= 0.3 && std::abs(b + 2) <= 0.3 && std::abs(c + 1) <= 0.2 && std::abs(d + 1) <= 0.2;
    o.detail = "k=2 slopes: p^4 " + fmt(a, 4) + ", exp " + fmt(b, 4) + " (-2 +- 0.3); k=1 slopes: p^4 " + fmt(c, 4) +
               ", exp " + fmt(d, 4) + " (-1 +- 0.2)";
    o.measurements["slope_p4_k2"] = a;
    o.measurements["slope_exp_k2"] = b;
    o.measurements["slope_p4_k1"] = c;
    o.measurements["slope_exp_k1"] = d;
    return o;
}

Outcome sample_splitting() {
    // The bias is a polynomial of degree <= 12 in p, so 14 zeros make it vanish identically.
    auto p3 = funcs::make_poly({0, 0, 0, 1});
    int nonzero = 0;
    for (int i = 0; i <= 13; ++i) {
        if (taylor::sample_split_bias<Rational>(p3, 2, 6, 6, Rational(i, 13)) != 0) ++nonzero;
    }
    auto p4 = funcs::make_poly({0, 0, 0, 0, 1});
    std::vector<std::pair<double, double>> pairs;
    for (int n : {16, 32, 64, 128}) {
        pairs.emplace_back(n, taylor::sample_split_bias_curve<double>(p4, 2, (n + 1) / 2, n / 2).sup_abs);
    }
    const double slope = smoothness::rate_fit(pairs).slope;
    Outcome o;
    o.pass = nonzero == 0 && std::abs(slope + 2) <= 0.3;
    o.detail = "p^3, k=2, n1=n2=6: " + std::to_string(nonzero) + " nonzero exact biases of 14; p^4 slope " +
               fmt(slope, 4) + " (-2 +- 0.3)";
    o.measurements["nonzero_exact"] = nonzero;
    o.measurements["slope_p4"] = slope;
    return o;
}

Outcome bernstein_divergence() {
    PrecisionScope scope(256);
    auto f = funcs::make_absdev();
    bootstrap::LagrangeInterpolant<Real> l20(f, 20), l40(f, 40);
    const Real p = Real(3) / 10;
    Real a = abs(l20(p)), b = abs(l40(p));
    const double ratio = to_double(Real(b / a));
    // off-node diagnostic
    const Real q = Real(1) / 80;
    const double off = to_double(Real(abs(Real(l40(q) - f(q))) / abs(Real(l20(q) - f(q)))));
    Outcome o;
    o.pass = ratio > 10;
    o.detail = "|L_40(0.3)| / |L_20(0.3)| = " + fmt(ratio, 6) + " (> 10 required); 0.3 is a node for both n so both equal f(0.3) = " +
               format_real(a, 6) + "; off-node diagnostic |L_n f - f| ratio at p=1/80: " + fmt(off, 6);
    o.measurements["ratio_at_0.3"] = ratio;
    o.measurements["ratio_off_node"] = off;
    return o;
}

Outcome property_suites() {
    std::mt19937_64 rng(1);
    auto uni = [&](long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); };

    int mv = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int r = static_cast<int>(uni(1, 4));
        std::set<long> pts;
        const long x0 = uni(0, 10);
        pts.insert(x0);
        while (static_cast<int>(pts.size()) < r + 1) pts.insert(x0 + uni(1, 20));
        std::vector<long> points(pts.begin(), pts.end());
        std::map<long, Rational> values;
        for (long x = points.front(); x <= points.back(); ++x) values[x] = Rational(uni(-50, 50));
        if (!jackknife::meanvalue_check(values, points).holds) ++mv;
    }

    PrecisionScope scope(256);
    int ent = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<smoothness::DiscreteRV<Rational>::Atom> atoms;
        std::vector<long> w;
        long total = 0;
        for (int i = 0; i < 4; ++i) {
            w.push_back(uni(1, 20));
            total += w.back();
        }
        for (int i = 0; i < 4; ++i) atoms.push_back({Rational(uni(0, 64), 16), Rational(w[i], total)});
        if (atoms[0].value == 0 && atoms[1].value == 0 && atoms[2].value == 0 && atoms[3].value == 0) {
            atoms[0].value = 1;
        }
        if (!smoothness::ent_bounds(smoothness::DiscreteRV<Rational>(atoms)).all_hold) ++ent;
    }

    int div = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<smoothness::DiscreteRV<Rational>::Atom> pa, qa;
        long tp = 0, tq = 0;
        std::vector<long> wp, wq;
        for (int i = 0; i < 4; ++i) {
            wp.push_back(uni(0, 20));
            wq.push_back(uni(1, 20));
            tp += wp.back();
            tq += wq.back();
        }
        if (tp == 0) {
            wp[0] = 1;
            tp = 1;
        }
        for (int i = 0; i < 4; ++i) {
            pa.push_back({Rational(i), Rational(wp[i], tp)});
            qa.push_back({Rational(i), Rational(wq[i], tq)});
        }
        auto rec = smoothness::divergences(smoothness::DiscreteRV<Rational>(pa), smoothness::DiscreteRV<Rational>(qa));
        if (!rec.chain_holds) ++div;
    }

    int ch = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = static_cast<int>(uni(5, 60));
        const Rational p(uni(1, 19), 20);
        const bool lower = trial % 2 == 0;
        const Rational beta = lower ? Rational(uni(1, 20), 20) : Rational(uni(1, 60), 20);
        const auto tail = lower ? binom::Tail::lower : binom::Tail::upper;
        const double exact = binom::chernoff_exact_tail(n, p, beta, tail).convert_to<double>();
        const double bound = binom::chernoff_bound(n, p.convert_to<double>(), beta.convert_to<double>(), tail);
        if (exact > bound * (1 + 1e-12)) ++ch;
    }

    int mono = 0;
    smoothness::ModulusOptions mopts{64, 1001};
    for (const auto& f : {funcs::make_entropy(), funcs::make_absdev(), funcs::make_sawtooth(), funcs::make_poly({0, 0, 1})}) {
        for (int r : {1, 2}) {
            double prev = -1;
            for (int j = 9; j >= 1; --j) {
                double v = smoothness::dt_modulus<double>(f, r, std::ldexp(1.0, -j), mopts).value;
                if (v < prev) ++mono;
                prev = v;
            }
        }
    }

    int annih = 0;
    smoothness::ModulusOptions small{16, 201};
    for (int r = 1; r <= 3; ++r) {
        std::vector<Rational> coeffs;
        for (int i = 0; i < r; ++i) coeffs.push_back(Rational(i + 2, 3 * (i + 1)));
        auto f = funcs::make_poly(coeffs);
        for (int j : {1, 3, 5}) {
            if (smoothness::dt_modulus<Rational>(f, r, Rational(1, 1L << j), small).value != 0) ++annih;
        }
    }

    Outcome o;
    o.pass = mv == 0 && ent == 0 && div == 0 && ch == 0 && mono == 0 && annih == 0;
    o.detail = "violations: mean-value " + std::to_string(mv) + "/1000, entropy chain " + std::to_string(ent) +
               "/1000, divergence chain " + std::to_string(div) + "/1000, Chernoff " + std::to_string(ch) +
               "/100, modulus monotonicity " + std::to_string(mono) + ", annihilation " + std::to_string(annih);
    o.measurements["violations"] = mv + ent + div + ch + mono + annih;
    return o;
}

}  // namespace

const std::vector<Criterion>& registry() {
    static const std::vector<Criterion> criteria{
        {"lagrange_limit", "bootstrap", "Lagrange limit gap for |p-1/2| at n=20", 10, lagrange_limit},
        {"trace_turning_points", "bootstrap", "Bootstrap trace turning points at n=20", 120, trace_turning_points},
        {"bootstrap_limit_small_n", "bootstrap", "Bootstrap limit at n=6", 60, bootstrap_limit_small_n},
        {"bootstrap_invariance", "bootstrap", "Node recurrence vs direct composition", 30, bootstrap_invariance},
        {"entropy_rate", "jackknife", "Entropy 2-jackknife rate band", 60, entropy_rate},
        {"power_rate", "jackknife", "Power-1/2 2-jackknife rate band", 60, power_rate},
        {"delete1_blowup", "jackknife", "Delete-1 3-jackknife blow-up on the sawtooth", 60, delete1_blowup},
        {"variance_gadget", "jackknife", "Delete-1 2-jackknife variance lower bound", 60, variance_gadget},
        {"vandermonde", "jackknife", "Coefficient identities and higher-power bound", 10, vandermonde},
        {"central_moments", "binom", "Central-moment polynomials and h-coefficient bounds", 60, central_moments},
        {"taylor_order", "taylor", "Taylor correction rates", 60, taylor_order},
        {"sample_splitting", "taylor", "Sample-splitting correction", 60, sample_splitting},
        {"bernstein_divergence", "interpolation", "Pointwise divergence of L_n[|p-1/2|] at 0.3", 10,
         bernstein_divergence},
        {"property_suites", "properties", "Randomized property suites", 120, property_suites},
    };
    return criteria;
}

std::vector<const Criterion*> select(const std::vector<std::string>& only) {
    std::vector<const Criterion*> out;
    for (const auto& c : registry()) {
        if (only.empty() || std::find(only.begin(), only.end(), c.group) != only.end() ||
            std::find(only.begin(), only.end(), c.id) != only.end()) {
            out.push_back(&c);
        }
    }
    return out;
}

Result run(const Criterion& c) {
    Result r{c.id, c.group, c.title, false, "", nlohmann::json::object(), 0, c.time_limit};
    const auto start = std::chrono::steady_clock::now();
    try {
        Outcome o = c.run();
        r.pass = o.pass;
        r.detail = o.detail;
        r.measurements = o.measurements;
    } catch (const std::exception& e) {
        r.pass = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (r.seconds > c.time_limit) {
        r.pass = false;
        r.detail += "; runtime " + fmt(r.seconds, 3) + "s exceeds " + fmt(c.time_limit, 3) + "s";
    }
    return r;
}

std::string format_line(const Result& r) {
    return std::string(r.pass ? "[PASS] " : "[FAIL] ") + r.id + " (" + r.group + ") " + r.detail + " [" +
           fmt(r.seconds, 3) + "s]";
}

std::vector<ReferenceCheck> compare_to_reference(const Result& r, const nlohmann::json& item) {
    std::vector<ReferenceCheck> out;
    if (!item.is_object() || !item.contains("checks") || !item["checks"].is_object()) {
        out.push_back({r.id, "", false, "reference entry lacks a checks object"});
        return out;
    }
    for (const auto& [key, spec] : item["checks"].items()) {
        ReferenceCheck chk{r.id, key, false, ""};
        if (!r.measurements.contains(key)) {
            chk.detail = "measurement missing";
            out.push_back(chk);
            continue;
        }
        const auto& m = r.measurements[key];
        try {
            if (spec.contains("equals")) {
                chk.pass = m == spec["equals"];
                chk.detail = "got " + m.dump() + ", expected " + spec["equals"].dump();
            } else if (spec.contains("value")) {
                const double v = m.get<double>(), ref = spec["value"].get<double>();
                const double tol = spec.value("abs_tol", 0.0);
                chk.pass = std::abs(v - ref) <= tol;
                chk.detail = "got " + fmt(v, 10) + ", reference " + fmt(ref, 10) + " +- " + fmt(tol, 4);
            } else {
                const double v = m.get<double>();
                chk.pass = true;
                chk.detail = "got " + fmt(v, 10);
                if (spec.contains("min")) {
                    chk.pass = chk.pass && v >= spec["min"].get<double>();
                    chk.detail += ", min " + spec["min"].dump();
                }
                if (spec.contains("max")) {
                    chk.pass = chk.pass && v <= spec["max"].get<double>();
                    chk.detail += ", max " + spec["max"].dump();
                }
            }
        } catch (const nlohmann::json::exception& e) {
            chk.pass = false;
            chk.detail = std::string("malformed reference: ") + e.what();
        }
        out.push_back(chk);
    }
    return out;
}

}  // namespace biascorr::acceptance
