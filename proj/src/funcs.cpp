#include "biascorr/funcs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace biascorr::funcs {

Rational FunctionModel::eval(const Rational&) const {
    throw DomainError("function is not evaluable over rationals");
}

double FunctionModel::deriv(int, double) const { throw DomainError("no derivatives available"); }
Real FunctionModel::deriv(int, const Real&) const { throw DomainError("no derivatives available"); }
Rational FunctionModel::deriv(int, const Rational&) const {
    throw DomainError("derivatives are not available over rationals");
}

Function1D::Function1D(std::string name, std::shared_ptr<const FunctionModel> model)
    : name_(std::move(name)), model_(std::move(model)) {
    if (!model_) throw DomainError("Function1D requires a model");
}

namespace {

using std::exp;
using std::log;
using std::pow;

// Routes the virtual float overloads to Derived::value<T> / Derived::derive<T>.
template <class Derived>
class FloatModel : public FunctionModel {
  public:
    double eval(double p) const override { return self().template value<double>(p); }
    Real eval(const Real& p) const override { return self().template value<Real>(p); }
    double deriv(int order, double p) const override { return self().template derive<double>(order, p); }
    Real deriv(int order, const Real& p) const override { return self().template derive<Real>(order, p); }

  protected:
    const Derived& self() const { return static_cast<const Derived&>(*this); }
};

template <class Derived>
class ExactModel : public FloatModel<Derived> {
  public:
    using FloatModel<Derived>::eval;
    using FloatModel<Derived>::deriv;
    bool rational_evaluable() const override { return true; }
    Rational eval(const Rational& p) const override { return this->self().template value<Rational>(p); }
    Rational deriv(int order, const Rational& p) const override {
        return this->self().template derive<Rational>(order, p);
    }
};

class Entropy final : public FloatModel<Entropy> {
  public:
    int max_derivative_order() const override { return kUnboundedOrder; }

    template <class T>
    T value(const T& p) const {
        if (p <= 0) return T(0);
        return T(-p * log(p));
    }

    template <class T>
    T derive(int order, const T& p) const {
        if (p <= 0) throw SingularDerivative("entropy: derivative singular at p = 0");
        if (order == 1) return T(-log(p) - 1);
        // (-1)^{l-1} (l-2)! / p^{l-1}
        T mag = from_bigint<T>(factorial(static_cast<unsigned>(order - 2))) / ipow(p, order - 1);
        return (order % 2 == 0) ? T(-mag) : mag;
    }
};

class Power final : public FloatModel<Power> {
  public:
    explicit Power(Rational alpha) : alpha_(std::move(alpha)) {}
    int max_derivative_order() const override { return kUnboundedOrder; }

    template <class T>
    T value(const T& p) const {
        if (p <= 0) return T(0);
        return T(pow(p, from_rational<T>(alpha_)));
    }

    template <class T>
    T derive(int order, const T& p) const {
        if (p <= 0) throw SingularDerivative("power: derivative singular at p = 0");
        T a = from_rational<T>(alpha_);
        T coeff = from_int<T>(1);
        for (int i = 0; i < order; ++i) coeff *= (a - i);
        return T(coeff * pow(p, T(a - order)));
    }

  private:
    Rational alpha_;
};

class AbsDev final : public ExactModel<AbsDev> {
  public:
    template <class T>
    T value(const T& p) const {
        return abs_value(T(p - ratio<T>(1, 2)));
    }
    template <class T>
    T derive(int, const T&) const {
        throw DomainError("absdev has no derivatives");
    }
};

class XLog final : public FloatModel<XLog> {
  public:
    XLog(Rational delta, Rational gamma) : delta_(std::move(delta)), gamma_(std::move(gamma)) {}

    template <class T>
    T value(const T& p) const {
        if (p <= 0) return T(0);
        T l = abs_value(T(log(T(p / 2))));
        return T(pow(p, from_rational<T>(delta_)) * pow(l, from_rational<T>(gamma_)));
    }
    template <class T>
    T derive(int, const T&) const {
        throw DomainError("xlog has no derivatives");
    }

  private:
    Rational delta_;
    Rational gamma_;
};

class Exponential final : public FloatModel<Exponential> {
  public:
    int max_derivative_order() const override { return kUnboundedOrder; }
    template <class T>
    T value(const T& p) const {
        return T(exp(p));
    }
    template <class T>
    T derive(int, const T& p) const {
        return T(exp(p));
    }
};

class PolyModel final : public ExactModel<PolyModel> {
  public:
    explicit PolyModel(Polynomial poly) {
        derivs_.push_back(std::move(poly));
        while (!derivs_.back().is_zero()) derivs_.push_back(derivs_.back().derivative());
    }
    int max_derivative_order() const override { return kUnboundedOrder; }

    template <class T>
    T value(const T& p) const {
        return derivs_.front()(p);
    }
    template <class T>
    T derive(int order, const T& p) const {
        if (static_cast<size_t>(order) >= derivs_.size()) return from_int<T>(0);
        return derivs_[order](p);
    }

  private:
    std::vector<Polynomial> derivs_;
};

class PwlModel final : public ExactModel<PwlModel> {
  public:
    explicit PwlModel(PiecewiseLinear pwl) : pwl_(std::move(pwl)) {}
    template <class T>
    T value(const T& p) const {
        return pwl_(p);
    }
    template <class T>
    T derive(int, const T&) const {
        throw DomainError("piecewise linear functions have no derivatives");
    }

  private:
    PiecewiseLinear pwl_;
};

class Sawtooth final : public ExactModel<Sawtooth> {
  public:
    explicit Sawtooth(long resolution) : resolution_(resolution) {}

    template <class T>
    T value(const T& p) const {
        if (p <= 0) return from_int<T>(0);
        if (p >= 1) return from_int<T>(0);
        long m = 0;
        if constexpr (std::is_same_v<T, Rational>) {
            BigInt q = boost::multiprecision::denominator(p) / boost::multiprecision::numerator(p);
            m = q > resolution_ ? resolution_ + 1 : q.template convert_to<long>();
        } else {
            T inv = T(1 / p);
            m = inv > resolution_ ? resolution_ + 1 : static_cast<long>(to_double(T(floor(inv))));
        }
        if (m >= resolution_) {
            // segment from the origin to the last stored node (1/M, y_M)
            return T(p * from_int<T>(resolution_) * node_value<T>(resolution_));
        }
        T lower = node_value<T>(m + 1);
        T upper = node_value<T>(m);
        return T(lower + (p * from_int<T>(m + 1) - 1) * from_int<T>(m) * (upper - lower));
    }
    template <class T>
    T derive(int, const T&) const {
        throw DomainError("sawtooth has no derivatives");
    }

  private:
    template <class T>
    static T node_value(long m) {
        return from_int<T>(m % 2 == 0 ? 1 : 0);
    }
    long resolution_;
};

template <class T>
T interpolate(const std::vector<T>& xs, const std::vector<T>& ys, const T& p) {
    if (p <= xs.front()) return ys.front();
    if (p >= xs.back()) return ys.back();
    auto it = std::upper_bound(xs.begin(), xs.end(), p);
    size_t hi = static_cast<size_t>(it - xs.begin());
    size_t lo = hi - 1;
    return T(ys[lo] + (p - xs[lo]) * (ys[hi] - ys[lo]) / (xs[hi] - xs[lo]));
}

}  // namespace

PiecewiseLinear::PiecewiseLinear(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw DomainError("piecewise linear function needs at least one node");
    for (size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].x < 0 || nodes_[i].x > 1) throw DomainError("pwl node x outside [0,1]");
        if (i > 0 && !(nodes_[i - 1].x < nodes_[i].x)) {
            throw DomainError("pwl nodes must have strictly increasing x");
        }
        xd_.push_back(nodes_[i].x.convert_to<double>());
        yd_.push_back(nodes_[i].y.convert_to<double>());
    }
}

Rational PiecewiseLinear::sup_norm() const {
    Rational best = 0;
    for (const auto& n : nodes_) best = std::max(best, abs_value(n.y));
    return best;
}

double PiecewiseLinear::operator()(double p) const { return interpolate(xd_, yd_, p); }

Real PiecewiseLinear::operator()(const Real& p) const {
    std::vector<Real> xs, ys;
    xs.reserve(nodes_.size());
    ys.reserve(nodes_.size());
    for (const auto& n : nodes_) {
        xs.emplace_back(n.x);
        ys.emplace_back(n.y);
    }
    return interpolate(xs, ys, p);
}

Rational PiecewiseLinear::operator()(const Rational& p) const {
    std::vector<Rational> xs, ys;
    xs.reserve(nodes_.size());
    ys.reserve(nodes_.size());
    for (const auto& n : nodes_) {
        xs.push_back(n.x);
        ys.push_back(n.y);
    }
    return interpolate(xs, ys, p);
}

Function1D make_entropy() {
    Function1D f("entropy", std::make_shared<Entropy>());
    f.with_sup_bound(std::exp(-1.0)).with_notes("-p ln p, f(0) = 0");
    return f;
}

Function1D make_power(const Rational& alpha) {
    if (!(alpha > 0 && alpha < 1)) throw DomainError("power: alpha must lie in (0,1)");
    Function1D f("power:" + format_rational(alpha), std::make_shared<Power>(alpha));
    f.with_sup_bound(1.0).with_notes("p^alpha");
    return f;
}

Function1D make_absdev() {
    Function1D f("absdev", std::make_shared<AbsDev>());
    f.with_sup_bound(0.5).with_smoothness({0, 0.5}).with_notes("|p - 1/2|");
    return f;
}

Function1D make_xlog(const Rational& delta, const Rational& gamma) {
    if (delta <= 0 || gamma < 0) throw DomainError("xlog: need delta > 0 and gamma >= 0");
    return Function1D("xlog:" + format_rational(delta) + "," + format_rational(gamma),
                      std::make_shared<XLog>(delta, gamma))
        .with_notes("x^delta |ln(x/2)|^gamma");
}

Function1D make_poly(std::vector<Rational> coefficients) {
    Polynomial poly(coefficients);
    std::string name = "poly:";
    for (size_t i = 0; i < coefficients.size(); ++i) {
        if (i) name += ",";
        name += format_rational(coefficients[i]);
    }
    // L bounds every derivative on [0,1] by the sum of absolute coefficients.
    double L = 0;
    for (Polynomial d = poly; !d.is_zero(); d = d.derivative()) {
        double s = 0;
        for (const auto& c : d.coefficients()) s += std::abs(c.convert_to<double>());
        L = std::max(L, s);
    }
    Function1D f(name, std::make_shared<PolyModel>(poly));
    f.with_smoothness({kUnboundedOrder, L});
    return f;
}

Function1D make_affine(const Rational& slope, const Rational& intercept) {
    Function1D f = make_poly({intercept, slope});
    return Function1D("affine:" + format_rational(slope) + "," + format_rational(intercept),
                      std::make_shared<PolyModel>(Polynomial({intercept, slope})))
        .with_smoothness(*f.smoothness());
}

Function1D make_exp() {
    Function1D f("exp", std::make_shared<Exponential>());
    f.with_smoothness({kUnboundedOrder, std::exp(1.0)}).with_sup_bound(std::exp(1.0));
    return f;
}

Function1D make_pwl(std::vector<Node> nodes, std::string name) {
    PiecewiseLinear pwl(std::move(nodes));
    double bound = pwl.sup_norm().convert_to<double>();
    Function1D f(std::move(name), std::make_shared<PwlModel>(std::move(pwl)));
    f.with_sup_bound(bound).with_smoothness({0, bound});
    return f;
}

Function1D make_sawtooth(int n) {
    long resolution = std::max<long>(4L * n, 1000L);
    Function1D f("sawtooth", std::make_shared<Sawtooth>(resolution));
    f.with_sup_bound(1.0).with_smoothness({0, 1.0}).with_notes(
        "reciprocal nodes down to 1/" + std::to_string(resolution));
    return f;
}

Function1D make_variance_gadget(int n) {
    if (n < 4) throw DomainError("variance_gadget: n must be at least 4");
    std::vector<Node> nodes = {
        {Rational(0), Rational(0)},      {Rational(1, n), Rational(1)},     {Rational(1, n - 1), Rational(-1)},
        {Rational(2, n), Rational(-1)},  {Rational(2, n - 1), Rational(1)}, {Rational(1), Rational(0)},
    };
    return make_pwl(std::move(nodes), "variance_gadget:" + std::to_string(n));
}

Function1D catalog_get(const std::string& name, const CatalogParams& params) {
    auto require = [&](const auto& field, const char* what) -> const auto& {
        if (!field) throw DomainError(name + ": missing parameter " + what);
        return *field;
    };
    if (name == "entropy") return make_entropy();
    if (name == "absdev") return make_absdev();
    if (name == "exp") return make_exp();
    if (name == "power") return make_power(require(params.alpha, "alpha"));
    if (name == "xlog") return make_xlog(require(params.delta, "delta"), require(params.gamma, "gamma"));
    if (name == "sawtooth") return make_sawtooth(params.n.value_or(0));
    if (name == "variance_gadget") return make_variance_gadget(require(params.n, "n"));
    if (name == "poly") {
        if (params.coefficients.empty()) throw DomainError("poly: missing coefficients");
        return make_poly(params.coefficients);
    }
    if (name == "affine") {
        if (params.coefficients.size() != 2) throw DomainError("affine: need slope and intercept");
        return make_affine(params.coefficients[0], params.coefficients[1]);
    }
    if (name == "pwl") return make_pwl(params.nodes);
    throw DomainError("unknown function '" + name + "'");
}

std::vector<Node> read_pwl_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DomainError("pwl csv: empty input");
    line.erase(std::remove_if(line.begin(), line.end(), ::isspace), line.end());
    if (line != "x,y") throw DomainError("pwl csv: expected header 'x,y'");
    std::vector<Node> nodes;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw DomainError("pwl csv: line " + std::to_string(lineno) + " lacks a comma");
        }
        nodes.push_back({parse_rational(line.substr(0, comma)), parse_rational(line.substr(comma + 1))});
    }
    // validation happens in PiecewiseLinear
    PiecewiseLinear check(nodes);
    return nodes;
}

std::vector<Node> read_pwl_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open pwl file '" + path + "'");
    return read_pwl_csv(in);
}

namespace {

std::vector<Rational> parse_list(const std::string& text) {
    std::vector<Rational> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_rational(item));
    return out;
}

}  // namespace

Function1D parse_function_spec(const std::string& spec) {
    auto colon = spec.find(':');
    std::string name = spec.substr(0, colon);
    std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
    CatalogParams params;
    if (name == "power") {
        auto v = parse_list(args);
        if (v.size() != 1) throw DomainError("power expects one parameter, e.g. power:0.5");
        params.alpha = v[0];
    } else if (name == "xlog") {
        auto v = parse_list(args);
        if (v.size() != 2) throw DomainError("xlog expects two parameters, e.g. xlog:1,1");
        params.delta = v[0];
        params.gamma = v[1];
    } else if (name == "sawtooth" || name == "variance_gadget") {
        if (!args.empty()) {
            auto v = parse_list(args);
            if (v.size() != 1 || boost::multiprecision::denominator(v[0]) != 1) {
                throw DomainError(name + " expects an integer parameter");
            }
            params.n = boost::multiprecision::numerator(v[0]).convert_to<int>();
        }
    } else if (name == "poly" || name == "affine") {
        params.coefficients = parse_list(args);
    } else if (name == "pwl") {
        if (args.empty()) throw DomainError("pwl expects a CSV path, e.g. pwl:nodes.csv");
        params.nodes = read_pwl_csv_file(args);
    } else if (!args.empty()) {
        throw DomainError(name + " takes no parameters");
    }
    return catalog_get(name, params);
}

}  // namespace biascorr::funcs
