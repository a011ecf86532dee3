#pragma once

// Catalog of target functions f on [0,1].

#include "biascorr/numeric.hpp"
#include "biascorr/polynomial.hpp"

#include <climits>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace biascorr::funcs {

inline constexpr int kUnboundedOrder = INT_MAX;

/// Membership in the class D_s: derivatives up to order s bounded by L.
struct Smoothness {
    int s = 0;
    double L = 0.0;
};

/// Backend interface for Function1D. Implementations must be immutable.
class FunctionModel {
  public:
    virtual ~FunctionModel() = default;

    virtual double eval(double p) const = 0;
    virtual Real eval(const Real& p) const = 0;
    virtual bool rational_evaluable() const { return false; }
    virtual Rational eval(const Rational& p) const;

    /// Highest supported derivative order; 0 when no derivatives exist.
    virtual int max_derivative_order() const { return 0; }
    virtual double deriv(int order, double p) const;
    virtual Real deriv(int order, const Real& p) const;
    virtual Rational deriv(int order, const Rational& p) const;
};

/// Evaluable target function with optional analytic derivatives.
class Function1D {
  public:
    Function1D(std::string name, std::shared_ptr<const FunctionModel> model);

    const std::string& name() const { return name_; }

    template <class T>
    T operator()(const T& p) const {
        return model_->eval(p);
    }

    /// f^{(order)}(p); order 0 is the value. Throws SingularDerivative at
    /// points where the derivative does not exist.
    template <class T>
    T derivative(int order, const T& p) const {
        if (order == 0) return (*this)(p);
        if (order < 0 || order > model_->max_derivative_order()) {
            throw DomainError(name_ + ": derivative of order " + std::to_string(order) + " not available");
        }
        return model_->deriv(order, p);
    }

    bool rational_evaluable() const { return model_->rational_evaluable(); }
    int max_derivative_order() const { return model_->max_derivative_order(); }

    const std::optional<Smoothness>& smoothness() const { return smoothness_; }
    /// Declared bound on sup |f| over [0,1], when known.
    const std::optional<double>& sup_bound() const { return sup_bound_; }
    const std::string& notes() const { return notes_; }

    Function1D& with_smoothness(Smoothness s) {
        smoothness_ = s;
        return *this;
    }
    Function1D& with_sup_bound(double b) {
        sup_bound_ = b;
        return *this;
    }
    Function1D& with_notes(std::string n) {
        notes_ = std::move(n);
        return *this;
    }

  private:
    std::string name_;
    std::shared_ptr<const FunctionModel> model_;
    std::optional<Smoothness> smoothness_;
    std::optional<double> sup_bound_;
    std::string notes_;
};

struct Node {
    Rational x;
    Rational y;
};

/// Continuous piecewise-linear function through strictly increasing nodes,
/// clamped to the end values outside the node span. Exact over rationals.
class PiecewiseLinear {
  public:
    explicit PiecewiseLinear(std::vector<Node> nodes);

    const std::vector<Node>& nodes() const { return nodes_; }
    Rational sup_norm() const;

    double operator()(double p) const;
    Real operator()(const Real& p) const;
    Rational operator()(const Rational& p) const;

  private:
    std::vector<Node> nodes_;
    std::vector<double> xd_;
    std::vector<double> yd_;
};

struct CatalogParams {
    std::optional<Rational> alpha;
    std::optional<Rational> delta;
    std::optional<Rational> gamma;
    std::optional<int> n;
    std::vector<Rational> coefficients;
    std::vector<Node> nodes;
};

/// Names: entropy, power, absdev, xlog, sawtooth, variance_gadget, poly, pwl,
/// plus exp and affine.
Function1D catalog_get(const std::string& name, const CatalogParams& params = {});

Function1D make_entropy();
Function1D make_power(const Rational& alpha);
Function1D make_absdev();
Function1D make_xlog(const Rational& delta, const Rational& gamma);
Function1D make_poly(std::vector<Rational> coefficients);
Function1D make_affine(const Rational& slope, const Rational& intercept);
Function1D make_exp();
Function1D make_pwl(std::vector<Node> nodes, std::string name = "pwl");

/// Linear interpolation of (1/m, (1 + (-1)^m)/2), m >= 1, with f(0) = 0.
/// Reciprocal nodes are kept down to 1/M, M = max(4n, 1000); below 1/M the
/// function is the segment to the origin.
Function1D make_sawtooth(int n = 0);

/// Piecewise linear through (0,0), (1/n,1), (1/(n-1),-1), (2/n,-1),
/// (2/(n-1),1), (1,0). Requires n >= 4.
Function1D make_variance_gadget(int n);

/// Reads `x,y` CSV (header required) with decimal or `a/b` literals.
std::vector<Node> read_pwl_csv(std::istream& in);
std::vector<Node> read_pwl_csv_file(const std::string& path);

/// Function spec mini-language used by the CLI: `entropy`, `power:0.5`,
/// `absdev`, `xlog:1,1`, `sawtooth[:n]`, `variance_gadget:10`,
/// `poly:c0,c1,...`, `pwl:path.csv`, `affine:a,b`, `exp`.
Function1D parse_function_spec(const std::string& spec);

}  // namespace biascorr::funcs
