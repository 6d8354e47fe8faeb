#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flowlab/expr.hpp"
#include "flowlab/geom.hpp"

namespace flowlab {

struct PressureField {
    std::optional<Expr> p;

    bool present() const { return p.has_value(); }
};

// A planar velocity field given by two expressions, with the parameter
// bindings it needs and the box the computation is truncated to.
struct VectorField {
    Expr v1;
    Expr v2;
    ParamEnv env;
    std::string name;
    Box domain_box;

    Vec2 velocity(const Vec2& x) const { return {eval(v1, x, env), eval(v2, x, env)}; }
    // gradient of the stream function: (v2, -v1)
    Vec2 stream_grad(const Vec2& x) const { return {eval(v2, x, env), -eval(v1, x, env)}; }
};

// Certified-on-box magnitude bounds.  The two-sided admissibility constant is
// eta = min(eta_lo, 1/eta_hi, 1); a field counts as hypothesis-satisfying on
// the box only when eta_lo stays above the stagnation threshold.
struct FieldBounds {
    double eta_lo = 0.0;            // min |v| found on the sampling grid
    double eta_hi = 0.0;            // max |v| found on the sampling grid
    double grid_spacing = 0.0;
    Vec2 min_at;
    Vec2 max_at;
    bool admissible = false;

    double eta() const;
};

inline constexpr double kStagnationTol = 1e-8;

// Stream function with u(0) = 0.  Either a symbolic expression or an adaptive
// line integral of (v2, -v1) along the segment from the origin.
class StreamFunction {
public:
    StreamFunction() = default;

    static StreamFunction symbolic(Expr u, const VectorField& field);
    static StreamFunction quadrature(const VectorField& field, double abs_target = 1e-9);

    bool is_symbolic() const { return u_.has_value(); }
    const Expr& expr() const;

    double operator()(const Vec2& x) const { return value(x); }
    double value(const Vec2& x) const;
    Vec2 gradient(const Vec2& x) const;
    // worst absolute quadrature error estimate seen so far (0 for symbolic)
    double achieved_error() const { return achieved_error_; }

private:
    std::optional<Expr> u_;
    // field data is copied so a StreamFunction stays valid on its own
    Expr v1_, v2_;
    ParamEnv env_;
    double abs_target_ = 1e-9;
    mutable double achieved_error_ = 0.0;
};

struct BuiltinField {
    VectorField field;
    PressureField pressure;
    StreamFunction stream;
};

// Built-in fields:
//   "cellular"           needs params alpha, beta
//   "cosh"               no params
//   "shear"              profile expression V (in x2) and angle (radians)
//   "couette"            params a, b: profile V(s) = a + b*s, angle 0
BuiltinField builtin(const std::string& name, const ParamEnv& env, const Box& box,
                     const std::string& shear_profile = "", double shear_angle = 0.0);

Expr divergence(const VectorField& f);
Expr vorticity(const VectorField& f);

// max over an n-by-n grid of |v.grad v + grad p| + |div v|, all derivatives
// symbolic.  Throws if no pressure is present.
double euler_residual(const VectorField& f, const PressureField& p, const Box& box, int n);

FieldBounds estimate_eta(const VectorField& f, const Box& box, int n);

// Substituted-argument transforms.  rescale: x -> f(x/factor); shift:
// x -> f(y + x).  Both preserve divergence-freeness and magnitude bounds.
VectorField rescale(const VectorField& f, double factor);
VectorField shift(const VectorField& f, const Vec2& y);

// Antiderivative for the restricted class of profiles used by the shear
// builtin (polynomials and trig/hyperbolic/exponential with affine argument).
// Empty when the profile falls outside the class.
std::optional<Expr> antiderivative_1d(const Expr& e, Var var);

} // namespace flowlab
