#include "flowlab/field.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace flowlab {

namespace {

const Expr kX1 = variable(Var::X1);
const Expr kX2 = variable(Var::X2);

bool uses_var(const Expr::NodePtr& n, Var var) {
    using Kind = Expr::Node::Kind;
    switch (n->kind) {
        case Kind::Constant:
        case Kind::Parameter: return false;
        case Kind::Variable: return n->var == var;
        case Kind::Unary: return uses_var(n->a, var);
        case Kind::Binary: return uses_var(n->a, var) || uses_var(n->b, var);
    }
    return false;
}

// ---------------------------------------------------------------------------
// Gauss-Kronrod 7-15 pair
// ---------------------------------------------------------------------------

constexpr double XGK[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
constexpr double WGK[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double WG[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <typename F>
void gk15(const F& f, double a, double b, double& integral, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double resk = WGK[7] * fc;
    double resg = WG[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double fsum = f(c - h * XGK[j]) + f(c + h * XGK[j]);
        resk += WGK[j] * fsum;
        if (j % 2 == 1) resg += WG[j / 2] * fsum;
    }
    integral = resk * h;
    err = std::fabs((resk - resg) * h);
}

template <typename F>
double adaptive_gk(const F& f, double a, double b, double abs_target, double& achieved) {
    struct Segment { double a, b, integral, err; };
    std::vector<Segment> stack;
    Segment whole;
    gk15(f, a, b, whole.integral, whole.err);
    whole.a = a;
    whole.b = b;
    stack.push_back(whole);
    double total = 0.0;
    double total_err = 0.0;
    int splits = 0;
    const int max_splits = 2000;
    while (!stack.empty()) {
        Segment s = stack.back();
        stack.pop_back();
        const double local_target = abs_target * (s.b - s.a) / (b - a);
        if (s.err <= local_target || splits >= max_splits || (s.b - s.a) < 1e-14) {
            total += s.integral;
            total_err += s.err;
            continue;
        }
        ++splits;
        const double mid = 0.5 * (s.a + s.b);
        Segment left{s.a, mid, 0, 0}, right{mid, s.b, 0, 0};
        gk15(f, left.a, left.b, left.integral, left.err);
        gk15(f, right.a, right.b, right.integral, right.err);
        stack.push_back(left);
        stack.push_back(right);
    }
    achieved = std::max(achieved, total_err);
    return total;
}

} // namespace

double FieldBounds::eta() const {
    double e = std::min(eta_lo, 1.0);
    if (eta_hi > 0.0) e = std::min(e, 1.0 / eta_hi);
    return e;
}

// ---------------------------------------------------------------------------
// StreamFunction
// ---------------------------------------------------------------------------

StreamFunction StreamFunction::symbolic(Expr u, const VectorField& field) {
    StreamFunction s;
    s.u_ = simplify(u);
    s.v1_ = field.v1;
    s.v2_ = field.v2;
    s.env_ = field.env;
    return s;
}

StreamFunction StreamFunction::quadrature(const VectorField& field, double abs_target) {
    StreamFunction s;
    s.v1_ = field.v1;
    s.v2_ = field.v2;
    s.env_ = field.env;
    s.abs_target_ = abs_target;
    return s;
}

const Expr& StreamFunction::expr() const {
    if (!u_) throw std::logic_error("stream function has no symbolic form");
    return *u_;
}

double StreamFunction::value(const Vec2& x) const {
    if (u_) {
        if (x.x == 0.0 && x.y == 0.0) return 0.0;
        return eval(*u_, x, env_) - eval(*u_, Vec2{0, 0}, env_);
    }
    // line integral of grad u = (v2, -v1) along the segment from the origin
    auto integrand = [&](double t) {
        const Vec2 p{t * x.x, t * x.y};
        const Vec2 g{eval(v2_, p, env_), -eval(v1_, p, env_)};
        return g.x * x.x + g.y * x.y;
    };
    if (x.x == 0.0 && x.y == 0.0) return 0.0;
    return adaptive_gk(integrand, 0.0, 1.0, abs_target_, achieved_error_);
}

Vec2 StreamFunction::gradient(const Vec2& x) const {
    return {eval(v2_, x, env_), -eval(v1_, x, env_)};
}

// ---------------------------------------------------------------------------
// Built-in fields
// ---------------------------------------------------------------------------

namespace {

// Builds a field from its stream function: v = (-u_x2, u_x1).
VectorField field_from_stream(const Expr& u, const ParamEnv& env, const std::string& name,
                              const Box& box) {
    VectorField f;
    f.v1 = simplify(-differentiate(u, Var::X2));
    f.v2 = simplify(differentiate(u, Var::X1));
    f.env = env;
    f.name = name;
    f.domain_box = box;
    return f;
}

} // namespace

std::optional<Expr> antiderivative_1d(const Expr& e, Var var) {
    using Kind = Expr::Node::Kind;
    const auto& n = e.root();
    const Expr v = variable(var);
    switch (n->kind) {
        case Kind::Constant:
        case Kind::Parameter:
            return simplify(e * v);
        case Kind::Variable: {
            if (n->var != var) return simplify(e * v);
            return simplify(v * v * constant(0.5));
        }
        case Kind::Unary: {
            const Expr child(n->a);
            if (n->uop == UnaryOp::Neg) {
                auto inner = antiderivative_1d(child, var);
                if (!inner) return std::nullopt;
                return simplify(-*inner);
            }
            // affine argument a*var + b with constant a, b?
            const Expr da = differentiate(child, var);
            if (da.root()->kind != Kind::Constant) return std::nullopt;
            const double a = da.root()->value;
            if (a == 0.0) return simplify(e * v); // constant w.r.t. var
            const Expr inv_a = constant(1.0 / a);
            switch (n->uop) {
                case UnaryOp::Sin: return simplify(-(unary(UnaryOp::Cos, child) * inv_a));
                case UnaryOp::Cos: return simplify(unary(UnaryOp::Sin, child) * inv_a);
                case UnaryOp::Sinh: return simplify(unary(UnaryOp::Cosh, child) * inv_a);
                case UnaryOp::Cosh: return simplify(unary(UnaryOp::Sinh, child) * inv_a);
                case UnaryOp::Exp: return simplify(unary(UnaryOp::Exp, child) * inv_a);
                default: return std::nullopt;
            }
        }
        case Kind::Binary: {
            const Expr lhs(n->a), rhs(n->b);
            switch (n->bop) {
                case BinaryOp::Add: {
                    auto l = antiderivative_1d(lhs, var);
                    auto r = antiderivative_1d(rhs, var);
                    if (!l || !r) return std::nullopt;
                    return simplify(*l + *r);
                }
                case BinaryOp::Sub: {
                    auto l = antiderivative_1d(lhs, var);
                    auto r = antiderivative_1d(rhs, var);
                    if (!l || !r) return std::nullopt;
                    return simplify(*l - *r);
                }
                case BinaryOp::Mul: {
                    if (!uses_var(n->a, var)) {
                        auto r = antiderivative_1d(rhs, var);
                        if (!r) return std::nullopt;
                        return simplify(lhs * *r);
                    }
                    if (!uses_var(n->b, var)) {
                        auto l = antiderivative_1d(lhs, var);
                        if (!l) return std::nullopt;
                        return simplify(*l * rhs);
                    }
                    return std::nullopt;
                }
                case BinaryOp::Div: {
                    if (!uses_var(n->b, var)) {
                        auto l = antiderivative_1d(lhs, var);
                        if (!l) return std::nullopt;
                        return simplify(*l / rhs);
                    }
                    return std::nullopt;
                }
                case BinaryOp::Pow: {
                    if (n->a->kind == Kind::Variable && n->a->var == var &&
                        n->b->kind == Kind::Constant && n->b->value != -1.0) {
                        const double k = n->b->value;
                        return simplify(binary(BinaryOp::Pow, lhs, constant(k + 1.0)) *
                                        constant(1.0 / (k + 1.0)));
                    }
                    return std::nullopt;
                }
            }
            return std::nullopt;
        }
    }
    return std::nullopt;
}

namespace {

BuiltinField make_shear(const ParamEnv& env, const Box& box, const std::string& profile_text,
                        double angle, const std::string& name) {
    if (profile_text.empty())
        throw std::invalid_argument("shear builtin needs a profile expression");
    const Expr profile = parse(profile_text);
    if (uses_var(profile.root(), Var::X1))
        throw std::invalid_argument("shear profile must be an expression in x2 only");

    const double c = std::cos(angle), s = std::sin(angle);
    // coordinate along e_perp = (-sin, cos)
    const Expr coord = simplify(constant(-s) * kX1 + constant(c) * kX2);
    const Expr v_of_coord = substitute(profile, kX1, coord);

    BuiltinField out;
    out.field.v1 = simplify(constant(c) * v_of_coord);
    out.field.v2 = simplify(constant(s) * v_of_coord);
    out.field.env = env;
    out.field.name = name;
    out.field.domain_box = box;
    out.pressure.p = constant(0.0);

    if (auto anti = antiderivative_1d(profile, Var::X2)) {
        // u(x) = W(0) - W(x . e_perp) where W' = V
        const Expr w0 = simplify(substitute(*anti, constant(0.0), constant(0.0)));
        const Expr u = simplify(w0 - substitute(*anti, kX1, coord));
        out.stream = StreamFunction::symbolic(u, out.field);
    } else {
        out.stream = StreamFunction::quadrature(out.field);
    }
    return out;
}

} // namespace

BuiltinField builtin(const std::string& name, const ParamEnv& env, const Box& box,
                     const std::string& shear_profile, double shear_angle) {
    if (name == "cellular") {
        if (!env.has("alpha") || !env.has("beta"))
            throw std::invalid_argument("cellular builtin needs parameters alpha and beta");
        const Expr u = parse("sin(alpha*x1)*sin(beta*x2)");
        BuiltinField out;
        out.field = field_from_stream(u, env, name, box);
        out.pressure.p = parse("(beta^2/4)*cos(2*alpha*x1)+(alpha^2/4)*cos(2*beta*x2)");
        out.stream = StreamFunction::symbolic(u, out.field);
        return out;
    }
    if (name == "cosh") {
        const Expr u = parse("x2*cosh(x1)");
        BuiltinField out;
        out.field = field_from_stream(u, env, name, box);
        out.pressure.p = parse("-cosh(2*x1)/4+x2^2/2");
        out.stream = StreamFunction::symbolic(u, out.field);
        return out;
    }
    if (name == "shear") return make_shear(env, box, shear_profile, shear_angle, name);
    if (name == "couette") {
        if (!env.has("a") || !env.has("b"))
            throw std::invalid_argument("couette builtin needs parameters a and b");
        return make_shear(env, box, "a+b*x2", 0.0, name);
    }
    throw std::invalid_argument("unknown builtin field '" + name + "'");
}

Expr divergence(const VectorField& f) {
    return simplify(differentiate(f.v1, Var::X1) + differentiate(f.v2, Var::X2));
}

Expr vorticity(const VectorField& f) {
    return simplify(differentiate(f.v2, Var::X1) - differentiate(f.v1, Var::X2));
}

double euler_residual(const VectorField& f, const PressureField& p, const Box& box, int n) {
    if (!p.present()) throw std::invalid_argument("euler_residual needs a pressure field");
    if (n < 2) throw std::invalid_argument("grid count must be at least 2");
    const Expr d1v1 = differentiate(f.v1, Var::X1);
    const Expr d2v1 = differentiate(f.v1, Var::X2);
    const Expr d1v2 = differentiate(f.v2, Var::X1);
    const Expr d2v2 = differentiate(f.v2, Var::X2);
    const Expr dp1 = differentiate(*p.p, Var::X1);
    const Expr dp2 = differentiate(*p.p, Var::X2);
    const Expr div = divergence(f);

    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = box.xmin + box.width() * i / (n - 1);
        for (int j = 0; j < n; ++j) {
            const Vec2 pt{x, box.ymin + box.height() * j / (n - 1)};
            const double a = eval(f.v1, pt, f.env);
            const double b = eval(f.v2, pt, f.env);
            const double r1 = a * eval(d1v1, pt, f.env) + b * eval(d2v1, pt, f.env) +
                              eval(dp1, pt, f.env);
            const double r2 = a * eval(d1v2, pt, f.env) + b * eval(d2v2, pt, f.env) +
                              eval(dp2, pt, f.env);
            const double value = std::hypot(r1, r2) + std::fabs(eval(div, pt, f.env));
            if (value > worst) worst = value;
        }
    }
    return worst;
}

FieldBounds estimate_eta(const VectorField& f, const Box& box, int n) {
    if (n < 2) throw std::invalid_argument("grid count must be at least 2");
    FieldBounds out;
    out.grid_spacing = std::max(box.width(), box.height()) / (n - 1);
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    Vec2 lo_at, hi_at;
    for (int i = 0; i < n; ++i) {
        const double x = box.xmin + box.width() * i / (n - 1);
        for (int j = 0; j < n; ++j) {
            const Vec2 pt{x, box.ymin + box.height() * j / (n - 1)};
            const double speed = norm(f.velocity(pt));
            if (speed < lo) { lo = speed; lo_at = pt; }
            if (speed > hi) { hi = speed; hi_at = pt; }
        }
    }
    // local refinement around the extrema
    auto refine = [&](Vec2 center, double half, bool minimize) {
        double best = minimize ? std::numeric_limits<double>::infinity() : 0.0;
        Vec2 best_at = center;
        for (int round = 0; round < 3; ++round) {
            for (int i = -5; i <= 5; ++i) {
                for (int j = -5; j <= 5; ++j) {
                    Vec2 pt{center.x + half * i / 5.0, center.y + half * j / 5.0};
                    pt.x = std::clamp(pt.x, box.xmin, box.xmax);
                    pt.y = std::clamp(pt.y, box.ymin, box.ymax);
                    const double speed = norm(f.velocity(pt));
                    if (minimize ? speed < best : speed > best) {
                        best = speed;
                        best_at = pt;
                    }
                }
            }
            center = best_at;
            half /= 5.0;
        }
        return std::pair<double, Vec2>{best, best_at};
    };
    auto [rl, rl_at] = refine(lo_at, out.grid_spacing, true);
    auto [rh, rh_at] = refine(hi_at, out.grid_spacing, false);
    out.eta_lo = std::min(lo, rl);
    out.min_at = rl < lo ? rl_at : lo_at;
    out.eta_hi = std::max(hi, rh);
    out.max_at = rh > hi ? rh_at : hi_at;
    out.admissible = out.eta_lo > kStagnationTol;
    return out;
}

VectorField rescale(const VectorField& f, double factor) {
    if (factor == 0.0) throw std::invalid_argument("rescale factor must be nonzero");
    const Expr sx = simplify(kX1 * constant(1.0 / factor));
    const Expr sy = simplify(kX2 * constant(1.0 / factor));
    VectorField out = f;
    out.v1 = substitute(f.v1, sx, sy);
    out.v2 = substitute(f.v2, sx, sy);
    out.name = f.name + "-rescaled";
    out.domain_box = {f.domain_box.xmin * factor, f.domain_box.xmax * factor,
                      f.domain_box.ymin * factor, f.domain_box.ymax * factor};
    if (factor < 0.0) {
        std::swap(out.domain_box.xmin, out.domain_box.xmax);
        std::swap(out.domain_box.ymin, out.domain_box.ymax);
    }
    return out;
}

VectorField shift(const VectorField& f, const Vec2& y) {
    const Expr sx = simplify(constant(y.x) + kX1);
    const Expr sy = simplify(constant(y.y) + kX2);
    VectorField out = f;
    out.v1 = substitute(f.v1, sx, sy);
    out.v2 = substitute(f.v2, sx, sy);
    out.name = f.name + "-shifted";
    out.domain_box = {f.domain_box.xmin - y.x, f.domain_box.xmax - y.x,
                      f.domain_box.ymin - y.y, f.domain_box.ymax - y.y};
    return out;
}

} // namespace flowlab
