#include "flowlab/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <sstream>
#include <vector>

namespace flowlab {

namespace {

using Node = Expr::Node;
using NodePtr = Expr::NodePtr;
using Kind = Node::Kind;

NodePtr make_constant(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Constant;
    n->value = v;
    return n;
}

NodePtr make_variable(Var v) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Variable;
    n->var = v;
    return n;
}

NodePtr make_parameter(std::string name) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Parameter;
    n->param = std::move(name);
    return n;
}

NodePtr make_unary(UnaryOp op, NodePtr child) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Unary;
    n->uop = op;
    n->a = std::move(child);
    return n;
}

NodePtr make_binary(BinaryOp op, NodePtr lhs, NodePtr rhs) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Binary;
    n->bop = op;
    n->a = std::move(lhs);
    n->b = std::move(rhs);
    return n;
}

const char* unary_name(UnaryOp op) {
    switch (op) {
        case UnaryOp::Neg: return "-";
        case UnaryOp::Sin: return "sin";
        case UnaryOp::Cos: return "cos";
        case UnaryOp::Sinh: return "sinh";
        case UnaryOp::Cosh: return "cosh";
        case UnaryOp::Tanh: return "tanh";
        case UnaryOp::Exp: return "exp";
        case UnaryOp::Ln: return "ln";
        case UnaryOp::Sqrt: return "sqrt";
        case UnaryOp::Abs: return "abs";
    }
    return "?";
}

bool lookup_function(const std::string& name, UnaryOp& op) {
    static const std::map<std::string, UnaryOp> table = {
        {"sin", UnaryOp::Sin},   {"cos", UnaryOp::Cos},  {"sinh", UnaryOp::Sinh},
        {"cosh", UnaryOp::Cosh}, {"tanh", UnaryOp::Tanh}, {"exp", UnaryOp::Exp},
        {"ln", UnaryOp::Ln},     {"sqrt", UnaryOp::Sqrt}, {"abs", UnaryOp::Abs},
    };
    auto it = table.find(name);
    if (it == table.end()) return false;
    op = it->second;
    return true;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    const std::string& text;
    std::size_t pos = 0;

    explicit Parser(const std::string& t) : text(t) {}

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    bool at_end() {
        skip_ws();
        return pos >= text.size();
    }

    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }

    bool consume(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& msg) {
        std::ostringstream os;
        os << msg << " at offset " << pos;
        throw ParseError(os.str(), pos);
    }

    NodePtr parse_sum() {
        NodePtr lhs = parse_term();
        for (;;) {
            if (consume('+')) {
                lhs = make_binary(BinaryOp::Add, lhs, parse_term());
            } else if (consume('-')) {
                lhs = make_binary(BinaryOp::Sub, lhs, parse_term());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        for (;;) {
            if (consume('*')) {
                lhs = make_binary(BinaryOp::Mul, lhs, parse_unary());
            } else if (consume('/')) {
                lhs = make_binary(BinaryOp::Div, lhs, parse_unary());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_unary() {
        if (consume('-')) return make_unary(UnaryOp::Neg, parse_unary());
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_atom();
        if (consume('^')) {
            // right-associative, and "2^-3" is allowed
            return make_binary(BinaryOp::Pow, base, parse_unary());
        }
        return base;
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos >= text.size()) fail("unexpected end of input");
        const char c = text[pos];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        if (c == '(') {
            ++pos;
            NodePtr inner = parse_sum();
            if (!consume(')')) fail("expected ')'");
            return inner;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr parse_number() {
        const std::size_t start = pos;
        while (pos < text.size() &&
               (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.'))
            ++pos;
        if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
            std::size_t epos = pos + 1;
            if (epos < text.size() && (text[epos] == '+' || text[epos] == '-')) ++epos;
            if (epos < text.size() && std::isdigit(static_cast<unsigned char>(text[epos]))) {
                pos = epos;
                while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
                    ++pos;
            }
        }
        double value = 0.0;
        const auto res = std::from_chars(text.data() + start, text.data() + pos, value);
        if (res.ec != std::errc() || res.ptr != text.data() + pos) {
            pos = start;
            fail("malformed number");
        }
        return make_constant(value);
    }

    NodePtr parse_identifier() {
        const std::size_t start = pos;
        while (pos < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
            ++pos;
        const std::string name = text.substr(start, pos - start);
        if (name == "x1") return make_variable(Var::X1);
        if (name == "x2") return make_variable(Var::X2);
        if (name == "pi") return make_constant(M_PI);
        skip_ws();
        if (pos < text.size() && text[pos] == '(') {
            UnaryOp op;
            if (!lookup_function(name, op)) {
                pos = start;
                fail("unknown function '" + name + "'");
            }
            ++pos; // '('
            NodePtr arg = parse_sum();
            if (!consume(')')) fail("expected ')'");
            return make_unary(op, arg);
        }
        return make_parameter(name);
    }
};

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

std::string print_node(const NodePtr& n);

double eval_node(const NodePtr& n, const Vec2& x, const ParamEnv& env) {
    switch (n->kind) {
        case Kind::Constant: return n->value;
        case Kind::Variable: return n->var == Var::X1 ? x.x : x.y;
        case Kind::Parameter: return env.get(n->param);
        case Kind::Unary: {
            const double a = eval_node(n->a, x, env);
            switch (n->uop) {
                case UnaryOp::Neg: return -a;
                case UnaryOp::Sin: return std::sin(a);
                case UnaryOp::Cos: return std::cos(a);
                case UnaryOp::Sinh: return std::sinh(a);
                case UnaryOp::Cosh: return std::cosh(a);
                case UnaryOp::Tanh: return std::tanh(a);
                case UnaryOp::Exp: return std::exp(a);
                case UnaryOp::Ln:
                    if (a <= 0.0) throw EvalError("ln of non-positive value", print_node(n));
                    return std::log(a);
                case UnaryOp::Sqrt:
                    if (a < 0.0) throw EvalError("sqrt of negative value", print_node(n));
                    return std::sqrt(a);
                case UnaryOp::Abs: return std::fabs(a);
            }
            break;
        }
        case Kind::Binary: {
            const double a = eval_node(n->a, x, env);
            const double b = eval_node(n->b, x, env);
            switch (n->bop) {
                case BinaryOp::Add: return a + b;
                case BinaryOp::Sub: return a - b;
                case BinaryOp::Mul: return a * b;
                case BinaryOp::Div:
                    if (b == 0.0) throw EvalError("division by zero", print_node(n));
                    return a / b;
                case BinaryOp::Pow: {
                    if (a < 0.0 && b != std::floor(b))
                        throw EvalError("non-integer power of negative base", print_node(n));
                    if (a == 0.0 && b < 0.0)
                        throw EvalError("negative power of zero", print_node(n));
                    return std::pow(a, b);
                }
            }
            break;
        }
    }
    throw std::logic_error("corrupt expression node");
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

std::string print_node(const NodePtr& n) {
    switch (n->kind) {
        case Kind::Constant: {
            if (n->value < 0.0 || (n->value == 0.0 && std::signbit(n->value)))
                return "(" + format_double(n->value) + ")";
            return format_double(n->value);
        }
        case Kind::Variable: return n->var == Var::X1 ? "x1" : "x2";
        case Kind::Parameter: return n->param;
        case Kind::Unary:
            if (n->uop == UnaryOp::Neg) return "(-" + print_node(n->a) + ")";
            return std::string(unary_name(n->uop)) + "(" + print_node(n->a) + ")";
        case Kind::Binary: {
            const char* op = nullptr;
            switch (n->bop) {
                case BinaryOp::Add: op = "+"; break;
                case BinaryOp::Sub: op = "-"; break;
                case BinaryOp::Mul: op = "*"; break;
                case BinaryOp::Div: op = "/"; break;
                case BinaryOp::Pow: op = "^"; break;
            }
            return "(" + print_node(n->a) + op + print_node(n->b) + ")";
        }
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Differentiation
// ---------------------------------------------------------------------------

NodePtr simplify_node(const NodePtr& n);

NodePtr diff_node(const NodePtr& n, Var var) {
    switch (n->kind) {
        case Kind::Constant:
        case Kind::Parameter:
            return make_constant(0.0);
        case Kind::Variable:
            return make_constant(n->var == var ? 1.0 : 0.0);
        case Kind::Unary: {
            const NodePtr da = diff_node(n->a, var);
            switch (n->uop) {
                case UnaryOp::Neg: return make_unary(UnaryOp::Neg, da);
                case UnaryOp::Sin:
                    return make_binary(BinaryOp::Mul, make_unary(UnaryOp::Cos, n->a), da);
                case UnaryOp::Cos:
                    return make_unary(UnaryOp::Neg,
                                      make_binary(BinaryOp::Mul, make_unary(UnaryOp::Sin, n->a), da));
                case UnaryOp::Sinh:
                    return make_binary(BinaryOp::Mul, make_unary(UnaryOp::Cosh, n->a), da);
                case UnaryOp::Cosh:
                    return make_binary(BinaryOp::Mul, make_unary(UnaryOp::Sinh, n->a), da);
                case UnaryOp::Tanh: {
                    // d tanh = (1 - tanh^2) da
                    NodePtr t = make_unary(UnaryOp::Tanh, n->a);
                    NodePtr one_minus = make_binary(BinaryOp::Sub, make_constant(1.0),
                                                    make_binary(BinaryOp::Mul, t, t));
                    return make_binary(BinaryOp::Mul, one_minus, da);
                }
                case UnaryOp::Exp:
                    return make_binary(BinaryOp::Mul, make_unary(UnaryOp::Exp, n->a), da);
                case UnaryOp::Ln: return make_binary(BinaryOp::Div, da, n->a);
                case UnaryOp::Sqrt:
                    return make_binary(
                        BinaryOp::Div, da,
                        make_binary(BinaryOp::Mul, make_constant(2.0), make_unary(UnaryOp::Sqrt, n->a)));
                case UnaryOp::Abs:
                    // d|f| = f/|f| * f'
                    return make_binary(BinaryOp::Mul,
                                       make_binary(BinaryOp::Div, n->a, make_unary(UnaryOp::Abs, n->a)),
                                       da);
            }
            break;
        }
        case Kind::Binary: {
            const NodePtr da = diff_node(n->a, var);
            const NodePtr db = diff_node(n->b, var);
            switch (n->bop) {
                case BinaryOp::Add: return make_binary(BinaryOp::Add, da, db);
                case BinaryOp::Sub: return make_binary(BinaryOp::Sub, da, db);
                case BinaryOp::Mul:
                    return make_binary(BinaryOp::Add, make_binary(BinaryOp::Mul, da, n->b),
                                       make_binary(BinaryOp::Mul, n->a, db));
                case BinaryOp::Div:
                    // (da*b - a*db)/b^2
                    return make_binary(
                        BinaryOp::Div,
                        make_binary(BinaryOp::Sub, make_binary(BinaryOp::Mul, da, n->b),
                                    make_binary(BinaryOp::Mul, n->a, db)),
                        make_binary(BinaryOp::Mul, n->b, n->b));
                case BinaryOp::Pow: {
                    if (n->b->kind == Kind::Constant) {
                        // c * a^(c-1) * da
                        const double c = n->b->value;
                        NodePtr power =
                            make_binary(BinaryOp::Pow, n->a, make_constant(c - 1.0));
                        return make_binary(BinaryOp::Mul, make_constant(c),
                                           make_binary(BinaryOp::Mul, power, da));
                    }
                    // a^b * (db*ln a + b*da/a)
                    NodePtr ln_a = make_unary(UnaryOp::Ln, n->a);
                    NodePtr factor = make_binary(
                        BinaryOp::Add, make_binary(BinaryOp::Mul, db, ln_a),
                        make_binary(BinaryOp::Div, make_binary(BinaryOp::Mul, n->b, da), n->a));
                    return make_binary(BinaryOp::Mul, make_binary(BinaryOp::Pow, n->a, n->b), factor);
                }
            }
            break;
        }
    }
    throw std::logic_error("corrupt expression node");
}

// ---------------------------------------------------------------------------
// Simplification
// ---------------------------------------------------------------------------

bool node_equal(const NodePtr& a, const NodePtr& b) {
    if (a == b) return true;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case Kind::Constant: return a->value == b->value;
        case Kind::Variable: return a->var == b->var;
        case Kind::Parameter: return a->param == b->param;
        case Kind::Unary: return a->uop == b->uop && node_equal(a->a, b->a);
        case Kind::Binary:
            return a->bop == b->bop && node_equal(a->a, b->a) && node_equal(a->b, b->b);
    }
    return false;
}

bool is_const(const NodePtr& n, double v) {
    return n->kind == Kind::Constant && n->value == v;
}

// True when the subtree evaluates without domain errors for every input:
// no ln/sqrt/div/pow.  Absorption and cancellation rules are restricted to
// total subtrees so that simplification cannot hide a domain error.
bool is_total(const NodePtr& n) {
    switch (n->kind) {
        case Kind::Constant:
        case Kind::Variable:
        case Kind::Parameter:
            return true;
        case Kind::Unary:
            if (n->uop == UnaryOp::Ln || n->uop == UnaryOp::Sqrt) return false;
            return is_total(n->a);
        case Kind::Binary:
            if (n->bop == BinaryOp::Div || n->bop == BinaryOp::Pow) return false;
            return is_total(n->a) && is_total(n->b);
    }
    return false;
}

NodePtr simplify_node(const NodePtr& n) {
    switch (n->kind) {
        case Kind::Constant:
        case Kind::Variable:
        case Kind::Parameter:
            return n;
        case Kind::Unary: {
            NodePtr a = simplify_node(n->a);
            if (a->kind == Kind::Constant) {
                ParamEnv none;
                NodePtr folded = make_unary(n->uop, a);
                try {
                    const double v = eval_node(folded, Vec2{0, 0}, none);
                    if (std::isfinite(v)) return make_constant(v);
                } catch (const EvalError&) {
                    // leave unfolded so the error surfaces at eval time
                }
                return folded;
            }
            if (n->uop == UnaryOp::Neg && a->kind == Kind::Unary && a->uop == UnaryOp::Neg)
                return a->a;
            return make_unary(n->uop, a);
        }
        case Kind::Binary: {
            NodePtr a = simplify_node(n->a);
            NodePtr b = simplify_node(n->b);
            if (a->kind == Kind::Constant && b->kind == Kind::Constant) {
                ParamEnv none;
                NodePtr folded = make_binary(n->bop, a, b);
                try {
                    const double v = eval_node(folded, Vec2{0, 0}, none);
                    if (std::isfinite(v)) return make_constant(v);
                } catch (const EvalError&) {
                }
                return folded;
            }
            switch (n->bop) {
                case BinaryOp::Add:
                    if (is_const(a, 0.0)) return b;
                    if (is_const(b, 0.0)) return a;
                    if (a->kind == Kind::Unary && a->uop == UnaryOp::Neg &&
                        node_equal(a->a, b) && is_total(b))
                        return make_constant(0.0);
                    if (b->kind == Kind::Unary && b->uop == UnaryOp::Neg &&
                        node_equal(b->a, a) && is_total(a))
                        return make_constant(0.0);
                    break;
                case BinaryOp::Sub:
                    if (is_const(b, 0.0)) return a;
                    if (is_const(a, 0.0)) return simplify_node(make_unary(UnaryOp::Neg, b));
                    if (node_equal(a, b) && is_total(a)) return make_constant(0.0);
                    break;
                case BinaryOp::Mul:
                    if (is_const(a, 1.0)) return b;
                    if (is_const(b, 1.0)) return a;
                    if ((is_const(a, 0.0) && is_total(b)) || (is_const(b, 0.0) && is_total(a)))
                        return make_constant(0.0);
                    // canonical constant-left order so cancellation can match
                    if (b->kind == Kind::Constant && a->kind != Kind::Constant)
                        std::swap(a, b);
                    break;
                case BinaryOp::Div:
                    if (is_const(b, 1.0)) return a;
                    break;
                case BinaryOp::Pow:
                    if (is_const(b, 1.0)) return a;
                    if (is_const(b, 0.0) && is_total(a)) return make_constant(1.0);
                    break;
            }
            return make_binary(n->bop, a, b);
        }
    }
    throw std::logic_error("corrupt expression node");
}

NodePtr substitute_node(const NodePtr& n, const NodePtr& for_x1, const NodePtr& for_x2) {
    switch (n->kind) {
        case Kind::Constant:
        case Kind::Parameter:
            return n;
        case Kind::Variable:
            return n->var == Var::X1 ? for_x1 : for_x2;
        case Kind::Unary:
            return make_unary(n->uop, substitute_node(n->a, for_x1, for_x2));
        case Kind::Binary:
            return make_binary(n->bop, substitute_node(n->a, for_x1, for_x2),
                               substitute_node(n->b, for_x1, for_x2));
    }
    throw std::logic_error("corrupt expression node");
}

} // namespace

// ---------------------------------------------------------------------------
// Public surface
// ---------------------------------------------------------------------------

ParamEnv::ParamEnv(std::initializer_list<std::pair<const std::string, double>> init) {
    for (const auto& [k, v] : init) set(k, v);
}

void ParamEnv::set(const std::string& name, double value) {
    if (!std::isfinite(value))
        throw std::invalid_argument("parameter '" + name + "' must be finite");
    values_[name] = value;
}

double ParamEnv::get(const std::string& name) const {
    auto it = values_.find(name);
    if (it == values_.end())
        throw std::invalid_argument("unbound parameter '" + name + "'");
    return it->second;
}

Expr constant(double v) { return Expr(make_constant(v)); }
Expr variable(Var v) { return Expr(make_variable(v)); }
Expr parameter(const std::string& name) { return Expr(make_parameter(name)); }
Expr unary(UnaryOp op, Expr child) { return Expr(make_unary(op, child.root())); }
Expr binary(BinaryOp op, Expr lhs, Expr rhs) {
    return Expr(make_binary(op, lhs.root(), rhs.root()));
}

Expr operator+(const Expr& a, const Expr& b) { return binary(BinaryOp::Add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return binary(BinaryOp::Sub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return binary(BinaryOp::Mul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return binary(BinaryOp::Div, a, b); }
Expr operator-(const Expr& a) { return unary(UnaryOp::Neg, a); }

Expr parse(const std::string& text) {
    Parser p(text);
    if (p.at_end()) throw ParseError("empty input", 0);
    NodePtr root = p.parse_sum();
    if (!p.at_end()) p.fail("trailing input");
    return Expr(root);
}

double eval(const Expr& e, const Vec2& x, const ParamEnv& env) {
    if (!e.valid()) throw std::invalid_argument("empty expression");
    return eval_node(e.root(), x, env);
}

double eval(const Expr& e, const Vec2& x) {
    static const ParamEnv empty;
    return eval(e, x, empty);
}

Expr differentiate(const Expr& e, Var var) {
    if (!e.valid()) throw std::invalid_argument("empty expression");
    return Expr(simplify_node(diff_node(e.root(), var)));
}

Expr simplify(const Expr& e) {
    if (!e.valid()) throw std::invalid_argument("empty expression");
    return Expr(simplify_node(e.root()));
}

std::string to_string(const Expr& e) {
    if (!e.valid()) return "<empty>";
    return print_node(e.root());
}

Expr substitute(const Expr& e, const Expr& for_x1, const Expr& for_x2) {
    if (!e.valid()) throw std::invalid_argument("empty expression");
    return Expr(simplify_node(substitute_node(e.root(), for_x1.root(), for_x2.root())));
}

bool structurally_equal(const Expr& a, const Expr& b) {
    if (!a.valid() || !b.valid()) return a.valid() == b.valid();
    return node_equal(a.root(), b.root());
}

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace flowlab
