#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>

#include "flowlab/geom.hpp"

namespace flowlab {

// Scalar expressions over the plane variables x1, x2 and named parameters.
// Trees are immutable once built; evaluation is pure, so Expr values can be
// shared freely across threads.

enum class Var { X1, X2 };

enum class UnaryOp { Neg, Sin, Cos, Sinh, Cosh, Tanh, Exp, Ln, Sqrt, Abs };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Domain violations (ln of a non-positive value, division by zero, ...) carry
// the printed form of the offending subtree.
class EvalError : public std::runtime_error {
public:
    EvalError(const std::string& what, std::string subtree)
        : std::runtime_error(what + " in subexpression " + subtree),
          subtree_(std::move(subtree)) {}
    const std::string& subtree() const { return subtree_; }

private:
    std::string subtree_;
};

class ParamEnv {
public:
    ParamEnv() = default;
    ParamEnv(std::initializer_list<std::pair<const std::string, double>> init);

    void set(const std::string& name, double value);
    bool has(const std::string& name) const { return values_.count(name) > 0; }
    double get(const std::string& name) const;
    const std::map<std::string, double>& values() const { return values_; }

private:
    std::map<std::string, double> values_;
};

class Expr {
public:
    struct Node;
    using NodePtr = std::shared_ptr<const Node>;

    Expr() = default;
    explicit Expr(NodePtr root) : root_(std::move(root)) {}

    bool valid() const { return root_ != nullptr; }
    const NodePtr& root() const { return root_; }

private:
    NodePtr root_;
};

struct Expr::Node {
    enum class Kind { Constant, Variable, Parameter, Unary, Binary };
    Kind kind;
    double value = 0.0;        // Constant
    Var var = Var::X1;         // Variable
    std::string param;         // Parameter
    UnaryOp uop = UnaryOp::Neg;
    BinaryOp bop = BinaryOp::Add;
    NodePtr a, b;
};

// Construction helpers.
Expr constant(double v);
Expr variable(Var v);
Expr parameter(const std::string& name);
Expr unary(UnaryOp op, Expr child);
Expr binary(BinaryOp op, Expr lhs, Expr rhs);

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

// Grammar: + - on top, then * /, then unary minus, then right-associative ^,
// then atoms (numbers, x1, x2, identifiers, calls, parenthesised groups).
// Identifiers other than function names are parameters.
Expr parse(const std::string& text);

double eval(const Expr& e, const Vec2& x, const ParamEnv& env);
double eval(const Expr& e, const Vec2& x);

Expr differentiate(const Expr& e, Var var);

// Constant folding plus identity elimination; preserves evaluation behaviour
// (absorption rules like 0*x -> 0 are applied only to total subtrees, so no
// domain error can be silently removed).
Expr simplify(const Expr& e);

// Canonical fully-parenthesised form; parse(to_string(e)) evaluates
// identically to e.
std::string to_string(const Expr& e);

// Structural replacement of the two plane variables; used by the field
// rescale/shift/rotate transforms.
Expr substitute(const Expr& e, const Expr& for_x1, const Expr& for_x2);

bool structurally_equal(const Expr& a, const Expr& b);

// Shortest round-trip decimal form of a double (to_chars).
std::string format_double(double v);

} // namespace flowlab
