#pragma once

// Small arithmetic expression language over x, y and named parameters, with
// exact symbolic differentiation. Grammar:
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | '+' unary | power
//   power   := primary ('^' unary)?          (right associative)
//   primary := number | ident | ident '(' expr ')' | '(' expr ')'
//
// Identifiers are x, y, pi, a bound parameter name, or one of the functions
// sqrt, exp, log, sin, cos. Parameters are folded to constants at parse time.

#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>

#include "velliptic/error.hpp"
#include "velliptic/field.hpp"

namespace velliptic {

class Expression {
public:
    enum class Kind { number, var_x, var_y, add, sub, mul, div, pow, neg, sqrt, exp, log, sin, cos };

    using Params = std::map<std::string, double, std::less<>>;

    Expression() : node_(make_number(0.0)) {}

    static Expression parse(std::string_view text, const Params& params = {});
    static Expression number(double c) { return Expression(make_number(c)); }
    static Expression x() { return Expression(make_leaf(Kind::var_x)); }
    static Expression y() { return Expression(make_leaf(Kind::var_y)); }

    [[nodiscard]] double evaluate(Point p) const { return eval(*node_, p); }
    [[nodiscard]] double operator()(Point p) const { return eval(*node_, p); }

    /// Symbolic partial derivative; `wrt` is 'x' or 'y'.
    [[nodiscard]] Expression derivative(char wrt) const {
        if (wrt != 'x' && wrt != 'y') {
            throw Error(ErrorCode::invalid_argument, "derivative variable must be x or y");
        }
        return Expression(diff(node_, wrt == 'x' ? Kind::var_x : Kind::var_y));
    }

    [[nodiscard]] bool is_constant() const { return !depends_on_xy(*node_); }
    [[nodiscard]] std::string to_string() const {
        std::ostringstream os;
        os.precision(17);
        print(os, *node_);
        return os.str();
    }

private:
    struct Node;
    using NodePtr = std::shared_ptr<const Node>;

    struct Node {
        Kind kind{Kind::number};
        double value{};
        NodePtr lhs;
        NodePtr rhs;
    };

    explicit Expression(NodePtr n) : node_(std::move(n)) {}

    static NodePtr make_number(double c) { return std::make_shared<const Node>(Node{Kind::number, c, {}, {}}); }
    static NodePtr make_leaf(Kind k) { return std::make_shared<const Node>(Node{k, 0.0, {}, {}}); }

    static bool is_num(const NodePtr& n, double c) { return n->kind == Kind::number && n->value == c; }
    static bool is_num(const NodePtr& n) { return n->kind == Kind::number; }

    static NodePtr unary(Kind k, NodePtr a) {
        if (is_num(a)) {
            const Node tmp{k, 0.0, a, {}};
            return make_number(eval(tmp, {}));
        }
        if (k == Kind::neg && a->kind == Kind::neg) return a->lhs;
        return std::make_shared<const Node>(Node{k, 0.0, std::move(a), {}});
    }

    // Constructors with constant folding and the usual 0/1 identities.
    static NodePtr binary(Kind k, NodePtr a, NodePtr b) {
        if (is_num(a) && is_num(b)) {
            const Node tmp{k, 0.0, a, b};
            return make_number(eval(tmp, {}));
        }
        switch (k) {
            case Kind::add:
                if (is_num(a, 0.0)) return b;
                if (is_num(b, 0.0)) return a;
                break;
            case Kind::sub:
                if (is_num(b, 0.0)) return a;
                if (is_num(a, 0.0)) return unary(Kind::neg, b);
                break;
            case Kind::mul:
                if (is_num(a, 0.0) || is_num(b, 0.0)) return make_number(0.0);
                if (is_num(a, 1.0)) return b;
                if (is_num(b, 1.0)) return a;
                break;
            case Kind::div:
                if (is_num(a, 0.0)) return make_number(0.0);
                if (is_num(b, 1.0)) return a;
                break;
            case Kind::pow:
                if (is_num(b, 1.0)) return a;
                if (is_num(b, 0.0)) return make_number(1.0);
                break;
            default:
                break;
        }
        return std::make_shared<const Node>(Node{k, 0.0, std::move(a), std::move(b)});
    }

    static double eval(const Node& n, Point p) {
        switch (n.kind) {
            case Kind::number: return n.value;
            case Kind::var_x: return p.x;
            case Kind::var_y: return p.y;
            case Kind::add: return eval(*n.lhs, p) + eval(*n.rhs, p);
            case Kind::sub: return eval(*n.lhs, p) - eval(*n.rhs, p);
            case Kind::mul: return eval(*n.lhs, p) * eval(*n.rhs, p);
            case Kind::div: return eval(*n.lhs, p) / eval(*n.rhs, p);
            case Kind::pow: {
                const double e = eval(*n.rhs, p);
                if (e == 2.0) {
                    const double b = eval(*n.lhs, p);
                    return b * b;
                }
                return std::pow(eval(*n.lhs, p), e);
            }
            case Kind::neg: return -eval(*n.lhs, p);
            case Kind::sqrt: return std::sqrt(eval(*n.lhs, p));
            case Kind::exp: return std::exp(eval(*n.lhs, p));
            case Kind::log: return std::log(eval(*n.lhs, p));
            case Kind::sin: return std::sin(eval(*n.lhs, p));
            case Kind::cos: return std::cos(eval(*n.lhs, p));
        }
        return 0.0;
    }

    static bool depends_on_xy(const Node& n) {
        if (n.kind == Kind::var_x || n.kind == Kind::var_y) return true;
        return (n.lhs && depends_on_xy(*n.lhs)) || (n.rhs && depends_on_xy(*n.rhs));
    }

    static NodePtr diff(const NodePtr& n, Kind var) {
        const auto d = [var](const NodePtr& m) { return diff(m, var); };
        switch (n->kind) {
            case Kind::number: return make_number(0.0);
            case Kind::var_x:
            case Kind::var_y: return make_number(n->kind == var ? 1.0 : 0.0);
            case Kind::add: return binary(Kind::add, d(n->lhs), d(n->rhs));
            case Kind::sub: return binary(Kind::sub, d(n->lhs), d(n->rhs));
            case Kind::neg: return unary(Kind::neg, d(n->lhs));
            case Kind::mul:
                return binary(Kind::add, binary(Kind::mul, d(n->lhs), n->rhs),
                              binary(Kind::mul, n->lhs, d(n->rhs)));
            case Kind::div: {
                // (a/b)' = a'/b - a b' / b^2
                const NodePtr first = binary(Kind::div, d(n->lhs), n->rhs);
                const NodePtr second = binary(
                    Kind::div, binary(Kind::mul, n->lhs, d(n->rhs)),
                    binary(Kind::mul, n->rhs, n->rhs));
                return binary(Kind::sub, first, second);
            }
            case Kind::pow: {
                if (depends_on_xy(*n->rhs)) {
                    throw Error(ErrorCode::parse_error,
                                "non-differentiable construct: exponent depends on x or y in '" +
                                    Expression(n).to_string() + "'");
                }
                const NodePtr k = n->rhs;
                const NodePtr km1 = binary(Kind::sub, k, make_number(1.0));
                return binary(Kind::mul, binary(Kind::mul, k, binary(Kind::pow, n->lhs, km1)), d(n->lhs));
            }
            case Kind::sqrt:
                return binary(Kind::div, d(n->lhs), binary(Kind::mul, make_number(2.0), n));
            case Kind::exp: return binary(Kind::mul, n, d(n->lhs));
            case Kind::log: return binary(Kind::div, d(n->lhs), n->lhs);
            case Kind::sin: return binary(Kind::mul, unary(Kind::cos, n->lhs), d(n->lhs));
            case Kind::cos:
                return unary(Kind::neg, binary(Kind::mul, unary(Kind::sin, n->lhs), d(n->lhs)));
        }
        return make_number(0.0);
    }

    static void print(std::ostream& os, const Node& n) {
        const auto fn = [&](const char* name) {
            os << name << '(';
            print(os, *n.lhs);
            os << ')';
        };
        const auto bin = [&](const char* op) {
            os << '(';
            print(os, *n.lhs);
            os << op;
            print(os, *n.rhs);
            os << ')';
        };
        switch (n.kind) {
            case Kind::number:
                if (n.value < 0) os << '(' << n.value << ')';
                else os << n.value;
                break;
            case Kind::var_x: os << 'x'; break;
            case Kind::var_y: os << 'y'; break;
            case Kind::add: bin("+"); break;
            case Kind::sub: bin("-"); break;
            case Kind::mul: bin("*"); break;
            case Kind::div: bin("/"); break;
            case Kind::pow: bin("^"); break;
            case Kind::neg: os << "(-"; print(os, *n.lhs); os << ')'; break;
            case Kind::sqrt: fn("sqrt"); break;
            case Kind::exp: fn("exp"); break;
            case Kind::log: fn("log"); break;
            case Kind::sin: fn("sin"); break;
            case Kind::cos: fn("cos"); break;
        }
    }

    class Parser;

    NodePtr node_;
};

class Expression::Parser {
public:
    Parser(std::string_view text, const Params& params) : text_(text), params_(params) {}

    NodePtr run() {
        NodePtr n = expr();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorCode::parse_error,
                    what + " at position " + std::to_string(pos_) + " in \"" + std::string(text_) + "\"");
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr() {
        NodePtr n = term();
        for (;;) {
            if (accept('+')) n = binary(Kind::add, n, term());
            else if (accept('-')) n = binary(Kind::sub, n, term());
            else return n;
        }
    }

    NodePtr term() {
        NodePtr n = unary_expr();
        for (;;) {
            if (accept('*')) n = binary(Kind::mul, n, unary_expr());
            else if (accept('/')) n = binary(Kind::div, n, unary_expr());
            else return n;
        }
    }

    NodePtr unary_expr() {
        if (accept('-')) return unary(Kind::neg, unary_expr());
        if (accept('+')) return unary_expr();
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (accept('^')) return binary(Kind::pow, base, unary_expr());
        return base;
    }

    NodePtr primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr n = expr();
            if (!accept(')')) fail("expected ')'");
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        fail("unexpected character '" + std::string(1, c) + "'");
    }

    NodePtr number() {
        const std::size_t start = pos_;
        const std::string rest(text_.substr(pos_));
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(rest, &used);
        } catch (const std::exception&) {
            fail("malformed number");
        }
        pos_ = start + used;
        return make_number(v);
    }

    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            ++pos_;
        }
        const std::string_view name = text_.substr(start, pos_ - start);
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '(') {
            Kind k{};
            if (name == "sqrt") k = Kind::sqrt;
            else if (name == "exp") k = Kind::exp;
            else if (name == "log") k = Kind::log;
            else if (name == "sin") k = Kind::sin;
            else if (name == "cos") k = Kind::cos;
            else {
                pos_ = start;
                fail("unknown function '" + std::string(name) + "'");
            }
            ++pos_;
            NodePtr arg = expr();
            if (!accept(')')) fail("expected ')' after function argument");
            return unary(k, arg);
        }
        if (name == "x") return make_leaf(Kind::var_x);
        if (name == "y") return make_leaf(Kind::var_y);
        if (auto it = params_.find(name); it != params_.end()) return make_number(it->second);
        if (name == "pi") return make_number(std::numbers::pi);
        pos_ = start;
        fail("unbound identifier '" + std::string(name) + "'");
    }

    std::string_view text_;
    const Params& params_;
    std::size_t pos_ = 0;
};

inline Expression Expression::parse(std::string_view text, const Params& params) {
    return Expression(Parser(text, params).run());
}

/// Field whose gradient and Hessian come from symbolic derivatives of `e`.
inline ScalarField field_from_expression(const Expression& e) {
    const Expression ex = e.derivative('x');
    const Expression ey = e.derivative('y');
    const Expression exx = ex.derivative('x');
    const Expression exy = ex.derivative('y');
    const Expression eyy = ey.derivative('y');
    return ScalarField::from_jet(
        [e, ex, ey, exx, exy, eyy](Point p, int order) {
            Jet2 j{};
            j.v = e(p);
            if (order >= 1) {
                j.x = ex(p);
                j.y = ey(p);
            }
            if (order >= 2) {
                j.xx = exx(p);
                j.xy = exy(p);
                j.yy = eyy(p);
            }
            return j;
        },
        2);
}

}  // namespace velliptic
