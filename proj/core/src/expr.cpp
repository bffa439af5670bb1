#include "distcap/expr.hpp"

#include <cctype>
#include <cmath>
#include <vector>

#include "distcap/errors.hpp"

namespace distcap {

namespace {

enum class Op { add, sub, mul, divide, pow, neg, sin, cos, exp, num, var };
enum class Var { x, y, t, L, L1, L2, pi };

}  // namespace

struct Expr::Node {
    Op op;
    double value = 0.0;
    Var var = Var::x;
    std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

struct Parser {
    const std::string& s;
    size_t pos = 0;
    bool uses_t = false;

    explicit Parser(const std::string& text) : s(text) {}

    [[noreturn]] void fail(const std::string& what) {
        throw ParseError("expression error at column " + std::to_string(pos + 1) + ": " +
                         what + " in \"" + s + "\"");
    }

    void skip_ws() {
        while (pos < s.size() && std::isspace((unsigned char)s[pos])) ++pos;
    }

    bool consume(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }

    NodePtr make(Op op, NodePtr l = nullptr, NodePtr r = nullptr) {
        auto n = std::make_shared<Expr::Node>();
        n->op = op;
        n->lhs = std::move(l);
        n->rhs = std::move(r);
        return n;
    }

    NodePtr parse_expr() {
        NodePtr n = parse_term();
        while (true) {
            if (consume('+'))
                n = make(Op::add, n, parse_term());
            else if (consume('-'))
                n = make(Op::sub, n, parse_term());
            else
                return n;
        }
    }

    NodePtr parse_term() {
        NodePtr n = parse_unary();
        while (true) {
            char c = peek();
            if (c == '*') {
                ++pos;
                n = make(Op::mul, n, parse_unary());
            } else if (c == '/') {
                ++pos;
                n = make(Op::divide, n, parse_unary());
            } else {
                return n;
            }
        }
    }

    NodePtr parse_unary() {
        if (consume('-')) return make(Op::neg, parse_unary());
        (void)consume('+');
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_atom();
        if (consume('^')) return make(Op::pow, base, parse_unary());  // right assoc
        return base;
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos >= s.size()) fail("unexpected end of expression");
        char c = s[pos];
        if (std::isdigit((unsigned char)c) || c == '.') {
            size_t len = 0;
            double v = std::stod(s.substr(pos), &len);
            pos += len;
            auto n = make(Op::num);
            const_cast<Expr::Node&>(*n).value = v;
            return n;
        }
        if (c == '(') {
            ++pos;
            NodePtr n = parse_expr();
            if (!consume(')')) fail("missing ')'");
            return n;
        }
        if (std::isalpha((unsigned char)c)) {
            size_t start = pos;
            while (pos < s.size() &&
                   (std::isalnum((unsigned char)s[pos]) || s[pos] == '_'))
                ++pos;
            std::string name = s.substr(start, pos - start);
            if (name == "sin" || name == "cos" || name == "exp") {
                if (!consume('(')) fail("function '" + name + "' needs '('");
                NodePtr arg = parse_expr();
                if (!consume(')')) fail("missing ')' after " + name);
                Op op = name == "sin" ? Op::sin : name == "cos" ? Op::cos : Op::exp;
                return make(op, arg);
            }
            auto n = make(Op::var);
            auto& node = const_cast<Expr::Node&>(*n);
            if (name == "x") node.var = Var::x;
            else if (name == "y") node.var = Var::y;
            else if (name == "t") { node.var = Var::t; uses_t = true; }
            else if (name == "L") node.var = Var::L;
            else if (name == "L1") node.var = Var::L1;
            else if (name == "L2") node.var = Var::L2;
            else if (name == "pi") node.var = Var::pi;
            else fail("unknown identifier '" + name + "'");
            return n;
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

double eval_node(const Expr::Node& n, const ExprEnv& env) {
    switch (n.op) {
        case Op::num: return n.value;
        case Op::var:
            switch (n.var) {
                case Var::x: return env.x;
                case Var::y: return env.y;
                case Var::t: return env.t;
                case Var::L: return env.L;
                case Var::L1: return env.L1;
                case Var::L2: return env.L2;
                case Var::pi: return M_PI;
            }
            return 0.0;
        case Op::add: return eval_node(*n.lhs, env) + eval_node(*n.rhs, env);
        case Op::sub: return eval_node(*n.lhs, env) - eval_node(*n.rhs, env);
        case Op::mul: return eval_node(*n.lhs, env) * eval_node(*n.rhs, env);
        case Op::divide: return eval_node(*n.lhs, env) / eval_node(*n.rhs, env);
        case Op::pow: return std::pow(eval_node(*n.lhs, env), eval_node(*n.rhs, env));
        case Op::neg: return -eval_node(*n.lhs, env);
        case Op::sin: return std::sin(eval_node(*n.lhs, env));
        case Op::cos: return std::cos(eval_node(*n.lhs, env));
        case Op::exp: return std::exp(eval_node(*n.lhs, env));
    }
    return 0.0;
}

}  // namespace

Expr Expr::parse(const std::string& text) {
    Parser p(text);
    Expr e;
    e.root_ = p.parse_expr();
    p.skip_ws();
    if (p.pos != text.size())
        throw ParseError("expression error at column " + std::to_string(p.pos + 1) +
                         ": trailing input in \"" + text + "\"");
    e.text_ = text;
    e.uses_t_ = p.uses_t;
    return e;
}

double Expr::eval(const ExprEnv& env) const {
    if (!root_) throw ParseError("Expr::eval: empty expression");
    return eval_node(*root_, env);
}

}  // namespace distcap
