#pragma once

#include <memory>
#include <string>

namespace distcap {

// Variables available to scenario expressions.
struct ExprEnv {
    double x = 0.0, y = 0.0, t = 0.0;
    double L = 0.0, L1 = 0.0, L2 = 0.0;
};

// Tiny arithmetic grammar for scenario coefficients:
//   operators + - * / ^, functions sin cos exp, constant pi,
//   variables x y t L L1 L2.
class Expr {
public:
    static Expr parse(const std::string& text);

    double eval(const ExprEnv& env) const;
    const std::string& text() const { return text_; }
    // whether the expression references t (mollification can be skipped if not)
    bool depends_on_time() const { return uses_t_; }

    Expr() = default;

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
    bool uses_t_ = false;
};

}  // namespace distcap
