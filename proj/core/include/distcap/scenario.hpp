#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "distcap/expr.hpp"
#include "distcap/galerkin.hpp"
#include "distcap/weight.hpp"

namespace distcap {

struct WeightSpec {
    std::string kind;  // constant | power | indicator | bump | piecewise | tabulated
    std::map<std::string, double> params;
    std::vector<double> breakpoints, values, alphas, densities;
};

WeightFunction build_weight(const WeightSpec& spec);
// config-fragment serialization (round-trips through parse_scenario)
std::string weight_config_fragment(const WeightSpec& spec);

struct Scenario {
    std::string name = "scenario";
    WeightSpec weight_spec;
    WeightFunction weight;
    Domain domain = Interval{M_PI};

    double T = 1.0;
    int M = 256;
    double q = 0.0;  // 0 = auto grading 2/gamma clamped to [2,8]
    int modes = 4;
    int mollify_index = 0;  // 0 = same as modes

    Expr a11, a12, a22, b1, b2, c, f, u0;
    double lambda_min = 1.0, lambda_max = 1.0;

    double picard_tol = 1e-12;
    int alpha_nodes = 32;

    std::vector<std::string> checks;
    std::string regime = "auto";
    unsigned seed = 0;
    std::string source_digest;

    // elliptic coefficient evaluators bound to this scenario's domain
    EllipticCoefficients coefficients() const;
    std::function<double(double, double)> initial_data() const;
    ExprEnv base_env() const;
};

Scenario parse_scenario(const std::filesystem::path& path);
// parse from text (used by tests); `origin` names the source in errors
Scenario parse_scenario_text(const std::string& text, const std::string& origin = "<text>");

}  // namespace distcap
