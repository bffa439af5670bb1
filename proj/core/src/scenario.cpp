#include "distcap/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "distcap/errors.hpp"
#include "distcap/io.hpp"

namespace distcap {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string strip_quotes(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
        return s.substr(1, s.size() - 2);
    return s;
}

struct Config {
    // section -> key -> (value, line)
    std::map<std::string, std::map<std::string, std::pair<std::string, int>>> kv;
    std::string origin;

    const std::string* find(const std::string& section, const std::string& key) const {
        auto s = kv.find(section);
        if (s == kv.end()) return nullptr;
        auto k = s->second.find(key);
        if (k == s->second.end()) return nullptr;
        return &k->second.first;
    }

    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const {
        const std::string* v = find(section, key);
        return v ? *v : fallback;
    }
};

Config parse_config(const std::string& text, const std::string& origin) {
    Config cfg;
    cfg.origin = origin;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError(origin + ":" + std::to_string(lineno) +
                                 ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ParseError(origin + ":" + std::to_string(lineno) +
                                 ": empty section name");
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(origin + ":" + std::to_string(lineno) +
                             ": expected 'key = value' at column " +
                             std::to_string(line.size() + 1));
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ParseError(origin + ":" + std::to_string(lineno) + ": empty key");
        cfg.kv[section][key] = {value, lineno};
    }
    return cfg;
}

double parse_number(const Config& cfg, const std::string& section, const std::string& key,
                    double fallback) {
    const std::string* v = cfg.find(section, key);
    if (!v) return fallback;
    try {
        return Expr::parse(strip_quotes(*v)).eval(ExprEnv{});
    } catch (const ParseError& e) {
        throw ValidationError("field [" + section + "]." + key + ": " + e.what());
    }
}

std::vector<double> parse_list(const Config& cfg, const std::string& section,
                               const std::string& key) {
    const std::string* v = cfg.find(section, key);
    std::vector<double> out;
    if (!v) return out;
    std::stringstream ss(*v);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        cell = trim(cell);
        if (cell.empty()) continue;
        out.push_back(Expr::parse(cell).eval(ExprEnv{}));
    }
    return out;
}

Expr parse_expr_field(const Config& cfg, const std::string& section,
                      const std::string& key, const std::string& fallback) {
    std::string text = strip_quotes(cfg.get(section, key, fallback));
    try {
        return Expr::parse(text);
    } catch (const ParseError& e) {
        throw ValidationError("field [" + section + "]." + key + ": " + e.what());
    }
}

}  // namespace

WeightFunction build_weight(const WeightSpec& spec) {
    try {
        if (spec.kind == "constant")
            return WeightFunction::constant(spec.params.at("value"));
        if (spec.kind == "power")
            return WeightFunction::power(spec.params.at("coef"), spec.params.at("exponent"));
        if (spec.kind == "indicator")
            return WeightFunction::indicator(spec.params.at("lo"), spec.params.at("hi"),
                                             spec.params.count("height")
                                                 ? spec.params.at("height")
                                                 : 1.0);
        if (spec.kind == "bump")
            return WeightFunction::bump(spec.params.at("center"), spec.params.at("width"),
                                        spec.params.at("mass"));
        if (spec.kind == "piecewise")
            return WeightFunction::piecewise(spec.breakpoints, spec.values);
        if (spec.kind == "tabulated")
            return WeightFunction::tabulated(spec.alphas, spec.densities);
    } catch (const MassBelowTolerance& e) {
        throw ValidationError(std::string("weight mass: ") + e.what());
    } catch (const std::out_of_range&) {
        throw ValidationError("weight: missing parameter for kind '" + spec.kind + "'");
    }
    throw ValidationError("weight: unknown kind '" + spec.kind + "'");
}

std::string weight_config_fragment(const WeightSpec& spec) {
    std::ostringstream out;
    out << "[weight]\n";
    out << "kind = " << spec.kind << "\n";
    for (const auto& [k, v] : spec.params)
        out << k << " = " << format_double(v) << "\n";
    auto emit_list = [&](const char* key, const std::vector<double>& xs) {
        if (xs.empty()) return;
        out << key << " = ";
        for (size_t i = 0; i < xs.size(); ++i)
            out << format_double(xs[i]) << (i + 1 < xs.size() ? ", " : "\n");
    };
    emit_list("breakpoints", spec.breakpoints);
    emit_list("values", spec.values);
    emit_list("alphas", spec.alphas);
    emit_list("densities", spec.densities);
    return out.str();
}

EllipticCoefficients Scenario::coefficients() const {
    EllipticCoefficients co;
    ExprEnv base = base_env();
    auto wrap = [base](const Expr& e) {
        return [e, base](double x, double y, double t) {
            ExprEnv env = base;
            env.x = x;
            env.y = y;
            env.t = t;
            return e.eval(env);
        };
    };
    co.a11 = wrap(a11);
    co.a12 = wrap(a12);
    co.a22 = wrap(a22);
    co.b1 = wrap(b1);
    co.b2 = wrap(b2);
    co.c = wrap(c);
    co.f = wrap(f);
    co.lambda_min = lambda_min;
    co.lambda_max = lambda_max;
    co.time_constant = !(a11.depends_on_time() || a12.depends_on_time() ||
                         a22.depends_on_time() || b1.depends_on_time() ||
                         b2.depends_on_time() || c.depends_on_time() ||
                         f.depends_on_time());
    return co;
}

std::function<double(double, double)> Scenario::initial_data() const {
    ExprEnv base = base_env();
    Expr e = u0;
    return [e, base](double x, double y) {
        ExprEnv env = base;
        env.x = x;
        env.y = y;
        env.t = 0.0;
        return e.eval(env);
    };
}

ExprEnv Scenario::base_env() const {
    ExprEnv env;
    if (std::holds_alternative<Interval>(domain)) {
        env.L = std::get<Interval>(domain).length;
        env.L1 = env.L;
        env.L2 = 0.0;
    } else {
        env.L1 = std::get<Rectangle>(domain).lx;
        env.L2 = std::get<Rectangle>(domain).ly;
        env.L = env.L1;
    }
    return env;
}

Scenario parse_scenario_text(const std::string& text, const std::string& origin) {
    Config cfg = parse_config(text, origin);
    Scenario sc;
    sc.source_digest = digest_bytes(text);
    sc.name = cfg.get("", "name", "scenario");

    // weight
    sc.weight_spec.kind = cfg.get("weight", "kind", "constant");
    for (const char* key : {"value", "coef", "exponent", "lo", "hi", "height", "center",
                            "width", "mass"}) {
        if (cfg.find("weight", key))
            sc.weight_spec.params[key] = parse_number(cfg, "weight", key, 0.0);
    }
    if (sc.weight_spec.kind == "constant" && sc.weight_spec.params.empty())
        sc.weight_spec.params["value"] = 1.0;
    sc.weight_spec.breakpoints = parse_list(cfg, "weight", "breakpoints");
    sc.weight_spec.values = parse_list(cfg, "weight", "values");
    sc.weight_spec.alphas = parse_list(cfg, "weight", "alphas");
    sc.weight_spec.densities = parse_list(cfg, "weight", "densities");
    sc.weight = build_weight(sc.weight_spec);

    // domain
    std::string dtype = cfg.get("domain", "type", "interval");
    if (dtype == "interval") {
        sc.domain = Interval{parse_number(cfg, "domain", "length", M_PI)};
    } else if (dtype == "rectangle") {
        sc.domain = Rectangle{parse_number(cfg, "domain", "lx", M_PI),
                              parse_number(cfg, "domain", "ly", M_PI)};
    } else {
        throw ValidationError("field [domain].type: unknown domain '" + dtype + "'");
    }

    // grid
    sc.T = parse_number(cfg, "grid", "T", 1.0);
    sc.M = (int)std::lround(parse_number(cfg, "grid", "M", 256.0));
    sc.q = parse_number(cfg, "grid", "q", 0.0);
    sc.modes = (int)std::lround(parse_number(cfg, "grid", "modes", 4.0));
    sc.mollify_index = (int)std::lround(parse_number(cfg, "grid", "mollify", 0.0));
    if (!(sc.T > 0.0)) throw ValidationError("field [grid].T: must be positive");
    if (sc.M < 64) throw ValidationError("field [grid].M: must be >= 64");
    if (sc.modes < 1) throw ValidationError("field [grid].modes: must be >= 1");
    if (sc.q != 0.0 && sc.q < 1.0)
        throw ValidationError("field [grid].q: must be >= 1 (or 0 for auto)");
    if (sc.mollify_index == 0) {
        // default ties the mollification index to the mode count, raised when
        // 1/n would not fit below the horizon
        sc.mollify_index = std::max(sc.modes, (int)std::floor(1.0 / sc.T) + 2);
    }
    if (1.0 / sc.mollify_index >= sc.T)
        throw ValidationError("field [grid].mollify: 1/n must be below T");

    // operator + data
    sc.a11 = parse_expr_field(cfg, "operator", "a", "1");
    if (cfg.find("operator", "a11")) sc.a11 = parse_expr_field(cfg, "operator", "a11", "1");
    sc.a12 = parse_expr_field(cfg, "operator", "a12", "0");
    sc.a22 = parse_expr_field(cfg, "operator", "a22", "1");
    sc.b1 = parse_expr_field(cfg, "operator", "b", "0");
    if (cfg.find("operator", "b1")) sc.b1 = parse_expr_field(cfg, "operator", "b1", "0");
    sc.b2 = parse_expr_field(cfg, "operator", "b2", "0");
    sc.c = parse_expr_field(cfg, "operator", "c", "0");
    sc.lambda_min = parse_number(cfg, "operator", "lambda", 1.0);
    sc.lambda_max = parse_number(cfg, "operator", "Lambda", sc.lambda_min);
    sc.u0 = parse_expr_field(cfg, "data", "u0", "0");
    sc.f = parse_expr_field(cfg, "data", "f", "0");

    // solver
    sc.picard_tol = parse_number(cfg, "solver", "picard_tol", 1e-12);
    sc.alpha_nodes = (int)std::lround(parse_number(cfg, "solver", "alpha_nodes", 32.0));

    // checks
    const std::string* checks = cfg.find("checks", "run");
    if (checks) {
        std::stringstream ss(*checks);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cell = trim(cell);
            if (!cell.empty()) sc.checks.push_back(cell);
        }
    }
    const std::vector<std::string> known{"resolvent_identity", "energy_identity",
                                         "energy_estimate",    "coercivity",
                                         "continuity",         "regularity"};
    for (const auto& c : sc.checks)
        if (std::find(known.begin(), known.end(), c) == known.end())
            throw ValidationError("field [checks].run: unknown check '" + c + "'");
    sc.regime = cfg.get("checks", "regime", "auto");
    if (sc.regime != "auto" && sc.regime != "intmu" && sc.regime != "m")
        throw ValidationError("field [checks].regime: must be auto, intmu or m");
    if (sc.regime != "auto") {
        bool has_m = order_index_m(sc.weight).has_value();
        if (sc.regime == "m" && !has_m)
            throw ValidationError(
                "field [checks].regime: m-regime requested but the weight has mass above "
                "1/2 (intmu holds)");
        if (sc.regime == "intmu" && has_m)
            throw ValidationError(
                "field [checks].regime: intmu requested but the weight mass above 1/2 "
                "vanishes");
    }

    sc.seed = (unsigned)std::lround(parse_number(cfg, "output", "seed", 0.0));
    return sc;
}

Scenario parse_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("parse_scenario: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario_text(ss.str(), path.filename().string());
}

}  // namespace distcap
