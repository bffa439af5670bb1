// Acceptance suite: one test case and one printed PASS/FAIL line per
// criterion, all tolerances pinned in code.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "distcap/diagnostics.hpp"
#include "distcap/fraccalc.hpp"
#include "distcap/gronwall.hpp"
#include "distcap/kernels.hpp"
#include "distcap/runner.hpp"
#include "distcap/scenario.hpp"

using namespace distcap;

namespace {

const auto t_suite_start = std::chrono::steady_clock::now();

double elapsed_s(std::chrono::steady_clock::time_point from) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - from).count();
}

void report(int idx, const char* name, bool pass, const std::string& metric) {
    std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", idx, name,
                metric.c_str());
    std::fflush(stdout);
    CHECK_MESSAGE(pass, "criterion " << idx << " '" << name << "': " << metric);
}

std::string fmt(const char* f, double a, double b = 0.0) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

struct WeightCase {
    const char* name;
    WeightFunction mu;
};

std::vector<WeightCase>& test_weights() {
    static std::vector<WeightCase> w{
        {"mu==1", WeightFunction::constant(1.0)},
        {"mu=2a", WeightFunction::power(2.0, 1.0)},
        {"indicator(0.4,0.6)", WeightFunction::indicator(0.4, 0.6)},
        {"bump(0.5,w=0.01)", WeightFunction::bump(0.5, 0.01, 1.0)},
    };
    return w;
}

struct TablePair {
    KernelTable k, g;
};

// criterion-1 tables (M = 512, T = 1, q = 2), built once and reused
std::vector<TablePair>& acceptance_tables() {
    static std::vector<TablePair> tabs = [] {
        std::vector<TablePair> out;
        TimeGrid grid(1.0, 512, 2.0);
        for (auto& w : test_weights())
            out.push_back({make_k_table(w.mu, grid), make_g_table(w.mu, grid)});
        return out;
    }();
    return tabs;
}

PreparedRun solved_run(const char* fexpr, int M = 512) {
    std::string cfg = std::string("name = acc\n[weight]\nkind = indicator\nlo = 0.6\n") +
                      "hi = 0.8\n[domain]\ntype = interval\nlength = pi\n[grid]\n" +
                      "T = 1.0\nM = " + std::to_string(M) +
                      "\nmodes = 4\n[data]\nu0 = \"sin(x) + 0.3*sin(2*x)\"\nf = \"" +
                      fexpr + "\"\n";
    return solve_scenario(parse_scenario_text(cfg));
}

}  // namespace

TEST_CASE("criterion 1: resolvent identity k*g = 1") {
    bool pass = true;
    double worst = 0.0;
    for (size_t i = 0; i < test_weights().size(); ++i) {
        auto t0 = std::chrono::steady_clock::now();
        double dev = verify_resolvent_identity(acceptance_tables()[i].k,
                                               acceptance_tables()[i].g, 1.0);
        double secs = elapsed_s(t0);
        worst = std::max(worst, dev);
        if (dev >= 1e-3 || secs >= 30.0) pass = false;
    }
    report(1, "resolvent identity", pass, fmt("max dev %.2e, tol 1e-3", worst));
}

TEST_CASE("criterion 2: kernel bound g <= Prop.2 envelope at every node") {
    int violations = 0;
    for (size_t i = 0; i < test_weights().size(); ++i) {
        auto e = derive_exponents(test_weights()[i].mu);
        KernelBound bound = prop2_bound(e);
        const KernelTable& g = acceptance_tables()[i].g;
        for (int j = 1; j <= g.grid().size(); ++j)
            if (g.value(j) > bound.eval(g.grid().node(j))) ++violations;
    }
    report(2, "Prop.2 kernel bound", violations == 0,
           fmt("%g violations across four weights", (double)violations));
}

TEST_CASE("criterion 3: single-order limit of the narrow bump") {
    auto t0 = std::chrono::steady_clock::now();
    auto mu = WeightFunction::bump(0.5, 0.01, 1.0);
    ResolventEvaluator g(mu);
    double worst_g = 0.0;
    for (int i = 0; i <= 60; ++i) {
        double t = 0.1 + 0.9 * i / 60.0;
        double ref = std::pow(t, -0.5) / std::tgamma(0.5);
        worst_g = std::max(worst_g, std::abs(g(t) - ref) / g(t));
    }

    auto e = derive_exponents(mu);
    TimeGrid grid(1.0, 512, default_grading(e.gamma));
    auto gt = make_g_table(mu, grid);
    auto A = [](double, Mat& A) {
        A = Mat(1);
        A(0, 0) = 1.0;  // lambda_1 on (0, pi)
    };
    auto F = [](double, std::vector<double>& F) { F.assign(1, 0.0); };
    auto vol = solve_volterra(gt, A, F, {1.0}, grid);
    double worst_c = 0.0;
    for (int j = 0; j <= grid.size(); ++j) {
        double t = grid.node(j);
        if (t < 0.05) continue;
        worst_c = std::max(worst_c, std::abs(vol.coeffs.at(j, 0) -
                                             mittag_leffler(0.5, 1.0, -std::sqrt(t))));
    }
    double secs = elapsed_s(t0);
    bool pass = worst_g < 0.05 && worst_c < 1e-2 && secs < 60.0;
    report(3, "single-order limit", pass,
           fmt("g rel dev %.2e (<5e-2), ML sup err %.2e (<1e-2)", worst_g, worst_c));
}

TEST_CASE("criterion 4: Laplace-inversion oracle") {
    auto F1 = [](std::complex<double> p) { return std::pow(p, -0.5); };
    auto im1 = [](double r) { return std::pow(r, -0.5); };
    auto F2 = [](std::complex<double> p) { return std::log(1.0 + 1.0 / p); };
    auto im2 = [](double r) { return r < 1.0 ? M_PI : 0.0; };
    double worst = 0.0;
    for (double x : {0.5, 1.0, 2.0}) {
        worst = std::max(worst, std::abs(laplace_invert(F1, x, im1) -
                                         std::pow(x, -0.5) / std::tgamma(0.5)));
        worst = std::max(worst,
                         std::abs(laplace_invert(F2, x, im2) - (-std::expm1(-x) / x)));
    }
    report(4, "Laplace-inversion oracle", worst < 1e-6, fmt("max err %.2e, tol 1e-6", worst));
}

TEST_CASE("criterion 5: fractional-calculus identities") {
    // semigroup at 1e-8 on smooth data (high-order reconstruction)
    TimeGrid g(1.0, 512, 3.0);
    auto f = SampledTrajectory::from_function(g, [](double t) { return std::expm1(t); });
    auto composite = frac_integral(frac_integral(f, 0.5, 3), 0.5, 3);
    auto direct = frac_integral(f, 1.0, 3);
    double semi = 0.0;
    for (int j = 0; j <= g.size(); ++j)
        semi = std::max(semi, std::abs(composite.at(j) - direct.at(j)));

    // I^a 1 exact up to rounding
    auto one = SampledTrajectory::from_function(g, [](double) { return 1.0; });
    double power_err = 0.0;
    for (double a : {0.25, 0.5, 0.75, 1.0}) {
        auto v = frac_integral(one, a);
        for (int j = 1; j <= g.size(); ++j) {
            double exact = std::pow(g.node(j), a) / std::tgamma(a + 1.0);
            power_err = std::max(power_err, std::abs(v.at(j) - exact) / exact);
        }
    }

    // D^mu of a constant vanishes identically
    auto c = SampledTrajectory::from_function(g, [](double) { return -2.75; });
    auto dc = distributed_caputo(c, WeightFunction::constant(1.0));
    double dconst = dc.max_abs();

    bool pass = semi < 1e-8 && power_err < 1e-12 && dconst == 0.0;
    report(5, "fractional-calculus identities", pass,
           fmt("semigroup %.2e (<1e-8), I^a1 rel %.2e, D const = 0", semi, power_err));
}

TEST_CASE("criterion 6: Gronwall dominance") {
    auto mu = WeightFunction::bump(0.5, 0.01, 1.0);
    auto exps = derive_exponents(mu);
    TimeGrid grid(1.0, 256, 4.0);
    auto gtab = make_g_table(mu, grid);

    std::mt19937 rng(20260809);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int violations = 0;
    for (int trial = 0; trial < 200; ++trial) {
        SampledTrajectory a(grid), f(grid);
        double a0 = 0.1 + 2.0 * U(rng);
        double w1 = 6.0 * U(rng), w2 = 6.0 * U(rng);
        double fmax = 0.1 + 1.5 * U(rng);
        int shape = trial % 3;
        for (int j = 0; j <= grid.size(); ++j) {
            double t = grid.node(j);
            double osc = shape == 0   ? std::sin(w1 * t) * std::sin(w1 * t)
                         : shape == 1 ? 0.5 * (1.0 + std::cos(w2 * t))
                                      : t;
            a.at(j) = a0 * (0.2 + osc);
            f.at(j) = fmax * (shape == 2 ? t * t : t / (0.3 + t));
        }
        auto ga = singular_convolve(gtab, a);
        SampledTrajectory w(grid);
        for (int j = 0; j <= grid.size(); ++j) w.at(j) = a.at(j) + f.at(j) * ga.at(j);
        auto bound = gronwall_majorant(gtab, a, f, 1e-9, exps);
        auto rep = certify_dominance(bound, w, a, f, gtab);
        if (!rep.dominated) ++violations;
    }

    // closed-form cross-check: constant data matches the Mittag-Leffler series
    double ml_dev = 0.0;
    {
        const double A = 0.8, F = 1.2;
        SampledTrajectory a(grid), f(grid);
        for (int j = 0; j <= grid.size(); ++j) {
            a.at(j) = A;
            f.at(j) = F;
        }
        auto bound = gronwall_majorant(gtab, a, f, 1e-9, exps);
        for (int j = 16; j <= grid.size(); j += 16) {
            double t = grid.node(j);
            double exact = A * mittag_leffler(0.5, 1.0, F * std::sqrt(t));
            ml_dev = std::max(ml_dev, std::abs(bound.bound[(size_t)j] - exact) / exact);
        }
    }
    bool pass = violations == 0 && ml_dev < 1e-2;
    report(6, "Gronwall dominance", pass,
           fmt("%g/200 violations, ML match %.2e (<1e-2)", (double)violations, ml_dev));
}

TEST_CASE("criterion 7: energy inequality suite") {
    PreparedRun heat = solved_run("0");
    PreparedRun forced = solved_run("sin(x)");

    double r_heat =
        energy_identity_residual(heat.solution.volterra.coeffs, heat.solution.mu, 24);
    double r_forced =
        energy_identity_residual(forced.solution.volterra.coeffs, forced.solution.mu, 24);

    auto e_heat = energy_estimate_check(heat.solution, heat.u0_l2);
    auto e_forced = energy_estimate_check(forced.solution, forced.u0_l2);

    bool coercive = true;
    for (const PreparedRun* pr : {&heat, &forced}) {
        for (int j = pr->grid.size() / 8; j <= pr->grid.size();
             j += pr->grid.size() / 8) {
            if (pr->grid.node(j) > 1.0) break;
            auto rep =
                coercivity_check(pr->solution.volterra.coeffs, pr->solution.mu, j, 24);
            coercive = coercive && rep.pass;
        }
    }

    bool pass = r_heat < 5e-2 && r_forced < 5e-2 && e_heat.pass && e_forced.pass &&
                coercive;
    report(7, "energy inequality suite", pass,
           fmt("oszacA %.2e/%.2e (<5e-2), Lemma4+coercivity pass", r_heat, r_forced));
}

TEST_CASE("criterion 8: regime classification and continuity") {
    auto m_none = order_index_m(WeightFunction::indicator(0.6, 0.8));
    auto m_one = order_index_m(WeightFunction::indicator(0.3, 0.45));
    auto m_two = order_index_m(WeightFunction::indicator(1.0 / 6.0, 0.25));
    bool classified = !m_none.has_value() && m_one.value_or(0) == 1 && m_two.value_or(0) == 2;

    const char* weights[3] = {"lo = 0.6\nhi = 0.8", "lo = 0.3\nhi = 0.45",
                              "lo = 0.16666666666666666\nhi = 0.25"};
    bool continuity = true;
    double worst_recon = 0.0;
    for (int i = 0; i < 3; ++i) {
        std::string cfg = std::string("name = reg\n[weight]\nkind = indicator\n") +
                          weights[i] +
                          "\n[domain]\ntype = interval\nlength = pi\n[grid]\nT = 1.0\n"
                          "M = 512\nmodes = 4\n[data]\nu0 = \"sin(x)\"\n";
        PreparedRun pr = solve_scenario(parse_scenario_text(cfg));
        auto rep = continuity_report(pr.solution, pr.solution.exps);
        bool regime_ok = (i == 0) ? rep.regime == "H^-1" : rep.m == i;
        continuity = continuity && rep.pass && regime_ok;
        worst_recon = std::max(worst_recon, rep.reconstruction_deviation);
    }
    bool pass = classified && continuity && worst_recon < 1e-3;
    report(8, "regime classification + continuity", pass,
           fmt("m = {absent,1,2}, recon dev %.2e (<1e-3)", worst_recon));
}

TEST_CASE("criterion 9: mesh convergence of the manufactured solution") {
    std::string cfg = R"CFG(
name = conv
[weight]
kind = indicator
lo = 0.4
hi = 0.6
[domain]
type = interval
length = pi
[grid]
T = 1.0
M = 64
modes = 1
[data]
u0 = "sin(x)"
)CFG";
    Scenario sc = parse_scenario_text(cfg);
    RunOptions opts;
    opts.out_dir = std::filesystem::temp_directory_path() / "distcap_acceptance_conv";
    auto rows = converge_study(sc, opts, {64, 128, 256, 512});
    bool pass = rows.size() == 4;
    double worst_factor = 1e300;
    for (size_t i = 1; i < rows.size(); ++i) worst_factor = std::min(worst_factor, rows[i].factor);
    pass = pass && worst_factor >= 1.5;
    report(9, "mesh convergence", pass, fmt("min factor %.2f (>=1.5)", worst_factor));
}

TEST_CASE("criterion 10: Mittag-Leffler reference values") {
    double e1 = std::abs(mittag_leffler(1.0, 1.0, 1.0) - M_E);
    double e2 = std::abs(mittag_leffler(0.5, 1.0, -1.0) - M_E * std::erfc(1.0));
    bool pass = e1 < 1e-12 && e2 < 1e-9;
    report(10, "Mittag-Leffler values", pass,
           fmt("E_{1,1}(1) err %.1e (<1e-12), E_{1/2,1}(-1) err %.1e (<1e-9)", e1, e2));
}

TEST_CASE("suite runtime stays inside the desk-scale budget") {
    double total = elapsed_s(t_suite_start);
    report(9, "total suite runtime", total < 600.0, fmt("%.1f s (< 600 s)", total));
}
