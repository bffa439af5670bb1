#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "distcap/errors.hpp"
#include "distcap/fraccalc.hpp"
#include "distcap/kernels.hpp"
#include "distcap/quadrature.hpp"

using namespace distcap;

TEST_CASE("kernel_k: bump midpoint value, direct quadrature oracle, monotone tail") {
    auto bump = WeightFunction::bump(0.5, 0.01, 1.0);
    CHECK(kernel_k(bump, 1.0) ==
          doctest::Approx(1.0 / std::tgamma(0.5)).epsilon(1e-3));

    auto one = WeightFunction::constant(1.0);
    // independent oracle: adaptive quadrature written here, not the library path
    double oracle = integrate(
        [](double a) {
            double g = std::tgamma(1.0 - a);
            return std::isfinite(g) ? 1.0 / g : 0.0;
        },
        0.0, 1.0, 1e-12);
    CHECK(kernel_k(one, 1.0) == doctest::Approx(oracle).epsilon(1e-9));

    for (double t1 : {1.0, 1.7, 3.0})
        CHECK(kernel_k(one, t1 + 0.5) <= kernel_k(one, t1));
    CHECK_THROWS_AS(kernel_k(one, 0.0), NonPositiveTime);
}

TEST_CASE("laplace_k: closed forms and branch cut") {
    auto one = WeightFunction::constant(1.0);
    CHECK(laplace_k(one, {1.0, 0.0}).real() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(laplace_k(one, {1.0, 0.0}).imag()) < 1e-12);
    // (p-1)/(p ln p) at p = 4
    CHECK(laplace_k(one, {4.0, 0.0}).real() ==
          doctest::Approx(3.0 / (4.0 * std::log(4.0))).epsilon(1e-10));

    auto bump = WeightFunction::bump(0.3, 0.01, 1.0);
    CHECK(laplace_k(bump, {2.0, 0.0}).real() ==
          doctest::Approx(std::pow(2.0, 0.3 - 1.0)).epsilon(1e-3));

    CHECK_THROWS_AS(laplace_k(one, {-2.0, 0.0}), OnBranchCut);
    CHECK_THROWS_AS(laplace_k(one, {0.0, 0.0}), OnBranchCut);
}

TEST_CASE("laplace_k: lower-bound certificate on a log-polar grid") {
    for (auto mu : {WeightFunction::constant(1.0), WeightFunction::power(2.0, 1.0),
                    WeightFunction::indicator(0.4, 0.6),
                    WeightFunction::bump(0.5, 0.01, 1.0)}) {
        auto e = derive_exponents(mu);
        CHECK(symbol_lower_margin(mu, e) >= 1.0);
    }
}

TEST_CASE("resolvent_g: single-order limit and Prop.2 bound") {
    auto bump = WeightFunction::bump(0.5, 0.01, 1.0);
    ResolventEvaluator g(bump);
    CHECK(g(0.25) == doctest::Approx(1.0 / (std::sqrt(0.25) * std::tgamma(0.5)))
                         .epsilon(1e-2));

    auto one = WeightFunction::constant(1.0);
    auto e = derive_exponents(one);
    auto bound = prop2_bound(e);
    ResolventEvaluator g1(one);
    for (double t : {1e-5, 1e-3, 0.1, 0.5, 1.0}) CHECK(g1(t) <= bound.eval(t));
    CHECK_THROWS_AS(g1(-1.0), NonPositiveTime);
}

TEST_CASE("resolvent identity k*g = 1 on tables") {
    TimeGrid grid(1.0, 512, 2.0);
    auto one = WeightFunction::constant(1.0);
    auto kt = make_k_table(one, grid);
    auto gt = make_g_table(one, grid);
    CHECK(verify_resolvent_identity(kt, gt, 1.0) < 1e-3);
    CHECK(convolve_kernel_tables(kt, gt, 0.5) == doctest::Approx(1.0).epsilon(1e-3));

    auto other = make_g_table(WeightFunction::power(2.0, 1.0), grid);
    CHECK_THROWS_AS(verify_resolvent_identity(kt, other, 1.0), ProvenanceMismatch);
}

TEST_CASE("homogeneity: s*mu scales k by s, g by 1/s, identity invariant") {
    const double s = 2.5;
    auto mu = WeightFunction::indicator(0.4, 0.6);
    auto mus = WeightFunction::indicator(0.4, 0.6, s);
    CHECK(kernel_k(mus, 0.37) == doctest::Approx(s * kernel_k(mu, 0.37)).epsilon(1e-10));
    ResolventEvaluator g(mu), gs(mus);
    CHECK(gs(0.37) == doctest::Approx(g(0.37) / s).epsilon(1e-7));

    TimeGrid grid(1.0, 128, 2.0);
    auto kt = make_k_table(mus, grid);
    auto gt = make_g_table(mus, grid);
    CHECK(convolve_kernel_tables(kt, gt, 0.8) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("g table: smooth factor decays toward t = 0 (Prop. 3)") {
    TimeGrid grid(1.0, 256, 3.0);
    for (auto mu : {WeightFunction::constant(1.0), WeightFunction::indicator(0.4, 0.6)}) {
        auto gt = make_g_table(mu, grid);
        CHECK(gt.smooth(1) < gt.smooth(10));
    }
}

TEST_CASE("gamma-zero regime: L2 bound on g") {
    auto one = WeightFunction::constant(1.0);
    auto e = derive_exponents(one);
    REQUIRE(e.gamma_zero.has_value());
    TimeGrid grid(1.0, 256, 2.0);
    auto gt = make_g_table(one, grid);
    double l2_g = 0.0, l2_bound = 0.0;
    for (int j = 1; j <= grid.size(); ++j) {
        double t = grid.node(j);
        CHECK(gt.value(j) <= g_l2_regime_bound(e, t));
        double h = t - grid.node(j - 1);
        l2_g += gt.value(j) * gt.value(j) * h;
        double b = g_l2_regime_bound(e, t);
        l2_bound += b * b * h;
    }
    CHECK(l2_g < l2_bound);
    CHECK(std::isfinite(l2_bound));
}

TEST_CASE("laplace_invert: appendix oracles at 1e-6") {
    auto F1 = [](std::complex<double> p) { return std::pow(p, -0.5); };
    auto im1 = [](double r) { return std::pow(r, -0.5); };
    for (double x : {0.5, 1.0, 2.0}) {
        double ref = std::pow(x, -0.5) / std::tgamma(0.5);
        CHECK(std::abs(laplace_invert(F1, x, im1) - ref) < 1e-6);
    }
    auto F2 = [](std::complex<double> p) { return std::log(1.0 + 1.0 / p); };
    auto im2 = [](double r) { return r < 1.0 ? M_PI : 0.0; };
    for (double x : {0.5, 1.0, 2.0}) {
        double ref = -std::expm1(-x) / x;
        CHECK(std::abs(laplace_invert(F2, x, im2) - ref) < 1e-6);
    }
}

TEST_CASE("laplace_invert: matches resolvent_g through the symbol by construction") {
    auto mu = WeightFunction::indicator(0.4, 0.6);
    LaplaceSymbol sym(mu);
    auto F = [&mu](std::complex<double> p) { return 1.0 / (p * laplace_k(mu, p)); };
    auto im = [&sym](double r) { return sym.boundary_im(std::log(r)); };
    ResolventEvaluator g(mu);
    for (double t : {0.2, 1.0}) {
        double a = laplace_invert(F, t, im);
        CHECK(a == doctest::Approx(g(t)).epsilon(1e-8));
    }
}

TEST_CASE("laplace_invert: decay-assumption warnings are soft") {
    // F = const violates |F| -> 0; expect warnings, not an exception
    auto F = [](std::complex<double>) { return std::complex<double>(1.0, 0.0); };
    auto im = [](double r) { return r < 1.0 ? 1.0 : 0.0; };
    std::vector<std::string> warnings;
    (void)laplace_invert(F, 1.0, im, {}, &warnings);
    CHECK(!warnings.empty());
}

TEST_CASE("kernel_k_m: tensor quadrature against in-test 2-D oracle") {
    auto mu = WeightFunction::indicator(0.3, 0.45);
    const double t = 0.7;
    const GaussRule& r = gauss_legendre(80);
    double lo = 0.3, hi = 0.45, oracle = 0.0;
    for (int i = 0; i < 80; ++i)
        for (int j = 0; j < 80; ++j) {
            double a = 0.5 * (lo + hi) + 0.5 * (hi - lo) * r.nodes[i];
            double b = 0.5 * (lo + hi) + 0.5 * (hi - lo) * r.nodes[j];
            oracle += 0.25 * (hi - lo) * (hi - lo) * r.weights[i] * r.weights[j] *
                      std::pow(t, -(a + b)) / std::tgamma(1.0 - (a + b));
        }
    CHECK(kernel_k_m(mu, 1, t) == doctest::Approx(oracle).epsilon(1e-9));
    // t = 1 kills the time factor
    double oracle1 = 0.0;
    for (int i = 0; i < 80; ++i)
        for (int j = 0; j < 80; ++j) {
            double a = 0.5 * (lo + hi) + 0.5 * (hi - lo) * r.nodes[i];
            double b = 0.5 * (lo + hi) + 0.5 * (hi - lo) * r.nodes[j];
            oracle1 += 0.25 * (hi - lo) * (hi - lo) * r.weights[i] * r.weights[j] /
                       std::tgamma(1.0 - (a + b));
        }
    CHECK(kernel_k_m(mu, 1, 1.0) == doctest::Approx(oracle1).epsilon(1e-9));

    CHECK_THROWS_AS(kernel_k_m(mu, 2, t), OrderMismatch);
    CHECK_THROWS_AS(kernel_k_m(mu, 1, 0.0), NonPositiveTime);

    double se = 0.0;
    double mc = kernel_k_m_mc(mu, 1, t, 200000, &se);
    CHECK(std::abs(mc - oracle) < 4.0 * se);
}

TEST_CASE("kernel_k_m / resolvent_g_m: narrow bump collapses to a single order") {
    auto mu = WeightFunction::bump(0.2, 0.01, 1.0);
    REQUIRE(order_index_m(mu).value() == 2);
    const double t = 0.5;
    CHECK(kernel_k_m(mu, 2, t) ==
          doctest::Approx(std::pow(t, -0.6) / std::tgamma(0.4)).epsilon(1e-3));
    CHECK(resolvent_g_m(mu, 2, t) ==
          doctest::Approx(std::pow(t, -0.4) / std::tgamma(0.6)).epsilon(1e-3));
    CHECK_THROWS_AS(resolvent_g_m(mu, 1, t), OrderMismatch);
}

TEST_CASE("iterated resolvent identity k_m * g_m = 1 and the (xxb) bound") {
    {
        auto mu = WeightFunction::indicator(0.3, 0.45);
        TimeGrid grid(1.0, 256, 3.0);
        auto kt = make_km_table(mu, 1, grid);
        auto gt = make_gm_table(mu, 1, grid);
        CHECK(verify_resolvent_identity(kt, gt, 1.0) < 1e-3);
    }
    {
        auto mu = WeightFunction::indicator(1.0 / 6.0, 0.25);
        TimeGrid grid(1.0, 256, 3.0);
        auto kt = make_km_table(mu, 2, grid);
        auto gt = make_gm_table(mu, 2, grid);
        CHECK(verify_resolvent_identity(kt, gt, 1.0) < 1e-3);
        auto e = derive_exponents(mu);
        auto b = gm_bound(mu, e, 1.0);
        for (int j = 1; j <= grid.size(); ++j)
            CHECK(gt.value(j) <= b.eval(grid.node(j)));
    }
}

TEST_CASE("factorized G_{m,s/c} equals the tensor phase integrals") {
    auto mu = WeightFunction::indicator(0.3, 0.45);
    TensorSpectrum spec(mu, 1);
    WeightFunction restricted = mu.restricted(0.0, 0.5);
    LaplaceSymbol sym(restricted, 2);
    for (double r : {0.01, 1.0, 100.0}) {
        auto tensor = spec.phase_integral(r);
        double u = std::log(r);
        std::complex<double> wpow =
            std::polar(std::exp(2.0 * sym.log_abs(u)), 2.0 * sym.phase(u));
        CHECK(tensor.real() == doctest::Approx(wpow.real()).epsilon(1e-8));
        CHECK(tensor.imag() == doctest::Approx(wpow.imag()).epsilon(1e-8));
    }
}

TEST_CASE("singular_convolve: g * 1 = I^{a0} 1 in the single-order limit") {
    auto bump = WeightFunction::bump(0.5, 0.01, 1.0);
    TimeGrid grid(1.0, 256, 4.0);
    auto gt = make_g_table(bump, grid);
    SampledTrajectory one(grid);
    for (int j = 0; j <= grid.size(); ++j) one.at(j) = 1.0;
    auto v = singular_convolve(gt, one);
    for (int j = 32; j <= grid.size(); j += 32) {
        double t = grid.node(j);
        CHECK(v.at(j) ==
              doctest::Approx(std::pow(t, 0.5) / std::tgamma(1.5)).epsilon(1e-2));
    }
    SampledTrajectory zero(grid);
    auto vz = singular_convolve(gt, zero);
    for (int j = 0; j <= grid.size(); ++j) CHECK(vz.at(j) == 0.0);
}

TEST_CASE("singular_convolve: g * k * f recovers I^1 f") {
    auto mu = WeightFunction::indicator(0.4, 0.6);
    TimeGrid grid(1.0, 512, 2.0);
    auto kt = make_k_table(mu, grid);
    auto gt = make_g_table(mu, grid);
    auto f = SampledTrajectory::from_function(
        grid, [](double t) { return std::cos(2.0 * t); });
    auto kf = singular_convolve(kt, f);
    auto gkf = singular_convolve(gt, kf);
    double worst = 0.0;
    for (int j = 0; j <= grid.size(); ++j) {
        double t = grid.node(j);
        double exact = 0.5 * std::sin(2.0 * t);
        worst = std::max(worst, std::abs(gkf.at(j) - exact));
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("singular_convolve: horizon mismatch is rejected") {
    auto mu = WeightFunction::constant(1.0);
    TimeGrid grid(1.0, 64, 2.0);
    TimeGrid grid2(2.0, 64, 2.0);
    auto gt = make_g_table(mu, grid);
    SampledTrajectory f(grid2);
    CHECK_THROWS_AS(singular_convolve(gt, f), GridMismatch);
}

TEST_CASE("distributed_caputo: both evaluation paths agree on smooth data") {
    auto mu = WeightFunction::indicator(0.4, 0.6);
    TimeGrid grid(1.0, 256, 2.0);
    auto kt = make_k_table(mu, grid);
    auto f = SampledTrajectory::from_function(
        grid, [](double t) { return 1.0 + t * t * (1.0 - 0.3 * t); });
    auto via_alpha = distributed_caputo(f, mu, 48);
    auto via_kernel = distributed_caputo_via_kernel(f, kt);
    double worst = 0.0;
    for (int j = 0; j <= grid.size(); ++j) {
        if (grid.node(j) < 0.05) continue;
        worst = std::max(worst, std::abs(via_alpha.at(j) - via_kernel.at(j)));
    }
    CHECK(worst < 2e-3);
}

TEST_CASE("default grading clamps 2/gamma to [2,8]") {
    CHECK(default_grading(1.0 / 3.0) == doctest::Approx(6.0));
    CHECK(default_grading(0.45) == doctest::Approx(4.0 / 0.9));
    CHECK(default_grading(0.05) == 8.0);
    CHECK(default_grading(0.49) == doctest::Approx(2.0 / 0.49).epsilon(1e-12));
}

TEST_CASE("corollary bound g <= c_{mu,T} t^{gamma-1} on (0,T]") {
    TimeGrid grid(2.0, 256, 3.0);
    for (auto mu : {WeightFunction::constant(1.0), WeightFunction::indicator(0.4, 0.6)}) {
        auto e = derive_exponents(mu);
        auto gt = make_g_table(mu, grid);
        double c = c_mu_T(e, 2.0);
        for (int j = 1; j <= grid.size(); ++j)
            CHECK(gt.value(j) <= c * std::pow(grid.node(j), e.gamma - 1.0));
    }
}

TEST_CASE("tensor quadrature refuses m > 6 and offers the MC fallback") {
    // support inside (1/16, 1/14): order index m = 7
    auto mu = WeightFunction::indicator(1.0 / 16.0 + 1e-4, 1.0 / 14.0 - 1e-4);
    REQUIRE(order_index_m(mu).value() == 7);
    CHECK_THROWS_AS(kernel_k_m(mu, 7, 0.5), DimensionTooLarge);
    double se = 0.0;
    double v = kernel_k_m_mc(mu, 7, 0.5, 20000, &se);
    CHECK(std::isfinite(v));
    CHECK(se > 0.0);
    CHECK(v > 0.0);
}

TEST_CASE("table builds are deterministic across thread counts") {
    auto mu = WeightFunction::indicator(0.4, 0.6);
    TimeGrid grid(1.0, 128, 2.0);
    auto g1 = make_g_table(mu, grid, {}, 1);
    auto g4 = make_g_table(mu, grid, {}, 4);
    for (int j = 1; j <= 128; ++j) CHECK(g1.value(j) == g4.value(j));
}

TEST_CASE("property: resolvent identity across randomized weights") {
    std::mt19937 rng(314159);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    TimeGrid grid(1.0, 128, 2.0);
    for (int trial = 0; trial < 6; ++trial) {
        WeightFunction mu = WeightFunction::constant(1.0);
        switch (trial % 3) {
            case 0: {  // random two-step piecewise density
                double a = 0.05 + 0.4 * U(rng);
                double b = a + 0.1 + 0.3 * U(rng);
                double mid = a + (b - a) * (0.3 + 0.4 * U(rng));
                mu = WeightFunction::piecewise({a, mid, std::min(b, 0.95)},
                                               {0.5 + 2.0 * U(rng), 0.2 + 1.5 * U(rng)});
                break;
            }
            case 1: {  // random tabulated hat
                double a = 0.1 + 0.3 * U(rng);
                double w = 0.15 + 0.3 * U(rng);
                mu = WeightFunction::tabulated({a, a + 0.5 * w, std::min(a + w, 0.97)},
                                               {0.1, 1.0 + 2.0 * U(rng), 0.1});
                break;
            }
            default: {  // random power density
                mu = WeightFunction::power(0.5 + 2.0 * U(rng), 0.3 + 1.5 * U(rng));
                break;
            }
        }
        auto kt = make_k_table(mu, grid);
        auto gt = make_g_table(mu, grid);
        CHECK(verify_resolvent_identity(kt, gt, 1.0) < 1e-3);
    }
}
