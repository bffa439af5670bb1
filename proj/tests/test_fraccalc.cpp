#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "distcap/errors.hpp"
#include "distcap/fraccalc.hpp"
#include "distcap/quadrature.hpp"
#include "distcap/weight.hpp"

using namespace distcap;

namespace {

SampledTrajectory sample(const TimeGrid& g, double (*f)(double)) {
    return SampledTrajectory::from_function(g, [f](double t) { return f(t); });
}

double sup_err(const SampledTrajectory& a, const std::function<double(double)>& ref,
               double t_min = 0.0) {
    double e = 0.0;
    for (int j = 0; j <= a.grid().size(); ++j) {
        double t = a.grid().node(j);
        if (t < t_min) continue;
        e = std::max(e, std::abs(a.at(j) - ref(t)));
    }
    return e;
}

}  // namespace

TEST_CASE("frac_integral: I^a 1 = t^a/Gamma(a+1) exactly up to rounding") {
    TimeGrid g(2.0, 200, 3.0);
    auto one = sample(g, [](double) { return 1.0; });
    for (double a : {0.25, 0.5, 0.9, 1.0}) {
        auto v = frac_integral(one, a);
        double worst = 0.0;
        for (int j = 0; j <= g.size(); ++j) {
            double exact = std::pow(g.node(j), a) / std::tgamma(a + 1.0);
            worst = std::max(worst, std::abs(v.at(j) - exact) / (exact + 1e-300));
        }
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("frac_integral: I^1 t = t^2/2 exactly; alpha validation") {
    TimeGrid g(1.0, 64, 2.0);
    auto f = sample(g, [](double t) { return t; });
    auto v = frac_integral(f, 1.0);
    for (int j = 0; j <= g.size(); ++j)
        CHECK(v.at(j) == doctest::Approx(0.5 * g.node(j) * g.node(j)).epsilon(1e-13));
    CHECK_THROWS_AS(frac_integral(f, 0.0), AlphaOutOfRange);
    CHECK_THROWS_AS(frac_integral(f, 1.5), AlphaOutOfRange);
}

TEST_CASE("frac_integral semigroup: high-order route meets 1e-8 on smooth data") {
    TimeGrid g(1.0, 512, 3.0);
    auto f = SampledTrajectory::from_function(g, [](double t) { return std::expm1(t); });
    auto v = frac_integral(frac_integral(f, 0.5, 3), 0.5, 3);
    auto direct = frac_integral(f, 1.0, 3);
    double worst = 0.0;
    for (int j = 0; j <= g.size(); ++j)
        worst = std::max(worst, std::abs(v.at(j) - direct.at(j)));
    CHECK(worst < 1e-8);
}

TEST_CASE("frac_integral semigroup: piecewise-linear route converges at O(1/M)+") {
    double prev = -1.0;
    for (int M : {64, 128, 256}) {
        TimeGrid g(1.0, M, 3.0);
        auto f = SampledTrajectory::from_function(g, [](double t) { return std::expm1(t); });
        auto v = frac_integral(frac_integral(f, 0.5), 0.5);
        auto direct = frac_integral(f, 1.0);
        double worst = 0.0;
        for (int j = 0; j <= g.size(); ++j)
            worst = std::max(worst, std::abs(v.at(j) - direct.at(j)));
        if (prev >= 0.0) CHECK(worst < prev / 2.0);
        prev = worst;
    }
}

TEST_CASE("frac_integral: positivity and linearity") {
    TimeGrid g(1.0, 100, 2.0);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    SampledTrajectory f(g), h(g);
    for (int j = 0; j <= g.size(); ++j) {
        f.at(j) = U(rng);
        h.at(j) = 2.0 * U(rng) - 1.0;
    }
    auto vf = frac_integral(f, 0.4);
    for (int j = 0; j <= g.size(); ++j) CHECK(vf.at(j) >= 0.0);

    SampledTrajectory combo(g);
    for (int j = 0; j <= g.size(); ++j) combo.at(j) = 3.0 * f.at(j) - 0.5 * h.at(j);
    auto vc = frac_integral(combo, 0.4);
    auto vh = frac_integral(h, 0.4);
    for (int j = 0; j <= g.size(); ++j)
        CHECK(vc.at(j) ==
              doctest::Approx(3.0 * vf.at(j) - 0.5 * vh.at(j)).epsilon(1e-12));
}

TEST_CASE("rl_derivative: alpha=0 identity, constant data power law") {
    TimeGrid g(1.5, 128, 2.0);
    auto f = sample(g, [](double t) { return std::cos(t); });
    auto d0 = rl_derivative(f, 0.0);
    for (int j = 0; j <= g.size(); ++j) CHECK(d0.at(j) == f.at(j));

    // f == 1: telescoping makes t^{-a}/Gamma(1-a) exact up to rounding
    auto one = sample(g, [](double) { return 1.0; });
    for (double a : {0.3, 0.7}) {
        auto d = rl_derivative(one, a);
        for (int j = 1; j <= g.size(); ++j) {
            double exact = std::pow(g.node(j), -a) / std::tgamma(1.0 - a);
            CHECK(d.at(j) == doctest::Approx(exact).epsilon(1e-11));
        }
    }
}

TEST_CASE("rl_derivative: classical power formula within grid error") {
    TimeGrid g(1.0, 512, 3.0);
    const double beta = 1.5, alpha = 0.3;
    auto f = SampledTrajectory::from_function(
        g, [beta](double t) { return std::pow(t, beta); });
    auto d = rl_derivative(f, alpha);
    double coef = std::tgamma(beta + 1.0) / std::tgamma(beta + 1.0 - alpha);
    double worst = 0.0;
    for (int j = 0; j <= g.size(); ++j) {
        double t = g.node(j);
        if (t < 0.05) continue;
        worst = std::max(worst,
                         std::abs(d.at(j) - coef * std::pow(t, beta - alpha)));
    }
    CHECK(worst < 2e-5);
}

TEST_CASE("caputo: kills constants exactly; affine data is exact") {
    TimeGrid g(2.0, 64, 2.0);
    auto c = sample(g, [](double) { return 3.25; });
    for (double a : {0.0, 0.4, 1.0}) {
        auto d = caputo(c, a);
        for (int j = 0; j <= g.size(); ++j) CHECK(d.at(j) == 0.0);
    }
    auto f = sample(g, [](double t) { return t; });
    for (double a : {0.2, 0.5, 0.8}) {
        auto d = caputo(f, a);
        for (int j = 1; j <= g.size(); ++j) {
            double exact = std::pow(g.node(j), 1.0 - a) / std::tgamma(2.0 - a);
            CHECK(d.at(j) == doctest::Approx(exact).epsilon(1e-11));
        }
    }
}

TEST_CASE("caputo: alpha = 1 is the discrete first derivative") {
    TimeGrid g(1.0, 256, 2.0);
    auto f = sample(g, [](double t) { return t * t; });
    auto d = caputo(f, 1.0);
    // interior 3-point formula is exact for quadratics
    for (int j = 1; j < g.size(); ++j)
        CHECK(d.at(j) == doctest::Approx(2.0 * g.node(j)).epsilon(1e-9));
}

TEST_CASE("distributed_caputo: vanishes on constants, alpha-quadrature oracle") {
    TimeGrid g(1.0, 128, 2.0);
    auto mu = WeightFunction::constant(1.0);
    auto c = sample(g, [](double) { return -1.7; });
    auto dc = distributed_caputo(c, mu);
    for (int j = 0; j <= g.size(); ++j) CHECK(dc.at(j) == 0.0);

    // f(t) = t: D^mu f (t) = int_0^1 t^{1-a}/Gamma(2-a) da, independent quadrature
    auto f = sample(g, [](double t) { return t; });
    auto df = distributed_caputo(f, mu);
    for (int j : {32, 64, 96, 128}) {
        double t = g.node(j);
        double oracle = integrate(
            [t](double a) { return std::pow(t, 1.0 - a) / std::tgamma(2.0 - a); }, 0.0,
            1.0, 1e-12);
        CHECK(df.at(j) == doctest::Approx(oracle).epsilon(1e-8));
    }
}

TEST_CASE("distributed_caputo: narrow bump collapses to the single order") {
    TimeGrid g(1.0, 256, 2.0);
    auto mu = WeightFunction::bump(0.5, 0.01, 1.0);
    auto f = sample(g, [](double t) { return t * (1.0 + t); });
    auto dmu = distributed_caputo(f, mu, 48);
    auto d50 = caputo(f, 0.5);
    double worst = 0.0;
    for (int j = 0; j <= g.size(); ++j) {
        if (g.node(j) < 0.05) continue;
        worst = std::max(worst, std::abs(dmu.at(j) - d50.at(j)) /
                                    (std::abs(d50.at(j)) + 1e-300));
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("composition: d^b D^a f = D^{a+b} f for smooth f with f(0)=0") {
    TimeGrid g(1.0, 256, 3.0);
    auto f = sample(g, [](double t) { return t * t * (1.0 + 0.5 * t); });
    const double a = 0.3, b = 0.4;
    auto inner = caputo(f, a);
    auto lhs = rl_derivative(inner, b);
    auto rhs = caputo(f, a + b);
    double worst = 0.0;
    for (int j = 0; j <= g.size(); ++j) {
        if (g.node(j) < 0.05) continue;
        worst = std::max(worst, std::abs(lhs.at(j) - rhs.at(j)));
    }
    CHECK(worst < 5e-3);
}

TEST_CASE("mittag_leffler: classical values") {
    CHECK(mittag_leffler(1.0, 1.0, 1.0) == doctest::Approx(M_E).epsilon(1e-14));
    CHECK(mittag_leffler(0.7, 1.3, 0.0) ==
          doctest::Approx(1.0 / std::tgamma(1.3)).epsilon(1e-15));
    // E_{1/2,1}(x) = e^{x^2} erfc(-x)
    CHECK(mittag_leffler(0.5, 1.0, -1.0) ==
          doctest::Approx(M_E * std::erfc(1.0)).epsilon(1e-12));
    CHECK(mittag_leffler(1.0, 2.0, 1.0) == doctest::Approx(M_E - 1.0).epsilon(1e-13));
    CHECK_THROWS_AS(mittag_leffler(0.5, 1.0, 80.0), ArgumentOutOfSupportedRange);
}

TEST_CASE("mittag_leffler: brute-force series cross-check") {
    // independent oracle: naive partial sum with long double accumulation
    auto brute = [](double g, double b, double x) {
        long double s = 0.0L;
        for (int k = 0; k < 400; ++k)
            s += std::pow((long double)x, k) / std::tgamma((long double)(k * g + b));
        return static_cast<double>(s);
    };
    for (double x : {-2.0, -0.5, 0.3, 2.0}) {
        CHECK(mittag_leffler(0.5, 1.0, x) == doctest::Approx(brute(0.5, 1.0, x)).epsilon(1e-12));
        CHECK(mittag_leffler(0.8, 1.0, x) == doctest::Approx(brute(0.8, 1.0, x)).epsilon(1e-12));
    }
}
