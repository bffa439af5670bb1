#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "distcap/errors.hpp"
#include "distcap/galerkin.hpp"
#include "distcap/kernels.hpp"
#include "distcap/quadrature.hpp"
#include "distcap/runner.hpp"
#include "distcap/scenario.hpp"

using namespace distcap;

TEST_CASE("eigenpairs: interval and rectangle eigenvalues, normalization") {
    auto b = SpectralBasis::eigenpairs(Interval{M_PI}, 4);
    CHECK(b.eigenvalue(2) == doctest::Approx(9.0));  // k = 3
    double norm = b.integrate([&](double x, double) {
        double v = b.eval(0, x);
        return v * v;
    });
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-13));

    auto r = SpectralBasis::eigenpairs(Rectangle{M_PI, M_PI}, 5);
    CHECK(r.eigenvalue(0) == doctest::Approx(2.0));  // 1 + 1
    CHECK(r.eigenvalue(1) == doctest::Approx(5.0));  // 1 + 4 or 4 + 1
    double rnorm = r.integrate([&](double x, double y) {
        double v = r.eval(0, x, y);
        return v * v;
    });
    CHECK(rnorm == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(SpectralBasis::eigenpairs(Interval{-1.0}, 2), UnsupportedDomain);
    CHECK_THROWS_AS(SpectralBasis::eigenpairs(Interval{1.0}, 0), UnsupportedDomain);
}

TEST_CASE("mollify: constants unchanged, plateau and tapering, odd reflection at 0") {
    const double T = 1.0;
    const int n = 8;  // eps = 1/8

    EllipticCoefficients co = EllipticCoefficients::laplacian();
    co.time_constant = false;  // force the quadrature path
    auto moll = mollify(co, n, T);
    CHECK(moll.a11(0.3, 0.0, 0.5) == doctest::Approx(1.0).epsilon(1e-13));

    // b == 1 with zero extension: plateau inside [eps, T-eps], taper outside
    EllipticCoefficients cb = EllipticCoefficients::laplacian();
    cb.b1 = [](double, double, double) { return 1.0; };
    cb.time_constant = false;
    auto mb = mollify(cb, n, T);
    CHECK(mb.b1(0.0, 0.0, 0.5) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(mb.b1(0.0, 0.0, 1.0 / n) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(mb.b1(0.0, 0.0, 0.0) < 0.75);
    CHECK(mb.b1(0.0, 0.0, T) < 0.75);

    // f(x,t) = t odd-reflected: value at 0 is killed by symmetry
    EllipticCoefficients cf = EllipticCoefficients::laplacian();
    cf.f = [](double, double, double t) { return t; };
    cf.time_constant = false;
    auto mf = mollify(cf, n, T);
    CHECK(std::abs(mf.f(0.0, 0.0, 0.0)) < 1e-15);
    CHECK(mf.f(0.0, 0.0, 0.5) == doctest::Approx(0.5).epsilon(1e-12));

    CHECK_THROWS_AS(mollify(co, 1, 0.5), EpsilonTooLarge);
}

TEST_CASE("assemble_system: Laplacian diagonalizes; constant c shifts") {
    auto basis = SpectralBasis::eigenpairs(Interval{M_PI}, 5);
    auto co = EllipticCoefficients::laplacian();
    Mat A;
    std::vector<double> F;
    assemble_system(basis, co, 0.0, A, F);
    for (int m = 0; m < 5; ++m)
        for (int k = 0; k < 5; ++k) {
            double want = (m == k) ? basis.eigenvalue(k) : 0.0;
            CHECK(A(m, k) == doctest::Approx(want).epsilon(1e-12));
        }
    for (double f : F) CHECK(f == 0.0);

    co.c = [](double, double, double) { return 0.7; };
    assemble_system(basis, co, 0.0, A, F);
    for (int k = 0; k < 5; ++k)
        CHECK(A(k, k) == doctest::Approx(basis.eigenvalue(k) - 0.7).epsilon(1e-12));
}

TEST_CASE("assemble_system: variable a(x) matches a dense quadrature oracle") {
    auto basis = SpectralBasis::eigenpairs(Interval{M_PI}, 4);
    auto co = EllipticCoefficients::laplacian();
    co.a11 = [](double x, double, double) { return 1.0 + x / M_PI; };
    co.lambda_max = 2.0;
    Mat A;
    std::vector<double> F;
    assemble_system(basis, co, 0.0, A, F);

    // symmetric
    for (int m = 0; m < 4; ++m)
        for (int k = 0; k < 4; ++k)
            CHECK(A(m, k) == doctest::Approx(A(k, m)).epsilon(1e-12));

    // independent fine quadrature
    auto oracle = [&](int m, int k) {
        int N = 20000;
        double h = M_PI / N, s = 0.0;
        for (int i = 0; i < N; ++i) {
            double x = (i + 0.5) * h;
            s += h * (1.0 + x / M_PI) * basis.grad_x(k, x) * basis.grad_x(m, x);
        }
        return s;
    };
    for (int m = 0; m < 4; ++m)
        for (int k = 0; k < 4; ++k)
            CHECK(A(m, k) == doctest::Approx(oracle(m, k)).epsilon(1e-7));
}

TEST_CASE("project_initial: unit mode, sine series of x(pi-x), zero") {
    auto basis = SpectralBasis::eigenpairs(Interval{M_PI}, 6);
    auto c = project_initial([&](double x, double) { return basis.eval(1, x); }, basis);
    for (int k = 0; k < 6; ++k)
        CHECK(c[(size_t)k] == doctest::Approx(k == 1 ? 1.0 : 0.0).epsilon(1e-12));

    // x(pi-x) = sum_k odd sqrt(2/pi) * 8/(sqrt(2 pi) k^3)-type sine coefficients:
    // <x(pi-x), sqrt(2/pi) sin kx> = sqrt(2/pi) * 4/k^3 for odd k, 0 for even.
    auto c2 = project_initial([](double x, double) { return x * (M_PI - x); }, basis);
    for (int k = 1; k <= 6; ++k) {
        double want = (k % 2 == 1) ? std::sqrt(2.0 / M_PI) * 4.0 / (k * k * k) : 0.0;
        CHECK(c2[(size_t)k - 1] == doctest::Approx(want).epsilon(1e-10));
    }

    auto c3 = project_initial([](double, double) { return 0.0; }, basis);
    for (double v : c3) CHECK(v == 0.0);
}

TEST_CASE("validate_ellipticity: rejects out-of-range Rayleigh quotients") {
    auto basis = SpectralBasis::eigenpairs(Interval{M_PI}, 2);
    auto co = EllipticCoefficients::laplacian();
    co.a11 = [](double x, double, double) { return 1.0 + x; };  // up to 1+pi
    CHECK_THROWS_AS(validate_ellipticity(co, basis, 1.0), ValidationError);
    co.lambda_max = 1.0 + M_PI;
    CHECK_NOTHROW(validate_ellipticity(co, basis, 1.0));
}

namespace {

KernelTable bump_gtable(const TimeGrid& grid) {
    return make_g_table(WeightFunction::bump(0.5, 0.01, 1.0), grid);
}

}  // namespace

TEST_CASE("solve_volterra: trivial fixed points") {
    TimeGrid grid(1.0, 128, 4.0);
    auto gt = bump_gtable(grid);

    auto A0 = [](double, Mat& A) { A = Mat(2); };
    auto F0 = [](double, std::vector<double>& F) { F.assign(2, 0.0); };
    auto sol = solve_volterra(gt, A0, F0, {1.5, -0.5}, grid);
    for (int j = 0; j <= grid.size(); ++j) {
        CHECK(sol.coeffs.at(j, 0) == doctest::Approx(1.5).epsilon(1e-12));
        CHECK(sol.coeffs.at(j, 1) == doctest::Approx(-0.5).epsilon(1e-12));
    }

    // steady manufactured solution: F = A c0 keeps c constant
    auto A1 = [](double, Mat& A) {
        A = Mat(2);
        A(0, 0) = 2.0;
        A(0, 1) = 0.3;
        A(1, 0) = 0.3;
        A(1, 1) = 1.0;
    };
    auto F1 = [&](double, std::vector<double>& F) {
        F = {2.0 * 1.5 + 0.3 * -0.5, 0.3 * 1.5 + 1.0 * -0.5};
    };
    auto sol1 = solve_volterra(gt, A1, F1, {1.5, -0.5}, grid);
    for (int j = 0; j <= grid.size(); ++j) {
        CHECK(sol1.coeffs.at(j, 0) == doctest::Approx(1.5).epsilon(1e-9));
        CHECK(sol1.coeffs.at(j, 1) == doctest::Approx(-0.5).epsilon(1e-9));
    }

    CHECK_THROWS_AS(solve_volterra(gt, A0, F0, {1.0}, TimeGrid(1.0, 32, 2.0)),
                    ValidationError);
}

TEST_CASE("solve_volterra: single-order relaxation hits the Mittag-Leffler law") {
    auto mu = WeightFunction::bump(0.5, 0.01, 1.0);
    auto e = derive_exponents(mu);
    TimeGrid grid(1.0, 512, default_grading(e.gamma));
    auto gt = make_g_table(mu, grid);
    auto A = [](double, Mat& A) {
        A = Mat(1);
        A(0, 0) = 1.0;
    };
    auto F = [](double, std::vector<double>& F) { F.assign(1, 0.0); };
    auto sol = solve_volterra(gt, A, F, {1.0}, grid);
    double worst = 0.0;
    for (int j = 0; j <= grid.size(); ++j) {
        double t = grid.node(j);
        if (t < 0.05) continue;
        worst = std::max(worst,
                         std::abs(sol.coeffs.at(j, 0) -
                                  mittag_leffler(0.5, 1.0, -std::sqrt(t))));
    }
    CHECK(worst < 1e-2);

    // contraction bookkeeping: measured factors certified below 1
    CHECK(sol.max_rho_measured < 1.0);
    for (const auto& seg : sol.segments) {
        if (!seg.implicit) CHECK(seg.rho_measured < 1.0);
        CHECK(seg.length > 0.0);
    }
}

TEST_CASE("heat run: discrete energy dissipation and equation residual") {
    std::string cfg = R"CFG(
name = heat
[weight]
kind = indicator
lo = 0.6
hi = 0.8
[domain]
type = interval
length = pi
[grid]
T = 1.0
M = 128
modes = 4
[data]
u0 = "sin(x) + 0.3*sin(2*x)"
)CFG";
    Scenario sc = parse_scenario_text(cfg);
    PreparedRun pr = solve_scenario(sc);

    double prev = 1e300;
    for (int j = 0; j <= pr.grid.size(); ++j) {
        double E = 0.0;
        for (int k = 0; k < pr.solution.modes(); ++k)
            E += pr.solution.coeff(j, k) * pr.solution.coeff(j, k);
        CHECK(E <= prev * (1.0 + 1e-12));
        prev = E;
    }
    CHECK(volterra_equation_residual(pr.solution, pr.gtab) < 1e-10);
}

TEST_CASE("weak_residual: solved modes small, zero data zero") {
    std::string cfg = R"CFG(
name = heat
[weight]
kind = indicator
lo = 0.6
hi = 0.8
[domain]
type = interval
length = pi
[grid]
T = 1.0
M = 256
modes = 3
[data]
u0 = "sin(x)"
)CFG";
    Scenario sc = parse_scenario_text(cfg);
    PreparedRun pr = solve_scenario(sc);
    for (int m = 0; m < 3; ++m) {
        double r = weak_residual(pr.solution, pr.ktab, m, 128);
        CHECK(std::abs(r) < 5e-3);
    }
    // unresolved test mode: no time term, elliptic coupling vanishes for the
    // diagonal Laplacian, and f = 0
    double r9 = weak_residual(pr.solution, pr.ktab, 9, 128);
    CHECK(std::abs(r9) < 1e-12);

    // zero data: everything vanishes
    Scenario sz = sc;
    sz.u0 = Expr::parse("0");
    PreparedRun pz = solve_scenario(sz);
    CHECK(std::abs(weak_residual(pz.solution, pz.ktab, 1, 64)) < 1e-14);
}

TEST_CASE("reconstruct: boundary zero, projection at t=0") {
    std::string cfg = R"CFG(
name = heat
[weight]
kind = indicator
lo = 0.6
hi = 0.8
[domain]
type = interval
length = pi
[grid]
T = 1.0
M = 128
modes = 4
[data]
u0 = "sin(2*x)"
)CFG";
    Scenario sc = parse_scenario_text(cfg);
    PreparedRun pr = solve_scenario(sc);
    CHECK(std::abs(reconstruct(pr.solution, 0.0, 0.0, 0.5)) < 1e-12);
    CHECK(std::abs(reconstruct(pr.solution, M_PI, 0.0, 0.5)) < 1e-12);
    // t = 0 recovers the projection of u0 = phi_2 / sqrt(2/pi)
    double x = 1.1;
    double expect = std::sin(2.0 * x);
    CHECK(reconstruct(pr.solution, x, 0.0, 0.0) == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("manufactured-solution mesh convergence (factor >= 1.5 per doubling)") {
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
    opts.out_dir = std::filesystem::temp_directory_path() / "distcap_conv_test";
    auto rows = converge_study(sc, opts, {64, 128, 256, 512});
    REQUIRE(rows.size() == 4);
    for (size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].factor >= 1.5);
}
