#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "distcap/fraccalc.hpp"
#include "distcap/kernel_table.hpp"
#include "distcap/weight.hpp"

namespace distcap {

// ---------------------------------------------------------------------------
// small dense linear algebra (mode counts stay <= 64)
// ---------------------------------------------------------------------------

struct Mat {
    int n = 0;
    std::vector<double> a;

    Mat() = default;
    explicit Mat(int size) : n(size), a(static_cast<size_t>(size) * size, 0.0) {}
    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * n + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * n + j]; }
    double inf_norm() const;
};

// solves (I + w A) x = r by partially pivoted LU
std::vector<double> solve_shifted(const Mat& A, double w, const std::vector<double>& r);

// ---------------------------------------------------------------------------
// spectral basis of the Dirichlet Laplacian
// ---------------------------------------------------------------------------

struct Interval {
    double length = M_PI;
};
struct Rectangle {
    double lx = M_PI, ly = M_PI;
};
using Domain = std::variant<Interval, Rectangle>;

class SpectralBasis {
public:
    static SpectralBasis eigenpairs(const Domain& domain, int n);

    int size() const { return n_; }
    bool is_interval() const { return std::holds_alternative<Interval>(domain_); }
    const Domain& domain() const { return domain_; }
    double eigenvalue(int k) const { return lambda_[static_cast<size_t>(k)]; }

    double eval(int k, double x, double y = 0.0) const;
    double grad_x(int k, double x, double y = 0.0) const;
    double grad_y(int k, double x, double y = 0.0) const;

    // quadrature over the domain
    int quad_size() const { return static_cast<int>(qw_.size()); }
    double quad_x(int q) const { return qx_[static_cast<size_t>(q)]; }
    double quad_y(int q) const { return qy_[static_cast<size_t>(q)]; }
    double quad_w(int q) const { return qw_[static_cast<size_t>(q)]; }
    // cached basis values/gradients at quadrature nodes
    double phi(int k, int q) const { return phi_[static_cast<size_t>(k) * qw_.size() + q]; }
    double dphix(int k, int q) const { return dphix_[static_cast<size_t>(k) * qw_.size() + q]; }
    double dphiy(int k, int q) const { return dphiy_[static_cast<size_t>(k) * qw_.size() + q]; }

    double integrate(const std::function<double(double, double)>& f) const;

private:
    Domain domain_;
    int n_ = 0;
    std::vector<int> ix_, iy_;  // 1-based sine indices per mode (iy unused in 1-D)
    std::vector<double> lambda_;
    std::vector<double> qx_, qy_, qw_;
    std::vector<double> phi_, dphix_, dphiy_;
};

// ---------------------------------------------------------------------------
// elliptic coefficients and time mollification
// ---------------------------------------------------------------------------

// Coefficient evaluators (x, y, t); y is ignored on an interval domain.
// a12 enters symmetrically (the operator symmetrizes a at ingestion).
struct EllipticCoefficients {
    std::function<double(double, double, double)> a11, a12, a22;
    std::function<double(double, double, double)> b1, b2, c, f;
    double lambda_min = 1.0, lambda_max = 1.0;
    bool time_constant = false;  // skips mollification and C1 resampling

    static EllipticCoefficients laplacian();
};

// Sampled Rayleigh-quotient check of the declared ellipticity constants.
void validate_ellipticity(const EllipticCoefficients& coeffs, const SpectralBasis& basis,
                          double horizon, double tol = 1e-9, int probes = 200,
                          unsigned seed = 2024);

// Time-mollified coefficients per the reflection conventions: a by even
// reflection, b and c by zero extension, f by odd reflection at 0 and zero
// beyond T. epsilon = 1/n must stay below T.
EllipticCoefficients mollify(const EllipticCoefficients& coeffs, int n, double horizon);

// A(t) with rows = test index m, cols = trial index k:
//   A(m,k) = int a grad(phi_k).grad(phi_m) - [b.grad(phi_k) + c phi_k] phi_m dx
// so the spectral system reads D^mu c = -A c + F.
void assemble_system(const SpectralBasis& basis, const EllipticCoefficients& coeffs,
                     double t, Mat& A, std::vector<double>& F);

// L2 projection <u0, phi_k> with a Bessel-inequality check.
std::vector<double> project_initial(const std::function<double(double, double)>& u0,
                                    const SpectralBasis& basis);

// ---------------------------------------------------------------------------
// Volterra solve
// ---------------------------------------------------------------------------

struct SegmentLog {
    int node = 0;
    double length = 0.0;
    double rho_bound = 0.0;     // local contraction bound w_jj * ||A||
    double rho_measured = 0.0;  // measured Picard factor (0 when solved directly)
    int iterations = 0;
    bool implicit = false;
};

struct VolterraSolution {
    SampledTrajectory coeffs;
    std::vector<double> c0;
    std::vector<SegmentLog> segments;
    double a_norm_c1 = 0.0;      // sampled ||A||_{C^1[0,T]}
    double delta_analytic = 0.0; // segment length from the continuation condition
    double max_rho_measured = 0.0;
};

// Marches the fixed point c = c0 - (g*Ac) + (g*F) node by node with frozen
// history. Nodes whose local contraction factor is below 1/2 run the Picard
// iteration; stiff nodes solve the shifted system directly.
VolterraSolution solve_volterra(const KernelTable& gtab,
                                const std::function<void(double, Mat&)>& A_of_t,
                                const std::function<void(double, std::vector<double>&)>& F_of_t,
                                const std::vector<double>& c0, const TimeGrid& grid,
                                double picard_tol = 1e-12);

// ---------------------------------------------------------------------------
// assembled solution
// ---------------------------------------------------------------------------

struct GalerkinSolution {
    SpectralBasis basis;
    WeightFunction mu;
    WeightExponents exps;
    TimeGrid grid;
    int mollify_index = 0;
    VolterraSolution volterra;
    std::function<void(double, Mat&)> A_of_t;
    std::function<void(double, std::vector<double>&)> F_of_t;
    std::optional<EllipticCoefficients> mollified_coeffs;  // for unresolved-mode tests

    int modes() const { return basis.size(); }
    double coeff(int j, int k) const { return volterra.coeffs.at(j, k); }
};

double reconstruct(const GalerkinSolution& sol, double x, double y, double t);

// Signed residual of the weak form tested with phi_m at grid node j; the
// time term is a difference quotient of (k * (c_m - c_m(0))).
double weak_residual(const GalerkinSolution& sol, const KernelTable& ktab, int m_index,
                     int node);

// Max over nodes of || c_j - (c0 - (g*Ac)_j + (g*F)_j) ||_inf: the discrete
// fixed-point equation residual of a finished solve.
double volterra_equation_residual(const GalerkinSolution& sol, const KernelTable& gtab);

}  // namespace distcap
