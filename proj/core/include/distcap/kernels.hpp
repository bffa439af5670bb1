#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "distcap/kernel_table.hpp"
#include "distcap/symbol.hpp"
#include "distcap/weight.hpp"

namespace distcap {

// ---------------------------------------------------------------------------
// pointwise kernel evaluators
// ---------------------------------------------------------------------------

// k(t) = int_0^1 t^{-a} mu(a)/Gamma(1-a) da
double kernel_k(const WeightFunction& mu, double t);

// k~(p) = int_0^1 p^{a-1} mu(a) da, principal branch; p off (-inf, 0]
std::complex<double> laplace_k(const WeightFunction& mu, std::complex<double> p);

// Weighted spectrum of the iterated kernel k_m: tensorized Gauss nodes of the
// (m+1)-fold alpha integral collapsed to atoms (beta, weight). Shared by
// kernel_k_m, its partial moments, and the G_{m,s/c} cross-checks.
class TensorSpectrum {
public:
    TensorSpectrum(const WeightFunction& mu, int m, int nodes_per_dim = 0);

    double kernel(double t) const;          // k_m(t)
    double moment0(double eps) const;       // int_0^eps k_m
    double moment1(double eps) const;       // int_0^eps tau k_m
    std::complex<double> phase_integral(double r) const;  // G_{m,c} + i G_{m,s}
    double beta_min() const { return beta_min_; }
    double beta_max() const { return beta_max_; }
    int m() const { return m_; }

private:
    int m_;
    double beta_min_ = 0.0, beta_max_ = 0.0;
    std::vector<double> betas_, weights_, lgamma1mb_;
};

// k_m(t), the (m+1)-fold iterated kernel of section-4 machinery. For m > 6
// direct tensor quadrature is refused; use kernel_k_m_mc.
double kernel_k_m(const WeightFunction& mu, int m, double t);

// Monte-Carlo fallback for large m; returns the estimate and fills
// standard_error when given.
double kernel_k_m_mc(const WeightFunction& mu, int m, double t, int samples = 200000,
                     double* standard_error = nullptr, unsigned seed = 12345);

// ---------------------------------------------------------------------------
// resolvents via the real-axis inversion formula
// ---------------------------------------------------------------------------

struct InversionOptions {
    double rel_tol = 1e-8;
};

// Shared machinery for g (power = 1) and g_m (power = m+1, restricted mu).
// Construction builds the boundary-symbol interpolant once; evaluations are
// then cheap enough to tabulate entire kernel tables.
class ResolventEvaluator {
public:
    ResolventEvaluator(const WeightFunction& mu, int power = 1,
                       InversionOptions opts = {});

    double operator()(double t) const;      // g(t) or g_m(t)
    double moment0(double eps) const;       // int_0^eps g
    double moment1(double eps) const;       // int_0^eps tau g
    const LaplaceSymbol& symbol() const { return *symbol_; }

private:
    std::shared_ptr<LaplaceSymbol> symbol_;
    InversionOptions opts_;
};

double resolvent_g(const WeightFunction& mu, double t, InversionOptions opts = {});
double resolvent_g_m(const WeightFunction& mu, int m, double t, InversionOptions opts = {});

// Generic real-axis Laplace inversion (appendix lemma):
// f(x) = (1/pi) int_0^infty e^{-rx} Im F^-(r) dr.
// F is sampled on rays |arg p| < pi - eta for the lemma's decay assumptions;
// violations are reported as warnings, not errors.
double laplace_invert(const std::function<std::complex<double>(std::complex<double>)>& F,
                      double x, const std::function<double(double)>& boundary_im,
                      InversionOptions opts = {},
                      std::vector<std::string>* warnings = nullptr);

// ---------------------------------------------------------------------------
// kernel tables
// ---------------------------------------------------------------------------

// Default grading 2/gamma clamped to [2,8].
double default_grading(double gamma);

KernelTable make_k_table(const WeightFunction& mu, const TimeGrid& grid);
KernelTable make_g_table(const WeightFunction& mu, const TimeGrid& grid,
                         InversionOptions opts = {}, int threads = 1);
KernelTable make_km_table(const WeightFunction& mu, int m, const TimeGrid& grid);
KernelTable make_gm_table(const WeightFunction& mu, int m, const TimeGrid& grid,
                          InversionOptions opts = {}, int threads = 1);

// max_{t in check grid} |(k*g)(t) - 1|; check grid = table nodes >= T/M.
double verify_resolvent_identity(const KernelTable& ktab, const KernelTable& gtab,
                                 double T);

// ---------------------------------------------------------------------------
// proved bounds, evaluated with explicit constants
// ---------------------------------------------------------------------------

// g(t) <= coeff * (sqrt(pi) t^{gamma-1} + Gamma(gamma) t^{-gamma}),
// coeff = 4 Gamma(gamma) sqrt(pi) / (pi^2 c_mu).
struct KernelBound {
    double coeff;
    double gamma;
    double eval(double t) const;
};
KernelBound prop2_bound(const WeightExponents& e);

// c_{mu,T} with g(t) <= c_{mu,T} t^{gamma-1} on (0,T]; the Prop.2 constant
// evaluated at the max{1,T} scaling.
double c_mu_T(const WeightExponents& e, double T);

// ctilde = min{sin(g pi/2), sin(g pi), sqrt(2)/2} ((1-g)/2) c_mu; the
// lower-bound constant of |p k~(p)|.
double symbol_lower_constant(const WeightExponents& e);

// min over a log-polar grid of |p k~(p)| / (ctilde r^{1-gamma or gamma});
// >= 1 certifies the bound.
double symbol_lower_margin(const WeightFunction& mu, const WeightExponents& e,
                           double eta = 0.05, int nr = 20, int nphi = 9);

// L2-regime bound: g(t) <= (1/(bbar pi)) (1/gamma0 + Gamma(1/2-gamma0) t^{gamma0-1/2})
// where bbar = sin(pi(1-gamma0)) b_mu. Requires gamma_zero present.
double g_l2_regime_bound(const WeightExponents& e, double t);

// g_m(t) <= c(mu,T) t^{(1/(2(m+1))+gamma_m)(m+1)-1}, with our half-mass witness.
struct GmBound {
    double coeff;
    double exponent;  // (1/(2(m+1))+gamma_m)(m+1) - 1
    double eval(double t) const;
};
GmBound gm_bound(const WeightFunction& mu, const WeightExponents& e, double T);

}  // namespace distcap
