#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace distcap {

// Gauss-Legendre rule on [-1,1]; nodes/weights computed by Newton iteration
// on the Legendre recurrence and cached per n.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussRule& gauss_legendre(int n);

// Fixed-panel Gauss-Legendre of f over [a,b].
double gauss_panel(const std::function<double(double)>& f, double a, double b, int n);

// Adaptive Gauss-Kronrod 7-15 with interval bisection.
// Stops when the panel error estimates sum below max(rel_tol*|I|, abs_tol).
// Throws QuadratureNonConvergence if the subdivision budget is exhausted.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-10, double abs_tol = 0.0, int max_depth = 48);

// Same, but integrating panel-by-panel over a smooth-piece partition
// a = pts[0] < ... < pts[k] = b. Tolerance is budgeted over the panels.
double integrate_partition(const std::function<double(double)>& f,
                           std::span<const double> pts,
                           double rel_tol = 1e-10, double abs_tol = 0.0);

std::complex<double> integrate_complex(const std::function<std::complex<double>(double)>& f,
                                       double a, double b,
                                       double rel_tol = 1e-10, double abs_tol = 0.0,
                                       int max_depth = 48);

std::complex<double> integrate_complex_partition(
    const std::function<std::complex<double>(double)>& f,
    std::span<const double> pts, double rel_tol = 1e-10, double abs_tol = 0.0);

// Piecewise Chebyshev interpolant on consecutive panels of one axis.
// Build samples f at Chebyshev points per panel; eval uses Clenshaw.
class PanelInterpolant {
public:
    PanelInterpolant() = default;
    PanelInterpolant(double lo, double hi, double panel_width, int degree,
                     const std::function<double(double)>& f);

    double operator()(double x) const;
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    bool covers(double x) const { return x >= lo_ && x <= hi_; }

private:
    double lo_ = 0.0, hi_ = 0.0, width_ = 0.0;
    int degree_ = 0;
    std::vector<std::vector<double>> coeffs_;  // per panel
};

}  // namespace distcap
