#pragma once

#include "distcap/grid.hpp"
#include "distcap/kernel_table.hpp"
#include "distcap/weight.hpp"

namespace distcap {

// Discrete fractional calculus on sampled trajectories. All operators use
// product integration: the weakly singular kernel is integrated exactly
// (moment formulas) against a polynomial interpolant of the data.

// I^alpha f, alpha in (0,1]. interp_order 1 = piecewise linear (default,
// positivity preserving), 3 = local cubic (higher accuracy on smooth data).
SampledTrajectory frac_integral(const SampledTrajectory& f, double alpha,
                                int interp_order = 1);

// Riemann-Liouville derivative d/dt I^{1-alpha} f, alpha in [0,1).
// The derivative of the product-integration antiderivative is taken
// analytically. Node 0 is reported as 0 for alpha > 0 (it is singular there
// whenever f(0) != 0).
SampledTrajectory rl_derivative(const SampledTrajectory& f, double alpha);

// Caputo derivative D^alpha f = rl_derivative(f - f(0)), alpha in [0,1];
// alpha = 1 maps to the discrete first derivative.
SampledTrajectory caputo(const SampledTrajectory& f, double alpha);

// Distributed-order Caputo derivative: Gauss quadrature in alpha against mu
// over the support partition.
SampledTrajectory distributed_caputo(const SampledTrajectory& f, const WeightFunction& mu,
                                     int alpha_nodes = 32);

// Alternative route d/dt (k * (f - f(0))) through a tabulated kernel k.
SampledTrajectory distributed_caputo_via_kernel(const SampledTrajectory& f,
                                                const KernelTable& ktab);

// Precomputed product-integration weights of one kernel table against one
// grid: (K*f)(t_j) = sum_i W[j][i] f_i. Lower triangular, reusable.
class ConvolutionPlan {
public:
    ConvolutionPlan(const KernelTable& table, const TimeGrid& grid);

    SampledTrajectory apply(const SampledTrajectory& f) const;
    // weight of f_j in (K*f)(t_j) (the implicit "self" weight)
    double self_weight(int j) const { return rows_[static_cast<size_t>(j)].back(); }
    // all weights of row j: (K*f)(t_j) = sum_i row(j)[i] f_i
    const std::vector<double>& row(int j) const { return rows_[static_cast<size_t>(j)]; }
    const TimeGrid& grid() const { return grid_; }

private:
    TimeGrid grid_;
    std::vector<std::vector<double>> rows_;  // rows_[j][i], i = 0..j
};

// (K*f)(t_j) on f's grid. Kernel singularity handled via the table's exact
// moments (or smooth-factor extrapolation when absent).
SampledTrajectory singular_convolve(const KernelTable& ktab, const SampledTrajectory& f);

// Convolution of two tabulated singular kernels at a single time, by the
// symmetric split (a*b)(t) = int_0^{t/2} a b(t-.) + int_0^{t/2} b a(t-.).
double convolve_kernel_tables(const KernelTable& a, const KernelTable& b, double t);

// Mittag-Leffler E_{gamma,beta}(x) by the defining series with a d'Alembert
// stopping rule. Supported for |x| <= 50.
double mittag_leffler(double gamma, double beta, double x);

}  // namespace distcap
