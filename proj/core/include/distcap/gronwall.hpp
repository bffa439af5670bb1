#pragma once

#include "distcap/fraccalc.hpp"
#include "distcap/kernel_table.hpp"
#include "distcap/weight.hpp"

namespace distcap {

// Partial sums of the majorant series sum_k f(t)^k (g^[k] * a)(t) with a
// truncation certificate per node.
struct GronwallBound {
    TimeGrid grid;
    std::vector<double> bound;       // certified partial sum per node
    std::vector<int> terms;          // retained terms K(t_j)
    std::vector<double> residual;    // tail estimate per node
    double c_mu_T = 0.0;
    double gamma = 0.0;
};

// k-fold convolution g^[k] * a. For nonnegative a the paper's iterate bound
// (g^[k] * a)(t) <= c_{mu,T}^k Gamma(gamma)^k (I^{k gamma} a)(t) is asserted
// when check_estimate is set (slack covers discretization error).
SampledTrajectory iterated_convolution(const KernelTable& gtab, const SampledTrajectory& a,
                                       int k, const WeightExponents* exps = nullptr,
                                       double horizon_T = 0.0, bool check_estimate = false);

// Majorant of the fractional Gronwall lemma. a >= 0; f >= 0 non-decreasing.
GronwallBound gronwall_majorant(const KernelTable& gtab, const SampledTrajectory& a,
                                const SampledTrajectory& f, double tol,
                                const WeightExponents& exps);

struct DominanceReport {
    bool dominated = false;
    double max_violation = 0.0;  // max over nodes of w - bound
};

// Checks the lemma's hypothesis w <= a + f (g*w) pointwise, then w <= bound.
DominanceReport certify_dominance(const GronwallBound& bound, const SampledTrajectory& w,
                                  const SampledTrajectory& a, const SampledTrajectory& f,
                                  const KernelTable& gtab, double tol = 1e-9);

}  // namespace distcap
