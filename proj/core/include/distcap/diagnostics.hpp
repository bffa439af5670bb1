#pragma once

#include <optional>
#include <string>
#include <vector>

#include "distcap/galerkin.hpp"
#include "distcap/kernel_table.hpp"
#include "distcap/weight.hpp"

namespace distcap {

// Max absolute residual of the energy identity (the distributed-order
// analogue of 2 u u' = (u^2)'), relative to the largest single term:
//   D^mu ||w||^2 + history term + initial term = 2 <D^mu w, w>.
// per_node, when given, receives the signed residual at every node.
double energy_identity_residual(const SampledTrajectory& w, const WeightFunction& mu,
                                int alpha_nodes = 24,
                                std::vector<double>* per_node = nullptr);

struct EnergyEstimateReport {
    std::vector<double> t;
    std::vector<double> lhs;     // accumulated four-term left side
    std::vector<double> rhs;     // c1~ (||u0||^2 + int ||f||^2_{H-1}) + c1~ delta_n
    double c_tilde_1 = 0.0;
    double delta_n = 0.0;
    double min_margin = 0.0;     // min(rhs - lhs); pass iff >= 0
    bool pass = false;
    bool terms_nonnegative = false;
};

// Energy-estimate audit with the Mittag-Leffler constant chain; h_tilde is
// the sup of the lower-order coefficient function (0 when b = c = 0).
EnergyEstimateReport energy_estimate_check(const GalerkinSolution& sol,
                                           double u0_l2_norm, double h_tilde = 0.0,
                                           int alpha_nodes = 24);

struct CoercivityReport {
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
};

// The coercivity inequality underlying uniqueness, checked at grid node
// `node` (its time must satisfy t <= 1).
CoercivityReport coercivity_check(const SampledTrajectory& w, const WeightFunction& mu,
                                  int node, int alpha_nodes = 24, double tol = 1e-9);

struct ContinuityReport {
    std::string regime;             // "H^-1" or "(Hbar^{2m+1})*"
    int m = 0;                      // order index in the m-regime
    std::vector<double> sample_t;
    std::vector<double> sample_norm;  // ||u(t) - u0|| in the regime norm
    double fitted_rate = 0.0;         // slope of log-norm vs log-t
    double reconstruction_deviation = 0.0;  // resolvent reconstruction identity
    bool monotone = false;
    bool below_threshold = false;
    bool pass = false;
};

ContinuityReport continuity_report(const GalerkinSolution& sol,
                                   const WeightExponents& exps);

struct RegularityTable {
    std::vector<double> t;
    std::vector<double> grad_norm2;    // || grad u ||^2_{L2}
    std::vector<double> h2_seminorm2;  // || Delta u ||^2_{L2}
    double h2_time_integral = 0.0;     // int_0^T ||u||^2_{H2-spectral} dt
    double rhs = 0.0;                  // ||u0||^2_{H1_0} + int ||f||^2_{L2}
};

RegularityTable regularity_monitor(const GalerkinSolution& sol);

}  // namespace distcap
