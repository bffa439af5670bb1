#include "distcap/gronwall.hpp"

#include <cmath>

#include "distcap/errors.hpp"
#include "distcap/kernels.hpp"

namespace distcap {

SampledTrajectory iterated_convolution(const KernelTable& gtab, const SampledTrajectory& a,
                                       int k, const WeightExponents* exps, double horizon_T,
                                       bool check_estimate) {
    if (k < 0) throw HypothesisViolation("iterated_convolution: k must be >= 0");
    if (k == 0) return a;
    ConvolutionPlan plan(gtab, a.grid());
    SampledTrajectory v = a;
    for (int i = 0; i < k; ++i) v = plan.apply(v);

    if (check_estimate && exps) {
        bool nonneg = true;
        for (int j = 0; j <= a.grid().size() && nonneg; ++j)
            for (int d = 0; d < a.dim(); ++d)
                if (a.at(j, d) < 0.0) nonneg = false;
        if (nonneg) {
            const double T = horizon_T > 0.0 ? horizon_T : a.grid().horizon();
            const double c = c_mu_T(*exps, T);
            const double gam = exps->gamma;
            const double factor = std::pow(c * std::tgamma(gam), k);
            const double kg = k * gam;
            const double scale = a.max_abs() + 1e-300;
            if (kg <= 1.0) {
                SampledTrajectory ref = frac_integral(a, kg);
                for (int j = 0; j <= a.grid().size(); ++j)
                    for (int d = 0; d < a.dim(); ++d)
                        if (v.at(j, d) > factor * ref.at(j, d) + 1e-2 * scale * factor +
                                             1e-12)
                            throw HypothesisViolation(
                                "iterated_convolution: iterate bound violated at node " +
                                std::to_string(j));
            } else {
                // (g^[k] * a)(t) <= c^k Gamma(g)^k / Gamma(kg) t^{kg-1} ||a||_L1
                double l1 = 0.0;
                for (int j = 1; j <= a.grid().size(); ++j)
                    l1 += 0.5 *
                          (std::abs(a.at(j - 1, 0)) + std::abs(a.at(j, 0))) *
                          (a.grid().node(j) - a.grid().node(j - 1));
                for (int j = 1; j <= a.grid().size(); ++j) {
                    double t = a.grid().node(j);
                    double cap = factor / std::tgamma(kg) * std::pow(t, kg - 1.0) * l1;
                    if (v.at(j, 0) > cap * 1.05 + 1e-12)
                        throw HypothesisViolation(
                            "iterated_convolution: L1 tail bound violated at node " +
                            std::to_string(j));
                }
            }
        }
    }
    return v;
}

GronwallBound gronwall_majorant(const KernelTable& gtab, const SampledTrajectory& a,
                                const SampledTrajectory& f, double tol,
                                const WeightExponents& exps) {
    const TimeGrid& grid = a.grid();
    if (!(grid == f.grid()))
        throw GridMismatch("gronwall_majorant: a and f on different grids");
    const int M = grid.size();
    const double scale_a = a.max_abs();
    for (int j = 0; j <= M; ++j) {
        if (a.at(j) < -1e-12 * scale_a)
            throw HypothesisViolation("gronwall_majorant: a must be nonnegative");
        if (f.at(j) < 0.0)
            throw HypothesisViolation("gronwall_majorant: f must be nonnegative");
        if (j > 0 && f.at(j) < f.at(j - 1) * (1.0 - 1e-12))
            throw HypothesisViolation("gronwall_majorant: f must be non-decreasing");
    }

    const double T = grid.horizon();
    const double c = c_mu_T(exps, T);
    const double gam = exps.gamma;

    GronwallBound out;
    out.grid = grid;
    out.c_mu_T = c;
    out.gamma = gam;
    out.bound.assign(static_cast<size_t>(M) + 1, 0.0);
    out.terms.assign(static_cast<size_t>(M) + 1, 0);
    out.residual.assign(static_cast<size_t>(M) + 1, 0.0);

    std::vector<bool> certified(static_cast<size_t>(M) + 1, false);
    for (int j = 0; j <= M; ++j) out.bound[static_cast<size_t>(j)] = a.at(j);
    certified[0] = true;  // all k >= 1 terms vanish at t = 0
    out.terms[0] = 0;

    // cumulative L1 norm of a, for the scalar majorant terms
    std::vector<double> a_l1(static_cast<size_t>(M) + 1, 0.0);
    for (int j = 1; j <= M; ++j)
        a_l1[static_cast<size_t>(j)] =
            a_l1[static_cast<size_t>(j) - 1] +
            0.5 * (std::abs(a.at(j - 1)) + std::abs(a.at(j))) *
                (grid.node(j) - grid.node(j - 1));

    ConvolutionPlan plan(gtab, grid);
    SampledTrajectory v = a;  // g^[k] * a
    const double lgg = std::lgamma(gam);

    const int kmax = 20000;
    for (int k = 1; k <= kmax; ++k) {
        bool all_done = true;
        v = plan.apply(v);
        for (int j = 1; j <= M; ++j) {
            if (certified[static_cast<size_t>(j)]) continue;
            const double fj = f.at(j);
            double term = 0.0;
            if (fj > 0.0 && v.at(j) != 0.0)
                term = std::exp(k * std::log(fj)) * v.at(j);
            out.bound[static_cast<size_t>(j)] += term;
            out.terms[static_cast<size_t>(j)] = k;
            // d'Alembert certificate on the scalar majorant terms
            //   b_k = (f c Gamma(g))^k t^{kg-1} ||a||_L1 / Gamma(kg),
            // valid once k g > 1.
            const double t = grid.node(j);
            const double kg = k * gam;
            if (kg > 1.0) {
                double ratio = fj * c * std::tgamma(gam) * std::pow(t, gam) *
                               std::exp(std::lgamma(kg) - std::lgamma(kg + gam));
                if (ratio < 0.9) {
                    double lx = fj > 0.0 ? std::log(fj * c) + lgg : -1e300;
                    double ln_bk = k * lx + (kg - 1.0) * std::log(t) -
                                   std::lgamma(kg) +
                                   std::log(a_l1[static_cast<size_t>(j)] + 1e-300);
                    double tail = std::exp(ln_bk) * ratio / (1.0 - ratio);
                    if (tail < tol) {
                        out.residual[static_cast<size_t>(j)] = tail;
                        certified[static_cast<size_t>(j)] = true;
                        continue;
                    }
                }
            }
            all_done = false;
        }
        if (all_done) return out;
    }
    throw QuadratureNonConvergence("gronwall_majorant: series did not certify in " +
                                   std::to_string(kmax) + " terms");
}

DominanceReport certify_dominance(const GronwallBound& bound, const SampledTrajectory& w,
                                  const SampledTrajectory& a, const SampledTrajectory& f,
                                  const KernelTable& gtab, double tol) {
    const TimeGrid& grid = w.grid();
    if (!(grid == a.grid()) || !(grid == f.grid()) || !(grid == bound.grid))
        throw GridMismatch("certify_dominance: mismatched grids");

    SampledTrajectory gw = singular_convolve(gtab, w);
    const double scale = std::max({w.max_abs(), a.max_abs(), 1.0});
    for (int j = 0; j <= grid.size(); ++j) {
        double rhs = a.at(j) + f.at(j) * gw.at(j);
        if (w.at(j) > rhs + tol * scale + 1e-9 * scale)
            throw HypothesisViolation(
                "certify_dominance: w does not satisfy w <= a + f (g*w) at node " +
                std::to_string(j));
    }

    DominanceReport rep;
    rep.dominated = true;
    for (int j = 0; j <= grid.size(); ++j) {
        double excess = w.at(j) - (bound.bound[static_cast<size_t>(j)] +
                                   bound.residual[static_cast<size_t>(j)] + tol * scale);
        rep.max_violation = std::max(rep.max_violation, excess);
        if (excess > 0.0) rep.dominated = false;
    }
    return rep;
}

}  // namespace distcap
