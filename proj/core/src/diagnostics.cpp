#include "distcap/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "distcap/errors.hpp"
#include "distcap/fraccalc.hpp"
#include "distcap/kernels.hpp"
#include "distcap/quadrature.hpp"

namespace distcap {

namespace {

double power_moment(double a, double b, double s) {
    if (std::abs(s) < 1e-13) {
        if (a <= 0.0) throw NonPositiveTime("power_moment: log moment needs a > 0");
        return std::log1p((b - a) / a);
    }
    if (a <= 0.0) return std::pow(b, s) / s;
    return std::pow(a, s) * std::expm1(s * std::log1p((b - a) / a)) / s;
}

// Gauss nodes and weights w_q mu(a_q) over the support partition of mu.
std::vector<std::pair<double, double>> alpha_rule(const WeightFunction& mu, int nodes) {
    auto [lo, hi] = mu.support_hint();
    const auto& part = mu.partition();
    std::vector<std::pair<double, double>> panels;
    double width = 0.0;
    for (size_t i = 0; i + 1 < part.size(); ++i) {
        double a = std::max(part[i], lo), b = std::min(part[i + 1], hi);
        if (b > a) {
            panels.emplace_back(a, b);
            width += b - a;
        }
    }
    std::vector<std::pair<double, double>> out;
    for (auto& [a, b] : panels) {
        int n = std::max(4, (int)std::lround(nodes * (b - a) / width));
        const GaussRule& rule = gauss_legendre(n);
        for (int q = 0; q < n; ++q) {
            double aq = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[q];
            double wq = 0.5 * (b - a) * rule.weights[q] * mu(aq);
            if (wq > 0.0) out.emplace_back(aq, wq);
        }
    }
    return out;
}

// sum_d (w_d(t_j) - w_d(tau))^2 is piecewise quadratic in tau; returns its
// coefficients in s = t_j - tau on panel [t_i, t_{i+1}]: c0 + c1 s + c2 s^2.
struct PanelQuad {
    double c0, c1, c2;
};

PanelQuad diff_square_panel(const SampledTrajectory& w, int j, int i) {
    const TimeGrid& g = w.grid();
    const double h = g.node(i + 1) - g.node(i);
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
    for (int d = 0; d < w.dim(); ++d) {
        const double wj = w.at(j, d);
        const double m = (w.at(i + 1, d) - w.at(i, d)) / h;
        // w(tau) = w_{i+1} - m (t_{i+1} - tau); with s = t_j - tau:
        //   w_j - w(tau) = (w_j - w_{i+1}) + m (t_{i+1} - tau)
        //                = A + m (s - s_a),  s_a = t_j - t_{i+1}
        const double sa = g.node(j) - g.node(i + 1);
        const double A = wj - w.at(i + 1, d) - m * sa;
        c0 += A * A;
        c1 += 2.0 * A * m;
        c2 += m * m;
    }
    return {c0, c1, c2};
}

// inner history integral of the energy identity at node j for one alpha:
//   int_0^{t_j} (t_j - tau)^{-alpha-1} sum_d |w_d(t_j)-w_d(tau)|^2 dtau
double history_integral(const SampledTrajectory& w, int j, double alpha) {
    const TimeGrid& g = w.grid();
    double acc = 0.0;
    for (int i = 0; i < j; ++i) {
        const double sa = g.node(j) - g.node(i + 1);
        const double sb = g.node(j) - g.node(i);
        PanelQuad q = diff_square_panel(w, j, i);
        if (i == j - 1) {
            // s_a = 0 and the quadratic starts at c0 = c1 = 0 exactly
            acc += q.c2 * std::pow(sb, 2.0 - alpha) / (2.0 - alpha);
        } else {
            acc += q.c0 * power_moment(sa, sb, -alpha) +
                   q.c1 * power_moment(sa, sb, 1.0 - alpha) +
                   q.c2 * power_moment(sa, sb, 2.0 - alpha);
        }
    }
    return acc;
}

}  // namespace

double energy_identity_residual(const SampledTrajectory& w, const WeightFunction& mu,
                                int alpha_nodes, std::vector<double>* per_node) {
    const TimeGrid& g = w.grid();
    const int M = g.size();
    auto rule = alpha_rule(mu, alpha_nodes);

    // D^mu of ||w||^2 and of each component, on the same alpha rule
    SampledTrajectory e2(g, 1);
    for (int j = 0; j <= M; ++j) {
        double s = 0.0;
        for (int d = 0; d < w.dim(); ++d) s += w.at(j, d) * w.at(j, d);
        e2.at(j) = s;
    }

    std::vector<double> lhs1((size_t)M + 1, 0.0), rhs((size_t)M + 1, 0.0);
    for (auto& [aq, wq] : rule) {
        auto de2 = caputo(e2, aq);
        auto dw = caputo(w, aq);
        for (int j = 1; j <= M; ++j) {
            lhs1[(size_t)j] += wq * de2.at(j);
            double s = 0.0;
            for (int d = 0; d < w.dim(); ++d) s += dw.at(j, d) * w.at(j, d);
            rhs[(size_t)j] += wq * 2.0 * s;
        }
    }

    std::vector<double> lhs2((size_t)M + 1, 0.0), lhs3((size_t)M + 1, 0.0);
    for (auto& [aq, wq] : rule) {
        const double mbar = wq / std::tgamma(1.0 - aq);  // includes mu via wq
        for (int j = 1; j <= M; ++j) {
            lhs2[(size_t)j] += aq * mbar * history_integral(w, j, aq);
            double d0 = 0.0;
            for (int d = 0; d < w.dim(); ++d) {
                double diff = w.at(j, d) - w.at(0, d);
                d0 += diff * diff;
            }
            lhs3[(size_t)j] += mbar * std::pow(g.node(j), -aq) * d0;
        }
    }

    if (per_node) per_node->assign((size_t)M + 1, 0.0);
    double max_resid = 0.0, max_term = 0.0;
    for (int j = 1; j <= M; ++j) {
        double resid = lhs1[(size_t)j] + lhs2[(size_t)j] + lhs3[(size_t)j] - rhs[(size_t)j];
        if (per_node) (*per_node)[(size_t)j] = resid;
        max_resid = std::max(max_resid, std::abs(resid));
        max_term = std::max({max_term, std::abs(lhs1[(size_t)j]), std::abs(lhs2[(size_t)j]),
                             std::abs(lhs3[(size_t)j]), std::abs(rhs[(size_t)j])});
    }
    return max_term > 0.0 ? max_resid / max_term : 0.0;
}

EnergyEstimateReport energy_estimate_check(const GalerkinSolution& sol, double u0_l2_norm,
                                           double h_tilde, int alpha_nodes) {
    const TimeGrid& g = sol.grid;
    const int M = g.size();
    const int n = sol.modes();
    const double T = g.horizon();
    const double lambda =
        sol.mollified_coeffs ? sol.mollified_coeffs->lambda_min : 1.0;

    auto rule = alpha_rule(sol.mu, alpha_nodes);

    // spectral trajectories
    SampledTrajectory E(g, 1);        // ||u||^2
    std::vector<double> gradsq((size_t)M + 1, 0.0), dsq((size_t)M + 1, 0.0),
        fham((size_t)M + 1, 0.0);
    std::vector<double> Fbuf;
    for (int j = 0; j <= M; ++j) {
        double e = 0.0, gr = 0.0, d0 = 0.0;
        for (int k = 0; k < n; ++k) {
            double c = sol.coeff(j, k);
            e += c * c;
            gr += sol.basis.eigenvalue(k) * c * c;
            double diff = c - sol.volterra.c0[(size_t)k];
            d0 += diff * diff;
        }
        E.at(j) = e;
        gradsq[(size_t)j] = gr;
        dsq[(size_t)j] = d0;
        sol.F_of_t(g.node(j), Fbuf);
        double fh = 0.0;
        for (int k = 0; k < n; ++k)
            fh += Fbuf[(size_t)k] * Fbuf[(size_t)k] / sol.basis.eigenvalue(k);
        fham[(size_t)j] = fh;
    }

    // term1: int_0^1 I^{1-alpha} E mu dalpha
    std::vector<double> term1((size_t)M + 1, 0.0);
    for (auto& [aq, wq] : rule) {
        auto v = frac_integral(E, 1.0 - aq);
        for (int j = 0; j <= M; ++j) term1[(size_t)j] += wq * v.at(j);
    }

    // term2: int_0^t k(tau) ||u(tau)-u0||^2 dtau  (k = int tau^-a mu/Gamma(1-a))
    std::vector<double> term2((size_t)M + 1, 0.0);
    {
        auto ktab = make_k_table(sol.mu, g);
        // product integration of k against the piecewise-quadratic dsq
        std::vector<double> acc((size_t)M + 1, 0.0);
        for (int j = 1; j <= M; ++j) {
            // integral over [t_{j-1}, t_j] of k(tau) q(tau), q = dsq piecewise quadratic
            // in tau via PL coefficients; approximate q linearly on the panel (its
            // curvature within one panel is O(h^2)).
            double a = g.node(j - 1), b = g.node(j);
            double qa = dsq[(size_t)j - 1], qb = dsq[(size_t)j];
            double m0, m1;  // kernel moments on [a,b] against 1 and (tau - a)
            if (a == 0.0) {
                m0 = ktab.moment0(b);
                m1 = ktab.moment1(b);
            } else {
                m0 = ktab.moment0(b) - ktab.moment0(a);
                m1 = (ktab.moment1(b) - ktab.moment1(a)) - a * m0;
            }
            double slope = (qb - qa) / (b - a);
            acc[(size_t)j] = acc[(size_t)j - 1] + qa * m0 + slope * m1;
        }
        term2 = acc;
    }

    // term3: lambda int ||Du||^2, exact for piecewise-linear coefficients
    std::vector<double> term3((size_t)M + 1, 0.0);
    for (int j = 1; j <= M; ++j) {
        double h = g.node(j) - g.node(j - 1);
        // integral of the squared PL interpolant of each mode
        double panel = 0.0;
        for (int k = 0; k < n; ++k) {
            double va = sol.coeff(j - 1, k), vb = sol.coeff(j, k);
            panel += sol.basis.eigenvalue(k) * h * (va * va + va * vb + vb * vb) / 3.0;
        }
        term3[(size_t)j] = term3[(size_t)j - 1] + lambda * panel;
    }

    // term4: time integral of the double history term
    std::vector<double> term4((size_t)M + 1, 0.0);
    {
        std::vector<double> H((size_t)M + 1, 0.0);
        SampledTrajectory w = sol.volterra.coeffs;
        for (auto& [aq, wq] : rule) {
            const double mbar = wq / std::tgamma(1.0 - aq);
            for (int j = 1; j <= M; ++j)
                H[(size_t)j] += aq * mbar * history_integral(w, j, aq);
        }
        for (int j = 1; j <= M; ++j)
            term4[(size_t)j] = term4[(size_t)j - 1] +
                               0.5 * (H[(size_t)j - 1] + H[(size_t)j]) *
                                   (g.node(j) - g.node(j - 1));
    }

    // constant chain
    const double gam = sol.exps.gamma;
    const double c = c_mu_T(sol.exps, T);
    const double arg = c * std::tgamma(gam) * h_tilde * std::pow(T, gam);
    const double c1 = h_tilde * T * mittag_leffler(gam, 2.0, std::min(arg, 50.0)) +
                      (4.0 / lambda) * mittag_leffler(gam, 1.0, std::min(arg, 50.0));
    const double c_tilde_1 = 2.0 * std::max(1.0, T) * sol.exps.c_mu + c1 + 4.0 / lambda;

    // delta_n: sup over sliding windows of length 1/n of int ||f||^2_{H-1}
    double delta_n = 0.0;
    if (sol.mollify_index >= 1) {
        const double win = 1.0 / sol.mollify_index;
        auto cumf = std::vector<double>((size_t)M + 1, 0.0);
        for (int j = 1; j <= M; ++j)
            cumf[(size_t)j] = cumf[(size_t)j - 1] +
                              0.5 * (fham[(size_t)j - 1] + fham[(size_t)j]) *
                                  (g.node(j) - g.node(j - 1));
        auto cum_at = [&](double t) {
            if (t <= 0.0) return 0.0;
            if (t >= T) return cumf[(size_t)M];
            const auto& ts = g.nodes();
            auto it = std::upper_bound(ts.begin(), ts.end(), t);
            int j = (int)(it - ts.begin());
            double frac = (t - ts[(size_t)j - 1]) / (ts[(size_t)j] - ts[(size_t)j - 1]);
            return cumf[(size_t)j - 1] + frac * (cumf[(size_t)j] - cumf[(size_t)j - 1]);
        };
        for (int j = 0; j <= M; ++j) {
            double t0 = std::min(g.node(j), T - win);
            if (t0 < 0.0) t0 = 0.0;
            delta_n = std::max(delta_n, cum_at(t0 + win) - cum_at(t0));
        }
    }

    EnergyEstimateReport rep;
    rep.c_tilde_1 = c_tilde_1;
    rep.delta_n = delta_n;
    rep.terms_nonnegative = true;
    rep.min_margin = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= M; ++j) {
        double lhs = term1[(size_t)j] + term2[(size_t)j] + term3[(size_t)j] + term4[(size_t)j];
        double cumf = 0.0;
        for (int i = 1; i <= j; ++i)
            cumf += 0.5 * (fham[(size_t)i - 1] + fham[(size_t)i]) *
                    (g.node(i) - g.node(i - 1));
        double rhs = c_tilde_1 * (u0_l2_norm * u0_l2_norm + cumf) + c_tilde_1 * delta_n;
        rep.t.push_back(g.node(j));
        rep.lhs.push_back(lhs);
        rep.rhs.push_back(rhs);
        rep.min_margin = std::min(rep.min_margin, rhs - lhs);
        if (term1[(size_t)j] < -1e-12 || term2[(size_t)j] < -1e-12 ||
            term3[(size_t)j] < -1e-12 || term4[(size_t)j] < -1e-12)
            rep.terms_nonnegative = false;
    }
    rep.pass = rep.min_margin >= 0.0 && rep.terms_nonnegative;
    return rep;
}

CoercivityReport coercivity_check(const SampledTrajectory& w, const WeightFunction& mu,
                                  int node, int alpha_nodes, double tol) {
    const TimeGrid& g = w.grid();
    if (node < 1 || node > g.size())
        throw ValidationError("coercivity_check: node out of range");
    const double t = g.node(node);
    if (t > 1.0 + 1e-12)
        throw ValidationError("coercivity_check: the inequality requires t <= 1");

    auto rule = alpha_rule(mu, alpha_nodes);
    double lhs = 0.0;
    for (auto& [aq, wq] : rule) {
        auto v = frac_integral(w, 1.0 - aq);
        // int_0^t (d/dtau I^{1-a} w) w dtau = [I^{1-a}w . w]_0^t - int I^{1-a}w . w'
        double boundary = 0.0;
        for (int d = 0; d < w.dim(); ++d) boundary += v.at(node, d) * w.at(node, d);
        double bulk = 0.0;
        for (int i = 0; i < node; ++i) {
            double h = g.node(i + 1) - g.node(i);
            for (int d = 0; d < w.dim(); ++d) {
                double m = (w.at(i + 1, d) - w.at(i, d)) / h;
                bulk += m * 0.5 * (v.at(i, d) + v.at(i + 1, d)) * h;
            }
        }
        lhs += wq * (boundary - bulk);
    }

    const double c_mu = total_mass(mu);
    const double gam = gamma_exponent(mu);
    double wsq = 0.0;
    for (int i = 0; i < node; ++i) {
        double h = g.node(i + 1) - g.node(i);
        for (int d = 0; d < w.dim(); ++d) {
            double va = w.at(i, d), vb = w.at(i + 1, d);
            wsq += h * (va * va + va * vb + vb * vb) / 3.0;
        }
    }
    CoercivityReport rep;
    rep.lhs = lhs;
    rep.rhs = c_mu * (1.0 - gam) / (4.0 * std::tgamma(gam)) * std::pow(t, -gam) * wsq;
    rep.pass = rep.lhs >= rep.rhs - tol * (std::abs(rep.rhs) + 1.0);
    return rep;
}

ContinuityReport continuity_report(const GalerkinSolution& sol,
                                   const WeightExponents& exps) {
    const TimeGrid& g = sol.grid;
    const int M = g.size();
    const int n = sol.modes();
    ContinuityReport rep;
    const bool intmu = exps.intmu_holds();
    const double s = intmu ? 1.0 : 2.0 * (*exps.m) + 1.0;
    rep.regime = intmu ? "H^-1" : "(Hbar^{2m+1})*";
    rep.m = intmu ? 0 : *exps.m;

    auto norm_at = [&](double t) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k) {
            double diff = sol.volterra.coeffs.eval(t, k) - sol.volterra.c0[(size_t)k];
            acc += std::pow(sol.basis.eigenvalue(k), -s) * diff * diff;
        }
        return std::sqrt(acc);
    };
    double u0_norm = 0.0;
    for (int k = 0; k < n; ++k)
        u0_norm += std::pow(sol.basis.eigenvalue(k), -s) * sol.volterra.c0[(size_t)k] *
                   sol.volterra.c0[(size_t)k];
    u0_norm = std::sqrt(u0_norm);

    const double T = g.horizon();
    const double floor = std::max(g.node(4), T * 1e-13);
    for (int i = 1; i <= 22; ++i) {
        double t = T * std::pow(4.0, -i);
        if (t < floor) break;
        rep.sample_t.push_back(t);
        rep.sample_norm.push_back(norm_at(t));
    }
    rep.monotone = true;
    for (size_t i = 1; i < rep.sample_norm.size(); ++i)
        if (rep.sample_norm[i] > rep.sample_norm[i - 1] * 1.02) rep.monotone = false;
    rep.below_threshold =
        !rep.sample_norm.empty() && rep.sample_norm.back() <= 0.1 * u0_norm;

    if (rep.sample_norm.size() >= 3) {
        // least-squares slope of ln(norm) vs ln(t)
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int cnt = 0;
        for (size_t i = 0; i < rep.sample_norm.size(); ++i) {
            if (rep.sample_norm[i] <= 0.0) continue;
            double x = std::log(rep.sample_t[i]), y = std::log(rep.sample_norm[i]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++cnt;
        }
        if (cnt >= 3) rep.fitted_rate = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    }

    // resolvent reconstruction identity on the coefficients
    {
        KernelTable ktab =
            intmu ? make_k_table(sol.mu, g) : make_km_table(sol.mu, *exps.m, g);
        KernelTable gtab = intmu ? make_g_table(sol.mu, g)
                                 : make_gm_table(sol.mu, *exps.m, g);
        SampledTrajectory shifted(g, n);
        for (int j = 0; j <= M; ++j)
            for (int k = 0; k < n; ++k)
                shifted.at(j, k) = sol.coeff(j, k) - sol.volterra.c0[(size_t)k];
        auto y = singular_convolve(ktab, shifted);
        // centered difference quotient, then convolve with the resolvent
        SampledTrajectory z(g, n);
        for (int k = 0; k < n; ++k) {
            z.at(0, k) = (y.at(1, k) - y.at(0, k)) / (g.node(1) - g.node(0));
            for (int j = 1; j < M; ++j) {
                double h1 = g.node(j) - g.node(j - 1);
                double h2 = g.node(j + 1) - g.node(j);
                z.at(j, k) = (-h2 / (h1 * (h1 + h2))) * y.at(j - 1, k) +
                             ((h2 - h1) / (h1 * h2)) * y.at(j, k) +
                             (h1 / (h2 * (h1 + h2))) * y.at(j + 1, k);
            }
            z.at(M, k) = (y.at(M, k) - y.at(M - 1, k)) / (g.node(M) - g.node(M - 1));
        }
        auto rec = singular_convolve(gtab, z);
        double dev = 0.0, scale = std::max(1.0, shifted.max_abs());
        for (int j = 0; j <= M; ++j) {
            if (g.node(j) < 0.05 * T) continue;
            for (int k = 0; k < n; ++k)
                dev = std::max(dev, std::abs(rec.at(j, k) - shifted.at(j, k)));
        }
        rep.reconstruction_deviation = dev / scale;
    }

    rep.pass = rep.monotone && rep.below_threshold &&
               rep.reconstruction_deviation < 1e-3;
    return rep;
}

RegularityTable regularity_monitor(const GalerkinSolution& sol) {
    const TimeGrid& g = sol.grid;
    const int M = g.size();
    const int n = sol.modes();
    RegularityTable tab;
    std::vector<double> h2((size_t)M + 1, 0.0);
    for (int j = 0; j <= M; ++j) {
        double gr = 0.0, hh = 0.0;
        for (int k = 0; k < n; ++k) {
            double c = sol.coeff(j, k);
            double l = sol.basis.eigenvalue(k);
            gr += l * c * c;
            hh += l * l * c * c;
        }
        tab.t.push_back(g.node(j));
        tab.grad_norm2.push_back(gr);
        tab.h2_seminorm2.push_back(hh);
        h2[(size_t)j] = hh;
    }
    for (int j = 1; j <= M; ++j)
        tab.h2_time_integral +=
            0.5 * (h2[(size_t)j - 1] + h2[(size_t)j]) * (g.node(j) - g.node(j - 1));

    double u0_h1 = 0.0;
    for (int k = 0; k < n; ++k)
        u0_h1 += sol.basis.eigenvalue(k) * sol.volterra.c0[(size_t)k] *
                 sol.volterra.c0[(size_t)k];
    double f_l2 = 0.0;
    std::vector<double> Fbuf;
    double prev = 0.0;
    for (int j = 0; j <= M; ++j) {
        sol.F_of_t(g.node(j), Fbuf);
        double cur = 0.0;
        for (int k = 0; k < n; ++k) cur += Fbuf[(size_t)k] * Fbuf[(size_t)k];
        if (j > 0) f_l2 += 0.5 * (prev + cur) * (g.node(j) - g.node(j - 1));
        prev = cur;
    }
    tab.rhs = u0_h1 + f_l2;
    return tab;
}

}  // namespace distcap
