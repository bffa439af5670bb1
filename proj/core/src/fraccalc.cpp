#include "distcap/fraccalc.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "distcap/errors.hpp"
#include "distcap/quadrature.hpp"

namespace distcap {

namespace {

// int_a^b tau^{s-1} dtau, stable when (b-a) << a. s = 0 gives the log moment
// (the k-kernel of a weight whose support reaches alpha = 1 has sigma = 0).
double power_moment(double a, double b, double s) {
    if (std::abs(s) < 1e-13) {
        if (a <= 0.0) throw NonPositiveTime("power_moment: log moment needs a > 0");
        return std::log1p((b - a) / a);
    }
    if (a <= 0.0) return std::pow(b, s) / s;
    return std::pow(a, s) * std::expm1(s * std::log1p((b - a) / a)) / s;
}

void check_alpha_integral(double alpha) {
    if (!(alpha > 0.0) || alpha > 1.0)
        throw AlphaOutOfRange("frac_integral: alpha must be in (0,1], got " +
                              std::to_string(alpha));
}

// Cubic Lagrange coefficients (in the local variable x = tau - t_lo) through
// four nodes; returns e[0..3] with f(tau) = sum e_k x^k.
std::array<double, 4> cubic_coeffs(const double* ts, const double* fs, double t_lo) {
    // divided differences
    double x0 = ts[0] - t_lo, x1 = ts[1] - t_lo, x2 = ts[2] - t_lo, x3 = ts[3] - t_lo;
    double d01 = (fs[1] - fs[0]) / (x1 - x0);
    double d12 = (fs[2] - fs[1]) / (x2 - x1);
    double d23 = (fs[3] - fs[2]) / (x3 - x2);
    double d012 = (d12 - d01) / (x2 - x0);
    double d123 = (d23 - d12) / (x3 - x1);
    double d0123 = (d123 - d012) / (x3 - x0);
    // Newton form -> monomials
    std::array<double, 4> e{};
    e[0] = fs[0] - d01 * x0 + d012 * x0 * x1 - d0123 * x0 * x1 * x2;
    e[1] = d01 - d012 * (x0 + x1) + d0123 * (x0 * x1 + x0 * x2 + x1 * x2);
    e[2] = d012 - d0123 * (x0 + x1 + x2);
    e[3] = d0123;
    return e;
}

}  // namespace

SampledTrajectory frac_integral(const SampledTrajectory& f, double alpha,
                                int interp_order) {
    check_alpha_integral(alpha);
    const TimeGrid& g = f.grid();
    const int M = g.size();
    const int dim = f.dim();
    SampledTrajectory out(g, dim);
    const double inv_gamma = 1.0 / std::tgamma(alpha);

    if (interp_order == 1) {
        for (int j = 1; j <= M; ++j) {
            const double tj = g.node(j);
            for (int d = 0; d < dim; ++d) {
                double acc = 0.0;
                for (int i = 0; i < j; ++i) {
                    const double b = tj - g.node(i);
                    const double a = tj - g.node(i + 1);
                    const double h = g.node(i + 1) - g.node(i);
                    const double m = (f.at(i + 1, d) - f.at(i, d)) / h;
                    const double c0 = f.at(i, d) + m * b;  // value at s = 0
                    const double p0 = power_moment(a, b, alpha);
                    const double p1 = power_moment(a, b, alpha + 1.0);
                    acc += c0 * p0 - m * p1;
                }
                out.at(j, d) = acc * inv_gamma;
            }
        }
        return out;
    }
    if (interp_order != 3)
        throw AlphaOutOfRange("frac_integral: interp_order must be 1 or 3");
    if (M < 3) return frac_integral(f, alpha, 1);

    // local cubic reconstruction per panel
    for (int j = 1; j <= M; ++j) {
        const double tj = g.node(j);
        for (int d = 0; d < dim; ++d) {
            double acc = 0.0;
            for (int i = 0; i < j; ++i) {
                int s0 = std::clamp(i - 1, 0, std::max(0, M - 3));
                double ts[4], fs[4];
                for (int k = 0; k < 4; ++k) {
                    ts[k] = g.node(s0 + k);
                    fs[k] = f.at(s0 + k, d);
                }
                auto e = cubic_coeffs(ts, fs, g.node(i));
                // f(tau) = sum e_k x^k with x = tau - t_i; substitute
                // x = (tj - t_i) - s, s = tj - tau in [a, b]:
                const double b = tj - g.node(i);
                const double a = tj - g.node(i + 1);
                const double X = b;  // tj - t_i
                // expand sum e_k (X - s)^k in powers of s
                double c[4];
                c[0] = e[0] + e[1] * X + e[2] * X * X + e[3] * X * X * X;
                c[1] = -(e[1] + 2.0 * e[2] * X + 3.0 * e[3] * X * X);
                c[2] = e[2] + 3.0 * e[3] * X;
                c[3] = -e[3];
                for (int k = 0; k < 4; ++k)
                    acc += c[k] * power_moment(a, b, alpha + k);
            }
            out.at(j, d) = acc * inv_gamma;
        }
    }
    return out;
}

SampledTrajectory rl_derivative(const SampledTrajectory& f, double alpha) {
    if (alpha < 0.0 || alpha >= 1.0)
        throw AlphaOutOfRange("rl_derivative: alpha must be in [0,1), got " +
                              std::to_string(alpha));
    if (f.grid().size() < 2)
        throw AlphaOutOfRange("rl_derivative: need at least two panels");
    if (alpha == 0.0) return f;

    const double beta = 1.0 - alpha;
    const TimeGrid& g = f.grid();
    const int M = g.size();
    const int dim = f.dim();
    SampledTrajectory out(g, dim);
    const double inv_gamma = 1.0 / std::tgamma(beta);

    for (int j = 1; j <= M; ++j) {
        const double tj = g.node(j);
        for (int d = 0; d < dim; ++d) {
            double acc = 0.0;
            // interior panels: d/dt of the fixed-limit panel integrals
            for (int i = 0; i + 1 < j; ++i) {
                const double b = tj - g.node(i);
                const double a = tj - g.node(i + 1);
                const double h = g.node(i + 1) - g.node(i);
                const double m = (f.at(i + 1, d) - f.at(i, d)) / h;
                const double dbm1 = power_moment(a, b, beta - 1.0) * (beta - 1.0);
                const double db = power_moment(a, b, beta) * beta;
                acc += f.at(i, d) * dbm1 + m * (db / beta + b * dbm1 - db);
            }
            // last panel, moving upper limit
            {
                const double h = tj - g.node(j - 1);
                const double m = (f.at(j, d) - f.at(j - 1, d)) / h;
                acc += f.at(j - 1, d) * std::pow(h, beta - 1.0) +
                       m * std::pow(h, beta) / beta;
            }
            out.at(j, d) = acc * inv_gamma;
        }
    }
    // node 0 is singular for f(0) != 0; report 0 (clients use Caputo shifts)
    return out;
}

namespace {

SampledTrajectory discrete_derivative(const SampledTrajectory& f) {
    const TimeGrid& g = f.grid();
    const int M = g.size();
    SampledTrajectory out(g, f.dim());
    for (int d = 0; d < f.dim(); ++d) {
        out.at(0, d) = (f.at(1, d) - f.at(0, d)) / (g.node(1) - g.node(0));
        for (int j = 1; j < M; ++j) {
            // 3-point first derivative on a nonuniform grid
            const double h1 = g.node(j) - g.node(j - 1);
            const double h2 = g.node(j + 1) - g.node(j);
            out.at(j, d) = (-h2 / (h1 * (h1 + h2))) * f.at(j - 1, d) +
                           ((h2 - h1) / (h1 * h2)) * f.at(j, d) +
                           (h1 / (h2 * (h1 + h2))) * f.at(j + 1, d);
        }
        out.at(M, d) = (f.at(M, d) - f.at(M - 1, d)) / (g.node(M) - g.node(M - 1));
    }
    return out;
}

}  // namespace

SampledTrajectory caputo(const SampledTrajectory& f, double alpha) {
    if (alpha < 0.0 || alpha > 1.0)
        throw AlphaOutOfRange("caputo: alpha must be in [0,1]");
    SampledTrajectory shifted = f;
    for (int j = 0; j <= f.grid().size(); ++j)
        for (int d = 0; d < f.dim(); ++d) shifted.at(j, d) -= f.initial(d);
    if (alpha == 1.0) return discrete_derivative(shifted);
    return rl_derivative(shifted, alpha);
}

SampledTrajectory distributed_caputo(const SampledTrajectory& f, const WeightFunction& mu,
                                     int alpha_nodes) {
    const TimeGrid& g = f.grid();
    SampledTrajectory out(g, f.dim());
    auto [lo, hi] = mu.support_hint();
    const auto& part = mu.partition();
    std::vector<std::pair<double, double>> panels;
    for (size_t i = 0; i + 1 < part.size(); ++i) {
        double a = std::max(part[i], lo), b = std::min(part[i + 1], hi);
        if (b > a) panels.emplace_back(a, b);
    }
    double width = 0.0;
    for (auto& p : panels) width += p.second - p.first;
    for (auto& [a, b] : panels) {
        int n = std::max(4, static_cast<int>(std::lround(alpha_nodes * (b - a) / width)));
        const GaussRule& rule = gauss_legendre(n);
        for (int q = 0; q < n; ++q) {
            const double aq = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[q];
            const double wq = 0.5 * (b - a) * rule.weights[q] * mu(aq);
            if (wq == 0.0) continue;
            SampledTrajectory dq = caputo(f, aq);
            for (int j = 0; j <= g.size(); ++j)
                for (int d = 0; d < f.dim(); ++d) out.at(j, d) += wq * dq.at(j, d);
        }
    }
    return out;
}

SampledTrajectory distributed_caputo_via_kernel(const SampledTrajectory& f,
                                                const KernelTable& ktab) {
    SampledTrajectory shifted = f;
    for (int j = 0; j <= f.grid().size(); ++j)
        for (int d = 0; d < f.dim(); ++d) shifted.at(j, d) -= f.initial(d);
    SampledTrajectory conv = singular_convolve(ktab, shifted);
    return discrete_derivative(conv);
}

// ---------------------------------------------------------------------------
// product-integration convolution
// ---------------------------------------------------------------------------

namespace {

// Number of geometric subpanels needed so each has endpoint ratio <= 1.3.
int subpanel_count(double a, double b) {
    if (a <= 0.0) return 1;
    double n = std::ceil(std::log(b / a) / std::log(1.3));
    return std::clamp(static_cast<int>(n), 1, 48);
}

// Quadratic fit through (a, sqrt(ab), b). Thin panels fall back to the
// secant fit: their width cannot support a curvature estimate against
// interpolation noise, and the quadratic correction is O(width^2) there.
struct SmoothQuad {
    double s0, s1, s2;  // s(tau) ~ s0 + s1 tau + s2 tau^2
};

template <typename F>
SmoothQuad fit_quadratic(const F& f, double a, double b) {
    const double fa = f(a);
    const double fb = f(b);
    if (b - a < 1e-4 * b) {
        const double d = (fb - fa) / (b - a);
        return {fa - d * a, d, 0.0};
    }
    const double m = std::sqrt(a * b);
    const double fm = f(m);
    const double d1 = (fm - fa) / (m - a);
    const double d2 = (fb - fm) / (b - m);
    const double c2 = (d2 - d1) / (b - a);
    return {fa - d1 * a + c2 * a * m, d1 - c2 * (a + m), c2};
}

SmoothQuad fit_smooth(const KernelTable& table, double a, double b) {
    return fit_quadratic([&](double x) { return table.smooth_at(x); }, a, b);
}

}  // namespace

ConvolutionPlan::ConvolutionPlan(const KernelTable& table, const TimeGrid& grid)
    : grid_(grid) {
    const double Tt = table.grid().horizon();
    if (std::abs(Tt - grid.horizon()) > 1e-12 * std::max(Tt, grid.horizon()))
        throw GridMismatch("ConvolutionPlan: table horizon " + std::to_string(Tt) +
                           " != trajectory horizon " + std::to_string(grid.horizon()));
    const int M = grid.size();
    const double sigma = table.sigma();
    // below this lag the tabulation is too coarse; integrate through the
    // exact partial moments instead
    const double head_cut =
        table.has_moments() ? table.grid().node(std::min(table.grid().size(), 24)) : 0.0;
    rows_.resize(static_cast<size_t>(M) + 1);
    rows_[0] = {0.0};

    for (int j = 1; j <= M; ++j) {
        auto& row = rows_[static_cast<size_t>(j)];
        row.assign(static_cast<size_t>(j) + 1, 0.0);
        const double tj = grid.node(j);

        // first reflected panel [0, h]: exact kernel moments
        {
            const double h = tj - grid.node(j - 1);
            double m0, m1;
            if (table.has_moments()) {
                m0 = table.moment0(h);
                m1 = table.moment1(h);
            } else {
                // smooth-factor subpanel fallback, extrapolated toward 0
                m0 = m1 = 0.0;
                double lo = h * 1e-10;
                int n = subpanel_count(lo, h);
                double ratio = std::pow(h / lo, 1.0 / n);
                double a = lo;
                for (int s = 0; s < n; ++s) {
                    double b = (s == n - 1) ? h : a * ratio;
                    double sa = table.smooth_at(a), sb = table.smooth_at(b);
                    double S1 = (sb - sa) / (b - a);
                    double S0 = sa - S1 * a;
                    double p0 = power_moment(a, b, sigma);
                    double p1 = power_moment(a, b, sigma + 1.0);
                    double p2 = power_moment(a, b, sigma + 2.0);
                    m0 += S0 * p0 + S1 * p1;
                    m1 += S0 * p1 + S1 * p2;
                    a = b;
                }
            }
            row[static_cast<size_t>(j)] += m0 - m1 / h;
            row[static_cast<size_t>(j) - 1] += m1 / h;
        }

        // remaining panels: tabulated smooth factor, exact t^{sigma-1} moments
        for (int i = j - 2; i >= 0; --i) {
            const double A = tj - grid.node(i + 1);
            const double B = tj - grid.node(i);
            const double h = grid.node(i + 1) - grid.node(i);
            // the reflected panel can collapse below double resolution when
            // t_i << t_j on hard gradings; its kernel mass is negligible then
            if (B - A <= 1e-13 * B) continue;
            double J0 = 0.0, J1 = 0.0;  // J1 is against (tau - A)
            if (B <= head_cut) {
                J0 = table.moment0(B) - table.moment0(A);
                J1 = (table.moment1(B) - table.moment1(A)) - A * J0;
            } else {
                int n = subpanel_count(A, B);
                double ratio = std::pow(B / A, 1.0 / n);
                double a = A;
                for (int s = 0; s < n; ++s) {
                    double b = (s == n - 1) ? B : a * ratio;
                    SmoothQuad sq = fit_smooth(table, a, b);
                    double p0 = power_moment(a, b, sigma);
                    double p1 = power_moment(a, b, sigma + 1.0);
                    double p2 = power_moment(a, b, sigma + 2.0);
                    double p3 = power_moment(a, b, sigma + 3.0);
                    double q0 = sq.s0 * p0 + sq.s1 * p1 + sq.s2 * p2;
                    double q1 = sq.s0 * p1 + sq.s1 * p2 + sq.s2 * p3 - A * q0;
                    J0 += q0;
                    J1 += q1;
                    a = b;
                }
            }
            row[static_cast<size_t>(i)] += J1 / h;
            row[static_cast<size_t>(i) + 1] += J0 - J1 / h;
        }
    }
}

SampledTrajectory ConvolutionPlan::apply(const SampledTrajectory& f) const {
    if (!(f.grid() == grid_))
        throw GridMismatch("ConvolutionPlan::apply: trajectory grid differs from plan grid");
    const int M = grid_.size();
    SampledTrajectory out(grid_, f.dim());
    for (int j = 1; j <= M; ++j) {
        const auto& row = rows_[static_cast<size_t>(j)];
        for (int d = 0; d < f.dim(); ++d) {
            double acc = 0.0;
            for (int i = 0; i <= j; ++i) acc += row[static_cast<size_t>(i)] * f.at(i, d);
            out.at(j, d) = acc;
        }
    }
    return out;
}

SampledTrajectory singular_convolve(const KernelTable& ktab, const SampledTrajectory& f) {
    ConvolutionPlan plan(ktab, f.grid());
    return plan.apply(f);
}

double convolve_kernel_tables(const KernelTable& ka, const KernelTable& kb, double t) {
    if (!ka.provenance().compatible(kb.provenance()))
        throw ProvenanceMismatch("convolve_kernel_tables: tables built from different weights");
    if (!(t > 0.0)) throw NonPositiveTime("convolve_kernel_tables: t must be positive");

    auto half = [&](const KernelTable& K, const KernelTable& L) {
        // int_0^{t/2} K(tau) L(t - tau) dtau
        const double TH = 0.5 * t;
        const double sigma = K.sigma();
        double acc = 0.0;
        // floor: tau in [0, tf], L taken affine there
        double tf = std::min(TH, K.grid().node(1));
        if (K.has_moments() && tf > 0.0) {
            double m0 = K.moment0(tf);
            double m1 = K.moment1(tf);
            double l0 = L.kernel_at(t);
            double slope = (L.kernel_at(t - tf) - l0) / tf;
            acc += l0 * m0 + slope * m1;
        } else {
            // no moment evaluators: integrate from a tiny floor with the
            // extrapolated smooth factor and drop the [0, tf] sliver
            tf = TH * 1e-12;
        }
        // graded subpanels on [tf, t/2]
        const double head_cut =
            K.has_moments() ? K.grid().node(std::min(K.grid().size(), 24)) : 0.0;
        int n = std::max(subpanel_count(tf, TH), 64);
        double ratio = std::pow(TH / tf, 1.0 / n);
        double a = tf;
        auto L_of_tau = [&](double tau) { return L.kernel_at(t - tau); };
        for (int s = 0; s < n; ++s) {
            double b = (s == n - 1) ? TH : a * ratio;
            if (b - a <= 1e-14 * b) {
                a = b;
                continue;
            }
            if (b <= head_cut) {
                // the complement factor barely moves at these lags: secant fit
                double la = L_of_tau(a), lb = L_of_tau(b);
                double L1s = (lb - la) / (b - a);
                double dm0 = K.moment0(b) - K.moment0(a);
                double dm1 = K.moment1(b) - K.moment1(a);
                acc += (la - L1s * a) * dm0 + L1s * dm1;
            } else {
                SmoothQuad lq = fit_quadratic(L_of_tau, a, b);
                SmoothQuad kq = fit_smooth(K, a, b);
                double p[5];
                for (int k = 0; k < 5; ++k) p[k] = power_moment(a, b, sigma + k);
                const double S[3]{kq.s0, kq.s1, kq.s2};
                const double Lc[3]{lq.s0, lq.s1, lq.s2};
                for (int i = 0; i < 3; ++i)
                    for (int k = 0; k < 3; ++k) acc += S[i] * Lc[k] * p[i + k];
            }
            a = b;
        }
        return acc;
    };
    return half(ka, kb) + half(kb, ka);
}

double mittag_leffler(double gamma, double beta, double x) {
    if (!(gamma > 0.0) || !(beta > 0.0))
        throw AlphaOutOfRange("mittag_leffler: gamma and beta must be positive");
    if (std::abs(x) > 50.0)
        throw ArgumentOutOfSupportedRange(
            "mittag_leffler: |x| > 50 needs the asymptotic regime, which is unsupported");
    double sum = 1.0 / std::tgamma(beta);
    double term = sum;
    const int kmax = 100000;
    for (int k = 0; k < kmax; ++k) {
        // term_{k+1} = term_k * x * Gamma(k g + b) / Gamma(k g + g + b)
        double lr = std::lgamma(k * gamma + beta) - std::lgamma(k * gamma + gamma + beta);
        double ratio_mag = std::abs(x) * std::exp(lr);
        term *= x * std::exp(lr);
        sum += term;
        if (std::abs(sum) > 1e290)
            throw ArgumentOutOfSupportedRange("mittag_leffler: series overflow");
        if (ratio_mag < 0.5 && std::abs(term) < 0.5e-15 * std::max(1.0, std::abs(sum)))
            return sum;
    }
    throw ArgumentOutOfSupportedRange("mittag_leffler: series did not settle");
}

}  // namespace distcap
