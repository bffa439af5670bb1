#include "distcap/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "distcap/errors.hpp"
#include "distcap/kernels.hpp"
#include "distcap/quadrature.hpp"

namespace distcap {

double Mat::inf_norm() const {
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) row += std::abs((*this)(i, j));
        worst = std::max(worst, row);
    }
    return worst;
}

std::vector<double> solve_shifted(const Mat& A, double w, const std::vector<double>& r) {
    const int n = A.n;
    Mat M(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = (i == j ? 1.0 : 0.0) + w * A(i, j);
    std::vector<double> x = r;
    for (int col = 0; col < n; ++col) {
        int p = col;
        for (int i = col + 1; i < n; ++i)
            if (std::abs(M(i, col)) > std::abs(M(p, col))) p = i;
        if (p != col) {
            for (int j = 0; j < n; ++j) std::swap(M(col, j), M(p, j));
            std::swap(x[(size_t)col], x[(size_t)p]);
        }
        if (M(col, col) == 0.0) throw PicardStall("solve_shifted: singular shifted matrix");
        for (int i = col + 1; i < n; ++i) {
            double f = M(i, col) / M(col, col);
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j) M(i, j) -= f * M(col, j);
            x[(size_t)i] -= f * x[(size_t)col];
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = x[(size_t)i];
        for (int j = i + 1; j < n; ++j) s -= M(i, j) * x[(size_t)j];
        x[(size_t)i] = s / M(i, i);
    }
    return x;
}

// ---------------------------------------------------------------------------
// basis
// ---------------------------------------------------------------------------

SpectralBasis SpectralBasis::eigenpairs(const Domain& domain, int n) {
    if (n < 1) throw UnsupportedDomain("eigenpairs: need n >= 1 modes");
    SpectralBasis b;
    b.domain_ = domain;
    b.n_ = n;

    if (std::holds_alternative<Interval>(domain)) {
        const double L = std::get<Interval>(domain).length;
        if (!(L > 0.0)) throw UnsupportedDomain("eigenpairs: interval length must be positive");
        b.ix_.resize((size_t)n);
        b.iy_.assign((size_t)n, 0);
        b.lambda_.resize((size_t)n);
        for (int k = 0; k < n; ++k) {
            b.ix_[(size_t)k] = k + 1;
            double kk = (k + 1) * M_PI / L;
            b.lambda_[(size_t)k] = kk * kk;
        }
        const int panels = std::max(12, n);
        const GaussRule& rule = gauss_legendre(16);
        for (int p = 0; p < panels; ++p) {
            double a = L * p / panels, c = L * (p + 1) / panels;
            for (int q = 0; q < 16; ++q) {
                b.qx_.push_back(0.5 * (a + c) + 0.5 * (c - a) * rule.nodes[q]);
                b.qy_.push_back(0.0);
                b.qw_.push_back(0.5 * (c - a) * rule.weights[q]);
            }
        }
    } else {
        const auto& R = std::get<Rectangle>(domain);
        if (!(R.lx > 0.0) || !(R.ly > 0.0))
            throw UnsupportedDomain("eigenpairs: rectangle sides must be positive");
        int K = (int)std::ceil(std::sqrt((double)n)) + 3;
        struct ModeEntry { double lambda; int i, j; };
        std::vector<ModeEntry> modes;
        for (int i = 1; i <= K; ++i)
            for (int j = 1; j <= K; ++j) {
                double l = std::pow(i * M_PI / R.lx, 2) + std::pow(j * M_PI / R.ly, 2);
                modes.push_back({l, i, j});
            }
        std::sort(modes.begin(), modes.end(), [](const ModeEntry& a, const ModeEntry& c) {
            if (a.lambda != c.lambda) return a.lambda < c.lambda;
            if (a.i != c.i) return a.i < c.i;
            return a.j < c.j;
        });
        b.ix_.resize((size_t)n);
        b.iy_.resize((size_t)n);
        b.lambda_.resize((size_t)n);
        int max_idx = 1;
        for (int k = 0; k < n; ++k) {
            b.ix_[(size_t)k] = modes[(size_t)k].i;
            b.iy_[(size_t)k] = modes[(size_t)k].j;
            b.lambda_[(size_t)k] = modes[(size_t)k].lambda;
            max_idx = std::max({max_idx, modes[(size_t)k].i, modes[(size_t)k].j});
        }
        const int panels = std::max(8, max_idx + 2);
        const GaussRule& rule = gauss_legendre(16);
        std::vector<double> gx, gwx, gy, gwy;
        for (int p = 0; p < panels; ++p) {
            double a = R.lx * p / panels, c = R.lx * (p + 1) / panels;
            for (int q = 0; q < 16; ++q) {
                gx.push_back(0.5 * (a + c) + 0.5 * (c - a) * rule.nodes[q]);
                gwx.push_back(0.5 * (c - a) * rule.weights[q]);
            }
            a = R.ly * p / panels;
            c = R.ly * (p + 1) / panels;
            for (int q = 0; q < 16; ++q) {
                gy.push_back(0.5 * (a + c) + 0.5 * (c - a) * rule.nodes[q]);
                gwy.push_back(0.5 * (c - a) * rule.weights[q]);
            }
        }
        for (size_t i = 0; i < gx.size(); ++i)
            for (size_t j = 0; j < gy.size(); ++j) {
                b.qx_.push_back(gx[i]);
                b.qy_.push_back(gy[j]);
                b.qw_.push_back(gwx[i] * gwy[j]);
            }
    }

    const size_t Q = b.qw_.size();
    b.phi_.resize((size_t)n * Q);
    b.dphix_.resize((size_t)n * Q);
    b.dphiy_.resize((size_t)n * Q);
    for (int k = 0; k < n; ++k)
        for (size_t q = 0; q < Q; ++q) {
            b.phi_[(size_t)k * Q + q] = b.eval(k, b.qx_[q], b.qy_[q]);
            b.dphix_[(size_t)k * Q + q] = b.grad_x(k, b.qx_[q], b.qy_[q]);
            b.dphiy_[(size_t)k * Q + q] = b.grad_y(k, b.qx_[q], b.qy_[q]);
        }

    // orthonormality under the domain quadrature
    for (int k = 0; k < n; ++k)
        for (int m = k; m < n; ++m) {
            double s = 0.0;
            for (size_t q = 0; q < Q; ++q)
                s += b.qw_[q] * b.phi_[(size_t)k * Q + q] * b.phi_[(size_t)m * Q + q];
            double target = (k == m) ? 1.0 : 0.0;
            if (std::abs(s - target) > 1e-12)
                throw QuadratureFailure("eigenpairs: basis not orthonormal under quadrature");
        }
    return b;
}

double SpectralBasis::eval(int k, double x, double y) const {
    if (is_interval()) {
        const double L = std::get<Interval>(domain_).length;
        return std::sqrt(2.0 / L) * std::sin(ix_[(size_t)k] * M_PI * x / L);
    }
    const auto& R = std::get<Rectangle>(domain_);
    return 2.0 / std::sqrt(R.lx * R.ly) * std::sin(ix_[(size_t)k] * M_PI * x / R.lx) *
           std::sin(iy_[(size_t)k] * M_PI * y / R.ly);
}

double SpectralBasis::grad_x(int k, double x, double y) const {
    if (is_interval()) {
        const double L = std::get<Interval>(domain_).length;
        const double w = ix_[(size_t)k] * M_PI / L;
        return std::sqrt(2.0 / L) * w * std::cos(w * x);
    }
    const auto& R = std::get<Rectangle>(domain_);
    const double w = ix_[(size_t)k] * M_PI / R.lx;
    return 2.0 / std::sqrt(R.lx * R.ly) * w * std::cos(w * x) *
           std::sin(iy_[(size_t)k] * M_PI * y / R.ly);
}

double SpectralBasis::grad_y(int k, double x, double y) const {
    if (is_interval()) return 0.0;
    const auto& R = std::get<Rectangle>(domain_);
    const double w = iy_[(size_t)k] * M_PI / R.ly;
    return 2.0 / std::sqrt(R.lx * R.ly) * std::sin(ix_[(size_t)k] * M_PI * x / R.lx) * w *
           std::cos(w * y);
}

double SpectralBasis::integrate(const std::function<double(double, double)>& f) const {
    double s = 0.0;
    for (size_t q = 0; q < qw_.size(); ++q) s += qw_[q] * f(qx_[q], qy_[q]);
    return s;
}

// ---------------------------------------------------------------------------
// coefficients
// ---------------------------------------------------------------------------

EllipticCoefficients EllipticCoefficients::laplacian() {
    EllipticCoefficients c;
    auto one = [](double, double, double) { return 1.0; };
    auto zero = [](double, double, double) { return 0.0; };
    c.a11 = one;
    c.a12 = zero;
    c.a22 = one;
    c.b1 = zero;
    c.b2 = zero;
    c.c = zero;
    c.f = zero;
    c.time_constant = true;
    return c;
}

void validate_ellipticity(const EllipticCoefficients& coeffs, const SpectralBasis& basis,
                          double horizon, double tol, int probes, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const bool oneD = basis.is_interval();
    double lx = oneD ? std::get<Interval>(basis.domain()).length
                     : std::get<Rectangle>(basis.domain()).lx;
    double ly = oneD ? 0.0 : std::get<Rectangle>(basis.domain()).ly;
    for (int p = 0; p < probes; ++p) {
        double x = lx * U(rng);
        double y = oneD ? 0.0 : ly * U(rng);
        double t = horizon * U(rng);
        double q;
        if (oneD) {
            q = coeffs.a11(x, y, t);
        } else {
            double th = 2.0 * M_PI * U(rng);
            double xi1 = std::cos(th), xi2 = std::sin(th);
            q = coeffs.a11(x, y, t) * xi1 * xi1 + 2.0 * coeffs.a12(x, y, t) * xi1 * xi2 +
                coeffs.a22(x, y, t) * xi2 * xi2;
        }
        if (q < coeffs.lambda_min * (1.0 - tol) - tol ||
            q > coeffs.lambda_max * (1.0 + tol) + tol)
            throw ValidationError("ellipticity: sampled Rayleigh quotient " +
                                  std::to_string(q) + " outside [lambda, Lambda]");
    }
}

namespace {

double bump_raw(double s) {
    double d = 1.0 - s * s;
    return d > 0.0 ? std::exp(-1.0 / d) : 0.0;
}

// normalized against the same 16-point rule used in evaluation, so constants
// mollify to themselves exactly
double bump_norm16() {
    static const double norm = [] {
        const GaussRule& rule = gauss_legendre(16);
        double s = 0.0;
        for (int q = 0; q < 16; ++q) s += rule.weights[q] * bump_raw(rule.nodes[q]);
        return s;
    }();
    return norm;
}

enum class Extension { even, zero, odd_zero };

double extended(const std::function<double(double, double, double)>& v, double x, double y,
                double s, double T, Extension ext) {
    if (s >= 0.0 && s <= T) return v(x, y, s);
    switch (ext) {
        case Extension::even:
            return s < 0.0 ? v(x, y, -s) : v(x, y, 2.0 * T - s);
        case Extension::zero:
            return 0.0;
        case Extension::odd_zero:
            if (s < 0.0 && s > -T) return -v(x, y, -s);
            return 0.0;
    }
    return 0.0;
}

double mollify_at(const std::function<double(double, double, double)>& v, double x,
                  double y, double t, double eps, double T, Extension ext) {
    const GaussRule& rule = gauss_legendre(16);
    std::vector<double> cuts{-1.0, 1.0};
    for (double u : {t / eps, (t - T) / eps, (t + T) / eps})
        if (u > -1.0 && u < 1.0) cuts.push_back(u);
    std::sort(cuts.begin(), cuts.end());
    double acc = 0.0;
    for (size_t p = 0; p + 1 < cuts.size(); ++p) {
        double a = cuts[p], b = cuts[p + 1];
        if (b <= a) continue;
        for (int q = 0; q < 16; ++q) {
            double u = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[q];
            double w = 0.5 * (b - a) * rule.weights[q];
            acc += w * bump_raw(u) * extended(v, x, y, t - eps * u, T, ext);
        }
    }
    return acc / bump_norm16();
}

std::function<double(double, double, double)> mollified_fn(
    std::function<double(double, double, double)> v, double eps, double T, Extension ext) {
    return [v = std::move(v), eps, T, ext](double x, double y, double t) {
        return mollify_at(v, x, y, t, eps, T, ext);
    };
}

}  // namespace

EllipticCoefficients mollify(const EllipticCoefficients& coeffs, int n, double horizon) {
    if (n < 1) throw EpsilonTooLarge("mollify: index must be >= 1");
    const double eps = 1.0 / n;
    if (!(eps < horizon))
        throw EpsilonTooLarge("mollify: 1/n = " + std::to_string(eps) +
                              " must be below the horizon " + std::to_string(horizon));
    if (coeffs.time_constant) return coeffs;  // convolution with constants is exact

    EllipticCoefficients out = coeffs;
    out.a11 = mollified_fn(coeffs.a11, eps, horizon, Extension::even);
    out.a12 = mollified_fn(coeffs.a12, eps, horizon, Extension::even);
    out.a22 = mollified_fn(coeffs.a22, eps, horizon, Extension::even);
    out.b1 = mollified_fn(coeffs.b1, eps, horizon, Extension::zero);
    out.b2 = mollified_fn(coeffs.b2, eps, horizon, Extension::zero);
    out.c = mollified_fn(coeffs.c, eps, horizon, Extension::zero);
    out.f = mollified_fn(coeffs.f, eps, horizon, Extension::odd_zero);
    return out;
}

void assemble_system(const SpectralBasis& basis, const EllipticCoefficients& coeffs,
                     double t, Mat& A, std::vector<double>& F) {
    const int n = basis.size();
    const int Q = basis.quad_size();
    if (A.n != n) A = Mat(n);
    std::fill(A.a.begin(), A.a.end(), 0.0);
    F.assign((size_t)n, 0.0);
    const bool oneD = basis.is_interval();

    for (int q = 0; q < Q; ++q) {
        const double x = basis.quad_x(q), y = basis.quad_y(q), w = basis.quad_w(q);
        const double a11 = coeffs.a11(x, y, t);
        const double a12 = oneD ? 0.0 : coeffs.a12(x, y, t);
        const double a22 = oneD ? 0.0 : coeffs.a22(x, y, t);
        const double b1 = coeffs.b1(x, y, t);
        const double b2 = oneD ? 0.0 : coeffs.b2(x, y, t);
        const double cc = coeffs.c(x, y, t);
        const double fv = coeffs.f(x, y, t);
        if (!std::isfinite(a11) || !std::isfinite(fv))
            throw QuadratureFailure("assemble_system: non-finite coefficient sample");
        for (int m = 0; m < n; ++m) {
            const double pm = basis.phi(m, q);
            const double gmx = basis.dphix(m, q);
            const double gmy = basis.dphiy(m, q);
            F[(size_t)m] += w * fv * pm;
            for (int k = 0; k < n; ++k) {
                const double pk = basis.phi(k, q);
                const double gkx = basis.dphix(k, q);
                const double gky = basis.dphiy(k, q);
                double flux = a11 * gkx * gmx;
                if (!oneD) flux += a12 * (gkx * gmy + gky * gmx) + a22 * gky * gmy;
                double lower = (b1 * gkx + b2 * gky + cc * pk) * pm;
                A(m, k) += w * (flux - lower);
            }
        }
    }
}

std::vector<double> project_initial(const std::function<double(double, double)>& u0,
                                    const SpectralBasis& basis) {
    const int n = basis.size();
    const int Q = basis.quad_size();
    std::vector<double> c((size_t)n, 0.0);
    double norm2 = 0.0;
    for (int q = 0; q < Q; ++q) {
        const double v = u0(basis.quad_x(q), basis.quad_y(q));
        norm2 += basis.quad_w(q) * v * v;
        for (int k = 0; k < n; ++k) c[(size_t)k] += basis.quad_w(q) * v * basis.phi(k, q);
    }
    double sum2 = 0.0;
    for (double v : c) sum2 += v * v;
    if (sum2 > norm2 + 1e-10 * (1.0 + norm2))
        throw QuadratureFailure("project_initial: Bessel inequality violated");
    return c;
}

// ---------------------------------------------------------------------------
// Volterra march
// ---------------------------------------------------------------------------

VolterraSolution solve_volterra(const KernelTable& gtab,
                                const std::function<void(double, Mat&)>& A_of_t,
                                const std::function<void(double, std::vector<double>&)>& F_of_t,
                                const std::vector<double>& c0, const TimeGrid& grid,
                                double picard_tol) {
    if (grid.size() < 64)
        throw ValidationError("solve_volterra: grid must resolve the singularity (M >= 64)");
    const int M = grid.size();
    const int n = (int)c0.size();

    ConvolutionPlan plan(gtab, grid);

    SampledTrajectory Ftraj(grid, n);
    std::vector<double> Fbuf;
    for (int j = 0; j <= M; ++j) {
        F_of_t(grid.node(j), Fbuf);
        for (int k = 0; k < n; ++k) Ftraj.at(j, k) = Fbuf[(size_t)k];
    }
    SampledTrajectory gF = plan.apply(Ftraj);

    VolterraSolution out;
    out.coeffs = SampledTrajectory(grid, n);
    out.c0 = c0;
    out.segments.reserve((size_t)M);
    for (int k = 0; k < n; ++k) out.coeffs.at(0, k) = c0[(size_t)k];

    std::vector<std::vector<double>> history((size_t)M + 1, std::vector<double>((size_t)n));
    Mat Aj(n);
    A_of_t(grid.node(0), Aj);
    for (int r = 0; r < n; ++r) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += Aj(r, k) * c0[(size_t)k];
        history[0][(size_t)r] = s;
    }

    std::vector<double> rhs((size_t)n), iter((size_t)n), next((size_t)n);

    for (int j = 1; j <= M; ++j) {
        const auto& row = plan.row(j);
        A_of_t(grid.node(j), Aj);
        const double wself = row[(size_t)j];

        for (int r = 0; r < n; ++r) {
            double acc = c0[(size_t)r] + gF.at(j, r);
            for (int i = 0; i < j; ++i) acc -= row[(size_t)i] * history[(size_t)i][(size_t)r];
            rhs[(size_t)r] = acc;
        }

        SegmentLog log;
        log.node = j;
        log.length = grid.node(j) - grid.node(j - 1);
        log.rho_bound = wself * Aj.inf_norm();

        if (log.rho_bound < 0.5) {
            for (int r = 0; r < n; ++r) iter[(size_t)r] = out.coeffs.at(j - 1, r);
            double prev_delta = -1.0;
            int stalls = 0;
            for (int it = 0; it < 200; ++it) {
                double delta = 0.0, scale = 0.0;
                for (int r = 0; r < n; ++r) {
                    double s = 0.0;
                    for (int k = 0; k < n; ++k) s += Aj(r, k) * iter[(size_t)k];
                    next[(size_t)r] = rhs[(size_t)r] - wself * s;
                    delta = std::max(delta, std::abs(next[(size_t)r] - iter[(size_t)r]));
                    scale = std::max(scale, std::abs(next[(size_t)r]));
                }
                iter.swap(next);
                log.iterations = it + 1;
                if (!std::isfinite(delta))
                    throw PicardStall("solve_volterra: non-finite iterate at node " +
                                      std::to_string(j));
                if (prev_delta > 0.0 && delta > 0.0) {
                    log.rho_measured = std::max(log.rho_measured, delta / prev_delta);
                    if (delta > prev_delta && ++stalls >= 3)
                        throw PicardStall("solve_volterra: Picard diverging at node " +
                                          std::to_string(j) + ", factor " +
                                          std::to_string(delta / prev_delta));
                }
                prev_delta = delta;
                if (delta <= picard_tol * std::max(1.0, scale)) break;
            }
        } else {
            iter = solve_shifted(Aj, wself, rhs);
            log.implicit = true;
            log.iterations = 1;
        }
        out.max_rho_measured = std::max(out.max_rho_measured, log.rho_measured);
        out.segments.push_back(log);

        for (int r = 0; r < n; ++r) {
            if (!std::isfinite(iter[(size_t)r]))
                throw PicardStall("solve_volterra: non-finite coefficient at node " +
                                  std::to_string(j));
            out.coeffs.at(j, r) = iter[(size_t)r];
        }
        for (int r = 0; r < n; ++r) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += Aj(r, k) * iter[(size_t)k];
            history[(size_t)j][(size_t)r] = s;
        }
    }

    // sampled C^1 norm of A and the continuation segment length
    {
        Mat A1(n), A2(n);
        double amax = 0.0, adot = 0.0;
        A_of_t(0.0, A1);
        amax = A1.inf_norm();
        if (!out.segments.empty()) {
            int samples = std::min(4 * M, 512);
            double dt = grid.horizon() / samples;
            for (int s = 1; s <= samples; ++s) {
                A_of_t(s * dt, A2);
                amax = std::max(amax, A2.inf_norm());
                Mat D(n);
                for (size_t i = 0; i < D.a.size(); ++i)
                    D.a[i] = (A2.a[i] - A1.a[i]) / dt;
                adot = std::max(adot, D.inf_norm());
                std::swap(A1, A2);
            }
        }
        out.a_norm_c1 = amax + adot;
    }
    return out;
}

// ---------------------------------------------------------------------------
// solution-level helpers
// ---------------------------------------------------------------------------

double reconstruct(const GalerkinSolution& sol, double x, double y, double t) {
    double s = 0.0;
    for (int k = 0; k < sol.modes(); ++k)
        s += sol.volterra.coeffs.eval(t, k) * sol.basis.eval(k, x, y);
    return s;
}

double weak_residual(const GalerkinSolution& sol, const KernelTable& ktab, int m_index,
                     int node) {
    const TimeGrid& grid = sol.grid;
    const int n = sol.modes();
    const int M = grid.size();
    if (node < 1 || node > M) throw ValidationError("weak_residual: node out of range");

    double time_term = 0.0;
    if (m_index < n) {
        SampledTrajectory cm(grid, 1);
        for (int j = 0; j <= M; ++j)
            cm.at(j) = sol.coeff(j, m_index) - sol.volterra.c0[(size_t)m_index];
        SampledTrajectory y = singular_convolve(ktab, cm);
        if (node < M) {
            double h1 = grid.node(node) - grid.node(node - 1);
            double h2 = grid.node(node + 1) - grid.node(node);
            time_term = (-h2 / (h1 * (h1 + h2))) * y.at(node - 1) +
                        ((h2 - h1) / (h1 * h2)) * y.at(node) +
                        (h1 / (h2 * (h1 + h2))) * y.at(node + 1);
        } else {
            time_term = (y.at(M) - y.at(M - 1)) / (grid.node(M) - grid.node(M - 1));
        }
    }

    double elliptic = 0.0, source = 0.0;
    const double t = grid.node(node);
    if (m_index < n) {
        Mat A(n);
        std::vector<double> F;
        sol.A_of_t(t, A);
        sol.F_of_t(t, F);
        for (int k = 0; k < n; ++k) elliptic += A(m_index, k) * sol.coeff(node, k);
        source = F[(size_t)m_index];
    } else {
        if (!sol.mollified_coeffs)
            throw ValidationError("weak_residual: unresolved test mode needs coefficients");
        SpectralBasis ext = SpectralBasis::eigenpairs(sol.basis.domain(), m_index + 1);
        Mat A(m_index + 1);
        std::vector<double> F;
        assemble_system(ext, *sol.mollified_coeffs, t, A, F);
        for (int k = 0; k < n; ++k) elliptic += A(m_index, k) * sol.coeff(node, k);
        source = F[(size_t)m_index];
    }
    return time_term + elliptic - source;
}

double volterra_equation_residual(const GalerkinSolution& sol, const KernelTable& gtab) {
    const TimeGrid& grid = sol.grid;
    const int M = grid.size();
    const int n = sol.modes();
    ConvolutionPlan plan(gtab, grid);

    SampledTrajectory h(grid, n), F(grid, n);
    Mat A(n);
    std::vector<double> Fbuf;
    for (int j = 0; j <= M; ++j) {
        sol.A_of_t(grid.node(j), A);
        sol.F_of_t(grid.node(j), Fbuf);
        for (int r = 0; r < n; ++r) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += A(r, k) * sol.coeff(j, k);
            h.at(j, r) = s;
            F.at(j, r) = Fbuf[(size_t)r];
        }
    }
    auto gh = plan.apply(h);
    auto gF = plan.apply(F);
    double worst = 0.0;
    for (int j = 0; j <= M; ++j)
        for (int r = 0; r < n; ++r) {
            double lhs = sol.coeff(j, r);
            double rhs = sol.volterra.c0[(size_t)r] - gh.at(j, r) + gF.at(j, r);
            worst = std::max(worst, std::abs(lhs - rhs));
        }
    return worst;
}

}  // namespace distcap
