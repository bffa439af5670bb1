#include "distcap/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "distcap/errors.hpp"
#include "distcap/fraccalc.hpp"
#include "distcap/quadrature.hpp"

namespace distcap {

namespace {

void run_parallel(int n, int threads, const std::function<void(int)>& body) {
    threads = std::max(1, threads);
    if (threads == 1 || n < 4) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    for (auto& th : pool) th.join();
}

// stable 1 - e^{-x}(1+x)
double one_minus_exp1p(double x) {
    if (x < 0.05)
        return x * x * (0.5 - x / 3.0 + x * x / 8.0 - x * x * x / 30.0 +
                        x * x * x * x / 144.0);
    return 1.0 - std::exp(-x) * (1.0 + x);
}

}  // namespace

// ---------------------------------------------------------------------------
// pointwise evaluators
// ---------------------------------------------------------------------------

double kernel_k(const WeightFunction& mu, double t) {
    if (!(t > 0.0)) throw NonPositiveTime("kernel_k: t must be positive");
    const double lnt = std::log(t);
    auto f = [&](double a) {
        double ga = std::tgamma(1.0 - a);
        if (!std::isfinite(ga)) return 0.0;  // alpha -> 1 endpoint maps to 0
        return std::exp(-a * lnt) / ga;
    };
    auto [lo, hi] = mu.support_hint();
    return mu.integrate_against(f, lo, hi, 1e-10);
}

std::complex<double> laplace_k(const WeightFunction& mu, std::complex<double> p) {
    if (p == std::complex<double>(0.0, 0.0) || (p.real() <= 0.0 && p.imag() == 0.0))
        throw OnBranchCut("laplace_k: p on the branch cut (-inf,0]");
    const std::complex<double> lnp = std::log(p);  // principal branch
    auto [lo, hi] = mu.support_hint();
    const auto& part = mu.partition();
    std::vector<double> pts;
    pts.push_back(lo);
    for (double q : part)
        if (q > lo && q < hi) pts.push_back(q);
    pts.push_back(hi);
    auto f = [&](double a) { return std::exp((a - 1.0) * lnp) * mu(a); };
    return integrate_complex_partition(f, pts, 1e-10, 0.0);
}

// ---------------------------------------------------------------------------
// iterated kernels
// ---------------------------------------------------------------------------

TensorSpectrum::TensorSpectrum(const WeightFunction& mu, int m, int nodes_per_dim)
    : m_(m) {
    auto idx = order_index_m(mu);
    if (!idx || *idx != m)
        throw OrderMismatch("TensorSpectrum: order index of mu is " +
                            (idx ? std::to_string(*idx) : std::string("absent")) +
                            ", not " + std::to_string(m));
    if (m > 6)
        throw DimensionTooLarge("TensorSpectrum: tensor quadrature refused for m > 6");
    if (nodes_per_dim <= 0) {
        constexpr int table[7] = {0, 48, 32, 20, 11, 8, 6};
        nodes_per_dim = table[m];
    }

    const double box_hi = 1.0 / (2.0 * m);
    auto [s_lo, s_hi] = mu.support_hint();
    const double lo = std::max(0.0, s_lo);
    const double hi = std::min(box_hi, s_hi);
    if (!(hi > lo))
        throw OrderMismatch("TensorSpectrum: empty support inside [0, 1/(2m)]");

    // 1-D composite Gauss atoms on the smooth panels of mu inside [lo,hi]
    std::vector<std::pair<double, double>> atoms1d;
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
    for (auto& [a, b] : panels) {
        int n = std::max(4, static_cast<int>(std::lround(nodes_per_dim * (b - a) / width)));
        const GaussRule& rule = gauss_legendre(n);
        for (int q = 0; q < n; ++q) {
            double aq = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[q];
            double wq = 0.5 * (b - a) * rule.weights[q] * mu(aq);
            if (wq > 0.0) atoms1d.emplace_back(aq, wq);
        }
    }

    // (m+1)-fold tensor product collapsed onto (beta, weight) atoms
    std::vector<double> bs{0.0}, ws{1.0};
    for (int d = 0; d <= m; ++d) {
        std::vector<double> nb, nw;
        nb.reserve(bs.size() * atoms1d.size());
        nw.reserve(bs.size() * atoms1d.size());
        for (size_t i = 0; i < bs.size(); ++i)
            for (auto& [a, w] : atoms1d) {
                nb.push_back(bs[i] + a);
                nw.push_back(ws[i] * w);
            }
        bs.swap(nb);
        ws.swap(nw);
    }
    betas_ = std::move(bs);
    weights_ = std::move(ws);
    lgamma1mb_.resize(betas_.size());
    beta_min_ = 2.0;
    beta_max_ = 0.0;
    for (size_t i = 0; i < betas_.size(); ++i) {
        lgamma1mb_[i] = std::lgamma(1.0 - betas_[i]);
        beta_min_ = std::min(beta_min_, betas_[i]);
        beta_max_ = std::max(beta_max_, betas_[i]);
    }
}

double TensorSpectrum::kernel(double t) const {
    if (!(t > 0.0)) throw NonPositiveTime("TensorSpectrum::kernel: t must be positive");
    const double lnt = std::log(t);
    double s = 0.0;
    for (size_t i = 0; i < betas_.size(); ++i)
        s += weights_[i] * std::exp(-betas_[i] * lnt - lgamma1mb_[i]);
    return s;
}

double TensorSpectrum::moment0(double eps) const {
    const double lne = std::log(eps);
    double s = 0.0;
    for (size_t i = 0; i < betas_.size(); ++i) {
        double b = betas_[i];
        s += weights_[i] * std::exp((1.0 - b) * lne) / ((1.0 - b) * std::exp(lgamma1mb_[i]));
    }
    return s;
}

double TensorSpectrum::moment1(double eps) const {
    const double lne = std::log(eps);
    double s = 0.0;
    for (size_t i = 0; i < betas_.size(); ++i) {
        double b = betas_[i];
        s += weights_[i] * std::exp((2.0 - b) * lne) / ((2.0 - b) * std::exp(lgamma1mb_[i]));
    }
    return s;
}

std::complex<double> TensorSpectrum::phase_integral(double r) const {
    const double lnr = std::log(r);
    std::complex<double> s{};
    for (size_t i = 0; i < betas_.size(); ++i)
        s += weights_[i] * std::polar(std::exp(betas_[i] * lnr), M_PI * betas_[i]);
    return s;
}

double kernel_k_m(const WeightFunction& mu, int m, double t) {
    TensorSpectrum spec(mu, m);
    return spec.kernel(t);
}

double kernel_k_m_mc(const WeightFunction& mu, int m, double t, int samples,
                     double* standard_error, unsigned seed) {
    if (!(t > 0.0)) throw NonPositiveTime("kernel_k_m_mc: t must be positive");
    auto idx = order_index_m(mu);
    if (!idx || *idx != m)
        throw OrderMismatch("kernel_k_m_mc: order index mismatch");
    const double box_hi = 1.0 / (2.0 * m);
    auto [s_lo, s_hi] = mu.support_hint();
    const double lo = std::max(0.0, s_lo);
    const double hi = std::min(box_hi, s_hi);
    const int dims = m + 1;
    const double vol = std::pow(hi - lo, dims);
    const double lnt = std::log(t);

    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> U(lo, hi);
    double mean = 0.0, m2 = 0.0;
    for (int n = 1; n <= samples; ++n) {
        double beta = 0.0, wprod = 1.0;
        for (int d = 0; d < dims; ++d) {
            double a = U(rng);
            beta += a;
            wprod *= mu(a);
        }
        double val = 0.0;
        if (wprod > 0.0 && beta < 1.0)
            val = wprod * std::exp(-beta * lnt - std::lgamma(1.0 - beta));
        double delta = val - mean;
        mean += delta / n;
        m2 += delta * (val - mean);
    }
    if (standard_error)
        *standard_error = vol * std::sqrt(m2 / (static_cast<double>(samples) - 1.0) /
                                          samples);
    return vol * mean;
}

// ---------------------------------------------------------------------------
// resolvents
// ---------------------------------------------------------------------------

ResolventEvaluator::ResolventEvaluator(const WeightFunction& mu, int power,
                                       InversionOptions opts)
    : symbol_(std::make_shared<LaplaceSymbol>(mu, power)), opts_(opts) {}

double ResolventEvaluator::operator()(double t) const {
    if (!(t > 0.0)) throw NonPositiveTime("ResolventEvaluator: t must be positive");
    const double u_cut = std::log(45.0 / t);
    auto f = [&](double u) {
        return std::exp(-t * std::exp(u) + u) * symbol_->boundary_im(u);
    };
    const double u_center = std::min(std::log(1.0 / t), u_cut - 1.0);
    return march_integral(f, u_center, u_cut + 4.0, opts_.rel_tol);
}

double ResolventEvaluator::moment0(double eps) const {
    auto f = [&](double u) {
        double x = eps * std::exp(u);
        return -std::expm1(-x) * symbol_->boundary_im(u);
    };
    return march_integral(f, std::log(1.0 / eps), 170.0, std::min(opts_.rel_tol, 1e-8));
}

double ResolventEvaluator::moment1(double eps) const {
    auto f = [&](double u) {
        double x = eps * std::exp(u);
        return one_minus_exp1p(x) * symbol_->boundary_im(u) * std::exp(-u);
    };
    return march_integral(f, std::log(1.0 / eps), 170.0, std::min(opts_.rel_tol, 1e-8));
}

double resolvent_g(const WeightFunction& mu, double t, InversionOptions opts) {
    return ResolventEvaluator(mu, 1, opts)(t);
}

double resolvent_g_m(const WeightFunction& mu, int m, double t, InversionOptions opts) {
    auto idx = order_index_m(mu);
    if (!idx || *idx != m)
        throw OrderMismatch("resolvent_g_m: order index of mu is " +
                            (idx ? std::to_string(*idx) : std::string("absent")) +
                            ", not " + std::to_string(m));
    WeightFunction restricted = mu.restricted(0.0, 1.0 / (2.0 * m));
    return ResolventEvaluator(restricted, m + 1, opts)(t);
}

double laplace_invert(const std::function<std::complex<double>(std::complex<double>)>& F,
                      double x, const std::function<double(double)>& boundary_im,
                      InversionOptions opts, std::vector<std::string>* warnings) {
    if (!(x > 0.0)) throw NonPositiveTime("laplace_invert: x must be positive");

    if (warnings) {
        // sampled sanity checks of the decay assumptions on a log grid
        const double phi = M_PI - 0.3;
        double prev_large = -1.0;
        for (double R : {1e2, 1e4, 1e6}) {
            double mag = std::abs(F(std::polar(R, phi)));
            if (prev_large >= 0.0 && mag > prev_large * 0.95)
                warnings->push_back("laplace_invert: |F| not decaying along |p| -> inf");
            prev_large = mag;
        }
        double prev_small = -1.0;
        for (double R : {1e-2, 1e-4, 1e-6}) {
            double mag = R * std::abs(F(std::polar(R, phi)));
            if (prev_small >= 0.0 && mag > prev_small * 0.95)
                warnings->push_back("laplace_invert: |p F| not vanishing as |p| -> 0");
            prev_small = mag;
        }
    }

    const double u_cut = std::log(45.0 / x);
    auto f = [&](double u) {
        return std::exp(-x * std::exp(u) + u) * boundary_im(std::exp(u));
    };
    const double u_center = std::min(std::log(1.0 / x), u_cut - 1.0);
    return march_integral(f, u_center, u_cut + 4.0, opts.rel_tol);
}

// ---------------------------------------------------------------------------
// tables
// ---------------------------------------------------------------------------

double default_grading(double gamma) { return std::clamp(2.0 / gamma, 2.0, 8.0); }

namespace {

// Log-log cubic Hermite table for the partial kernel moments; built once per
// kernel table so the convolution can query them cheaply. The slope callback
// supplies d ln M / d ln eps exactly (= eps K(eps) / M(eps)), which brings the
// interpolation error to the h^4 Hermite rate.
class MomentSpline {
public:
    MomentSpline(const std::function<double(double)>& f,
                 const std::function<double(double)>& log_slope, double eps_lo,
                 double eps_hi, int per_decade = 20) {
        int n = std::max(8, static_cast<int>(std::ceil(
                                 std::log10(eps_hi / eps_lo) * per_decade)));
        x_.resize(static_cast<size_t>(n) + 1);
        y_.resize(x_.size());
        d_.resize(x_.size());
        for (size_t i = 0; i < x_.size(); ++i) {
            double lx = std::log(eps_lo) +
                        (std::log(eps_hi) - std::log(eps_lo)) * static_cast<double>(i) / n;
            x_[i] = lx;
            y_[i] = std::log(f(std::exp(lx)));
            d_[i] = log_slope(std::exp(lx));
        }
    }

    double operator()(double eps) const {
        double lx = std::log(eps);
        if (lx <= x_.front())
            return std::exp(y_.front() + d_.front() * (lx - x_.front()));
        if (lx >= x_.back())
            return std::exp(y_.back() + d_.back() * (lx - x_.back()));
        size_t i = static_cast<size_t>((lx - x_.front()) / (x_[1] - x_[0]));
        i = std::min(i, x_.size() - 2);
        double h = x_[i + 1] - x_[i];
        double s = (lx - x_[i]) / h;
        double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
        double h10 = s * (1 - s) * (1 - s);
        double h01 = s * s * (3 - 2 * s);
        double h11 = s * s * (s - 1);
        return std::exp(h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] +
                        h11 * h * d_[i + 1]);
    }

private:
    std::vector<double> x_, y_, d_;
};

KernelTable build_resolvent_table(const WeightFunction& mu_for_symbol, int power,
                                  const TimeGrid& grid, double sigma,
                                  KernelProvenance prov, InversionOptions opts,
                                  int threads) {
    auto eval = std::make_shared<ResolventEvaluator>(mu_for_symbol, power, opts);
    const int M = grid.size();
    std::vector<double> vals(static_cast<size_t>(M));
    run_parallel(M, threads,
                 [&](int i) { vals[static_cast<size_t>(i)] = (*eval)(grid.node(i + 1)); });
    for (int j = 1; j < M; ++j)
        if (vals[static_cast<size_t>(j)] >
            vals[static_cast<size_t>(j) - 1] * (1.0 + 1e-9))
            throw ValidationError(prov.kind + " table: values must be non-increasing (j=" +
                                  std::to_string(j) + ")");
    KernelTable tab(grid, std::move(vals), sigma, std::move(prov));

    const double eps_lo = grid.node(1) * 0.05;
    const double eps_hi = grid.horizon() * 1.05;
    auto m0 = std::make_shared<MomentSpline>(
        [&](double e) { return eval->moment0(e); },
        [&](double e) { return e * (*eval)(e) / eval->moment0(e); }, eps_lo, eps_hi);
    auto m1 = std::make_shared<MomentSpline>(
        [&](double e) { return eval->moment1(e); },
        [&](double e) { return e * e * (*eval)(e) / eval->moment1(e); }, eps_lo, eps_hi);
    tab.attach_moments([m0](double e) { return (*m0)(e); },
                       [m1](double e) { return (*m1)(e); });
    return tab;
}

}  // namespace

KernelTable make_k_table(const WeightFunction& mu, const TimeGrid& grid) {
    const int M = grid.size();
    std::vector<double> vals(static_cast<size_t>(M));
    for (int j = 1; j <= M; ++j) vals[static_cast<size_t>(j) - 1] = kernel_k(mu, grid.node(j));
    auto [s_lo, s_hi] = mu.support_hint();
    const double sigma = 1.0 - std::min(1.0, s_hi);
    KernelProvenance prov{mu.digest(), "k", 0, 1e-10};
    KernelTable tab(grid, std::move(vals), sigma, prov);
    WeightFunction mu_copy = mu;
    auto m0_exact = [mu_copy](double eps) {
        const double lne = std::log(eps);
        auto f = [&](double a) { return std::exp((1.0 - a) * lne) / std::tgamma(2.0 - a); };
        auto [lo, hi] = mu_copy.support_hint();
        return mu_copy.integrate_against(f, lo, hi, 1e-11);
    };
    auto m1_exact = [mu_copy](double eps) {
        const double lne = std::log(eps);
        auto f = [&](double a) {
            double g = std::tgamma(1.0 - a);
            if (!std::isfinite(g)) return 0.0;
            return std::exp((2.0 - a) * lne) / ((2.0 - a) * g);
        };
        auto [lo, hi] = mu_copy.support_hint();
        return mu_copy.integrate_against(f, lo, hi, 1e-11);
    };
    auto m0 = std::make_shared<MomentSpline>(
        m0_exact, [mu_copy, m0_exact](double e) {
            return e * kernel_k(mu_copy, e) / m0_exact(e);
        },
        grid.node(1) * 0.05, grid.horizon() * 1.05);
    auto m1 = std::make_shared<MomentSpline>(
        m1_exact, [mu_copy, m1_exact](double e) {
            return e * e * kernel_k(mu_copy, e) / m1_exact(e);
        },
        grid.node(1) * 0.05, grid.horizon() * 1.05);
    tab.attach_moments([m0](double e) { return (*m0)(e); },
                       [m1](double e) { return (*m1)(e); });
    return tab;
}

KernelTable make_g_table(const WeightFunction& mu, const TimeGrid& grid,
                         InversionOptions opts, int threads) {
    const double gamma = gamma_exponent(mu);
    KernelProvenance prov{mu.digest(), "g", 0, opts.rel_tol};
    return build_resolvent_table(mu, 1, grid, gamma, std::move(prov), opts, threads);
}

KernelTable make_km_table(const WeightFunction& mu, int m, const TimeGrid& grid) {
    TensorSpectrum spec(mu, m);
    const int M = grid.size();
    std::vector<double> vals(static_cast<size_t>(M));
    for (int j = 1; j <= M; ++j) vals[static_cast<size_t>(j) - 1] = spec.kernel(grid.node(j));
    const double sigma = 1.0 - spec.beta_max();
    KernelProvenance prov{mu.digest(), "k_m", m, 1e-10};
    KernelTable tab(grid, std::move(vals), sigma, prov);
    auto sp = std::make_shared<TensorSpectrum>(std::move(spec));
    auto m0 = std::make_shared<MomentSpline>(
        [sp](double e) { return sp->moment0(e); },
        [sp](double e) { return e * sp->kernel(e) / sp->moment0(e); }, grid.node(1) * 0.05,
        grid.horizon() * 1.05);
    auto m1 = std::make_shared<MomentSpline>(
        [sp](double e) { return sp->moment1(e); },
        [sp](double e) { return e * e * sp->kernel(e) / sp->moment1(e); },
        grid.node(1) * 0.05, grid.horizon() * 1.05);
    tab.attach_moments([m0](double e) { return (*m0)(e); },
                       [m1](double e) { return (*m1)(e); });
    return tab;
}

KernelTable make_gm_table(const WeightFunction& mu, int m, const TimeGrid& grid,
                          InversionOptions opts, int threads) {
    const double gm = gamma_m(mu, m);
    const double sigma = (m + 1) * (0.5 / (m + 1) + gm);
    WeightFunction restricted = mu.restricted(0.0, 1.0 / (2.0 * m));
    KernelProvenance prov{mu.digest(), "g_m", m, opts.rel_tol};
    return build_resolvent_table(restricted, m + 1, grid, sigma, std::move(prov), opts,
                                 threads);
}

double verify_resolvent_identity(const KernelTable& ktab, const KernelTable& gtab,
                                 double T) {
    if (!ktab.provenance().compatible(gtab.provenance()))
        throw ProvenanceMismatch("verify_resolvent_identity: tables from different weights");
    const TimeGrid& grid = gtab.grid();
    if (std::abs(grid.horizon() - T) > 1e-12 * T)
        throw ProvenanceMismatch("verify_resolvent_identity: horizon mismatch");
    double worst = 0.0;
    const double floor = T / grid.size();
    for (int j = 1; j <= grid.size(); ++j) {
        double t = grid.node(j);
        if (t < floor) continue;
        double c = convolve_kernel_tables(ktab, gtab, t);
        worst = std::max(worst, std::abs(c - 1.0));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

double KernelBound::eval(double t) const {
    return coeff * (std::sqrt(M_PI) * std::pow(t, gamma - 1.0) +
                    std::tgamma(gamma) * std::pow(t, -gamma));
}

KernelBound prop2_bound(const WeightExponents& e) {
    double coeff = 4.0 * std::tgamma(e.gamma) * std::sqrt(M_PI) / (M_PI * M_PI * e.c_mu);
    return {coeff, e.gamma};
}

double c_mu_T(const WeightExponents& e, double T) {
    KernelBound b = prop2_bound(e);
    return b.coeff * (std::sqrt(M_PI) + std::tgamma(e.gamma)) *
           std::max(1.0, std::pow(T, 1.0 - e.gamma));
}

double symbol_lower_constant(const WeightExponents& e) {
    double s = std::min({std::sin(e.gamma * M_PI / 2.0), std::sin(e.gamma * M_PI),
                         std::sqrt(2.0) / 2.0});
    return s * 0.5 * (1.0 - e.gamma) * e.c_mu;
}

double symbol_lower_margin(const WeightFunction& mu, const WeightExponents& e,
                           double eta, int nr, int nphi) {
    const double ctilde = symbol_lower_constant(e);
    double margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < nr; ++i) {
        double lr = -6.0 + 12.0 * i / (nr - 1);
        double r = std::pow(10.0, lr);
        double bound = ctilde * (r <= 1.0 ? std::pow(r, 1.0 - e.gamma)
                                          : std::pow(r, e.gamma));
        for (int s = -1; s <= 1; s += 2)
            for (int q = 0; q < nphi; ++q) {
                double phi = s * (M_PI - eta) * q / (nphi - 1);
                std::complex<double> p = std::polar(r, phi);
                double lhs = std::abs(p * laplace_k(mu, p));
                margin = std::min(margin, lhs / bound);
            }
    }
    return margin;
}

double g_l2_regime_bound(const WeightExponents& e, double t) {
    if (!e.gamma_zero || !e.b_mu)
        throw ValidationError("g_l2_regime_bound: gamma_zero regime required");
    const double g0 = *e.gamma_zero;
    const double bbar = std::sin(M_PI * (1.0 - g0)) * (*e.b_mu);
    return (1.0 / (bbar * M_PI)) *
           (1.0 / g0 + std::tgamma(0.5 - g0) * std::pow(t, g0 - 0.5));
}

double GmBound::eval(double t) const { return coeff * std::pow(t, exponent); }

GmBound gm_bound(const WeightFunction& mu, const WeightExponents& e, double T) {
    if (!e.m || !e.gamma_m) throw ValidationError("gm_bound: m-regime required");
    const int m = *e.m;
    const double gm = *e.gamma_m;
    const double beta_min = (m + 1) * (0.5 / (m + 1) + gm);
    const double beta_max = (m + 1) * (0.5 / m - gm);
    const double lo = 0.5 / (m + 1), hi = 0.5 / m;
    const double b_m = 0.5 * mu.partial_mass(lo, hi);  // half-mass witness window
    const double s_min = std::min(std::sin(M_PI * beta_min), std::sin(M_PI * beta_max));
    const double c_m = s_min * std::pow(b_m, m + 1);
    double coeff = (std::pow(T, 1.0 - beta_min) / (1.0 - beta_max) +
                    std::tgamma(1.0 - beta_min)) /
                   (M_PI * c_m);
    return {coeff, beta_min - 1.0};
}

}  // namespace distcap
