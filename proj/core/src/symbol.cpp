#include "distcap/symbol.hpp"

#include <cmath>

#include "distcap/errors.hpp"

namespace distcap {

namespace {
constexpr double kULo = -240.0;
constexpr double kUHi = 170.0;
constexpr double kPanelWidth = 2.0;
constexpr int kDegree = 20;
}  // namespace

LaplaceSymbol::LaplaceSymbol(const WeightFunction& mu, int power)
    : mu_(mu), power_(power) {
    auto amp_fn = [this](double u) { return std::log(std::abs(direct(u))); };
    auto ph_fn = [this](double u) { return std::arg(direct(u)); };
    amp_ = PanelInterpolant(kULo, kUHi, kPanelWidth, kDegree, amp_fn);
    ph_ = PanelInterpolant(kULo, kUHi, kPanelWidth, kDegree, ph_fn);
}

std::complex<double> LaplaceSymbol::direct(double u) const {
    auto [lo, hi] = mu_.support_hint();
    const auto& part = mu_.partition();
    std::vector<double> pts;
    pts.push_back(lo);
    for (double p : part)
        if (p > lo && p < hi) pts.push_back(p);
    pts.push_back(hi);
    auto f = [&](double a) {
        return std::polar(std::exp(a * u) * mu_(a), M_PI * a);
    };
    std::complex<double> w = integrate_complex_partition(f, pts, 1e-11, 0.0);
    if (!(std::abs(w) > 0.0))
        throw QuadratureNonConvergence("LaplaceSymbol: vanishing symbol at u=" +
                                       std::to_string(u));
    return w;
}

double LaplaceSymbol::log_abs(double u) const {
    if (u < kULo || u > kUHi) return std::log(std::abs(direct(u)));
    return amp_(u);
}

double LaplaceSymbol::phase(double u) const {
    if (u < kULo || u > kUHi) return std::arg(direct(u));
    return ph_(u);
}

double LaplaceSymbol::boundary_im(double u) const {
    return std::exp(-power_ * log_abs(u)) * std::sin(power_ * phase(u));
}

double march_integral(const std::function<double(double)>& integrand_u, double u_center,
                      double u_hard_hi, double rel_tol) {
    const double W = 1.5;
    const double panel_tol = 0.2 * rel_tol;
    double acc = 0.0;

    auto panel = [&](double a, double b) {
        return integrate(integrand_u, a, b, panel_tol, 0.0, 24);
    };

    // upward from u_center
    {
        double prev = 0.0;
        bool have_prev = false;
        int k = 0;
        for (; k < 400; ++k) {
            double a = u_center + k * W;
            if (a >= u_hard_hi) break;
            double b = std::min(a + W, u_hard_hi);
            double p = panel(a, b);
            acc += p;
            double scale = std::max(std::abs(acc), 1e-300);
            if (have_prev && std::abs(p) > 0.0) {
                double rho = std::min(std::abs(p) / std::max(std::abs(prev), 1e-300), 0.95);
                double tail = std::abs(p) * rho / (1.0 - rho);
                if (tail < rel_tol * scale && std::abs(p) < rel_tol * scale) break;
            } else if (std::abs(p) == 0.0 && have_prev) {
                break;
            }
            prev = p;
            have_prev = true;
        }
        if (k == 400)
            throw QuadratureNonConvergence("march_integral: upward tail did not settle");
    }

    // downward from u_center
    {
        double prev = 0.0;
        bool have_prev = false;
        int k = 0;
        for (; k < 600; ++k) {
            double b = u_center - k * W;
            double a = b - W;
            double p = panel(a, b);
            acc += p;
            double scale = std::max(std::abs(acc), 1e-300);
            if (have_prev && std::abs(p) > 0.0) {
                double rho = std::min(std::abs(p) / std::max(std::abs(prev), 1e-300), 0.95);
                double tail = std::abs(p) * rho / (1.0 - rho);
                if (tail < rel_tol * scale && std::abs(p) < rel_tol * scale) break;
            } else if (std::abs(p) == 0.0 && have_prev) {
                break;
            }
            prev = p;
            have_prev = true;
        }
        if (k == 600)
            throw QuadratureNonConvergence("march_integral: downward tail did not settle");
    }
    return acc / M_PI;
}

}  // namespace distcap
