#include "distcap/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <queue>

#include "distcap/errors.hpp"

namespace distcap {

namespace {

// Kronrod 15 / Gauss 7 pair (QUADPACK constants).
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <typename T>
struct PanelResult {
    T value;
    double err;
};

template <typename T, typename F>
PanelResult<T> gk15_panel(const F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    T fc = f(c);
    T resk = kWgk[7] * fc;
    T resg = kWg[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = h * kXgk[i];
        T fsum = f(c - dx) + f(c + dx);
        resk += kWgk[i] * fsum;
        if (i % 2 == 1) resg += kWg[i / 2] * fsum;
    }
    resk *= h;
    resg *= h;
    return {resk, std::abs(resk - resg)};
}

struct Piece {
    double a, b, err;
    int depth;
};

template <typename T, typename F>
T adaptive(const F& f, double a, double b, double rel_tol, double abs_tol, int max_depth) {
    if (a == b) return T{};
    auto first = gk15_panel<T>(f, a, b);
    T total = first.value;
    double queued_err = first.err;
    double frozen_err = 0.0;  // error of panels that hit max_depth

    auto cmp = [](const std::pair<Piece, T>& x, const std::pair<Piece, T>& y) {
        return x.first.err < y.first.err;
    };
    std::priority_queue<std::pair<Piece, T>, std::vector<std::pair<Piece, T>>, decltype(cmp)>
        q(cmp);
    q.push({{a, b, first.err, 0}, first.value});

    const int max_panels = 1 << 14;
    int panels = 1;
    while (!q.empty() && panels < max_panels) {
        double bound = std::max(rel_tol * std::abs(total), abs_tol);
        if (frozen_err + queued_err <= bound) return total;
        auto [piece, val] = q.top();
        q.pop();
        queued_err -= piece.err;
        if (piece.depth >= max_depth) {
            frozen_err += piece.err;
            continue;
        }
        const double mid = 0.5 * (piece.a + piece.b);
        auto left = gk15_panel<T>(f, piece.a, mid);
        auto right = gk15_panel<T>(f, mid, piece.b);
        total += left.value + right.value - val;
        queued_err += left.err + right.err;
        q.push({{piece.a, mid, left.err, piece.depth + 1}, left.value});
        q.push({{mid, piece.b, right.err, piece.depth + 1}, right.value});
        panels += 1;
    }
    double bound = std::max(rel_tol * std::abs(total), abs_tol);
    if (frozen_err + queued_err > 1000.0 * std::max(bound, 1e-300))
        throw QuadratureNonConvergence("adaptive quadrature stalled: err=" +
                                       std::to_string(frozen_err + queued_err) + " on [" +
                                       std::to_string(a) + "," + std::to_string(b) + "]");
    return total;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
    static std::map<int, GaussRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Chebyshev-based initial guess, Newton on P_n.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    auto [pos, ok] = cache.emplace(n, std::move(rule));
    (void)ok;
    return pos->second;
}

double gauss_panel(const std::function<double(double)>& f, double a, double b, int n) {
    const GaussRule& r = gauss_legendre(n);
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += r.weights[i] * f(c + h * r.nodes[i]);
    return s * h;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol, double abs_tol, int max_depth) {
    return adaptive<double>(f, a, b, rel_tol, abs_tol, max_depth);
}

double integrate_partition(const std::function<double(double)>& f,
                           std::span<const double> pts, double rel_tol, double abs_tol) {
    double total = 0.0;
    if (pts.size() < 2) return 0.0;
    const double span = pts.back() - pts.front();
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i + 1] <= pts[i]) continue;
        double frac = (pts[i + 1] - pts[i]) / span;
        total += adaptive<double>(f, pts[i], pts[i + 1], rel_tol,
                                  abs_tol * std::max(frac, 1e-3), 48);
    }
    return total;
}

std::complex<double> integrate_complex(const std::function<std::complex<double>(double)>& f,
                                       double a, double b, double rel_tol, double abs_tol,
                                       int max_depth) {
    return adaptive<std::complex<double>>(f, a, b, rel_tol, abs_tol, max_depth);
}

std::complex<double> integrate_complex_partition(
    const std::function<std::complex<double>(double)>& f, std::span<const double> pts,
    double rel_tol, double abs_tol) {
    std::complex<double> total{};
    if (pts.size() < 2) return total;
    const double span = pts.back() - pts.front();
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i + 1] <= pts[i]) continue;
        double frac = (pts[i + 1] - pts[i]) / span;
        total += adaptive<std::complex<double>>(f, pts[i], pts[i + 1], rel_tol,
                                                abs_tol * std::max(frac, 1e-3), 48);
    }
    return total;
}

PanelInterpolant::PanelInterpolant(double lo, double hi, double panel_width, int degree,
                                   const std::function<double(double)>& f)
    : lo_(lo), hi_(hi), degree_(degree) {
    int npanels = std::max(1, static_cast<int>(std::ceil((hi - lo) / panel_width)));
    width_ = (hi - lo) / npanels;
    coeffs_.resize(npanels);
    const int n = degree + 1;
    std::vector<double> vals(n);
    for (int p = 0; p < npanels; ++p) {
        const double a = lo_ + p * width_;
        const double b = a + width_;
        for (int j = 0; j < n; ++j) {
            double theta = M_PI * (j + 0.5) / n;
            double x = 0.5 * (a + b) + 0.5 * (b - a) * std::cos(theta);
            vals[j] = f(x);
        }
        // Chebyshev coefficients from values at Chebyshev points of the 1st kind.
        coeffs_[p].assign(n, 0.0);
        for (int k = 0; k < n; ++k) {
            double s = 0.0;
            for (int j = 0; j < n; ++j)
                s += vals[j] * std::cos(M_PI * k * (j + 0.5) / n);
            coeffs_[p][k] = 2.0 * s / n;
        }
        coeffs_[p][0] *= 0.5;
    }
}

double PanelInterpolant::operator()(double x) const {
    int p = static_cast<int>((x - lo_) / width_);
    p = std::clamp(p, 0, static_cast<int>(coeffs_.size()) - 1);
    const double a = lo_ + p * width_;
    const double t = 2.0 * (x - a) / width_ - 1.0;
    // Clenshaw recurrence.
    const auto& c = coeffs_[p];
    double b1 = 0.0, b2 = 0.0;
    for (int k = static_cast<int>(c.size()) - 1; k >= 1; --k) {
        double b0 = 2.0 * t * b1 - b2 + c[k];
        b2 = b1;
        b1 = b0;
    }
    return t * b1 - b2 + c[0];
}

}  // namespace distcap
