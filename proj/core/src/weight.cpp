#include "distcap/weight.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>

#include "distcap/errors.hpp"
#include "distcap/quadrature.hpp"

namespace distcap {

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

uint64_t fnv1a(const void* data, size_t n, uint64_t h = 1469598103934665603ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

WeightFunction WeightFunction::constant(double value) {
    WeightFunction w;
    w.kind_ = Kind::analytic;
    w.eval_ = [value](double) { return value; };
    w.support_ = {0.0, 1.0};
    w.exact_mass_ = [value](double a, double b) { return value * (b - a); };
    char buf[64];
    std::snprintf(buf, sizeof buf, "constant(%.17g)", value);
    w.label_ = buf;
    w.finalize();
    return w;
}

WeightFunction WeightFunction::power(double coef, double exponent) {
    if (exponent <= -1.0)
        throw QuadratureNonConvergence("power weight with exponent <= -1 is not integrable");
    WeightFunction w;
    w.kind_ = Kind::analytic;
    w.eval_ = [coef, exponent](double a) { return coef * std::pow(a, exponent); };
    w.support_ = {0.0, 1.0};
    w.exact_mass_ = [coef, exponent](double a, double b) {
        const double p = exponent + 1.0;
        return coef * (std::pow(b, p) - std::pow(a, p)) / p;
    };
    char buf[80];
    std::snprintf(buf, sizeof buf, "power(%.17g,%.17g)", coef, exponent);
    w.label_ = buf;
    w.finalize();
    return w;
}

WeightFunction WeightFunction::indicator(double lo, double hi, double height) {
    return piecewise({lo, hi}, {height});
}

WeightFunction WeightFunction::bump(double center, double width, double mass) {
    const double lo = center - 0.5 * width;
    const double hi = center + 0.5 * width;
    return piecewise({lo, hi}, {mass / width});
}

WeightFunction WeightFunction::piecewise(std::vector<double> breakpoints,
                                         std::vector<double> values) {
    if (breakpoints.size() != values.size() + 1)
        throw ValidationError("piecewise weight: need one more breakpoint than values");
    if (!std::is_sorted(breakpoints.begin(), breakpoints.end()))
        throw ValidationError("piecewise weight: breakpoints must be increasing");
    WeightFunction w;
    w.kind_ = Kind::piecewise_constant;
    w.breaks_ = std::move(breakpoints);
    w.values_ = std::move(values);
    for (double v : w.values_)
        if (v < 0.0) throw ValidationError("piecewise weight: negative value");
    w.support_ = {clamp01(w.breaks_.front()), clamp01(w.breaks_.back())};
    auto breaks = w.breaks_;
    auto vals = w.values_;
    w.eval_ = [breaks, vals](double a) {
        auto it = std::upper_bound(breaks.begin(), breaks.end(), a);
        if (it == breaks.begin() || it == breaks.end()) return 0.0;
        return vals[static_cast<size_t>(it - breaks.begin()) - 1];
    };
    w.exact_mass_ = [breaks, vals](double a, double b) {
        double s = 0.0;
        for (size_t i = 0; i < vals.size(); ++i) {
            double lo = std::max(a, breaks[i]);
            double hi = std::min(b, breaks[i + 1]);
            if (hi > lo) s += vals[i] * (hi - lo);
        }
        return s;
    };
    char buf[96];
    std::snprintf(buf, sizeof buf, "piecewise(n=%zu,[%.17g,%.17g])", w.values_.size(),
                  w.breaks_.front(), w.breaks_.back());
    w.label_ = buf;
    w.finalize();
    return w;
}

WeightFunction WeightFunction::tabulated(std::vector<double> alphas,
                                         std::vector<double> densities) {
    if (alphas.size() != densities.size() || alphas.size() < 2)
        throw ValidationError("tabulated weight: need matching abscissae/values, >= 2");
    for (size_t i = 1; i < alphas.size(); ++i)
        if (alphas[i] <= alphas[i - 1])
            throw ValidationError("tabulated weight: abscissae must be strictly increasing");
    if (alphas.front() < 0.0 || alphas.back() > 1.0)
        throw ValidationError("tabulated weight: abscissae must lie in [0,1]");
    for (double v : densities)
        if (v < 0.0) throw ValidationError("tabulated weight: negative density");

    WeightFunction w;
    w.kind_ = Kind::tabulated;
    w.breaks_ = std::move(alphas);
    w.values_ = std::move(densities);
    w.support_ = {w.breaks_.front(), w.breaks_.back()};
    auto xs = w.breaks_;
    auto ys = w.values_;
    w.eval_ = [xs, ys](double a) {
        if (a < xs.front() || a > xs.back()) return 0.0;  // zero-extended
        auto it = std::upper_bound(xs.begin(), xs.end(), a);
        if (it == xs.begin()) return ys.front();
        if (it == xs.end()) return ys.back();
        size_t i = static_cast<size_t>(it - xs.begin());
        double t = (a - xs[i - 1]) / (xs[i] - xs[i - 1]);
        return (1.0 - t) * ys[i - 1] + t * ys[i];
    };
    w.exact_mass_ = [xs, ys](double a, double b) {
        // exact integral of the piecewise-linear density over [a,b]
        double s = 0.0;
        for (size_t i = 0; i + 1 < xs.size(); ++i) {
            double lo = std::max(a, xs[i]);
            double hi = std::min(b, xs[i + 1]);
            if (hi <= lo) continue;
            double h = xs[i + 1] - xs[i];
            auto val = [&](double x) {
                double t = (x - xs[i]) / h;
                return (1.0 - t) * ys[i] + t * ys[i + 1];
            };
            s += 0.5 * (val(lo) + val(hi)) * (hi - lo);
        }
        return s;
    };
    char buf[64];
    std::snprintf(buf, sizeof buf, "tabulated(n=%zu)", w.breaks_.size());
    w.label_ = buf;
    w.finalize();
    return w;
}

WeightFunction WeightFunction::analytic(std::function<double(double)> evaluator,
                                        std::optional<std::pair<double, double>> support,
                                        std::string label) {
    WeightFunction w;
    w.kind_ = Kind::analytic;
    w.eval_ = std::move(evaluator);
    w.support_ = support.value_or(std::pair<double, double>{0.0, 1.0});
    w.support_.first = clamp01(w.support_.first);
    w.support_.second = clamp01(w.support_.second);
    w.label_ = std::move(label);
    w.finalize();
    return w;
}

void WeightFunction::finalize() {
    partition_.clear();
    partition_.push_back(0.0);
    if (kind_ == Kind::analytic) {
        if (support_.first > 0.0) partition_.push_back(support_.first);
        if (support_.second < 1.0) partition_.push_back(support_.second);
    } else {
        for (double b : breaks_)
            if (b > 0.0 && b < 1.0) partition_.push_back(b);
    }
    partition_.push_back(1.0);
    std::sort(partition_.begin(), partition_.end());
    partition_.erase(std::unique(partition_.begin(), partition_.end()), partition_.end());

    // Sampled nonnegativity check on each smooth panel.
    for (size_t i = 0; i + 1 < partition_.size(); ++i) {
        for (int j = 1; j < 32; ++j) {
            double a = partition_[i] + (partition_[i + 1] - partition_[i]) * j / 32.0;
            if (eval_(a) < -1e-14)
                throw ValidationError("weight: negative density at alpha=" + std::to_string(a));
        }
    }

    // The mass quadrature must converge (rejects non-integrable spikes) and
    // the mass must be positive.
    double c = partial_mass(0.0, 1.0);
    if (!(c > kMassTol))
        throw MassBelowTolerance("weight: total mass " + std::to_string(c) +
                                 " below tolerance");
}

double WeightFunction::operator()(double alpha) const {
    if (!eval_) throw ValidationError("WeightFunction: evaluating an empty weight");
    if (alpha < 0.0 || alpha > 1.0) return 0.0;
    return eval_(alpha);
}

double WeightFunction::partial_mass(double a, double b) const {
    a = clamp01(a);
    b = clamp01(b);
    if (b <= a) return 0.0;
    if (exact_mass_) return exact_mass_(a, b);
    auto f = [this](double x) { return eval_(x); };
    std::vector<double> pts;
    pts.push_back(a);
    for (double p : partition_)
        if (p > a && p < b) pts.push_back(p);
    pts.push_back(b);
    return integrate_partition(f, pts, 1e-11, 0.0);
}

double WeightFunction::integrate_against(const std::function<double(double)>& f, double lo,
                                         double hi, double rel_tol) const {
    lo = clamp01(lo);
    hi = clamp01(hi);
    lo = std::max(lo, support_.first);
    hi = std::min(hi, support_.second);
    if (hi <= lo) return 0.0;
    std::vector<double> pts;
    pts.push_back(lo);
    for (double p : partition_)
        if (p > lo && p < hi) pts.push_back(p);
    pts.push_back(hi);
    auto g = [&](double a) { return f(a) * eval_(a); };
    return integrate_partition(g, pts, rel_tol, 0.0);
}

WeightFunction WeightFunction::restricted(double lo, double hi) const {
    WeightFunction w(*this);
    w.support_.first = std::max(support_.first, clamp01(lo));
    w.support_.second = std::min(support_.second, clamp01(hi));
    auto base = eval_;
    double a = w.support_.first, b = w.support_.second;
    w.eval_ = [base, a, b](double x) { return (x < a || x > b) ? 0.0 : base(x); };
    if (exact_mass_) {
        auto em = exact_mass_;
        w.exact_mass_ = [em, a, b](double x, double y) {
            return em(std::max(x, a), std::min(y, b));
        };
    }
    w.label_ = label_ + "|[" + std::to_string(a) + "," + std::to_string(b) + "]";
    w.partition_.clear();
    w.partition_.push_back(0.0);
    for (double p : partition_)
        if (p > 0.0 && p < 1.0) w.partition_.push_back(p);
    if (a > 0.0 && a < 1.0) w.partition_.push_back(a);
    if (b > 0.0 && b < 1.0) w.partition_.push_back(b);
    w.partition_.push_back(1.0);
    std::sort(w.partition_.begin(), w.partition_.end());
    w.partition_.erase(std::unique(w.partition_.begin(), w.partition_.end()),
                       w.partition_.end());
    return w;
}

std::string WeightFunction::digest() const {
    // Hash the label plus density samples at fixed probes; analytic weights
    // with equal labels but different closures still get distinct digests.
    uint64_t h = fnv1a(label_.data(), label_.size());
    for (int i = 0; i <= 64; ++i) {
        double a = i / 64.0;
        double v = (*this)(a);
        h = fnv1a(&v, sizeof v, h);
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

double total_mass(const WeightFunction& mu) {
    double c = mu.partial_mass(0.0, 1.0);
    if (!(c > kMassTol))
        throw MassBelowTolerance("total_mass: mass " + std::to_string(c) + " <= mass_tol");
    return c;
}

namespace {

// Bisection for a continuous h with h(lo) > 0 > h(hi).
double bisect(const std::function<double(double)>& h, double lo, double hi) {
    double flo = h(lo);
    double fhi = h(hi);
    if (!(flo > 0.0) || !(fhi < 0.0))
        throw RootNotBracketed("bisection: h(" + std::to_string(lo) + ")=" +
                               std::to_string(flo) + ", h(" + std::to_string(hi) + ")=" +
                               std::to_string(fhi));
    while (hi - lo > kRootTol) {
        double mid = 0.5 * (lo + hi);
        double fm = h(mid);
        if (fm > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double gamma_exponent(const WeightFunction& mu) {
    const double c = total_mass(mu);
    auto h = [&](double x) {
        return mu.partial_mass(x, 1.0 - x) - 0.5 * (1.0 - x) * c;
    };
    // h(0) = c/2 > 0, h(1/2) = -c/4 < 0.
    return bisect(h, 0.0, 0.5);
}

std::optional<double> gamma_zero(const WeightFunction& mu) {
    const double c = total_mass(mu);
    const double upper = mu.partial_mass(0.5, 1.0);
    if (upper <= kMassTol * c) return std::nullopt;
    // Half-mass selection rule: gamma_0 is a witness of existence, so we fix
    // a reproducible one.
    auto h = [&](double x) {
        return mu.partial_mass(0.5 + x, 1.0 - x) - 0.5 * upper;
    };
    return bisect(h, 0.0, 0.25);
}

std::optional<int> order_index_m(const WeightFunction& mu) {
    const double c = total_mass(mu);
    if (mu.partial_mass(0.5, 1.0) > kMassTol * c) return std::nullopt;
    constexpr int kMaxOrderIndex = 64;
    for (int m = 1; m <= kMaxOrderIndex; ++m) {
        double above = mu.partial_mass(1.0 / (2.0 * m), 1.0);
        double window = mu.partial_mass(1.0 / (2.0 * (m + 1)), 1.0 / (2.0 * m));
        if (above <= kMassTol * c && window > kMassTol * c) return m;
        if (above > kMassTol * c)
            throw RootNotBracketed("order_index_m: inconsistent masses at m=" +
                                   std::to_string(m));
    }
    throw OrderIndexOverflow("order_index_m: support of mu concentrated below 1/" +
                             std::to_string(2 * (kMaxOrderIndex + 1)));
}

double gamma_m(const WeightFunction& mu, int m) {
    auto actual = order_index_m(mu);
    if (!actual || *actual != m)
        throw OrderMismatch("gamma_m: order index of mu is " +
                            (actual ? std::to_string(*actual) : std::string("absent")) +
                            ", not " + std::to_string(m));
    const double lo = 1.0 / (2.0 * (m + 1));
    const double hi = 1.0 / (2.0 * m);
    const double window = mu.partial_mass(lo, hi);
    auto h = [&](double x) {
        return mu.partial_mass(lo + x, hi - x) - 0.5 * window;
    };
    return bisect(h, 0.0, 0.25 / (m * (m + 1)));
}

WeightExponents derive_exponents(const WeightFunction& mu) {
    WeightExponents e;
    e.c_mu = total_mass(mu);
    e.gamma = gamma_exponent(mu);
    e.gamma_zero = gamma_zero(mu);
    if (e.gamma_zero) {
        e.b_mu = mu.partial_mass(0.5 + *e.gamma_zero, 1.0 - *e.gamma_zero);
    } else {
        e.m = order_index_m(mu);
        e.gamma_m = gamma_m(mu, *e.m);
    }
    return e;
}

}  // namespace distcap
