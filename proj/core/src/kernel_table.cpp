#include "distcap/kernel_table.hpp"

#include <algorithm>
#include <cmath>

#include "distcap/errors.hpp"

namespace distcap {

KernelTable::KernelTable(TimeGrid grid, std::vector<double> values, double sigma,
                         KernelProvenance prov)
    : grid_(std::move(grid)), values_(std::move(values)), sigma_(sigma),
      prov_(std::move(prov)) {
    if (static_cast<int>(values_.size()) != grid_.size())
        throw ValidationError("KernelTable: need one value per positive grid node");
    smooth_.resize(values_.size());
    for (int j = 1; j <= grid_.size(); ++j) {
        if (!(values_[static_cast<size_t>(j) - 1] > 0.0))
            throw ValidationError("KernelTable: kernel values must be strictly positive");
        smooth_[static_cast<size_t>(j) - 1] =
            std::pow(grid_.node(j), 1.0 - sigma_) * values_[static_cast<size_t>(j) - 1];
    }
}

double KernelTable::smooth_at(double t) const {
    const auto& ts = grid_.nodes();
    const int M = grid_.size();
    if (t >= ts.back()) return smooth_[static_cast<size_t>(M) - 1];
    if (t <= ts[1]) {
        // power-law extrapolation from the two smallest nodes
        if (M >= 2 && t > 0.0) {
            double p = std::log(smooth_[1] / smooth_[0]) / std::log(ts[2] / ts[1]);
            p = std::clamp(p, 0.0, 4.0);
            return smooth_[0] * std::pow(t / ts[1], p);
        }
        return smooth_[0];
    }
    auto it = std::upper_bound(ts.begin() + 1, ts.end(), t);
    int j = static_cast<int>(it - ts.begin());  // t in (t_{j-1}, t_j]
    if (M < 4) {
        double w = std::log(t / ts[static_cast<size_t>(j) - 1]) /
                   std::log(ts[static_cast<size_t>(j)] / ts[static_cast<size_t>(j) - 1]);
        return (1.0 - w) * smooth_[static_cast<size_t>(j) - 2] +
               w * smooth_[static_cast<size_t>(j) - 1];
    }
    // cubic Lagrange in ln t through the four nearest tabulated nodes
    int lo = std::clamp(j - 2, 1, M - 3);
    const double x = std::log(t);
    double acc = 0.0;
    for (int k = 0; k < 4; ++k) {
        double num = 1.0, den = 1.0;
        double xk = std::log(ts[static_cast<size_t>(lo + k)]);
        for (int l = 0; l < 4; ++l) {
            if (l == k) continue;
            double xl = std::log(ts[static_cast<size_t>(lo + l)]);
            num *= x - xl;
            den *= xk - xl;
        }
        acc += smooth_[static_cast<size_t>(lo + k) - 1] * num / den;
    }
    return acc;
}

double KernelTable::kernel_at(double t) const {
    if (!(t > 0.0)) throw NonPositiveTime("kernel_at: t must be positive");
    return smooth_at(t) * std::pow(t, sigma_ - 1.0);
}

double KernelTable::moment0(double eps) const {
    if (!m0_) throw ValidationError("KernelTable: no moment evaluators attached");
    return m0_(eps);
}

double KernelTable::moment1(double eps) const {
    if (!m1_) throw ValidationError("KernelTable: no moment evaluators attached");
    return m1_(eps);
}

void KernelTable::attach_moments(std::function<double(double)> m0,
                                 std::function<double(double)> m1) {
    m0_ = std::move(m0);
    m1_ = std::move(m1);
}

}  // namespace distcap
