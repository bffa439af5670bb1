#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "distcap/grid.hpp"

namespace distcap {

struct KernelProvenance {
    std::string mu_digest;
    std::string kind;  // "k", "g", "k_m", "g_m"
    int m = 0;         // order index for the iterated kernels, 0 otherwise
    double rel_tol = 0.0;

    bool compatible(const KernelProvenance& o) const {
        return mu_digest == o.mu_digest && m == o.m;
    }
};

// Samples of a weakly singular kernel K on a graded mesh. We tabulate the
// smooth factor s(t) = t^{1-sigma} K(t), which extends continuously to t=0,
// and multiply the singularity back on read.
class KernelTable {
public:
    KernelTable() = default;
    KernelTable(TimeGrid grid, std::vector<double> values, double sigma,
                KernelProvenance prov);

    const TimeGrid& grid() const { return grid_; }
    double sigma() const { return sigma_; }
    const KernelProvenance& provenance() const { return prov_; }

    // j = 1..M (the kernel itself is singular at t_0 = 0)
    double value(int j) const { return values_[static_cast<size_t>(j) - 1]; }
    double smooth(int j) const { return smooth_[static_cast<size_t>(j) - 1]; }
    const std::vector<double>& values() const { return values_; }

    // smooth factor interpolated log-linearly in t; power extrapolation
    // below the first node.
    double smooth_at(double t) const;
    double kernel_at(double t) const;

    // Exact partial moments near the singularity:
    //   moment0(e) = int_0^e K(tau) dtau, moment1(e) = int_0^e tau K(tau) dtau.
    // Attached by the table builders; convolution falls back to smooth-factor
    // extrapolation when absent.
    bool has_moments() const { return static_cast<bool>(m0_); }
    double moment0(double eps) const;
    double moment1(double eps) const;
    void attach_moments(std::function<double(double)> m0,
                        std::function<double(double)> m1);

private:
    TimeGrid grid_;
    std::vector<double> values_;  // K(t_j), j=1..M
    std::vector<double> smooth_;  // t_j^{1-sigma} K(t_j)
    double sigma_ = 0.0;
    KernelProvenance prov_;
    std::function<double(double)> m0_, m1_;
};

}  // namespace distcap
