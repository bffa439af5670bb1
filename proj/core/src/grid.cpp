#include "distcap/grid.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "distcap/errors.hpp"

namespace distcap {

TimeGrid::TimeGrid(double horizon, int node_count, double grading)
    : T_(horizon), M_(node_count), q_(grading) {
    if (!(horizon > 0.0)) throw ValidationError("TimeGrid: horizon must be positive");
    if (node_count < 1) throw ValidationError("TimeGrid: need at least one panel");
    if (!(grading >= 1.0)) throw ValidationError("TimeGrid: grading must be >= 1");
    t_.resize(static_cast<size_t>(M_) + 1);
    for (int j = 0; j <= M_; ++j)
        t_[static_cast<size_t>(j)] = T_ * std::pow(static_cast<double>(j) / M_, q_);
    t_.front() = 0.0;
    t_.back() = T_;
}

SampledTrajectory::SampledTrajectory(TimeGrid grid, int dim)
    : grid_(std::move(grid)), dim_(dim),
      data_(static_cast<size_t>(grid_.size() + 1) * dim, 0.0) {
    if (dim < 1) throw ValidationError("SampledTrajectory: dim must be >= 1");
}

SampledTrajectory SampledTrajectory::from_function(
    const TimeGrid& grid, const std::function<double(double)>& f) {
    SampledTrajectory s(grid, 1);
    for (int j = 0; j <= grid.size(); ++j) s.at(j) = f(grid.node(j));
    return s;
}

double SampledTrajectory::eval(double t, int d) const {
    const auto& ts = grid_.nodes();
    if (t <= ts.front()) return at(0, d);
    if (t >= ts.back()) return at(grid_.size(), d);
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    int j = static_cast<int>(it - ts.begin());
    double h = ts[static_cast<size_t>(j)] - ts[static_cast<size_t>(j) - 1];
    double w = (t - ts[static_cast<size_t>(j) - 1]) / h;
    return (1.0 - w) * at(j - 1, d) + w * at(j, d);
}

SampledTrajectory SampledTrajectory::component(int d) const {
    SampledTrajectory s(grid_, 1);
    for (int j = 0; j <= grid_.size(); ++j) s.at(j) = at(j, d);
    return s;
}

std::vector<double> SampledTrajectory::column(int d) const {
    std::vector<double> v(static_cast<size_t>(grid_.size()) + 1);
    for (int j = 0; j <= grid_.size(); ++j) v[static_cast<size_t>(j)] = at(j, d);
    return v;
}

double SampledTrajectory::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace distcap
