#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace distcap {

// Graded time mesh t_j = T (j/M)^q, j = 0..M. q >= 1; q > 1 clusters nodes
// at t = 0 where the kernels are singular.
class TimeGrid {
public:
    TimeGrid() = default;
    TimeGrid(double horizon, int node_count, double grading);

    double horizon() const { return T_; }
    int size() const { return M_; }           // number of panels; M+1 nodes
    double grading() const { return q_; }
    double node(int j) const { return t_[static_cast<size_t>(j)]; }
    const std::vector<double>& nodes() const { return t_; }

    bool operator==(const TimeGrid& o) const {
        return T_ == o.T_ && M_ == o.M_ && q_ == o.q_;
    }

private:
    double T_ = 1.0;
    int M_ = 0;
    double q_ = 1.0;
    std::vector<double> t_;
};

// Scalar- or vector-valued function of time sampled on a TimeGrid.
// values are stored node-major: value(j, d) = data[j*dim + d].
class SampledTrajectory {
public:
    SampledTrajectory() = default;
    SampledTrajectory(TimeGrid grid, int dim = 1);
    static SampledTrajectory from_function(const TimeGrid& grid,
                                           const std::function<double(double)>& f);

    const TimeGrid& grid() const { return grid_; }
    int dim() const { return dim_; }

    double& at(int j, int d = 0) { return data_[static_cast<size_t>(j) * dim_ + d]; }
    double at(int j, int d = 0) const { return data_[static_cast<size_t>(j) * dim_ + d]; }

    // value at t = 0 (Caputo's f(0)).
    double initial(int d = 0) const { return at(0, d); }

    // piecewise-linear interpolation in t
    double eval(double t, int d = 0) const;

    SampledTrajectory component(int d) const;
    std::vector<double> column(int d) const;

    double max_abs() const;

private:
    TimeGrid grid_;
    int dim_ = 1;
    std::vector<double> data_;
};

}  // namespace distcap
