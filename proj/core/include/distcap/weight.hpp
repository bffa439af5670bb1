#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace distcap {

// Tolerance deciding "mass is zero" in the regime tests, relative to c_mu.
inline constexpr double kMassTol = 1e-12;
// Bisection tolerance on the exponent roots.
inline constexpr double kRootTol = 1e-12;

// The density mu on (0,1). Nonnegative, integrable, not identically zero.
// Immutable after construction; safe to share across threads.
class WeightFunction {
public:
    enum class Kind { analytic, piecewise_constant, tabulated };

    // empty weight; evaluating one throws. Use the named constructors.
    WeightFunction() = default;

    static WeightFunction constant(double value);
    static WeightFunction power(double coef, double exponent);
    static WeightFunction indicator(double lo, double hi, double height = 1.0);
    // Box profile of given total mass centered at `center`.
    static WeightFunction bump(double center, double width, double mass);
    // values[i] on (breakpoints[i], breakpoints[i+1]); breakpoints within [0,1].
    static WeightFunction piecewise(std::vector<double> breakpoints,
                                    std::vector<double> values);
    // Linear interpolation between (alphas[i], densities[i]); zero outside.
    static WeightFunction tabulated(std::vector<double> alphas,
                                    std::vector<double> densities);
    static WeightFunction analytic(std::function<double(double)> evaluator,
                                   std::optional<std::pair<double, double>> support = {},
                                   std::string label = "analytic");

    double operator()(double alpha) const;
    Kind kind() const { return kind_; }
    std::pair<double, double> support_hint() const { return support_; }

    // Breakpoints of smoothness in [0,1] (always starts at 0, ends at 1).
    const std::vector<double>& partition() const { return partition_; }

    // integral of mu over [a,b] intersected with [0,1]; exact for the
    // piecewise/tabulated kinds, adaptive quadrature otherwise.
    double partial_mass(double a, double b) const;

    // integral of f(alpha)*mu(alpha) over [lo,hi], panelwise adaptive.
    double integrate_against(const std::function<double(double)>& f, double lo,
                             double hi, double rel_tol = 1e-10) const;

    // Same weight with support chopped to [lo,hi] (used by the m-regime kernels).
    WeightFunction restricted(double lo, double hi) const;

    // Stable content hash for provenance tracking.
    std::string digest() const;
    const std::string& label() const { return label_; }

private:
    void finalize();  // validates and builds the partition

    Kind kind_ = Kind::analytic;
    std::function<double(double)> eval_;
    std::pair<double, double> support_{0.0, 1.0};
    std::vector<double> partition_;
    std::vector<double> breaks_, values_;  // piecewise / tabulated payload
    std::function<double(double, double)> exact_mass_;  // closed-form partial mass
    std::string label_;
};

// Every exponent the theory derives from mu.
struct WeightExponents {
    double c_mu = 0.0;                 // total mass
    double gamma = 0.0;                // in (0,1/2)
    std::optional<double> gamma_zero;  // present iff mass above 1/2 is positive
    std::optional<double> b_mu;        // mass on [1/2+gamma0, 1-gamma0]
    std::optional<int> m;              // order index, present iff gamma_zero absent
    std::optional<double> gamma_m;     // in (0, 1/(4m(m+1)))

    bool intmu_holds() const { return gamma_zero.has_value(); }
};

double total_mass(const WeightFunction& mu);
double gamma_exponent(const WeightFunction& mu);
std::optional<double> gamma_zero(const WeightFunction& mu);
std::optional<int> order_index_m(const WeightFunction& mu);
double gamma_m(const WeightFunction& mu, int m);

WeightExponents derive_exponents(const WeightFunction& mu);

}  // namespace distcap
