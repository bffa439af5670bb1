#pragma once

#include <complex>
#include <functional>

#include "distcap/quadrature.hpp"
#include "distcap/weight.hpp"

namespace distcap {

// The boundary symbol w(r) = int_0^1 e^{i pi a} r^a mu(a) da, i.e. the limit
// of p k~(p) on the lower edge of the branch cut (conjugated). Stored as
// amplitude/phase on a Chebyshev grid in u = ln r, which keeps relative
// accuracy across the full dynamic range; pk~ spans dozens of decades.
class LaplaceSymbol {
public:
    explicit LaplaceSymbol(const WeightFunction& mu, int power = 1);

    // ln|w(e^u)| and arg w(e^u) of the base symbol (power not applied)
    double log_abs(double u) const;
    double phase(double u) const;

    // Im[1/ conj(w)^power ](r = e^u) = e^{-p ln|w|} sin(p arg w):
    // the integrand of the real-axis inversion formula.
    double boundary_im(double u) const;

    int power() const { return power_; }

    // direct quadrature of the base symbol (used to build the interpolant
    // and as the out-of-range fallback)
    std::complex<double> direct(double u) const;

private:
    WeightFunction mu_;
    int power_ = 1;
    PanelInterpolant amp_, ph_;
};

// Marching real-axis integral (1/pi) int integrand(u) du over u in R,
// where integrand represents f(r) dr under r = e^u. Panels of fixed width
// are accumulated away from u_center until the geometric tail estimate
// drops below rel_tol * |accumulated|. Hard caps guard divergence.
double march_integral(const std::function<double(double)>& integrand_u,
                      double u_center, double u_hard_hi, double rel_tol);

}  // namespace distcap
