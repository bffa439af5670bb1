#pragma once

#include <stdexcept>
#include <string>

// Error hierarchy shared by the whole library. Every failure mode carries a
// message with the offending values; callers that want structured handling
// catch the concrete type.

namespace distcap {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// weight
struct MassBelowTolerance : Error { using Error::Error; };
struct RootNotBracketed : Error { using Error::Error; };
struct OrderIndexOverflow : Error { using Error::Error; };

// kernels
struct NonPositiveTime : Error { using Error::Error; };
struct OnBranchCut : Error { using Error::Error; };
struct QuadratureNonConvergence : Error { using Error::Error; };
struct OrderMismatch : Error { using Error::Error; };
struct DimensionTooLarge : Error { using Error::Error; };
struct ProvenanceMismatch : Error { using Error::Error; };

// fraccalc
struct AlphaOutOfRange : Error { using Error::Error; };
struct GridMismatch : Error { using Error::Error; };
struct ArgumentOutOfSupportedRange : Error { using Error::Error; };

// gronwall
struct HypothesisViolation : Error { using Error::Error; };

// galerkin
struct UnsupportedDomain : Error { using Error::Error; };
struct EpsilonTooLarge : Error { using Error::Error; };
struct QuadratureFailure : Error { using Error::Error; };
struct PicardStall : Error { using Error::Error; };

// cli
struct ParseError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };

}  // namespace distcap
