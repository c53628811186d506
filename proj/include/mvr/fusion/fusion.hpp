#pragma once

#include "mvr/core/grid.hpp"

namespace mvr::fusion {

inline constexpr double kDefaultTau = 0.3;
inline constexpr double kEntropyEpsilon = 1e-8;

struct FusionConfig {
    double tau = kDefaultTau;  // nats
    double epsilon = kEntropyEpsilon;

    void validate() const;
};

/// -p ln(p + eps) - (1 - p) ln(1 - p + eps), in nats.
double binary_entropy(double p, double epsilon = kEntropyEpsilon);

/// Per pixel: the low-resolution value where its entropy is <= tau, otherwise
/// the high-resolution value.
ProbabilityMap fuse_entropy_guided(const ProbabilityMap& lo, const ProbabilityMap& hi, const FusionConfig& config);

/// 1 where value > level (strictly), else 0.
BinaryMask threshold(const ProbabilityMap& map, double level = 0.5);

}  // namespace mvr::fusion
