#pragma once

#include <span>

#include "mvr/core/grid.hpp"

namespace mvr::probe {

inline constexpr double kDiceEpsilon = 1e-6;
inline constexpr double kProbabilityClamp = 1e-7;

struct LossTerms {
    double bce = 0.0;
    double dice = 0.0;
    double total = 0.0;
};

/// Mean-reduced BCE (probabilities clamped to [clamp, 1 - clamp]) plus
/// lambda_dice times the smoothed soft-Dice loss.
LossTerms loss_terms(std::span<const double> p, const BinaryMask& y, double lambda_dice,
                     double epsilon = kDiceEpsilon, double clamp = kProbabilityClamp);

double loss_bce_dice(const ProbabilityMap& p, const BinaryMask& y, double lambda_dice,
                     double epsilon = kDiceEpsilon);

/// d(loss) / d(p_i), with zero BCE slope where the clamp is active.
RealGrid loss_grad_wrt_prob(std::span<const double> p, const BinaryMask& y, double lambda_dice,
                            double epsilon = kDiceEpsilon, double clamp = kProbabilityClamp);

}  // namespace mvr::probe
