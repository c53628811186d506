#include "mvr/probe/loss.hpp"

#include <algorithm>
#include <cmath>

#include "mvr/core/error.hpp"

namespace mvr::probe {

namespace {

void check_shapes(std::span<const double> p, const BinaryMask& y) {
    if (p.size() != y.size()) throw DimensionError("loss: probability and mask sizes differ");
    if (p.empty()) throw DimensionError("loss: empty map");
}

struct DiceSums {
    double intersection = 0.0;  // 2 * sum(p * y) + eps
    double denominator = 0.0;   // sum(p) + sum(y) + eps
};

DiceSums dice_sums(std::span<const double> p, const BinaryMask& y, double epsilon) {
    double py = 0.0;
    double sp = 0.0;
    double sy = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        py += p[i] * y[i];
        sp += p[i];
        sy += y[i];
    }
    return {2.0 * py + epsilon, sp + sy + epsilon};
}

}  // namespace

LossTerms loss_terms(std::span<const double> p, const BinaryMask& y, double lambda_dice, double epsilon,
                     double clamp) {
    check_shapes(p, y);
    double bce = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pc = std::clamp(p[i], clamp, 1.0 - clamp);
        bce -= y[i] ? std::log(pc) : std::log(1.0 - pc);
    }
    bce /= static_cast<double>(p.size());
    const auto s = dice_sums(p, y, epsilon);
    const double dice = 1.0 - s.intersection / s.denominator;
    return {bce, dice, bce + lambda_dice * dice};
}

double loss_bce_dice(const ProbabilityMap& p, const BinaryMask& y, double lambda_dice, double epsilon) {
    if (p.height() != y.height() || p.width() != y.width()) {
        throw DimensionError("loss: probability and mask shapes differ");
    }
    std::vector<double> pd(p.values().begin(), p.values().end());
    return loss_terms(pd, y, lambda_dice, epsilon).total;
}

RealGrid loss_grad_wrt_prob(std::span<const double> p, const BinaryMask& y, double lambda_dice, double epsilon,
                            double clamp) {
    check_shapes(p, y);
    const double inv_n = 1.0 / static_cast<double>(p.size());
    const auto s = dice_sums(p, y, epsilon);
    const double s2 = s.denominator * s.denominator;
    RealGrid g(y.height(), y.width());
    for (std::size_t i = 0; i < p.size(); ++i) {
        double d = 0.0;
        if (p[i] > clamp && p[i] < 1.0 - clamp) {
            d = y[i] ? -inv_n / p[i] : inv_n / (1.0 - p[i]);
        }
        d += lambda_dice * (s.intersection - 2.0 * y[i] * s.denominator) / s2;
        g[i] = d;
    }
    return g;
}

}  // namespace mvr::probe
