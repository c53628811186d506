#pragma once

#include <vector>

#include "mvr/core/grid.hpp"

namespace mvr::volumetric {

inline constexpr double kDefaultSigmaZ = 4.0;

struct ZSmoothConfig {
    double sigma_z = kDefaultSigmaZ;  // slices; 0 disables smoothing
    int radius = 12;                   // kernel half-width in slices

    /// radius = ceil(3 * sigma_z).
    static ZSmoothConfig from_sigma(double sigma_z);
    void validate() const;
};

/// Normalised weights for offsets -radius..radius. sigma 0 yields a delta.
std::vector<double> gaussian_kernel_1d(double sigma_z, int radius);

/// Per-pixel convolution along z. Taps that fall outside the volume are
/// dropped and the remaining ones renormalised, so constants are preserved.
ProbabilityVolume smooth_z(const ProbabilityVolume& volume, const ZSmoothConfig& config);

std::vector<BinaryMask> volume_threshold(const ProbabilityVolume& volume, double level = 0.5);

}  // namespace mvr::volumetric
