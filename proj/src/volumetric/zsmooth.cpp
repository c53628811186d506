#include "mvr/volumetric/zsmooth.hpp"

#include <cmath>

#include "mvr/core/error.hpp"
#include "mvr/fusion/fusion.hpp"

namespace mvr::volumetric {

ZSmoothConfig ZSmoothConfig::from_sigma(double sigma_z) {
    ZSmoothConfig c;
    c.sigma_z = sigma_z;
    c.radius = static_cast<int>(std::ceil(3.0 * sigma_z));
    c.validate();
    return c;
}

void ZSmoothConfig::validate() const {
    if (!(sigma_z >= 0.0)) throw ConfigError("sigma_z must be >= 0");
    if (radius < 0) throw ConfigError("z kernel radius must be >= 0");
}

std::vector<double> gaussian_kernel_1d(double sigma_z, int radius) {
    if (radius < 0) throw InvalidArgument("gaussian_kernel_1d: radius must be >= 0");
    if (!(sigma_z >= 0.0)) throw InvalidArgument("gaussian_kernel_1d: sigma must be >= 0");
    std::vector<double> w(static_cast<std::size_t>(2 * radius + 1), 0.0);
    if (sigma_z == 0.0) {
        w[static_cast<std::size_t>(radius)] = 1.0;
        return w;
    }
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double v = std::exp(-static_cast<double>(k) * k / (2.0 * sigma_z * sigma_z));
        w[static_cast<std::size_t>(k + radius)] = v;
        sum += v;
    }
    for (double& v : w) v /= sum;
    return w;
}

ProbabilityVolume smooth_z(const ProbabilityVolume& volume, const ZSmoothConfig& config) {
    config.validate();
    if (volume.depth() < 1) throw DimensionError("smooth_z: empty volume");
    if (config.sigma_z == 0.0 || config.radius == 0) return volume;

    const auto kernel = gaussian_kernel_1d(config.sigma_z, config.radius);
    const int depth = volume.depth();
    const int radius = config.radius;
    const std::size_t plane = volume.slice(0).size();
    std::vector<ProbabilityMap> out;
    out.reserve(static_cast<std::size_t>(depth));
    for (int z = 0; z < depth; ++z) {
        const int k0 = std::max(-radius, -z);
        const int k1 = std::min(radius, depth - 1 - z);
        double norm = 0.0;
        for (int k = k0; k <= k1; ++k) norm += kernel[static_cast<std::size_t>(k + radius)];
        RealGrid acc(volume.height(), volume.width(), 0.0);
        for (int k = k0; k <= k1; ++k) {
            const double wk = kernel[static_cast<std::size_t>(k + radius)] / norm;
            const auto& src = volume.slice(z + k);
            for (std::size_t i = 0; i < plane; ++i) acc[i] += wk * src[i];
        }
        out.push_back(ProbabilityMap::clamped(acc));
    }
    return ProbabilityVolume(std::move(out));
}

std::vector<BinaryMask> volume_threshold(const ProbabilityVolume& volume, double level) {
    std::vector<BinaryMask> out;
    out.reserve(static_cast<std::size_t>(volume.depth()));
    for (const auto& s : volume.slices()) out.push_back(fusion::threshold(s, level));
    return out;
}

}  // namespace mvr::volumetric
