#include "mvr/fusion/fusion.hpp"

#include <cmath>

#include "mvr/core/error.hpp"

namespace mvr::fusion {

void FusionConfig::validate() const {
    if (!(tau >= 0.0)) throw ConfigError("tau must be >= 0");
    if (!(epsilon > 0.0)) throw ConfigError("entropy epsilon must be > 0");
}

double binary_entropy(double p, double epsilon) {
    return -p * std::log(p + epsilon) - (1.0 - p) * std::log(1.0 - p + epsilon);
}

ProbabilityMap fuse_entropy_guided(const ProbabilityMap& lo, const ProbabilityMap& hi, const FusionConfig& config) {
    config.validate();
    if (lo.height() != hi.height() || lo.width() != hi.width()) {
        throw DimensionError("fuse_entropy_guided: branch shapes differ");
    }
    Grid<float> out(lo.height(), lo.width());
    for (std::size_t i = 0; i < lo.size(); ++i) {
        out[i] = binary_entropy(lo[i], config.epsilon) <= config.tau ? lo[i] : hi[i];
    }
    return ProbabilityMap(std::move(out));
}

BinaryMask threshold(const ProbabilityMap& map, double level) {
    if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("threshold level must be in (0, 1)");
    Grid<std::uint8_t> out(map.height(), map.width());
    for (std::size_t i = 0; i < map.size(); ++i) out[i] = map[i] > level ? 1 : 0;
    return BinaryMask(std::move(out));
}

}  // namespace mvr::fusion
