#include "mvr/core/grid.hpp"

#include <algorithm>
#include <cmath>

namespace mvr {

namespace {

void check_probabilities(std::span<const float> values) {
    for (float v : values) {
        if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
            throw InvalidArgument("probability map value outside [0, 1]");
        }
    }
}

}  // namespace

ProbabilityMap::ProbabilityMap(int height, int width, float fill) : grid_(height, width, fill) {
    check_probabilities(grid_.values());
}

ProbabilityMap::ProbabilityMap(Grid<float> grid) : grid_(std::move(grid)) {
    check_probabilities(grid_.values());
}

ProbabilityMap ProbabilityMap::clamped(const RealGrid& grid) {
    Grid<float> out(grid.height(), grid.width());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (std::isnan(grid[i])) throw InvalidArgument("NaN in probability grid");
        out[i] = static_cast<float>(std::clamp(grid[i], 0.0, 1.0));
    }
    return ProbabilityMap(std::move(out));
}

RealGrid ProbabilityMap::to_real() const {
    RealGrid out(height(), width());
    for (std::size_t i = 0; i < size(); ++i) out[i] = grid_[i];
    return out;
}

BinaryMask::BinaryMask(int height, int width, std::uint8_t fill) : grid_(height, width, fill) {
    if (fill > 1) throw InvalidArgument("binary mask fill must be 0 or 1");
}

BinaryMask::BinaryMask(Grid<std::uint8_t> grid) : grid_(std::move(grid)) {
    for (auto v : grid_.values()) {
        if (v > 1) throw InvalidArgument("binary mask value must be 0 or 1");
    }
}

std::size_t BinaryMask::count() const {
    return static_cast<std::size_t>(std::count(grid_.values().begin(), grid_.values().end(), 1));
}

ProbabilityVolume::ProbabilityVolume(std::vector<ProbabilityMap> slices) : slices_(std::move(slices)) {
    for (const auto& s : slices_) {
        if (s.height() != slices_.front().height() || s.width() != slices_.front().width()) {
            throw DimensionError("volume slices must share height and width");
        }
    }
}

}  // namespace mvr
