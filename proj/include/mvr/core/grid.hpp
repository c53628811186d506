#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mvr/core/error.hpp"

namespace mvr {

/// Row-major 2-D grid. Shape is fixed at construction.
template <typename T>
class Grid {
public:
    using value_type = T;

    Grid() = default;
    Grid(int height, int width, T fill = T{})
        : height_(height), width_(width), data_(checked_size(height, width), fill) {}
    Grid(int height, int width, std::vector<T> data)
        : height_(height), width_(width), data_(std::move(data)) {
        if (data_.size() != checked_size(height, width)) {
            throw DimensionError("grid payload does not match its shape");
        }
    }

    int height() const { return height_; }
    int width() const { return width_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * width_ + c]; }
    const T& operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * width_ + c]; }
    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    std::span<T> values() { return data_; }
    std::span<const T> values() const { return data_; }
    const std::vector<T>& data() const { return data_; }

    bool same_shape(const auto& other) const {
        return height_ == other.height() && width_ == other.width();
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    static std::size_t checked_size(int h, int w) {
        if (h < 0 || w < 0) throw DimensionError("negative grid dimension");
        return static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
    }

    int height_ = 0;
    int width_ = 0;
    std::vector<T> data_;
};

using RealGrid = Grid<double>;

/// Per-pixel foreground probabilities. Every value is finite and in [0, 1].
class ProbabilityMap {
public:
    ProbabilityMap() = default;
    ProbabilityMap(int height, int width, float fill = 0.0f);
    explicit ProbabilityMap(Grid<float> grid);

    /// Clamps into [0, 1] instead of validating; NaN is still rejected.
    static ProbabilityMap clamped(const RealGrid& grid);

    int height() const { return grid_.height(); }
    int width() const { return grid_.width(); }
    std::size_t size() const { return grid_.size(); }
    float operator()(int r, int c) const { return grid_(r, c); }
    float operator[](std::size_t i) const { return grid_[i]; }
    const Grid<float>& grid() const { return grid_; }
    std::span<const float> values() const { return grid_.values(); }

    RealGrid to_real() const;

    friend bool operator==(const ProbabilityMap&, const ProbabilityMap&) = default;

private:
    Grid<float> grid_;
};

/// Thresholded segmentation with values exactly 0 or 1.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int height, int width, std::uint8_t fill = 0);
    explicit BinaryMask(Grid<std::uint8_t> grid);

    int height() const { return grid_.height(); }
    int width() const { return grid_.width(); }
    std::size_t size() const { return grid_.size(); }
    std::uint8_t operator()(int r, int c) const { return grid_(r, c); }
    std::uint8_t operator[](std::size_t i) const { return grid_[i]; }
    void set(int r, int c, bool on) { grid_(r, c) = on ? 1 : 0; }
    const Grid<std::uint8_t>& grid() const { return grid_; }
    std::span<const std::uint8_t> values() const { return grid_.values(); }

    std::size_t count() const;
    bool any() const { return count() > 0; }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    Grid<std::uint8_t> grid_;
};

/// Slices of uniform shape, indexed by depth.
class ProbabilityVolume {
public:
    ProbabilityVolume() = default;
    explicit ProbabilityVolume(std::vector<ProbabilityMap> slices);

    int depth() const { return static_cast<int>(slices_.size()); }
    int height() const { return slices_.empty() ? 0 : slices_.front().height(); }
    int width() const { return slices_.empty() ? 0 : slices_.front().width(); }
    const ProbabilityMap& slice(int z) const { return slices_.at(static_cast<std::size_t>(z)); }
    const std::vector<ProbabilityMap>& slices() const { return slices_; }

private:
    std::vector<ProbabilityMap> slices_;
};

}  // namespace mvr
