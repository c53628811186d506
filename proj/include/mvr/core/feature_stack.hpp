#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace mvr {

enum class TransformId : std::uint8_t { identity = 0, hflip = 1, vflip = 2 };

std::string_view to_string(TransformId t);
TransformId parse_transform(std::string_view name);

/// Concatenated last-block patch features on an h x w patch grid.
/// Storage is row-major with the channel axis fastest.
struct FeatureStack {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::uint32_t resolution_tag = 0;
    TransformId transform_tag = TransformId::identity;
    std::vector<float> data;

    FeatureStack() = default;
    FeatureStack(int h, int w, int c, std::uint32_t resolution, TransformId transform);

    std::span<const float> at(int r, int c) const {
        return {data.data() + (static_cast<std::size_t>(r) * width + c) * channels,
                static_cast<std::size_t>(channels)};
    }
    std::span<float> at(int r, int c) {
        return {data.data() + (static_cast<std::size_t>(r) * width + c) * channels,
                static_cast<std::size_t>(channels)};
    }
    std::size_t patch_count() const { return static_cast<std::size_t>(height) * width; }

    /// Throws DimensionError on inconsistent shape, InvalidArgument on non-finite values.
    void validate() const;

    friend bool operator==(const FeatureStack&, const FeatureStack&) = default;
};

}  // namespace mvr
