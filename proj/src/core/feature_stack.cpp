#include "mvr/core/feature_stack.hpp"

#include <cmath>
#include <string>

#include "mvr/core/error.hpp"

namespace mvr {

std::string_view to_string(TransformId t) {
    switch (t) {
        case TransformId::identity: return "id";
        case TransformId::hflip: return "hflip";
        case TransformId::vflip: return "vflip";
    }
    return "?";
}

TransformId parse_transform(std::string_view name) {
    if (name == "id" || name == "identity") return TransformId::identity;
    if (name == "hflip") return TransformId::hflip;
    if (name == "vflip") return TransformId::vflip;
    throw InvalidArgument("unknown transform '" + std::string(name) + "'");
}

FeatureStack::FeatureStack(int h, int w, int c, std::uint32_t resolution, TransformId transform)
    : height(h), width(w), channels(c), resolution_tag(resolution), transform_tag(transform) {
    if (h < 1 || w < 1 || c < 1) throw DimensionError("feature stack dimensions must be >= 1");
    data.assign(static_cast<std::size_t>(h) * w * c, 0.0f);
}

void FeatureStack::validate() const {
    if (height < 1 || width < 1 || channels < 1) {
        throw DimensionError("feature stack dimensions must be >= 1");
    }
    if (data.size() != patch_count() * static_cast<std::size_t>(channels)) {
        throw DimensionError("feature stack payload does not match h*w*channels");
    }
    for (float v : data) {
        if (!std::isfinite(v)) throw InvalidArgument("non-finite feature value");
    }
}

}  // namespace mvr
