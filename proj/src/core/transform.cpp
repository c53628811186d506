#include "mvr/core/transform.hpp"

#include <algorithm>

namespace mvr {

FeatureStack apply_transform(const FeatureStack& in, TransformId t) {
    FeatureStack out = in;
    if (t == TransformId::identity) return out;
    for (int r = 0; r < in.height; ++r) {
        for (int c = 0; c < in.width; ++c) {
            const int sr = t == TransformId::vflip ? in.height - 1 - r : r;
            const int sc = t == TransformId::hflip ? in.width - 1 - c : c;
            const auto src = in.at(sr, sc);
            std::copy(src.begin(), src.end(), out.at(r, c).begin());
        }
    }
    return out;
}

}  // namespace mvr
