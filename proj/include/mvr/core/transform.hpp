#pragma once

#include "mvr/core/feature_stack.hpp"
#include "mvr/core/grid.hpp"

namespace mvr {

/// Applies a flip transform to a grid. Every transform is an involution.
template <typename T>
Grid<T> apply_transform(const Grid<T>& in, TransformId t) {
    if (t == TransformId::identity) return in;
    Grid<T> out(in.height(), in.width());
    const int h = in.height();
    const int w = in.width();
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            out(r, c) = t == TransformId::hflip ? in(r, w - 1 - c) : in(h - 1 - r, c);
        }
    }
    return out;
}

inline BinaryMask apply_transform(const BinaryMask& m, TransformId t) {
    return BinaryMask(apply_transform(m.grid(), t));
}

inline ProbabilityMap apply_transform(const ProbabilityMap& m, TransformId t) {
    return ProbabilityMap(apply_transform(m.grid(), t));
}

/// Spatially flips a feature grid (channel vectors move as a unit).
FeatureStack apply_transform(const FeatureStack& in, TransformId t);

}  // namespace mvr
