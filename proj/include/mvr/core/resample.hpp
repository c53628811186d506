#pragma once

#include <cstdint>
#include <vector>

#include "mvr/core/grid.hpp"

namespace mvr {

/// Interpolation taps for one output coordinate along one axis.
struct LinearTap {
    int lo = 0;
    int hi = 0;
    double frac = 0.0;  // weight of `hi`; `lo` gets 1 - frac
};

/// Half-pixel-center taps: src = (dst + 0.5) * in/out - 0.5, clamped to [0, in - 1].
std::vector<LinearTap> bilinear_taps(int in_size, int out_size);

/// Nearest source index: floor((dst + 0.5) * in/out), clamped.
std::vector<int> nearest_indices(int in_size, int out_size);

RealGrid resize_bilinear(const RealGrid& in, int out_h, int out_w);
Grid<float> resize_bilinear(const Grid<float>& in, int out_h, int out_w);

/// Adjoint of resize_bilinear: scatters an output-space gradient back onto the
/// input grid of shape (in_h, in_w).
RealGrid resize_bilinear_adjoint(const RealGrid& grad_out, int in_h, int in_w);

BinaryMask resize_nearest(const BinaryMask& mask, int out_h, int out_w);

double sigmoid(double x);
ProbabilityMap apply_sigmoid(const RealGrid& logits);
/// Double-precision variant used inside gradient computations.
RealGrid sigmoid_real(const RealGrid& logits);

}  // namespace mvr
