#include "mvr/core/resample.hpp"

#include <algorithm>
#include <cmath>

namespace mvr {

namespace {

void check_dims(int in_h, int in_w, int out_h, int out_w) {
    if (in_h < 1 || in_w < 1) throw DimensionError("resize: input grid is empty");
    if (out_h < 1 || out_w < 1) throw DimensionError("resize: output size must be >= 1");
}

template <typename Out, typename In>
Grid<Out> bilinear_impl(const Grid<In>& in, int out_h, int out_w) {
    check_dims(in.height(), in.width(), out_h, out_w);
    const auto ty = bilinear_taps(in.height(), out_h);
    const auto tx = bilinear_taps(in.width(), out_w);
    Grid<Out> out(out_h, out_w);
    for (int r = 0; r < out_h; ++r) {
        const auto& y = ty[static_cast<std::size_t>(r)];
        for (int c = 0; c < out_w; ++c) {
            const auto& x = tx[static_cast<std::size_t>(c)];
            const double top = (1.0 - x.frac) * in(y.lo, x.lo) + x.frac * in(y.lo, x.hi);
            const double bottom = (1.0 - x.frac) * in(y.hi, x.lo) + x.frac * in(y.hi, x.hi);
            out(r, c) = static_cast<Out>((1.0 - y.frac) * top + y.frac * bottom);
        }
    }
    return out;
}

}  // namespace

std::vector<LinearTap> bilinear_taps(int in_size, int out_size) {
    std::vector<LinearTap> taps(static_cast<std::size_t>(out_size));
    const double scale = static_cast<double>(in_size) / out_size;
    for (int d = 0; d < out_size; ++d) {
        double src = (d + 0.5) * scale - 0.5;
        src = std::clamp(src, 0.0, static_cast<double>(in_size - 1));
        LinearTap t;
        t.lo = static_cast<int>(std::floor(src));
        t.hi = std::min(t.lo + 1, in_size - 1);
        t.frac = src - t.lo;
        taps[static_cast<std::size_t>(d)] = t;
    }
    return taps;
}

std::vector<int> nearest_indices(int in_size, int out_size) {
    std::vector<int> idx(static_cast<std::size_t>(out_size));
    const double scale = static_cast<double>(in_size) / out_size;
    for (int d = 0; d < out_size; ++d) {
        const int s = static_cast<int>(std::floor((d + 0.5) * scale));
        idx[static_cast<std::size_t>(d)] = std::clamp(s, 0, in_size - 1);
    }
    return idx;
}

RealGrid resize_bilinear(const RealGrid& in, int out_h, int out_w) {
    return bilinear_impl<double>(in, out_h, out_w);
}

Grid<float> resize_bilinear(const Grid<float>& in, int out_h, int out_w) {
    return bilinear_impl<float>(in, out_h, out_w);
}

RealGrid resize_bilinear_adjoint(const RealGrid& grad_out, int in_h, int in_w) {
    check_dims(in_h, in_w, grad_out.height(), grad_out.width());
    const auto ty = bilinear_taps(in_h, grad_out.height());
    const auto tx = bilinear_taps(in_w, grad_out.width());
    RealGrid grad_in(in_h, in_w, 0.0);
    for (int r = 0; r < grad_out.height(); ++r) {
        const auto& y = ty[static_cast<std::size_t>(r)];
        for (int c = 0; c < grad_out.width(); ++c) {
            const auto& x = tx[static_cast<std::size_t>(c)];
            const double g = grad_out(r, c);
            grad_in(y.lo, x.lo) += g * (1.0 - y.frac) * (1.0 - x.frac);
            grad_in(y.lo, x.hi) += g * (1.0 - y.frac) * x.frac;
            grad_in(y.hi, x.lo) += g * y.frac * (1.0 - x.frac);
            grad_in(y.hi, x.hi) += g * y.frac * x.frac;
        }
    }
    return grad_in;
}

BinaryMask resize_nearest(const BinaryMask& mask, int out_h, int out_w) {
    check_dims(mask.height(), mask.width(), out_h, out_w);
    const auto iy = nearest_indices(mask.height(), out_h);
    const auto ix = nearest_indices(mask.width(), out_w);
    Grid<std::uint8_t> out(out_h, out_w);
    for (int r = 0; r < out_h; ++r) {
        for (int c = 0; c < out_w; ++c) {
            out(r, c) = mask(iy[static_cast<std::size_t>(r)], ix[static_cast<std::size_t>(c)]);
        }
    }
    return BinaryMask(std::move(out));
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

RealGrid sigmoid_real(const RealGrid& logits) {
    RealGrid out(logits.height(), logits.width());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = sigmoid(logits[i]);
    return out;
}

ProbabilityMap apply_sigmoid(const RealGrid& logits) {
    Grid<float> out(logits.height(), logits.width());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        if (!std::isfinite(logits[i])) throw InvalidArgument("apply_sigmoid: non-finite logit");
        out[i] = static_cast<float>(sigmoid(logits[i]));
    }
    return ProbabilityMap(std::move(out));
}

}  // namespace mvr
