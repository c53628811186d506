#include "mvr/crf/crf.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "mvr/core/error.hpp"
#include "mvr/core/resample.hpp"

namespace mvr::crf {

namespace {

// Bilateral-grid cells beyond this are coarsened along the range axes.
constexpr std::size_t kGridCellBudget = std::size_t{1} << 25;

void check_shapes(const RealGrid& q, const RealGrid& unary, const GuideImage& guide) {
    if (!q.same_shape(unary) || q.height() != guide.height() || q.width() != guide.width()) {
        throw DimensionError("crf: probability map and guide shapes differ");
    }
}

constexpr double kTruncation = 4.0;  // kernel support, in bandwidths
// Grid node spacing, in bandwidths. Spatial axes are cheap (a handful of
// nodes per image side), so they get a finer spacing.
constexpr double kSpatialCell = 0.25;
constexpr double kRangeCell = 1.0 / 3.0;

// Cubic Lagrange weights for nodes at offsets -1, 0, 1, 2 from floor(x), t = frac(x).
std::array<double, 4> cubic_weights(double t) {
    return {-t * (t - 1.0) * (t - 2.0) / 6.0, (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
            -(t + 1.0) * t * (t - 2.0) / 2.0, (t + 1.0) * t * (t - 1.0) / 6.0};
}

// exp(-(cell * k)^2 / 2) for |k| <= radius.
std::vector<double> node_taps(double cell, int& radius) {
    radius = static_cast<int>(std::ceil(kTruncation / cell));
    std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
    for (int k = -radius; k <= radius; ++k) {
        const double d = cell * k;
        taps[static_cast<std::size_t>(k + radius)] = std::exp(-0.5 * d * d);
    }
    return taps;
}

}  // namespace

void CrfConfig::validate() const {
    if (iterations < 0) throw ConfigError("crf iterations must be >= 0");
    if (!(sigma_xy_gaussian > 0.0) || !(sigma_xy_bilateral > 0.0) || !(sigma_rgb > 0.0)) {
        throw ConfigError("crf bandwidths must be > 0");
    }
    if (!(w_gaussian >= 0.0) || !(w_bilateral >= 0.0)) throw ConfigError("crf weights must be >= 0");
}

GuideImage::GuideImage(int height, int width, std::vector<float> rgb)
    : height_(height), width_(width), rgb_(std::move(rgb)) {
    if (height < 1 || width < 1) throw DimensionError("guide image must be non-empty");
    if (rgb_.size() != static_cast<std::size_t>(height) * width * 3) {
        throw DimensionError("guide payload does not match 3 * height * width");
    }
}

GuideImage GuideImage::from_gray(const Grid<float>& gray) {
    std::vector<float> rgb(gray.size() * 3);
    for (std::size_t i = 0; i < gray.size(); ++i) rgb[3 * i] = rgb[3 * i + 1] = rgb[3 * i + 2] = gray[i];
    return GuideImage(gray.height(), gray.width(), std::move(rgb));
}

bool GuideImage::is_gray() const {
    for (std::size_t i = 0; i < rgb_.size(); i += 3) {
        if (rgb_[i] != rgb_[i + 1] || rgb_[i] != rgb_[i + 2]) return false;
    }
    return true;
}

RealGrid unary_logits(const ProbabilityMap& p) {
    RealGrid out(p.height(), p.width());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pc = std::clamp(static_cast<double>(p[i]), kUnaryClamp, 1.0 - kUnaryClamp);
        out[i] = std::log(pc) - std::log(1.0 - pc);
    }
    return out;
}

RealGrid crf_exact_step(const RealGrid& q, const RealGrid& unary_logit, const GuideImage& guide,
                        const CrfConfig& config) {
    config.validate();
    check_shapes(q, unary_logit, guide);
    if (q.size() > kExactPixelCap) {
        throw CapExceededError("exact CRF is limited to " + std::to_string(kExactPixelCap) + " pixels");
    }
    const int h = q.height();
    const int w = q.width();
    const double ig = 1.0 / (2.0 * config.sigma_xy_gaussian * config.sigma_xy_gaussian);
    const double ib = 1.0 / (2.0 * config.sigma_xy_bilateral * config.sigma_xy_bilateral);
    const double ir = 1.0 / (2.0 * config.sigma_rgb * config.sigma_rgb);
    RealGrid out(h, w);
    for (int ri = 0; ri < h; ++ri) {
        for (int ci = 0; ci < w; ++ci) {
            double k_ones = 0.0;
            double k_q = 0.0;
            for (int rj = 0; rj < h; ++rj) {
                for (int cj = 0; cj < w; ++cj) {
                    if (rj == ri && cj == ci) continue;
                    const double dxy = static_cast<double>((ri - rj) * (ri - rj) + (ci - cj) * (ci - cj));
                    double drgb = 0.0;
                    for (int ch = 0; ch < 3; ++ch) {
                        const double d = static_cast<double>(guide.at(ri, ci, ch)) - guide.at(rj, cj, ch);
                        drgb += d * d;
                    }
                    const double k = config.w_gaussian * std::exp(-dxy * ig) +
                                     config.w_bilateral * std::exp(-dxy * ib - drgb * ir);
                    k_ones += k;
                    k_q += k * q(rj, cj);
                }
            }
            out(ri, ci) = sigmoid(unary_logit(ri, ci) + 2.0 * k_q - k_ones);
        }
    }
    return out;
}

ApproximateFilter::ApproximateFilter(const GuideImage& guide, const CrfConfig& config)
    : height_(guide.height()), width_(guide.width()), w_gaussian_(config.w_gaussian),
      w_bilateral_(config.w_bilateral) {
    config.validate();

    spatial_radius_ = static_cast<int>(std::ceil(kTruncation * config.sigma_xy_gaussian));
    spatial_taps_.resize(static_cast<std::size_t>(2 * spatial_radius_ + 1));
    for (int d = -spatial_radius_; d <= spatial_radius_; ++d) {
        spatial_taps_[static_cast<std::size_t>(d + spatial_radius_)] =
            std::exp(-0.5 * d * d / (config.sigma_xy_gaussian * config.sigma_xy_gaussian));
    }

    if (w_bilateral_ == 0.0) return;

    // Feature space: (y, x) / sigma_xy and colour / sigma_rgb, so the kernel is
    // exp(-|f_i - f_j|^2 / 2). Grayscale guides collapse to one range axis
    // scaled by sqrt(3). Spatial axes are centred so mirror images land on
    // mirrored nodes.
    const bool gray = guide.is_gray();
    const int dims = 2 + (gray ? 1 : 3);
    const auto udims = static_cast<std::size_t>(dims);
    const std::size_t n = static_cast<std::size_t>(height_) * width_;
    std::vector<double> feat(n * udims);
    for (int r = 0; r < height_; ++r) {
        for (int c = 0; c < width_; ++c) {
            double* f = feat.data() + (static_cast<std::size_t>(r) * width_ + c) * udims;
            f[0] = (r - 0.5 * (height_ - 1)) / config.sigma_xy_bilateral;
            f[1] = (c - 0.5 * (width_ - 1)) / config.sigma_xy_bilateral;
            if (gray) {
                f[2] = std::sqrt(3.0) * guide.at(r, c, 0) / config.sigma_rgb;
            } else {
                for (int ch = 0; ch < 3; ++ch) f[2 + ch] = guide.at(r, c, ch) / config.sigma_rgb;
            }
        }
    }

    // Range nodes spread out only if the dense grid would exceed the budget.
    std::vector<double> cell(udims, kRangeCell);
    cell[0] = cell[1] = kSpatialCell;
    std::vector<double> lo(udims, std::numeric_limits<double>::infinity());
    std::vector<double> hi(udims, -std::numeric_limits<double>::infinity());
    std::vector<int> origin(udims);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < udims; ++d) {
            lo[d] = std::min(lo[d], feat[i * udims + d]);
            hi[d] = std::max(hi[d], feat[i * udims + d]);
        }
    }
    axes_.assign(udims, Axis{});
    for (;;) {
        cells_ = 1;
        for (std::size_t d = 0; d < udims; ++d) {
            origin[d] = static_cast<int>(std::floor(lo[d] / cell[d])) - 1;
            axes_[d].extent = static_cast<int>(std::floor(hi[d] / cell[d])) + 2 - origin[d] + 1;
            cells_ *= static_cast<std::size_t>(axes_[d].extent);
        }
        if (cells_ <= kGridCellBudget) break;
        for (std::size_t d = 2; d < udims; ++d) cell[d] *= 1.25;
        if (cell[2] > 2.0) throw CapExceededError("bilateral grid does not fit the cell budget");
    }
    std::size_t stride = 1;
    for (std::size_t d = udims; d-- > 0;) {
        axes_[d].stride = stride;
        stride *= static_cast<std::size_t>(axes_[d].extent);
        axes_[d].taps = node_taps(cell[d], axes_[d].radius);
    }

    base_.resize(n);
    weights_.resize(n * udims * 4);
    self_weight_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t base = 0;
        double self = 1.0;
        for (std::size_t d = 0; d < udims; ++d) {
            const double g = feat[i * udims + d] / cell[d];
            const double fl = std::floor(g);
            base += static_cast<std::size_t>(static_cast<int>(fl) - 1 - origin[d]) * axes_[d].stride;
            const auto w = cubic_weights(g - fl);
            std::copy(w.begin(), w.end(), weights_.begin() + static_cast<std::ptrdiff_t>((i * udims + d) * 4));
            // Same-pixel pair pushed through splat, blur and slice along this axis.
            const auto& taps = axes_[d].taps;
            const int rad = axes_[d].radius;
            double s = 0.0;
            for (int a = 0; a < 4; ++a) {
                for (int b = 0; b < 4; ++b) s += w[a] * w[b] * taps[static_cast<std::size_t>(a - b + rad)];
            }
            self *= s;
        }
        base_[i] = base;
        self_weight_[i] = self;
    }
}

RealGrid ApproximateFilter::gaussian(const RealGrid& v) const {
    const int h = height_;
    const int w = width_;
    const int rad = spatial_radius_;
    RealGrid rows(h, w, 0.0);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double s = 0.0;
            for (int d = std::max(-rad, -c); d <= std::min(rad, w - 1 - c); ++d) {
                s += spatial_taps_[static_cast<std::size_t>(d + rad)] * v(r, c + d);
            }
            rows(r, c) = s;
        }
    }
    RealGrid out(h, w, 0.0);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double s = 0.0;
            for (int d = std::max(-rad, -r); d <= std::min(rad, h - 1 - r); ++d) {
                s += spatial_taps_[static_cast<std::size_t>(d + rad)] * rows(r + d, c);
            }
            out(r, c) = s - v(r, c);
        }
    }
    return out;
}

RealGrid ApproximateFilter::bilateral(const RealGrid& v) const {
    const std::size_t dims = axes_.size();
    const std::size_t n = v.size();
    const std::size_t stencil = std::size_t{1} << (2 * dims);  // 4^dims nodes per pixel
    std::vector<std::size_t> offsets(stencil);
    for (std::size_t k = 0; k < stencil; ++k) {
        std::size_t off = 0;
        for (std::size_t d = 0; d < dims; ++d) off += ((k >> (2 * d)) & 3U) * axes_[d].stride;
        offsets[k] = off;
    }
    // Interpolation weight of stencil node k for pixel i.
    auto weight = [&](std::size_t i, std::size_t k) {
        const double* w = weights_.data() + i * dims * 4;
        double p = 1.0;
        for (std::size_t d = 0; d < dims; ++d) p *= w[d * 4 + ((k >> (2 * d)) & 3U)];
        return p;
    };

    std::vector<double> grid(cells_, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (v[i] == 0.0) continue;
        for (std::size_t k = 0; k < stencil; ++k) grid[base_[i] + offsets[k]] += weight(i, k) * v[i];
    }

    std::vector<double> line;
    std::vector<double> blurred;
    for (const auto& ax : axes_) {
        const auto len = static_cast<std::size_t>(ax.extent);
        const std::size_t inner = ax.stride;
        const std::size_t outer = cells_ / (len * inner);
        line.resize(len);
        blurred.resize(len);
        for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t in = 0; in < inner; ++in) {
                const std::size_t start = o * len * inner + in;
                bool nonzero = false;
                for (std::size_t x = 0; x < len; ++x) {
                    line[x] = grid[start + x * inner];
                    nonzero = nonzero || line[x] != 0.0;
                }
                if (!nonzero) continue;
                for (std::size_t x = 0; x < len; ++x) {
                    double s = 0.0;
                    const int xi = static_cast<int>(x);
                    const int k0 = std::max(-ax.radius, xi - static_cast<int>(len) + 1);
                    const int k1 = std::min(ax.radius, xi);
                    for (int k = k0; k <= k1; ++k) {
                        s += ax.taps[static_cast<std::size_t>(k + ax.radius)] * line[static_cast<std::size_t>(xi - k)];
                    }
                    blurred[x] = s;
                }
                for (std::size_t x = 0; x < len; ++x) grid[start + x * inner] = blurred[x];
            }
        }
    }

    RealGrid out(v.height(), v.width());
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < stencil; ++k) s += weight(i, k) * grid[base_[i] + offsets[k]];
        out[i] = s - self_weight_[i] * v[i];
    }
    return out;
}

RealGrid ApproximateFilter::apply(const RealGrid& v) const {
    if (v.height() != height_ || v.width() != width_) throw DimensionError("crf filter: shape mismatch");
    RealGrid out(height_, width_, 0.0);
    if (w_gaussian_ != 0.0) {
        const RealGrid g = gaussian(v);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += w_gaussian_ * g[i];
    }
    if (w_bilateral_ != 0.0) {
        const RealGrid b = bilateral(v);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += w_bilateral_ * b[i];
    }
    return out;
}

RealGrid crf_approximate_step(const RealGrid& q, const RealGrid& unary_logit, const ApproximateFilter& filter,
                              const RealGrid& k_ones) {
    const RealGrid k_q = filter.apply(q);
    RealGrid out(q.height(), q.width());
    for (std::size_t i = 0; i < q.size(); ++i) out[i] = sigmoid(unary_logit[i] + 2.0 * k_q[i] - k_ones[i]);
    return out;
}

ProbabilityMap densecrf_refine(const ProbabilityMap& p, const GuideImage& guide, const CrfConfig& config) {
    config.validate();
    const RealGrid logit = unary_logits(p);
    RealGrid q = sigmoid_real(logit);
    check_shapes(q, logit, guide);
    if (config.mode == CrfMode::exact && q.size() > kExactPixelCap) {
        throw CapExceededError("exact CRF is limited to " + std::to_string(kExactPixelCap) + " pixels");
    }
    if (config.iterations == 0) return ProbabilityMap::clamped(q);

    if (config.mode == CrfMode::exact) {
        for (int it = 0; it < config.iterations; ++it) q = crf_exact_step(q, logit, guide, config);
    } else {
        const ApproximateFilter filter(guide, config);
        const RealGrid k_ones = filter.apply(RealGrid(q.height(), q.width(), 1.0));
        for (int it = 0; it < config.iterations; ++it) q = crf_approximate_step(q, logit, filter, k_ones);
    }
    return ProbabilityMap::clamped(q);
}

}  // namespace mvr::crf
