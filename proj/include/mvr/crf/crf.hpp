#pragma once

#include <cstdint>
#include <vector>

#include "mvr/core/grid.hpp"

namespace mvr::crf {

inline constexpr std::size_t kExactPixelCap = 4096;
inline constexpr double kUnaryClamp = 1e-6;

enum class CrfMode { exact, approximate };

struct CrfConfig {
    int iterations = 5;
    double w_gaussian = 3.0;
    double sigma_xy_gaussian = 3.0;
    double w_bilateral = 5.0;
    double sigma_xy_bilateral = 50.0;
    double sigma_rgb = 13.0;
    CrfMode mode = CrfMode::approximate;

    void validate() const;
};

/// Three-channel guide with intensities on a 0..255 scale.
class GuideImage {
public:
    GuideImage() = default;
    GuideImage(int height, int width, std::vector<float> rgb);
    /// Replicates a single channel into three.
    static GuideImage from_gray(const Grid<float>& gray);

    int height() const { return height_; }
    int width() const { return width_; }
    float at(int r, int c, int ch) const {
        return rgb_[(static_cast<std::size_t>(r) * width_ + c) * 3 + static_cast<std::size_t>(ch)];
    }
    const std::vector<float>& rgb() const { return rgb_; }
    /// True when all three channels agree at every pixel.
    bool is_gray() const;

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<float> rgb_;
};

/// ln(p / (1 - p)) with p clamped to [kUnaryClamp, 1 - kUnaryClamp]; this is
/// the difference of the -ln unaries of the two labels.
RealGrid unary_logits(const ProbabilityMap& p);

/// One literal mean-field update summing over every pixel pair. `q` is the
/// current foreground marginal. Throws CapExceededError above kExactPixelCap.
RealGrid crf_exact_step(const RealGrid& q, const RealGrid& unary_logit, const GuideImage& guide,
                        const CrfConfig& config);

/// Fast message computation. The spatial term is a separable convolution
/// truncated at 4 sigma. The bilateral term lives on a dense grid over
/// (position, colour) with a node every half bandwidth: values are splatted and
/// sliced with 4-point cubic Lagrange weights and blurred with the exact kernel
/// sampled at node offsets.
class ApproximateFilter {
public:
    ApproximateFilter(const GuideImage& guide, const CrfConfig& config);

    /// Sum over j != i of (w_g k_g + w_b k_b)(i, j) * v(j), approximated.
    RealGrid apply(const RealGrid& v) const;

private:
    RealGrid gaussian(const RealGrid& v) const;
    RealGrid bilateral(const RealGrid& v) const;

    struct Axis {
        int extent = 0;
        std::size_t stride = 0;
        std::vector<double> taps;  // kernel samples at node offsets, index k + radius
        int radius = 0;
    };

    int height_ = 0;
    int width_ = 0;
    double w_gaussian_ = 0.0;
    double w_bilateral_ = 0.0;
    std::vector<double> spatial_taps_;  // 1-D Gaussian, index d + spatial_radius_
    int spatial_radius_ = 0;

    std::vector<Axis> axes_;
    std::size_t cells_ = 0;
    std::vector<std::size_t> base_;     // per pixel: linear index of the first stencil node
    std::vector<double> weights_;       // per pixel x dim: 4 interpolation weights
    std::vector<double> self_weight_;   // per pixel: approximated k_b(i, i)
};

RealGrid crf_approximate_step(const RealGrid& q, const RealGrid& unary_logit, const ApproximateFilter& filter,
                              const RealGrid& k_ones);

/// Binary dense-CRF mean-field refinement with Potts compatibility. Returns the
/// foreground marginal after `iterations` updates.
ProbabilityMap densecrf_refine(const ProbabilityMap& p, const GuideImage& guide, const CrfConfig& config);

}  // namespace mvr::crf
