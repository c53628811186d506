#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "mvr/core/error.hpp"
#include "mvr/core/rng.hpp"
#include "mvr/volumetric/zsmooth.hpp"

using namespace mvr;
using namespace mvr::volumetric;

namespace {

ProbabilityVolume column(const std::vector<float>& values) {
    std::vector<ProbabilityMap> slices;
    for (float v : values) slices.emplace_back(1, 1, v);
    return ProbabilityVolume(slices);
}

}  // namespace

TEST(Kernel, PinnedWeights) {
    const auto k = gaussian_kernel_1d(1.0, 1);
    ASSERT_EQ(k.size(), 3u);
    EXPECT_NEAR(k[0], 0.27406, 1e-5);
    EXPECT_NEAR(k[1], 0.45187, 1e-5);
    EXPECT_NEAR(k[2], 0.27406, 1e-5);
    EXPECT_EQ(gaussian_kernel_1d(3.0, 0), std::vector<double>{1.0});
    EXPECT_EQ(gaussian_kernel_1d(0.0, 2), (std::vector<double>{0, 0, 1, 0, 0}));
}

TEST(Kernel, NormalisedAndSymmetric) {
    for (double s : {0.5, 1.0, 2.5, 4.0}) {
        const int r = static_cast<int>(std::ceil(3 * s));
        const auto k = gaussian_kernel_1d(s, r);
        EXPECT_NEAR(std::accumulate(k.begin(), k.end(), 0.0), 1.0, 1e-12);
        for (int i = 0; i < r; ++i) EXPECT_EQ(k[static_cast<std::size_t>(i)], k[k.size() - 1 - i]);
    }
    EXPECT_THROW(gaussian_kernel_1d(1.0, -1), InvalidArgument);
}

TEST(ZSmooth, ConfigFromSigma) {
    EXPECT_EQ(ZSmoothConfig::from_sigma(4.0).radius, 12);
    EXPECT_EQ(ZSmoothConfig::from_sigma(1.2).radius, 4);
    EXPECT_EQ(ZSmoothConfig::from_sigma(0.0).radius, 0);
    ZSmoothConfig bad{-1.0, 2};
    EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(ZSmooth, ImpulseInInterior) {
    const auto out = smooth_z(column({0, 0, 1, 0, 0}), {1.0, 1});
    EXPECT_NEAR(out.slice(1)[0], 0.27406, 1e-5);
    EXPECT_NEAR(out.slice(2)[0], 0.45187, 1e-5);
    EXPECT_NEAR(out.slice(3)[0], 0.27406, 1e-5);
    EXPECT_EQ(out.slice(0)[0], 0.0f);
}

TEST(ZSmooth, BorderRenormalisation) {
    // At z = 0 the left tap is dropped: (w0 * 1 + w1 * 0) / (w0 + w1).
    const auto out = smooth_z(column({1, 0, 0}), {1.0, 1});
    const double w0 = 0.45187;
    const double w1 = 0.27406;
    EXPECT_NEAR(out.slice(0)[0], w0 / (w0 + w1), 1e-4);
}

TEST(ZSmooth, ConstantsAndIdentity) {
    const auto c = smooth_z(column(std::vector<float>(7, 0.7f)), ZSmoothConfig::from_sigma(4.0));
    for (int z = 0; z < 7; ++z) EXPECT_NEAR(c.slice(z)[0], 0.7f, 1e-6);
    Rng rng(31);
    std::vector<float> v(9);
    for (auto& x : v) x = static_cast<float>(rng.uniform());
    const auto vol = column(v);
    const auto same = smooth_z(vol, ZSmoothConfig::from_sigma(0.0));
    for (int z = 0; z < 9; ++z) EXPECT_EQ(same.slice(z), vol.slice(z));
    EXPECT_THROW(smooth_z(ProbabilityVolume{}, {1.0, 1}), DimensionError);
}

TEST(ZSmooth, BoundedByWindowMax) {
    Rng rng(32);
    std::vector<ProbabilityMap> slices;
    for (int z = 0; z < 12; ++z) {
        Grid<float> g(3, 3);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<float>(rng.uniform());
        slices.emplace_back(g);
    }
    const ProbabilityVolume vol(slices);
    const auto cfg = ZSmoothConfig::from_sigma(1.0);
    const auto out = smooth_z(vol, cfg);
    for (int z = 0; z < 12; ++z) {
        for (std::size_t i = 0; i < 9; ++i) {
            float hi = 0.0f;
            float lo = 1.0f;
            for (int d = -cfg.radius; d <= cfg.radius; ++d) {
                if (z + d < 0 || z + d >= 12) continue;
                hi = std::max(hi, vol.slice(z + d)[i]);
                lo = std::min(lo, vol.slice(z + d)[i]);
            }
            EXPECT_LE(out.slice(z)[i], hi + 1e-6f);
            EXPECT_GE(out.slice(z)[i], lo - 1e-6f);
        }
    }
}

TEST(ZSmooth, ThresholdPerSlice) {
    const auto masks = volume_threshold(column({0.6f, 0.5f, 0.2f}));
    ASSERT_EQ(masks.size(), 3u);
    EXPECT_EQ(masks[0][0], 1);
    EXPECT_EQ(masks[1][0], 0);
    EXPECT_EQ(masks[2][0], 0);
}
