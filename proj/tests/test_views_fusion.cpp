#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "mvr/core/error.hpp"
#include "mvr/core/rng.hpp"
#include "mvr/core/transform.hpp"
#include "mvr/fusion/fusion.hpp"
#include "mvr/views/views.hpp"
#include "oracles.hpp"

using namespace mvr;

namespace {

ProbabilityMap random_map(Rng& rng, int h, int w) {
    Grid<float> g(h, w);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<float>(rng.uniform());
    return ProbabilityMap(g);
}

ProbabilityMap constant(int h, int w, float v) { return ProbabilityMap(h, w, v); }

}  // namespace

TEST(Entropy, PinnedValues) {
    EXPECT_NEAR(fusion::binary_entropy(0.5), std::log(2.0), 1e-7);
    EXPECT_NEAR(fusion::binary_entropy(0.25), 0.562335, 1e-6);
    EXPECT_NEAR(fusion::binary_entropy(0.0), 0.0, 1e-7);
    EXPECT_NEAR(fusion::binary_entropy(1.0), 0.0, 1e-7);
    EXPECT_DOUBLE_EQ(fusion::binary_entropy(0.3), fusion::binary_entropy(0.7));
}

TEST(Fusion, RoutesByLowBranchEntropy) {
    const fusion::FusionConfig cfg;
    // H(0.95) ~ 0.199 <= 0.3 keeps the low branch; H(0.6) ~ 0.673 > 0.3 takes the high branch.
    EXPECT_EQ(fusion::fuse_entropy_guided(constant(2, 2, 0.95f), constant(2, 2, 0.1f), cfg)[0], 0.95f);
    EXPECT_EQ(fusion::fuse_entropy_guided(constant(2, 2, 0.6f), constant(2, 2, 0.1f), cfg)[3], 0.1f);
}

TEST(Fusion, TauExtremes) {
    Rng rng(21);
    const auto lo = random_map(rng, 5, 6);
    const auto hi = random_map(rng, 5, 6);
    fusion::FusionConfig all_lo;
    all_lo.tau = 1.0;  // above ln 2
    EXPECT_EQ(fusion::fuse_entropy_guided(lo, hi, all_lo), lo);
    fusion::FusionConfig all_hi;
    all_hi.tau = 0.0;
    const auto f = fusion::fuse_entropy_guided(lo, hi, all_hi);
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (lo[i] > 0.0f && lo[i] < 1.0f) {
            EXPECT_EQ(f[i], hi[i]);
        }
    }
}

TEST(Fusion, MatchesPerPixelLoop) {
    Rng rng(22);
    for (int k = 0; k < 20; ++k) {
        const auto lo = random_map(rng, 16, 16);
        const auto hi = random_map(rng, 16, 16);
        fusion::FusionConfig cfg;
        cfg.tau = rng.uniform(0.0, 0.7);
        EXPECT_EQ(fusion::fuse_entropy_guided(lo, hi, cfg), oracle::fuse(lo, hi, cfg.tau, cfg.epsilon));
    }
}

TEST(Fusion, Errors) {
    const fusion::FusionConfig cfg;
    EXPECT_THROW(fusion::fuse_entropy_guided(constant(2, 2, 0.5f), constant(2, 3, 0.5f), cfg), DimensionError);
    fusion::FusionConfig bad;
    bad.tau = -0.1;
    EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Threshold, StrictComparison) {
    EXPECT_EQ(fusion::threshold(constant(2, 2, 0.6f)).count(), 4u);
    EXPECT_EQ(fusion::threshold(constant(2, 2, 0.5f)).count(), 0u);
    Grid<float> g(1, 3, std::vector<float>{0.2f, 0.51f, 0.8f});
    const auto m = fusion::threshold(ProbabilityMap(g), 0.7);
    EXPECT_EQ(m[0], 0);
    EXPECT_EQ(m[1], 0);
    EXPECT_EQ(m[2], 1);
    EXPECT_THROW(fusion::threshold(constant(1, 1, 0.5f), 1.0), InvalidArgument);
}

TEST(Tta, AverageIsElementwiseMean) {
    Rng rng(23);
    std::vector<ProbabilityMap> maps{random_map(rng, 4, 5), random_map(rng, 4, 5), random_map(rng, 4, 5)};
    const auto avg = views::tta_average(maps);
    for (std::size_t i = 0; i < avg.size(); ++i) {
        const double m = (static_cast<double>(maps[0][i]) + maps[1][i] + maps[2][i]) / 3.0;
        EXPECT_NEAR(avg[i], m, 1e-6);
    }
    EXPECT_EQ(views::tta_average(std::span<const ProbabilityMap>(maps.data(), 1)), maps[0]);
    EXPECT_THROW(views::tta_average({}), InvalidArgument);
    maps.push_back(random_map(rng, 4, 4));
    EXPECT_THROW(views::tta_average(maps), DimensionError);
}

TEST(Views, InverseTransformUndoesFlip) {
    Rng rng(24);
    const auto m = random_map(rng, 3, 5);
    for (auto t : {TransformId::identity, TransformId::hflip, TransformId::vflip}) {
        EXPECT_EQ(views::apply_inverse_transform(apply_transform(m, t), t), m);
    }
}

TEST(Views, PredictViewUnflipsAndReportsMissingInputs) {
    // A probe that reads channel 0 directly: logit = f0.
    probe::ProbeParams p(1, 1);
    p.w1()[0] = 1.0;
    p.w2()[0] = 1.0;
    probe::ProbeSet probes{{64, p}};

    FeatureStack id(2, 2, 1, 64, TransformId::identity);
    id.data = {3.0f, 0.0f, 0.0f, 0.0f};
    auto flipped = apply_transform(id, TransformId::hflip);
    flipped.transform_tag = TransformId::hflip;
    views::CaseFeatures feats{{{64, TransformId::identity}, std::make_shared<const FeatureStack>(id)},
                              {{64, TransformId::hflip}, std::make_shared<const FeatureStack>(flipped)}};

    const auto a = views::predict_view(feats, {64, TransformId::identity}, probes, 2, 2);
    const auto b = views::predict_view(feats, {64, TransformId::hflip}, probes, 2, 2);
    EXPECT_EQ(a, b);
    EXPECT_GT(a(0, 0), 0.9f);

    EXPECT_THROW(views::predict_view(feats, {64, TransformId::vflip}, probes, 2, 2), MissingViewError);
    feats[{128, TransformId::identity}] = std::make_shared<const FeatureStack>(id);
    EXPECT_THROW(views::predict_view(feats, {128, TransformId::identity}, probes, 2, 2), MissingProbeError);
}
