#include <gtest/gtest.h>

#include <cmath>

#include "mvr/core/error.hpp"
#include "mvr/core/resample.hpp"
#include "mvr/core/rng.hpp"
#include "mvr/core/transform.hpp"
#include "mvr/crf/crf.hpp"
#include "oracles.hpp"
#include "synthetic_setup.hpp"

using namespace mvr;
using namespace mvr::crf;

namespace {

ProbabilityMap random_map(Rng& rng, int h, int w) {
    Grid<float> g(h, w);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<float>(rng.uniform(0.02, 0.98));
    return ProbabilityMap(g);
}

GuideImage random_guide(Rng& rng, int h, int w) {
    std::vector<float> rgb(static_cast<std::size_t>(h) * w * 3);
    for (auto& v : rgb) v = static_cast<float>(rng.uniform(0.0, 255.0));
    return GuideImage(h, w, rgb);
}

GuideImage flip(const GuideImage& g, TransformId t) {
    std::vector<float> rgb(g.rgb().size());
    const int h = g.height();
    const int w = g.width();
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const int sr = t == TransformId::vflip ? h - 1 - r : r;
            const int sc = t == TransformId::hflip ? w - 1 - c : c;
            for (int ch = 0; ch < 3; ++ch) rgb[(static_cast<std::size_t>(r) * w + c) * 3 + ch] = g.at(sr, sc, ch);
        }
    }
    return GuideImage(h, w, rgb);
}

}  // namespace

TEST(Crf, ConfigValidation) {
    CrfConfig c;
    EXPECT_NO_THROW(c.validate());
    c.iterations = -1;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.sigma_rgb = 0.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.w_bilateral = -1.0;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Crf, GuideConstruction) {
    EXPECT_THROW(GuideImage(2, 2, std::vector<float>(11)), DimensionError);
    Grid<float> gray(1, 2, std::vector<float>{10.0f, 200.0f});
    const auto g = GuideImage::from_gray(gray);
    EXPECT_TRUE(g.is_gray());
    EXPECT_EQ(g.at(0, 1, 2), 200.0f);
    EXPECT_FALSE(GuideImage(1, 1, {1.0f, 2.0f, 3.0f}).is_gray());
}

TEST(Crf, UnaryLogitsClamp) {
    Grid<float> g(1, 3, std::vector<float>{0.0f, 0.75f, 1.0f});
    const auto u = unary_logits(ProbabilityMap(g));
    EXPECT_NEAR(u[1], std::log(3.0), 1e-6);
    EXPECT_NEAR(u[0], std::log(1e-6 / (1 - 1e-6)), 1e-9);
    EXPECT_NEAR(u[2], -u[0], 1e-9);
}

TEST(Crf, TwoPixelClosedForm) {
    Grid<float> p(1, 2, std::vector<float>{0.3f, 0.8f});
    const GuideImage guide(1, 2, {100, 100, 100, 110, 100, 100});
    CrfConfig cfg;
    cfg.iterations = 1;
    const double k = cfg.w_gaussian * std::exp(-1.0 / (2 * 9.0)) +
                     cfg.w_bilateral * std::exp(-1.0 / (2 * 2500.0) - 100.0 / (2 * 169.0));
    const double q0 = 0.3;
    const double q1 = 0.8;
    const double e0 = sigmoid(std::log(q0 / (1 - q0)) + 2 * k * q1 - k);
    const double e1 = sigmoid(std::log(q1 / (1 - q1)) + 2 * k * q0 - k);

    cfg.mode = CrfMode::exact;
    const auto exact = densecrf_refine(ProbabilityMap(p), guide, cfg);
    EXPECT_NEAR(exact[0], e0, 1e-6);
    EXPECT_NEAR(exact[1], e1, 1e-6);
    cfg.mode = CrfMode::approximate;
    const auto approx = densecrf_refine(ProbabilityMap(p), guide, cfg);
    EXPECT_NEAR(approx[0], e0, 1e-3);
    EXPECT_NEAR(approx[1], e1, 1e-3);
}

TEST(Crf, SinglePixelIsUnchanged) {
    const ProbabilityMap p(1, 1, 0.3f);
    const GuideImage guide(1, 1, {50, 60, 70});
    for (auto mode : {CrfMode::exact, CrfMode::approximate}) {
        CrfConfig cfg;
        cfg.mode = mode;
        EXPECT_NEAR(densecrf_refine(p, guide, cfg)[0], 0.3f, 1e-6);
    }
}

TEST(Crf, IdentityConfigurations) {
    Rng rng(41);
    const auto p = random_map(rng, 9, 7);
    const auto guide = random_guide(rng, 9, 7);
    for (auto mode : {CrfMode::exact, CrfMode::approximate}) {
        CrfConfig zero_iters;
        zero_iters.mode = mode;
        zero_iters.iterations = 0;
        CrfConfig zero_weights;
        zero_weights.mode = mode;
        zero_weights.w_gaussian = 0.0;
        zero_weights.w_bilateral = 0.0;
        for (const auto& cfg : {zero_iters, zero_weights}) {
            const auto out = densecrf_refine(p, guide, cfg);
            for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(out[i], p[i], 1e-6);
        }
    }
}

TEST(Crf, ExactMatchesLiteralMeanField) {
    Rng rng(42);
    for (int k = 0; k < 5; ++k) {
        const int h = 3 + static_cast<int>(rng.below(8));
        const int w = 3 + static_cast<int>(rng.below(8));
        const auto p = random_map(rng, h, w);
        const auto guide = random_guide(rng, h, w);
        CrfConfig cfg;
        cfg.mode = CrfMode::exact;
        cfg.iterations = 3;
        cfg.sigma_rgb = rng.uniform(10.0, 80.0);
        const auto out = densecrf_refine(p, guide, cfg);
        const auto ref = oracle::mean_field(
            p, guide.rgb(),
            {cfg.w_gaussian, cfg.sigma_xy_gaussian, cfg.w_bilateral, cfg.sigma_xy_bilateral, cfg.sigma_rgb, 3});
        for (std::size_t i = 0; i < out.size(); ++i) EXPECT_NEAR(out[i], ref[i], 1e-6);
    }
}

TEST(Crf, ApproximateTracksExact) {
    Rng rng(43);
    for (int k = 0; k < 4; ++k) {
        const int h = 8 + static_cast<int>(rng.below(20));
        const int w = 8 + static_cast<int>(rng.below(20));
        auto [p, guide] = structured_crf_instance(rng, h, w);
        CrfConfig exact;
        exact.mode = CrfMode::exact;
        CrfConfig approx;
        const auto a = densecrf_refine(p, guide, exact);
        const auto b = densecrf_refine(p, guide, approx);
        for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-2);
    }
}

TEST(Crf, MirrorSymmetry) {
    Rng rng(44);
    const auto p = random_map(rng, 12, 10);
    const auto guide = random_guide(rng, 12, 10);
    for (auto mode : {CrfMode::exact, CrfMode::approximate}) {
        CrfConfig cfg;
        cfg.mode = mode;
        const auto base = densecrf_refine(p, guide, cfg);
        for (auto t : {TransformId::hflip, TransformId::vflip}) {
            const auto mirrored = densecrf_refine(apply_transform(p, t), flip(guide, t), cfg);
            const auto back = apply_transform(mirrored, t);
            for (std::size_t i = 0; i < base.size(); ++i) EXPECT_NEAR(back[i], base[i], 1e-5);
        }
    }
}

TEST(Crf, ExactCapAndShapeChecks) {
    CrfConfig cfg;
    cfg.mode = CrfMode::exact;
    const ProbabilityMap big(65, 64, 0.5f);
    const auto guide = GuideImage::from_gray(Grid<float>(65, 64, 0.0f));
    EXPECT_THROW(densecrf_refine(big, guide, cfg), CapExceededError);
    cfg.mode = CrfMode::approximate;
    EXPECT_NO_THROW(densecrf_refine(big, guide, cfg));
    EXPECT_THROW(densecrf_refine(ProbabilityMap(4, 4, 0.5f), guide, cfg), DimensionError);
}

TEST(Crf, ApproximateHandlesLargeGrayGuide) {
    Rng rng(45);
    const auto p = random_map(rng, 256, 256);
    Grid<float> gray(256, 256);
    for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = static_cast<float>(rng.uniform(0.0, 255.0));
    const auto out = densecrf_refine(p, GuideImage::from_gray(gray), CrfConfig{});
    for (float v : out.values()) {
        ASSERT_GE(v, 0.0f);
        ASSERT_LE(v, 1.0f);
    }
}
