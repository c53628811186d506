#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "mvr/core/error.hpp"
#include "mvr/core/resample.hpp"
#include "mvr/core/rng.hpp"
#include "mvr/harness/case_data.hpp"
#include "mvr/harness/synthetic.hpp"
#include "mvr/probe/loss.hpp"
#include "mvr/probe/probe.hpp"
#include "mvr/probe/train.hpp"
#include "oracles.hpp"

using namespace mvr;
using namespace mvr::probe;

namespace {

FeatureStack random_stack(Rng& rng, int h, int w, int c) {
    FeatureStack f(h, w, c, 512, TransformId::identity);
    for (auto& v : f.data) v = static_cast<float>(rng.normal());
    return f;
}

ProbeParams random_params(Rng& rng, int in, int hidden) {
    ProbeParams p(in, hidden);
    for (auto& v : p.values()) v = 0.5 * rng.normal();
    return p;
}

}  // namespace

TEST(ProbeParams, DefaultParameterCount) {
    EXPECT_EQ(ProbeParams::parameter_count(kDefaultInDim, kDefaultHidden), 590337u);
    const auto p = ProbeParams::initialized(kDefaultInDim, kDefaultHidden, 1);
    EXPECT_EQ(p.parameter_count(), 590337u);
    for (double v : p.values()) EXPECT_TRUE(std::isfinite(v));
}

TEST(ProbeParams, LayoutAndInitialisation) {
    const auto p = ProbeParams::initialized(10, 4, 7);
    EXPECT_EQ(p.w1().size(), 40u);
    EXPECT_EQ(p.b1().size(), 4u);
    EXPECT_EQ(p.w2().size(), 4u);
    EXPECT_EQ(p.w1().data() + 40, p.b1().data());
    EXPECT_EQ(p.b1().data() + 4, p.w2().data());
    const double bound1 = std::sqrt(6.0 / 14.0);
    for (double v : p.w1()) EXPECT_LE(std::abs(v), bound1);
    for (double v : p.b1()) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(p.b2(), 0.0);
    EXPECT_EQ(ProbeParams::initialized(10, 4, 7), p);
    EXPECT_NE(ProbeParams::initialized(10, 4, 8), p);
    EXPECT_THROW(ProbeParams(0, 4), DimensionError);
}

TEST(ProbeForward, MatchesManualComputation) {
    Rng rng(11);
    const auto f = random_stack(rng, 3, 2, 5);
    const auto p = random_params(rng, 5, 3);
    const auto logits = probe_forward(f, p);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 2; ++c) {
            double a = p.b2();
            for (int j = 0; j < 3; ++j) {
                double z = p.b1()[j];
                for (int k = 0; k < 5; ++k) z += f.at(r, c)[k] * p.w1()[k * 3 + j];
                a += p.w2()[j] * std::max(z, 0.0);
            }
            EXPECT_NEAR(logits(r, c), a, 1e-9);
        }
    }
}

TEST(ProbeForward, RejectsChannelMismatch) {
    Rng rng(12);
    const auto f = random_stack(rng, 2, 2, 5);
    EXPECT_THROW(probe_forward(f, ProbeParams(6, 3)), DimensionError);
}

TEST(ProbeForward, ZeroWeightsGiveHalf) {
    Rng rng(13);
    const auto f = random_stack(rng, 2, 2, 4);
    const auto map = predict_probability(f, ProbeParams(4, 3), 8, 8);
    ASSERT_EQ(map.height(), 8);
    for (float v : map.values()) EXPECT_EQ(v, 0.5f);
}

TEST(ProbeForward, PredictProbabilityIsSigmoidOfUpsampledLogits) {
    Rng rng(14);
    const auto f = random_stack(rng, 3, 3, 4);
    const auto p = random_params(rng, 4, 5);
    const auto logits = probe_forward(f, p);
    const auto up = resize_bilinear(logits, 12, 9);
    const auto map = predict_probability(f, p, 12, 9);
    for (std::size_t i = 0; i < map.size(); ++i) {
        EXPECT_NEAR(map[i], sigmoid(up[i]), 1e-6);
        EXPECT_GT(map[i], 0.0f);
        EXPECT_LT(map[i], 1.0f);
    }
}

TEST(ProbeCodec, RoundTripAndErrors) {
    Rng rng(15);
    const auto p = random_params(rng, 6, 4);
    const auto bytes = encode_probe(p);
    EXPECT_EQ(bytes.size(), 4u + 2 + 4 + 4 + p.parameter_count() * 4);
    const auto back = decode_probe(bytes);
    ASSERT_EQ(back.parameter_count(), p.parameter_count());
    for (std::size_t i = 0; i < p.parameter_count(); ++i) {
        EXPECT_EQ(back.values()[i], static_cast<double>(static_cast<float>(p.values()[i])));
    }
    EXPECT_EQ(encode_probe(back), bytes);

    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    EXPECT_THROW(decode_probe(bad_magic), CorruptHeaderError);
    auto bad_version = bytes;
    bad_version[4] = 9;
    EXPECT_THROW(decode_probe(bad_version), UnsupportedVersionError);
    auto truncated = bytes;
    truncated.pop_back();
    EXPECT_THROW(decode_probe(truncated), TruncatedPayloadError);
    auto trailing = bytes;
    trailing.push_back(0);
    EXPECT_THROW(decode_probe(trailing), CorruptHeaderError);
    EXPECT_THROW(decode_probe(std::vector<std::uint8_t>(3)), CorruptHeaderError);
}

TEST(ProbeCodec, FileRoundTrip) {
    Rng rng(16);
    const auto p = random_params(rng, 3, 2);
    const auto path = std::filesystem::temp_directory_path() / "mvr_test_probe.mvrp";
    save_probe(path, p);
    EXPECT_EQ(encode_probe(load_probe(path)), encode_probe(p));
    std::filesystem::remove(path);
}

TEST(Loss, PinnedValues) {
    BinaryMask y(1, 1, 1);
    const std::vector<double> half{0.5};
    const auto t = loss_terms(half, y, 0.0);
    EXPECT_NEAR(t.bce, std::log(2.0), 1e-12);
    EXPECT_NEAR(t.total, std::log(2.0), 1e-12);
    // Soft Dice: 1 - (2*0.5 + eps) / (0.5 + 1 + eps).
    EXPECT_NEAR(t.dice, 1.0 - (1.0 + 1e-6) / (1.5 + 1e-6), 1e-12);

    BinaryMask y2(1, 2);
    y2.set(0, 0, true);
    const std::vector<double> perfect{1.0, 0.0};
    const auto u = loss_terms(perfect, y2, 1.0);
    EXPECT_NEAR(u.dice, 0.0, 1e-12);
    EXPECT_NEAR(u.bce, -std::log(1.0 - 1e-7), 1e-12);
    EXPECT_THROW(loss_terms(perfect, y, 1.0), DimensionError);
}

TEST(Loss, GradientMatchesFiniteDifferences) {
    Rng rng(17);
    for (int k = 0; k < 10; ++k) {
        const auto y = oracle::random_mask(rng, 3, 4, 0.4);
        std::vector<double> p(12);
        for (auto& v : p) v = rng.uniform(0.05, 0.95);
        const double lambda = rng.uniform(0.0, 2.0);
        const auto g = loss_grad_wrt_prob(p, y, lambda);
        for (std::size_t i = 0; i < p.size(); ++i) {
            auto a = p;
            auto b = p;
            const double h = 1e-6;
            a[i] += h;
            b[i] -= h;
            const double fd = (loss_terms(a, y, lambda).total - loss_terms(b, y, lambda).total) / (2 * h);
            EXPECT_NEAR(g[i], fd, 1e-6 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST(Train, LossAndGradientMatchOracleLoss) {
    Rng rng(18);
    const auto f = random_stack(rng, 2, 3, 4);
    const auto y = oracle::random_mask(rng, 8, 12, 0.5);
    const auto p = random_params(rng, 4, 3);
    std::vector<double> grad;
    const Sample s{&f, &y};
    const double loss = loss_and_gradient(std::span<const Sample>(&s, 1), p, 1.0, 1e-6, &grad);

    oracle::ProbeSample os{2, 3, 4, std::vector<double>(f.data.begin(), f.data.end()), 8, 12, {}};
    for (std::size_t i = 0; i < y.size(); ++i) os.mask.push_back(y[i]);
    const std::vector<double> theta(p.values().begin(), p.values().end());
    EXPECT_NEAR(loss, oracle::probe_loss(theta, 4, 3, {os}, 1.0, 1e-6), 1e-10);
    ASSERT_EQ(grad.size(), p.parameter_count());

    // Spot-check a few coordinates by central differences.
    for (std::size_t i : {std::size_t{0}, std::size_t{5}, std::size_t{12}, std::size_t{15}, grad.size() - 1}) {
        auto a = theta;
        auto b = theta;
        a[i] += 1e-6;
        b[i] -= 1e-6;
        const double fd = (oracle::probe_loss(a, 4, 3, {os}, 1.0, 1e-6) - oracle::probe_loss(b, 4, 3, {os}, 1.0, 1e-6)) / 2e-6;
        EXPECT_NEAR(grad[i], fd, 1e-5 * std::max(1.0, std::abs(fd)));
    }
    EXPECT_THROW(loss_and_gradient({}, p, 1.0, 1e-6, &grad), InvalidArgument);
}

TEST(Train, ConfigValidation) {
    TrainConfig c;
    EXPECT_NO_THROW(c.validate());
    c.lambda_dice = -1;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.learning_rate = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.beta1 = 1.0;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Train, LossDecreasesAndIsDeterministic) {
    std::vector<TrainingCase> cases;
    for (std::uint64_t s = 0; s < 6; ++s) {
        cases.push_back(harness::training_case(harness::generate_synthetic_case(100 + s, 4, 4, 8)));
    }
    TrainConfig cfg;
    cfg.hidden = 8;
    cfg.epochs = 15;
    cfg.learning_rate = 1e-2;
    cfg.seed = 3;
    const auto a = train_probe(cases, 64, cfg);
    const auto b = train_probe(cases, 64, cfg);
    EXPECT_EQ(a.params, b.params);
    EXPECT_EQ(a.epoch_losses, b.epoch_losses);
    ASSERT_EQ(a.epoch_losses.size(), 15u);
    EXPECT_LT(a.epoch_losses.back(), 0.7 * a.epoch_losses.front());
    cfg.seed = 4;
    EXPECT_NE(train_probe(cases, 64, cfg).params, a.params);
    EXPECT_THROW(train_probe(cases, 128, cfg), MissingViewError);
    EXPECT_THROW(train_probe({}, 64, cfg), InvalidArgument);
}
