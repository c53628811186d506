#pragma once

// Shared synthetic settings for the acceptance run and the harness tests.

#include <algorithm>
#include <cmath>
#include <utility>

#include "mvr/core/resample.hpp"
#include "mvr/core/rng.hpp"
#include "mvr/crf/crf.hpp"
#include "mvr/harness/commands.hpp"

inline mvr::harness::SyntheticSpec acceptance_spec() {
    mvr::harness::SyntheticSpec spec;  // 64x64 images, grids 8x8 (r=128) and 16x16 (r=256)
    spec.noise_sigma = 0.5;
    spec.prototype_distance = 2.0;
    return spec;
}

inline mvr::harness::PipelineConfig acceptance_config(std::uint64_t seed) {
    mvr::harness::PipelineConfig cfg;
    cfg.resolutions = {128, 256};
    cfg.train.hidden = 64;
    cfg.set_seed(seed);
    return cfg;
}

inline mvr::harness::SynthOptions acceptance_volume_options(std::uint64_t seed) {
    mvr::harness::SynthOptions so;
    so.volumetric = true;
    so.patients = 10;
    so.train_patients = 7;
    so.seed = seed;
    so.spec = acceptance_spec();
    return so;
}

/// Piecewise-constant colour regions with guide noise, and probabilities that
/// agree with the region labels only on average.
inline std::pair<mvr::ProbabilityMap, mvr::crf::GuideImage> structured_crf_instance(mvr::Rng& rng, int h, int w) {
    std::vector<int> region(static_cast<std::size_t>(h) * w, 0);
    const int boxes = 1 + static_cast<int>(rng.below(3));
    for (int b = 1; b <= boxes; ++b) {
        const int r0 = static_cast<int>(rng.below(static_cast<std::size_t>(h)));
        const int c0 = static_cast<int>(rng.below(static_cast<std::size_t>(w)));
        const int r1 = std::min(h, r0 + 3 + static_cast<int>(rng.below(static_cast<std::size_t>(h))));
        const int c1 = std::min(w, c0 + 3 + static_cast<int>(rng.below(static_cast<std::size_t>(w))));
        for (int r = r0; r < r1; ++r) {
            for (int c = c0; c < c1; ++c) region[static_cast<std::size_t>(r) * w + c] = b;
        }
    }
    std::vector<std::array<double, 3>> colour(static_cast<std::size_t>(boxes) + 1);
    std::vector<int> label(static_cast<std::size_t>(boxes) + 1);
    for (std::size_t b = 0; b < colour.size(); ++b) {
        for (auto& v : colour[b]) v = rng.uniform(20.0, 235.0);
        label[b] = b == 0 ? 0 : static_cast<int>(rng.below(2));
    }
    std::vector<float> rgb(static_cast<std::size_t>(h) * w * 3);
    mvr::Grid<float> prob(h, w);
    for (std::size_t i = 0; i < region.size(); ++i) {
        const auto b = static_cast<std::size_t>(region[i]);
        for (int ch = 0; ch < 3; ++ch) {
            rgb[i * 3 + ch] = static_cast<float>(std::clamp(colour[b][ch] + 8.0 * rng.normal(), 0.0, 255.0));
        }
        const double logit = (label[b] ? 1.5 : -1.5) + 1.5 * rng.normal();
        prob[i] = static_cast<float>(mvr::sigmoid(logit));
    }
    return {mvr::ProbabilityMap(prob), mvr::crf::GuideImage(h, w, std::move(rgb))};
}
