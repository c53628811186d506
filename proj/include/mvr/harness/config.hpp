#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mvr/core/feature_stack.hpp"
#include "mvr/crf/crf.hpp"
#include "mvr/fusion/fusion.hpp"
#include "mvr/metrics/metrics.hpp"
#include "mvr/probe/train.hpp"
#include "mvr/volumetric/zsmooth.hpp"

namespace mvr::harness {

/// Every tunable of the pipeline. Stored as a JSON object whose keys mirror
/// these fields; absent keys keep the defaults below.
struct PipelineConfig {
    std::vector<std::uint32_t> resolutions{512, 1024};
    std::vector<TransformId> transforms{TransformId::identity, TransformId::hflip, TransformId::vflip};
    fusion::FusionConfig fusion;
    bool crf_enabled = true;
    crf::CrfConfig crf;
    double sigma_z = volumetric::kDefaultSigmaZ;
    double threshold = 0.5;
    int metric_grid = metrics::kMetricGrid;
    probe::TrainConfig train;
    std::uint64_t seed = 42;

    /// One or two resolutions, identity transform present, sub-configs valid.
    void validate() const;

    std::uint32_t lo_resolution() const;
    std::uint32_t hi_resolution() const;

    /// Propagates `seed` into the training config.
    void set_seed(std::uint64_t s);
};

PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const std::string& json_text);
std::string config_to_json(const PipelineConfig& config);

}  // namespace mvr::harness
