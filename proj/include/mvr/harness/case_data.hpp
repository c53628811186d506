#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mvr/crf/crf.hpp"
#include "mvr/harness/manifest.hpp"
#include "mvr/probe/train.hpp"
#include "mvr/views/views.hpp"

namespace mvr::harness {

/// Everything the pipeline needs for one image, resident in memory.
struct CaseData {
    std::string case_id;
    std::optional<std::string> patient_id;
    int slice_index = 0;
    int height = 0;
    int width = 0;
    views::CaseFeatures features;
    BinaryMask mask;
    std::optional<crf::GuideImage> guide;
    std::string split;
};

/// Reads the mask, guide and the feature files of the requested views.
CaseData load_case(const CaseRecord& record, std::span<const std::uint32_t> resolutions,
                   std::span<const TransformId> transforms);

/// Feature views that read their file on demand.
probe::TrainingCase training_case(const CaseRecord& record);
probe::TrainingCase training_case(const CaseData& data);

}  // namespace mvr::harness
