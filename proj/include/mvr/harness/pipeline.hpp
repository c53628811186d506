#pragma once

#include <map>

#include "mvr/harness/case_data.hpp"
#include "mvr/harness/config.hpp"

namespace mvr::harness {

/// Per-view predictions in original image coordinates.
using ViewPredictions = std::map<views::ViewSpec, ProbabilityMap>;

struct PipelineOutput {
    ProbabilityMap fused;    // after TTA and resolution fusion
    ProbabilityMap refined;  // after the optional CRF (equals `fused` when off)
    BinaryMask mask;         // refined thresholded at config.threshold
};

/// Runs every probe readout the configuration needs.
ViewPredictions predict_views(const CaseData& data, const probe::ProbeSet& probes, const PipelineConfig& config);

/// TTA mean per resolution, entropy-guided fusion when two resolutions are
/// configured, optional CRF, threshold. `predictions` may hold extra views.
PipelineOutput compose(const CaseData& data, const ViewPredictions& predictions, const PipelineConfig& config);

PipelineOutput run_full_pipeline(const CaseData& data, const probe::ProbeSet& probes, const PipelineConfig& config);

}  // namespace mvr::harness
