#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>

#include "mvr/core/feature_stack.hpp"
#include "mvr/core/grid.hpp"
#include "mvr/probe/probe.hpp"

namespace mvr::views {

/// One readout view: an input resolution paired with a test-time flip.
struct ViewSpec {
    std::uint32_t resolution = 0;
    TransformId transform = TransformId::identity;

    friend auto operator<=>(const ViewSpec&, const ViewSpec&) = default;
};

std::string describe(const ViewSpec& v);

using CaseFeatures = std::map<ViewSpec, std::shared_ptr<const FeatureStack>>;

/// Flips are involutions, so the inverse is the forward transform.
ProbabilityMap apply_inverse_transform(const ProbabilityMap& map, TransformId t);

/// Prediction for one view mapped back to original image coordinates.
/// Throws MissingViewError / MissingProbeError rather than skipping.
ProbabilityMap predict_view(const CaseFeatures& features, const ViewSpec& view, const probe::ProbeSet& probes,
                            int out_h, int out_w);

/// Element-wise mean accumulated in double, in argument order.
ProbabilityMap tta_average(std::span<const ProbabilityMap> maps);

}  // namespace mvr::views
