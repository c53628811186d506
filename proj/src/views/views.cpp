#include "mvr/views/views.hpp"

#include "mvr/core/error.hpp"
#include "mvr/core/transform.hpp"

namespace mvr::views {

std::string describe(const ViewSpec& v) {
    return std::to_string(v.resolution) + "/" + std::string(to_string(v.transform));
}

ProbabilityMap apply_inverse_transform(const ProbabilityMap& map, TransformId t) { return apply_transform(map, t); }

ProbabilityMap predict_view(const CaseFeatures& features, const ViewSpec& view, const probe::ProbeSet& probes,
                            int out_h, int out_w) {
    const auto f = features.find(view);
    if (f == features.end() || f->second == nullptr) {
        throw MissingViewError("missing features for view " + describe(view));
    }
    const auto p = probes.find(view.resolution);
    if (p == probes.end()) throw MissingProbeError("no probe for resolution " + std::to_string(view.resolution));
    return apply_inverse_transform(probe::predict_probability(*f->second, p->second, out_h, out_w), view.transform);
}

ProbabilityMap tta_average(std::span<const ProbabilityMap> maps) {
    if (maps.empty()) throw InvalidArgument("tta_average: no maps");
    const auto& first = maps.front();
    std::vector<double> acc(first.size(), 0.0);
    for (const auto& m : maps) {
        if (m.height() != first.height() || m.width() != first.width()) {
            throw DimensionError("tta_average: map shapes differ");
        }
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += m[i];
    }
    const double inv = 1.0 / static_cast<double>(maps.size());
    RealGrid mean(first.height(), first.width());
    for (std::size_t i = 0; i < acc.size(); ++i) mean[i] = acc[i] * inv;
    return ProbabilityMap::clamped(mean);
}

}  // namespace mvr::views
