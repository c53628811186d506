#include "mvr/harness/pipeline.hpp"

#include "mvr/core/error.hpp"

namespace mvr::harness {

ViewPredictions predict_views(const CaseData& data, const probe::ProbeSet& probes, const PipelineConfig& config) {
    ViewPredictions out;
    for (auto r : config.resolutions) {
        for (auto t : config.transforms) {
            const views::ViewSpec v{r, t};
            out.emplace(v, views::predict_view(data.features, v, probes, data.height, data.width));
        }
    }
    return out;
}

PipelineOutput compose(const CaseData& data, const ViewPredictions& predictions, const PipelineConfig& config) {
    config.validate();
    auto branch = [&](std::uint32_t r) {
        std::vector<ProbabilityMap> maps;
        for (auto t : config.transforms) {
            const auto it = predictions.find({r, t});
            if (it == predictions.end()) {
                throw MissingViewError("case '" + data.case_id + "' has no prediction for view " +
                                       views::describe({r, t}));
            }
            maps.push_back(it->second);
        }
        return views::tta_average(maps);
    };

    PipelineOutput out;
    if (config.resolutions.size() == 1) {
        out.fused = branch(config.resolutions.front());
    } else {
        out.fused = fusion::fuse_entropy_guided(branch(config.lo_resolution()), branch(config.hi_resolution()),
                                                config.fusion);
    }
    if (config.crf_enabled) {
        if (!data.guide) throw ConfigError("case '" + data.case_id + "' has no guide image but the CRF is enabled");
        out.refined = crf::densecrf_refine(out.fused, *data.guide, config.crf);
    } else {
        out.refined = out.fused;
    }
    out.mask = fusion::threshold(out.refined, config.threshold);
    return out;
}

PipelineOutput run_full_pipeline(const CaseData& data, const probe::ProbeSet& probes, const PipelineConfig& config) {
    return compose(data, predict_views(data, probes, config), config);
}

}  // namespace mvr::harness
