#include "mvr/harness/case_data.hpp"

#include "mvr/core/error.hpp"
#include "mvr/harness/image_io.hpp"
#include "mvr/harness/mvrf.hpp"

namespace mvr::harness {

CaseData load_case(const CaseRecord& record, std::span<const std::uint32_t> resolutions,
                   std::span<const TransformId> transforms) {
    CaseData d;
    d.case_id = record.case_id;
    d.patient_id = record.patient_id;
    d.slice_index = record.slice_index.value_or(0);
    d.height = record.height;
    d.width = record.width;
    d.split = record.split;
    d.mask = read_mask_png(record.mask);
    if (d.mask.height() != d.height || d.mask.width() != d.width) {
        throw DimensionError("case '" + d.case_id + "': mask size differs from the manifest");
    }
    if (record.guide) {
        d.guide = read_guide_png(*record.guide);
        if (d.guide->height() != d.height || d.guide->width() != d.width) {
            throw DimensionError("case '" + d.case_id + "': guide size differs from the manifest");
        }
    }
    for (auto r : resolutions) {
        for (auto t : transforms) {
            const ViewEntry* v = record.find_view(r, t);
            if (v == nullptr) {
                throw MissingViewError("case '" + d.case_id + "' lacks view " + views::describe({r, t}));
            }
            auto stack = std::make_shared<const FeatureStack>(load_feature_file(v->path));
            if (stack->resolution_tag != r || stack->transform_tag != t) {
                throw FormatError("feature file header disagrees with the manifest for case '" + d.case_id + "'");
            }
            d.features[{r, t}] = std::move(stack);
        }
    }
    return d;
}

probe::TrainingCase training_case(const CaseRecord& record) {
    probe::TrainingCase tc;
    tc.mask = read_mask_png(record.mask);
    for (const auto& v : record.views) {
        probe::FeatureRef ref;
        ref.resolution = v.resolution;
        ref.transform = v.transform;
        ref.load = [path = v.path] { return std::make_shared<const FeatureStack>(load_feature_file(path)); };
        tc.views.push_back(std::move(ref));
    }
    return tc;
}

probe::TrainingCase training_case(const CaseData& data) {
    probe::TrainingCase tc;
    tc.mask = data.mask;
    for (const auto& [spec, stack] : data.features) tc.views.push_back(probe::FeatureRef::in_memory(stack));
    return tc;
}

}  // namespace mvr::harness
