#include "mvr/harness/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "mvr/core/error.hpp"
#include "mvr/core/rng.hpp"
#include "mvr/volumetric/zsmooth.hpp"

namespace mvr::harness {

namespace {

CaseInfo info_of(const CaseData& d) { return {d.case_id, d.patient_id, d.slice_index, d.split}; }

void sort_by_id(std::vector<metrics::CaseMetrics>& cases) {
    std::sort(cases.begin(), cases.end(), [](const auto& a, const auto& b) { return a.case_id < b.case_id; });
}

metrics::CaseMetrics score_2d(const CaseData& d, const ProbabilityMap& p, const PipelineConfig& config) {
    const auto grid = metrics::to_metric_grid(p, d.mask, config.metric_grid, config.threshold);
    return metrics::case_metrics(d.case_id, grid.pred, grid.gt);
}

}  // namespace

MemorySource::MemorySource(std::vector<CaseData> cases) : cases_(std::move(cases)) {
    for (const auto& d : cases_) infos_.push_back(info_of(d));
}

ManifestSource::ManifestSource(const Manifest& manifest, const PipelineConfig& config, const std::string& split)
    : manifest_(manifest.filtered(split)), resolutions_(config.resolutions), transforms_(config.transforms) {
    manifest_.require_views(resolutions_, transforms_);
    for (const auto& c : manifest_.cases) infos_.push_back({c.case_id, c.patient_id, c.slice_index.value_or(0), c.split});
}

CaseData ManifestSource::load(std::size_t i) const {
    return load_case(manifest_.cases.at(i), resolutions_, transforms_);
}

std::vector<std::size_t> select_split(const CaseSource& source, const std::string& split) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < source.size(); ++i) {
        if (split.empty() || split == "all" || source.info(i).split == split) out.push_back(i);
    }
    return out;
}

probe::ProbeSet train_on(const CaseSource& source, std::span<const std::size_t> indices,
                         const PipelineConfig& config, bool active_only) {
    std::vector<probe::TrainingCase> cases;
    for (auto i : indices) {
        auto tc = source.training(i);
        if (active_only && !tc.mask.any()) continue;
        cases.push_back(std::move(tc));
    }
    if (cases.empty()) throw InvalidArgument("no training cases selected");
    return probe::train_probes(cases, config.resolutions, config.train);
}

std::vector<metrics::CaseMetrics> evaluate_2d(const CaseSource& source, std::span<const std::size_t> indices,
                                              const probe::ProbeSet& probes, const PipelineConfig& config) {
    std::vector<metrics::CaseMetrics> out;
    for (auto i : indices) {
        const CaseData d = source.load(i);
        out.push_back(score_2d(d, run_full_pipeline(d, probes, config).refined, config));
    }
    sort_by_id(out);
    return out;
}

std::vector<AblationRow> run_ablation(const CaseSource& source, std::span<const std::size_t> indices,
                                      const probe::ProbeSet& probes, const PipelineConfig& config) {
    config.validate();
    if (indices.empty()) throw InvalidArgument("ablation needs at least one case");
    std::vector<std::pair<std::string, PipelineConfig>> variants;
    auto variant = [&](std::string name, bool tta, bool crf, std::vector<std::uint32_t> res) {
        PipelineConfig c = config;
        if (!tta) c.transforms = {TransformId::identity};
        c.crf_enabled = config.crf_enabled && crf;
        c.resolutions = std::move(res);
        variants.emplace_back(std::move(name), std::move(c));
    };
    variant("full", true, true, config.resolutions);
    variant("w/o DenseCRF", true, false, config.resolutions);
    variant("w/o flip-based TTA", false, true, config.resolutions);
    variant("w/o TTA and DenseCRF", false, false, config.resolutions);
    if (config.resolutions.size() == 2) {
        const auto lo = config.lo_resolution();
        const auto hi = config.hi_resolution();
        variant(fmt::format("{} only", hi), true, true, {hi});
        variant(fmt::format("{} only", lo), true, true, {lo});
        variant(fmt::format("raw {} readout", hi), false, false, {hi});
        variant(fmt::format("raw {} readout", lo), false, false, {lo});
    }

    std::vector<std::vector<metrics::CaseMetrics>> per_variant(variants.size());
    for (auto i : indices) {
        const CaseData d = source.load(i);
        const ViewPredictions preds = predict_views(d, probes, config);
        for (std::size_t v = 0; v < variants.size(); ++v) {
            per_variant[v].push_back(score_2d(d, compose(d, preds, variants[v].second).refined, variants[v].second));
        }
    }
    std::vector<AblationRow> rows;
    for (std::size_t v = 0; v < variants.size(); ++v) {
        sort_by_id(per_variant[v]);
        rows.push_back({variants[v].first, metrics::aggregate(per_variant[v]), 0.0});
    }
    for (auto& r : rows) r.delta_dice = r.report.mean_dice - rows.front().report.mean_dice;
    return rows;
}

std::string format_ablation(const std::vector<AblationRow>& rows) {
    std::string out = "# configuration\tdice\tiou\thd95\tdelta_dice\tinf_hd95\n";
    for (const auto& r : rows) {
        out += fmt::format("{}\t{}\t{}\t{}\t{:+.6f}\t{}\n", r.name, metrics::format_number(r.report.mean_dice),
                           metrics::format_number(r.report.mean_iou),
                           metrics::format_number(r.report.mean_hd95_finite), r.delta_dice,
                           metrics::format_failures(r.report.infinite_hd95_count, r.report.total_cases));
    }
    return out;
}

std::vector<std::pair<std::string, std::vector<std::size_t>>> group_patients(const CaseSource& source,
                                                                            std::span<const std::size_t> indices) {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (auto i : indices) {
        const auto& info = source.info(i);
        if (!info.patient_id) throw ConfigError("case '" + info.case_id + "' has no patient_id");
        groups[*info.patient_id].push_back(i);
    }
    std::vector<std::pair<std::string, std::vector<std::size_t>>> out;
    for (auto& [pid, idx] : groups) {
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return source.info(a).slice_index < source.info(b).slice_index;
        });
        for (std::size_t k = 1; k < idx.size(); ++k) {
            if (source.info(idx[k]).slice_index == source.info(idx[k - 1]).slice_index) {
                throw ConfigError("patient '" + pid + "' has duplicate slice indices");
            }
        }
        out.emplace_back(pid, std::move(idx));
    }
    return out;
}

std::vector<PatientPrediction> predict_patients(const CaseSource& source, std::span<const std::size_t> indices,
                                                const probe::ProbeSet& probes, const PipelineConfig& config) {
    std::vector<PatientPrediction> out;
    for (const auto& [pid, idx] : group_patients(source, indices)) {
        PatientPrediction p;
        p.patient_id = pid;
        std::vector<ProbabilityMap> slices;
        for (auto i : idx) {
            const CaseData d = source.load(i);
            p.case_ids.push_back(d.case_id);
            slices.push_back(run_full_pipeline(d, probes, config).refined);
            p.ground_truth.push_back(d.mask);
        }
        p.probabilities = ProbabilityVolume(std::move(slices));
        out.push_back(std::move(p));
    }
    return out;
}

metrics::CaseMetrics score_patient(const PatientPrediction& p, double sigma_z, double threshold) {
    const auto smoothed = volumetric::smooth_z(p.probabilities, volumetric::ZSmoothConfig::from_sigma(sigma_z));
    return metrics::volumetric_metrics(p.patient_id, volumetric::volume_threshold(smoothed, threshold),
                                       p.ground_truth);
}

std::vector<ZSweepRow> run_zsweep(const std::vector<PatientPrediction>& patients, std::span<const double> sigmas,
                                  double threshold) {
    if (patients.empty()) throw InvalidArgument("z sweep needs at least one patient");
    if (sigmas.empty()) throw InvalidArgument("z sweep needs at least one sigma");
    auto evaluate = [&](double sigma) {
        std::vector<metrics::CaseMetrics> cases;
        for (const auto& p : patients) cases.push_back(score_patient(p, sigma, threshold));
        return metrics::aggregate(cases);
    };
    const double baseline = evaluate(0.0).mean_dice;
    std::vector<ZSweepRow> rows;
    for (double s : sigmas) {
        const auto report = evaluate(s);
        rows.push_back({s, report, report.mean_dice - baseline});
    }
    return rows;
}

std::string format_zsweep(const std::vector<ZSweepRow>& rows) {
    std::string out = "# sigma_z\tdice\tiou\thd95\tdelta_dice\tinf_hd95\n";
    for (const auto& r : rows) {
        const std::string delta = r.sigma_z == 0.0 ? "baseline" : fmt::format("{:+.6f}", r.delta_dice);
        out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\n", metrics::format_number(r.sigma_z, 2),
                           metrics::format_number(r.report.mean_dice), metrics::format_number(r.report.mean_iou),
                           metrics::format_number(r.report.mean_hd95_finite), delta,
                           metrics::format_failures(r.report.infinite_hd95_count, r.report.total_cases));
    }
    return out;
}

SplitSpec SplitSpec::from_source(const CaseSource& source) {
    std::set<std::string> train;
    std::set<std::string> test;
    for (std::size_t i = 0; i < source.size(); ++i) {
        const auto& info = source.info(i);
        if (!info.patient_id) throw ConfigError("case '" + info.case_id + "' has no patient_id");
        if (info.split == "train") {
            train.insert(*info.patient_id);
        } else if (info.split == "test") {
            test.insert(*info.patient_id);
        }
    }
    SplitSpec s{{train.begin(), train.end()}, {test.begin(), test.end()}};
    s.validate();
    return s;
}

void SplitSpec::validate() const {
    if (train_patients.empty()) throw ConfigError("no training patients");
    if (test_patients.empty()) throw ConfigError("no test patients");
    for (const auto& p : test_patients) {
        if (std::binary_search(train_patients.begin(), train_patients.end(), p)) {
            throw ConfigError("patient '" + p + "' is in both the train and test split");
        }
    }
}

std::vector<std::string> sample_patients(std::vector<std::string> ids, std::size_t k, std::uint64_t seed) {
    if (k < 1 || k > ids.size()) {
        throw InvalidArgument(fmt::format("K = {} is outside 1..{} training patients", k, ids.size()));
    }
    std::sort(ids.begin(), ids.end());
    Rng rng(seed);
    for (std::size_t i = 0; i < k; ++i) std::swap(ids[i], ids[i + rng.below(ids.size() - i)]);
    ids.resize(k);
    std::sort(ids.begin(), ids.end());
    return ids;
}

double sample_std(std::span<const double> values) {
    if (values.size() < 2) return 0.0;
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

KPatientResult run_kpatient(const CaseSource& source, const SplitSpec& split, const PipelineConfig& config,
                            std::span<const std::size_t> ks, std::span<const std::uint64_t> seeds,
                            std::optional<double> reference_dice) {
    split.validate();
    if (ks.empty() || seeds.empty()) throw InvalidArgument("K-patient run needs K values and seeds");
    for (auto k : ks) {
        if (k < 1 || k > split.train_patients.size()) {
            throw InvalidArgument(fmt::format("K = {} exceeds the {} training patients", k, split.train_patients.size()));
        }
    }
    std::vector<std::size_t> test_idx;
    std::map<std::string, std::vector<std::size_t>> by_patient;
    for (std::size_t i = 0; i < source.size(); ++i) {
        const auto& info = source.info(i);
        if (!info.patient_id) continue;
        if (std::binary_search(split.test_patients.begin(), split.test_patients.end(), *info.patient_id)) {
            test_idx.push_back(i);
        } else if (std::binary_search(split.train_patients.begin(), split.train_patients.end(), *info.patient_id)) {
            by_patient[*info.patient_id].push_back(i);
        }
    }

    KPatientResult result;
    for (auto k : ks) {
        std::vector<double> dice, iou, hd;
        for (auto seed : seeds) {
            KPatientCell cell{k, seed, sample_patients(split.train_patients, k, seed), {}};
            std::vector<std::size_t> train_idx;
            for (const auto& p : cell.patients) {
                const auto& idx = by_patient[p];
                train_idx.insert(train_idx.end(), idx.begin(), idx.end());
            }
            std::sort(train_idx.begin(), train_idx.end());
            const auto probes = train_on(source, train_idx, config, true);
            std::vector<metrics::CaseMetrics> cases;
            for (const auto& p : predict_patients(source, test_idx, probes, config)) {
                cases.push_back(score_patient(p, config.sigma_z, config.threshold));
            }
            cell.report = metrics::aggregate(cases);
            dice.push_back(cell.report.mean_dice);
            iou.push_back(cell.report.mean_iou);
            if (std::isfinite(cell.report.mean_hd95_finite)) hd.push_back(cell.report.mean_hd95_finite);
            result.cells.push_back(std::move(cell));
        }
        auto mean = [](const std::vector<double>& v) {
            return v.empty() ? std::numeric_limits<double>::quiet_NaN()
                             : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        };
        KPatientRow row;
        row.k = k;
        row.seeds = seeds.size();
        row.dice_mean = mean(dice);
        row.dice_std = sample_std(dice);
        row.iou_mean = mean(iou);
        row.iou_std = sample_std(iou);
        row.hd95_mean = mean(hd);
        row.hd95_std = sample_std(hd);
        row.percent_of_reference = reference_dice && *reference_dice > 0.0
                                       ? 100.0 * row.dice_mean / *reference_dice
                                       : std::numeric_limits<double>::quiet_NaN();
        result.rows.push_back(row);
    }
    return result;
}

std::string format_kpatient(const KPatientResult& r) {
    using metrics::format_number;
    std::string out = "# K\tseeds\tdice_mean\tdice_std\tiou_mean\tiou_std\thd95_mean\thd95_std\tpct_of_reference\n";
    for (const auto& row : r.rows) {
        out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", row.k, row.seeds, format_number(row.dice_mean),
                           format_number(row.dice_std), format_number(row.iou_mean), format_number(row.iou_std),
                           format_number(row.hd95_mean), format_number(row.hd95_std),
                           format_number(row.percent_of_reference, 2));
    }
    for (const auto& c : r.cells) {
        out += fmt::format("# cell K={} seed={} patients={} dice={} iou={} hd95={} inf={}\n", c.k, c.seed,
                           fmt::join(c.patients, ","), format_number(c.report.mean_dice),
                           format_number(c.report.mean_iou), format_number(c.report.mean_hd95_finite),
                           metrics::format_failures(c.report.infinite_hd95_count, c.report.total_cases));
    }
    return out;
}

}  // namespace mvr::harness
