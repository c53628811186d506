#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mvr/harness/case_data.hpp"
#include "mvr/harness/config.hpp"
#include "mvr/harness/pipeline.hpp"
#include "mvr/metrics/metrics.hpp"

namespace mvr::harness {

struct CaseInfo {
    std::string case_id;
    std::optional<std::string> patient_id;
    int slice_index = 0;
    std::string split;
};

/// Random access to cases without requiring them all in memory at once.
class CaseSource {
public:
    virtual ~CaseSource() = default;
    virtual std::size_t size() const = 0;
    virtual const CaseInfo& info(std::size_t i) const = 0;
    virtual CaseData load(std::size_t i) const = 0;
    virtual probe::TrainingCase training(std::size_t i) const = 0;
};

class MemorySource final : public CaseSource {
public:
    explicit MemorySource(std::vector<CaseData> cases);
    std::size_t size() const override { return cases_.size(); }
    const CaseInfo& info(std::size_t i) const override { return infos_.at(i); }
    CaseData load(std::size_t i) const override { return cases_.at(i); }
    probe::TrainingCase training(std::size_t i) const override { return training_case(cases_.at(i)); }

private:
    std::vector<CaseData> cases_;
    std::vector<CaseInfo> infos_;
};

class ManifestSource final : public CaseSource {
public:
    /// `split` filters records ("" or "all" keeps everything).
    ManifestSource(const Manifest& manifest, const PipelineConfig& config, const std::string& split = "");
    std::size_t size() const override { return manifest_.cases.size(); }
    const CaseInfo& info(std::size_t i) const override { return infos_.at(i); }
    CaseData load(std::size_t i) const override;
    probe::TrainingCase training(std::size_t i) const override { return training_case(manifest_.cases.at(i)); }

private:
    Manifest manifest_;
    std::vector<std::uint32_t> resolutions_;
    std::vector<TransformId> transforms_;
    std::vector<CaseInfo> infos_;
};

/// Indices whose split equals `split` ("" or "all" selects everything).
std::vector<std::size_t> select_split(const CaseSource& source, const std::string& split);

/// Trains one probe per configured resolution on the given cases. When
/// `active_only` is set, slices with an empty mask are skipped.
probe::ProbeSet train_on(const CaseSource& source, std::span<const std::size_t> indices,
                         const PipelineConfig& config, bool active_only);

/// 2-D evaluation on the metric grid; results sorted by case id.
std::vector<metrics::CaseMetrics> evaluate_2d(const CaseSource& source, std::span<const std::size_t> indices,
                                              const probe::ProbeSet& probes, const PipelineConfig& config);

// ---- inference-time ablation ----

struct AblationRow {
    std::string name;
    metrics::AggregateReport report;
    double delta_dice = 0.0;  // relative to the "full" row
};

/// Runs the configured pipeline and its toggled variants with the same probes.
std::vector<AblationRow> run_ablation(const CaseSource& source, std::span<const std::size_t> indices,
                                      const probe::ProbeSet& probes, const PipelineConfig& config);
std::string format_ablation(const std::vector<AblationRow>& rows);

// ---- volumetric ----

/// Patient id -> case indices ordered by slice index. Patients sorted by id.
std::vector<std::pair<std::string, std::vector<std::size_t>>> group_patients(const CaseSource& source,
                                                                            std::span<const std::size_t> indices);

struct PatientPrediction {
    std::string patient_id;
    std::vector<std::string> case_ids;  // slice order
    ProbabilityVolume probabilities;   // pipeline output before z-smoothing
    metrics::MaskVolume ground_truth;
};

std::vector<PatientPrediction> predict_patients(const CaseSource& source, std::span<const std::size_t> indices,
                                                const probe::ProbeSet& probes, const PipelineConfig& config);

/// Smooths along z with sigma_z, thresholds and scores at native resolution.
metrics::CaseMetrics score_patient(const PatientPrediction& p, double sigma_z, double threshold);

struct ZSweepRow {
    double sigma_z = 0.0;
    metrics::AggregateReport report;
    double delta_dice = 0.0;  // relative to sigma_z = 0
};

inline const std::vector<double> kDefaultZSweep{0.0, 2.0, 3.0, 4.0, 5.0};

std::vector<ZSweepRow> run_zsweep(const std::vector<PatientPrediction>& patients, std::span<const double> sigmas,
                                  double threshold);
std::string format_zsweep(const std::vector<ZSweepRow>& rows);

// ---- K-patient protocol ----

struct SplitSpec {
    std::vector<std::string> train_patients;  // sorted
    std::vector<std::string> test_patients;   // sorted

    /// Patients grouped by the manifest split labels.
    static SplitSpec from_source(const CaseSource& source);
    void validate() const;
};

/// Uniform sample of k ids without replacement (partial Fisher-Yates with the
/// library generator over the sorted ids); returned sorted.
std::vector<std::string> sample_patients(std::vector<std::string> ids, std::size_t k, std::uint64_t seed);

struct KPatientCell {
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> patients;
    metrics::AggregateReport report;
};

struct KPatientRow {
    std::size_t k = 0;
    std::size_t seeds = 0;
    double dice_mean = 0, dice_std = 0;
    double iou_mean = 0, iou_std = 0;
    double hd95_mean = 0, hd95_std = 0;  // over seeds with a finite mean
    double percent_of_reference = 0;     // NaN without a reference
};

struct KPatientResult {
    std::vector<KPatientCell> cells;
    std::vector<KPatientRow> rows;
};

KPatientResult run_kpatient(const CaseSource& source, const SplitSpec& split, const PipelineConfig& config,
                            std::span<const std::size_t> ks, std::span<const std::uint64_t> seeds,
                            std::optional<double> reference_dice);
std::string format_kpatient(const KPatientResult& result);

/// Sample standard deviation (n - 1); 0 for fewer than two values.
double sample_std(std::span<const double> values);

}  // namespace mvr::harness
