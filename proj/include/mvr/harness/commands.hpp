#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mvr/harness/config.hpp"
#include "mvr/harness/protocols.hpp"
#include "mvr/harness/synthetic.hpp"

namespace mvr::harness {

namespace fs = std::filesystem;

struct SynthOptions {
    bool volumetric = false;
    int cases = 60;           // 2-D
    int train_cases = 40;
    int patients = 10;        // volumetric
    int train_patients = 7;
    std::uint64_t seed = 42;
    SyntheticSpec spec;
    VolumeSpec volume;
};

/// Writes a synthetic dataset plus a matching pipeline.json under `out_dir`.
Manifest cmd_synth(const fs::path& out_dir, const SynthOptions& options);

fs::path probe_path(const fs::path& dir, std::uint32_t resolution);
probe::ProbeSet load_probes(const fs::path& dir, std::span<const std::uint32_t> resolutions);

/// Trains one probe per resolution on the split and writes probe_r<res>.mvrp.
/// Volumetric manifests train on active slices only.
probe::ProbeSet cmd_train(const fs::path& manifest, const PipelineConfig& config, const fs::path& out_dir,
                          const std::string& split = "train");

/// Writes <case>.npy (final probabilities) and <case>_mask.png per case. For
/// volumetric manifests the probabilities are z-smoothed per patient first.
void cmd_infer(const fs::path& manifest, const fs::path& probes_dir, const PipelineConfig& config,
               const fs::path& out_dir, const std::string& split = "test");

/// Scores the .npy predictions and writes the report; returns the aggregate.
metrics::AggregateReport cmd_eval(const fs::path& predictions_dir, const fs::path& manifest,
                                  const PipelineConfig& config, const fs::path& report_path,
                                  const std::string& split = "test");

std::vector<AblationRow> cmd_ablate(const fs::path& manifest, const fs::path& probes_dir,
                                    const PipelineConfig& config, const fs::path& out_path,
                                    const std::string& split = "test");

KPatientResult cmd_kpatient(const fs::path& manifest, const PipelineConfig& config, std::span<const std::size_t> ks,
                            std::span<const std::uint64_t> seeds, const std::optional<fs::path>& reference_report,
                            const fs::path& out_path);

std::vector<ZSweepRow> cmd_zsweep(const fs::path& manifest, const fs::path& probes_dir, const PipelineConfig& config,
                                  std::span<const double> sigmas, const fs::path& out_path,
                                  const std::string& split = "test");

}  // namespace mvr::harness
