#include "mvr/harness/commands.hpp"

#include <fmt/format.h>

#include "mvr/core/binary_io.hpp"
#include "mvr/core/error.hpp"
#include "mvr/fusion/fusion.hpp"
#include "mvr/harness/image_io.hpp"
#include "mvr/volumetric/zsmooth.hpp"

namespace mvr::harness {

Manifest cmd_synth(const fs::path& out_dir, const SynthOptions& o) {
    const auto cases = o.volumetric
                           ? generate_synthetic_volumes(o.spec, o.volume, o.patients, o.train_patients, o.seed)
                           : generate_synthetic_dataset(o.spec, o.cases, o.train_cases, o.seed);
    const std::string provenance =
        fmt::format("synthetic seed={} channels={} noise={} distance={}", o.seed, o.spec.channels,
                    o.spec.noise_sigma, o.spec.prototype_distance);
    Manifest m = write_dataset(out_dir, cases, provenance);

    PipelineConfig cfg;
    cfg.resolutions.clear();
    for (const auto& g : o.spec.grids) cfg.resolutions.push_back(g.resolution);
    cfg.transforms = o.spec.transforms;
    cfg.train.hidden = 64;
    cfg.set_seed(o.seed);
    cfg.validate();
    io::write_text(out_dir / "pipeline.json", config_to_json(cfg));
    return m;
}

fs::path probe_path(const fs::path& dir, std::uint32_t resolution) {
    return dir / fmt::format("probe_r{}.mvrp", resolution);
}

probe::ProbeSet load_probes(const fs::path& dir, std::span<const std::uint32_t> resolutions) {
    probe::ProbeSet out;
    for (auto r : resolutions) {
        const auto path = probe_path(dir, r);
        if (!fs::exists(path)) throw MissingProbeError("no probe file '" + path.string() + "'");
        out[r] = probe::load_probe(path);
    }
    return out;
}

probe::ProbeSet cmd_train(const fs::path& manifest_path, const PipelineConfig& config, const fs::path& out_dir,
                          const std::string& split) {
    config.validate();
    const Manifest manifest = Manifest::load(manifest_path);
    const ManifestSource source(manifest, config, split);
    if (source.size() == 0) throw ConfigError("no cases in split '" + split + "'");
    const auto all = select_split(source, "");
    const auto probes = train_on(source, all, config, manifest.volumetric());
    fs::create_directories(out_dir);
    for (const auto& [r, params] : probes) probe::save_probe(probe_path(out_dir, r), params);
    return probes;
}

void cmd_infer(const fs::path& manifest_path, const fs::path& probes_dir, const PipelineConfig& config,
               const fs::path& out_dir, const std::string& split) {
    config.validate();
    const Manifest manifest = Manifest::load(manifest_path);
    const ManifestSource source(manifest, config, split);
    const auto probes = load_probes(probes_dir, config.resolutions);
    fs::create_directories(out_dir);
    auto emit = [&](const std::string& id, const ProbabilityMap& p) {
        write_probability_npy(out_dir / (id + ".npy"), p);
        write_mask_png(out_dir / (id + "_mask.png"), fusion::threshold(p, config.threshold));
    };
    const auto all = select_split(source, "");
    if (manifest.volumetric()) {
        for (const auto& patient : predict_patients(source, all, probes, config)) {
            const auto smoothed = volumetric::smooth_z(patient.probabilities,
                                                       volumetric::ZSmoothConfig::from_sigma(config.sigma_z));
            for (int z = 0; z < smoothed.depth(); ++z) emit(patient.case_ids[static_cast<std::size_t>(z)], smoothed.slice(z));
        }
    } else {
        for (auto i : all) {
            const CaseData d = source.load(i);
            emit(d.case_id, run_full_pipeline(d, probes, config).refined);
        }
    }
}

metrics::AggregateReport cmd_eval(const fs::path& predictions_dir, const fs::path& manifest_path,
                                  const PipelineConfig& config, const fs::path& report_path,
                                  const std::string& split) {
    config.validate();
    const Manifest manifest = Manifest::load(manifest_path).filtered(split);
    if (manifest.cases.empty()) throw ConfigError("no cases in split '" + split + "'");
    auto prediction = [&](const CaseRecord& c) {
        const auto path = predictions_dir / (c.case_id + ".npy");
        if (!fs::exists(path)) throw Error("missing prediction for case '" + c.case_id + "'");
        auto p = read_probability_npy(path);
        if (p.height() != c.height || p.width() != c.width) {
            throw DimensionError("prediction for case '" + c.case_id + "' has the wrong size");
        }
        return p;
    };

    std::vector<metrics::CaseMetrics> cases;
    if (manifest.volumetric()) {
        std::map<std::string, std::vector<const CaseRecord*>> patients;
        for (const auto& c : manifest.cases) patients[*c.patient_id].push_back(&c);
        for (auto& [pid, recs] : patients) {
            std::stable_sort(recs.begin(), recs.end(),
                             [](const auto* a, const auto* b) { return a->slice_index < b->slice_index; });
            metrics::MaskVolume pred;
            metrics::MaskVolume gt;
            for (const auto* c : recs) {
                pred.push_back(fusion::threshold(prediction(*c), config.threshold));
                gt.push_back(read_mask_png(c->mask));
            }
            cases.push_back(metrics::volumetric_metrics(pid, pred, gt));
        }
    } else {
        for (const auto& c : manifest.cases) {
            const auto grid = metrics::to_metric_grid(prediction(c), read_mask_png(c.mask), config.metric_grid,
                                                      config.threshold);
            cases.push_back(metrics::case_metrics(c.case_id, grid.pred, grid.gt));
        }
        std::sort(cases.begin(), cases.end(), [](const auto& a, const auto& b) { return a.case_id < b.case_id; });
    }
    const auto report = metrics::aggregate(cases);
    io::write_text(report_path, metrics::format_report(cases, report));
    return report;
}

std::vector<AblationRow> cmd_ablate(const fs::path& manifest_path, const fs::path& probes_dir,
                                    const PipelineConfig& config, const fs::path& out_path,
                                    const std::string& split) {
    config.validate();
    const ManifestSource source(Manifest::load(manifest_path), config, split);
    const auto probes = load_probes(probes_dir, config.resolutions);
    const auto rows = run_ablation(source, select_split(source, ""), probes, config);
    io::write_text(out_path, format_ablation(rows));
    return rows;
}

KPatientResult cmd_kpatient(const fs::path& manifest_path, const PipelineConfig& config,
                            std::span<const std::size_t> ks, std::span<const std::uint64_t> seeds,
                            const std::optional<fs::path>& reference_report, const fs::path& out_path) {
    config.validate();
    const Manifest manifest = Manifest::load(manifest_path);
    if (!manifest.volumetric()) throw ConfigError("the K-patient protocol needs a manifest with patient ids");
    const ManifestSource source(manifest, config, "");
    const auto split = SplitSpec::from_source(source);
    std::optional<double> reference;
    if (reference_report) reference = metrics::read_mean_dice(*reference_report);
    const auto result = run_kpatient(source, split, config, ks, seeds, reference);
    io::write_text(out_path, format_kpatient(result));
    return result;
}

std::vector<ZSweepRow> cmd_zsweep(const fs::path& manifest_path, const fs::path& probes_dir,
                                  const PipelineConfig& config, std::span<const double> sigmas,
                                  const fs::path& out_path, const std::string& split) {
    config.validate();
    const Manifest manifest = Manifest::load(manifest_path);
    if (!manifest.volumetric()) throw ConfigError("the z sweep needs a manifest with patient ids");
    const ManifestSource source(manifest, config, split);
    const auto probes = load_probes(probes_dir, config.resolutions);
    const auto patients = predict_patients(source, select_split(source, ""), probes, config);
    const auto rows = run_zsweep(patients, sigmas, config.threshold);
    io::write_text(out_path, format_zsweep(rows));
    return rows;
}

}  // namespace mvr::harness
