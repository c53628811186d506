#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "mvr/core/error.hpp"
#include "mvr/harness/commands.hpp"

namespace fs = std::filesystem;
using namespace mvr;
using namespace mvr::harness;

namespace {

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::istringstream is(item);
        T v{};
        if (!(is >> v) || !is.eof()) throw ConfigError(fmt::format("bad {} list '{}'", what, text));
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError(fmt::format("empty {} list", what));
    return out;
}

struct GlobalFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> tau;
    std::optional<double> sigma_z;
    bool no_crf = false;
    bool no_tta = false;
    std::string resolutions;
    std::optional<int> crf_iters;
    std::string crf_weights;     // w_gaussian,w_bilateral
    std::string crf_bandwidths;  // sigma_xy_gaussian,sigma_xy_bilateral,sigma_rgb
    std::string crf_mode;

    PipelineConfig resolve() const {
        PipelineConfig c = config_path.empty() ? PipelineConfig{} : load_config(config_path);
        if (seed) c.set_seed(*seed);
        if (tau) c.fusion.tau = *tau;
        if (sigma_z) c.sigma_z = *sigma_z;
        if (no_crf) c.crf_enabled = false;
        if (no_tta) c.transforms = {TransformId::identity};
        if (!resolutions.empty()) c.resolutions = parse_list<std::uint32_t>(resolutions, "resolution");
        if (crf_iters) c.crf.iterations = *crf_iters;
        if (!crf_weights.empty()) {
            const auto w = parse_list<double>(crf_weights, "CRF weight");
            if (w.size() != 2) throw ConfigError("--crf-weights takes w_gaussian,w_bilateral");
            c.crf.w_gaussian = w[0];
            c.crf.w_bilateral = w[1];
        }
        if (!crf_bandwidths.empty()) {
            const auto b = parse_list<double>(crf_bandwidths, "CRF bandwidth");
            if (b.size() != 3) throw ConfigError("--crf-bandwidths takes sigma_xy_g,sigma_xy_b,sigma_rgb");
            c.crf.sigma_xy_gaussian = b[0];
            c.crf.sigma_xy_bilateral = b[1];
            c.crf.sigma_rgb = b[2];
        }
        if (crf_mode == "exact") c.crf.mode = crf::CrfMode::exact;
        if (crf_mode == "approximate") c.crf.mode = crf::CrfMode::approximate;
        c.validate();
        return c;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-view readout pipeline over precomputed frozen features"};
    app.require_subcommand(1);
    GlobalFlags g;
    app.add_option("--config", g.config_path, "Pipeline config (JSON)")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "Seed for training, sampling and synthesis");
    app.add_option("--tau", g.tau, "Entropy threshold for fusion, in nats");
    app.add_option("--sigma-z", g.sigma_z, "Gaussian sigma along z, in slices");
    app.add_flag("--no-crf", g.no_crf, "Disable CRF refinement");
    app.add_flag("--no-tta", g.no_tta, "Use the identity view only");
    app.add_option("--resolutions", g.resolutions, "Comma-separated input resolutions");
    app.add_option("--crf-iters", g.crf_iters, "Mean-field iterations");
    app.add_option("--crf-weights", g.crf_weights, "w_gaussian,w_bilateral");
    app.add_option("--crf-bandwidths", g.crf_bandwidths, "sigma_xy_gaussian,sigma_xy_bilateral,sigma_rgb");
    app.add_option("--crf-mode", g.crf_mode, "exact or approximate")
        ->check(CLI::IsMember({"exact", "approximate"}));

    std::string manifest, probes_dir, out, split, predictions, reference;

    auto* train = app.add_subcommand("train", "Train one probe per resolution");
    train->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);
    train->add_option("--out", out, "Directory for probe_r<res>.mvrp")->required();
    train->add_option("--split", split, "Manifest split to train on")->default_val("train");

    auto* infer = app.add_subcommand("infer", "Run the full pipeline and save probability maps and masks");
    infer->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);
    infer->add_option("--probes", probes_dir)->required()->check(CLI::ExistingDirectory);
    infer->add_option("--out", out)->required();
    infer->add_option("--split", split)->default_val("test");

    auto* eval = app.add_subcommand("eval", "Score saved predictions");
    eval->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);
    eval->add_option("--predictions", predictions)->required()->check(CLI::ExistingDirectory);
    eval->add_option("--out", out, "Report path")->required();
    eval->add_option("--split", split)->default_val("test");

    auto* ablate = app.add_subcommand("ablate", "Inference-time view ablation with fixed probes");
    ablate->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);
    ablate->add_option("--probes", probes_dir)->required()->check(CLI::ExistingDirectory);
    ablate->add_option("--out", out)->required();
    ablate->add_option("--split", split)->default_val("test");

    std::string ks_text = "1,2,3,5,7";
    std::string seeds_text = "0,1,2";
    auto* kpatient = app.add_subcommand("kpatient", "Labeled-patient budget learning curve");
    kpatient->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);
    kpatient->add_option("--k", ks_text, "Comma-separated K values")->capture_default_str();
    kpatient->add_option("--seeds", seeds_text, "Comma-separated sampling seeds")->capture_default_str();
    kpatient->add_option("--reference", reference, "Report of the full-train reference run")
        ->check(CLI::ExistingFile);
    kpatient->add_option("--out", out)->required();

    std::string sigmas_text = "0,2,3,4,5";
    auto* zsweep = app.add_subcommand("zsweep", "Evaluate the volumetric pipeline per sigma_z");
    zsweep->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);
    zsweep->add_option("--probes", probes_dir)->required()->check(CLI::ExistingDirectory);
    zsweep->add_option("--sigmas", sigmas_text)->capture_default_str();
    zsweep->add_option("--out", out)->required();
    zsweep->add_option("--split", split)->default_val("test");

    SynthOptions so;
    auto* synth = app.add_subcommand("synth", "Emit a synthetic dataset");
    synth->add_option("--out", out)->required();
    synth->add_flag("--volumetric", so.volumetric, "Generate patients of stacked slices");
    synth->add_option("--cases", so.cases)->capture_default_str();
    synth->add_option("--train-cases", so.train_cases)->capture_default_str();
    synth->add_option("--patients", so.patients)->capture_default_str();
    synth->add_option("--train-patients", so.train_patients)->capture_default_str();
    synth->add_option("--depth", so.volume.depth)->capture_default_str();
    synth->add_option("--channels", so.spec.channels)->capture_default_str();
    synth->add_option("--noise", so.spec.noise_sigma)->capture_default_str();
    synth->add_option("--image-size", so.spec.image_height)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            so.spec.image_width = so.spec.image_height;
            if (g.seed) so.seed = *g.seed;
            if (!g.resolutions.empty()) {
                so.spec.grids.clear();
                for (auto r : parse_list<std::uint32_t>(g.resolutions, "resolution")) {
                    so.spec.grids.push_back(default_grid(r));
                }
            }
            const auto m = cmd_synth(out, so);
            fmt::print("wrote {} cases to {}\n", m.cases.size(), out);
            return 0;
        }
        const PipelineConfig config = g.resolve();
        if (train->parsed()) {
            const auto probes = cmd_train(manifest, config, out, split);
            for (const auto& [r, p] : probes) {
                fmt::print("resolution {}: {} parameters -> {}\n", r, p.parameter_count(), probe_path(out, r).string());
            }
        } else if (infer->parsed()) {
            cmd_infer(manifest, probes_dir, config, out, split);
        } else if (eval->parsed()) {
            const auto r = cmd_eval(predictions, manifest, config, out, split);
            fmt::print("mean_dice {} mean_iou {} mean_hd95_finite {} infinite {}\n",
                       metrics::format_number(r.mean_dice), metrics::format_number(r.mean_iou),
                       metrics::format_number(r.mean_hd95_finite),
                       metrics::format_failures(r.infinite_hd95_count, r.total_cases));
        } else if (ablate->parsed()) {
            fmt::print("{}", format_ablation(cmd_ablate(manifest, probes_dir, config, out, split)));
        } else if (kpatient->parsed()) {
            const auto ks = parse_list<std::size_t>(ks_text, "K");
            const auto seeds = parse_list<std::uint64_t>(seeds_text, "seed");
            std::optional<fs::path> ref;
            if (!reference.empty()) ref = reference;
            fmt::print("{}", format_kpatient(cmd_kpatient(manifest, config, ks, seeds, ref, out)));
        } else if (zsweep->parsed()) {
            const auto sigmas = parse_list<double>(sigmas_text, "sigma");
            fmt::print("{}", format_zsweep(cmd_zsweep(manifest, probes_dir, config, sigmas, out, split)));
        }
    } catch (const mvr::Error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
    return 0;
}
