#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "mvr/core/feature_stack.hpp"
#include "mvr/core/grid.hpp"
#include "mvr/probe/probe.hpp"

namespace mvr::probe {

struct TrainConfig {
    int hidden = kDefaultHidden;
    double lambda_dice = 1.0;
    double epsilon = 1e-6;
    double learning_rate = 1e-3;
    int epochs = 20;
    int batch_size = 8;
    std::uint64_t seed = 42;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    // Use flipped exports as extra training samples.
    bool augment = true;

    void validate() const;
};

/// A feature grid either held in memory or produced on demand (e.g. read from
/// disk once per batch so large exports never sit in memory together).
struct FeatureRef {
    std::uint32_t resolution = 0;
    TransformId transform = TransformId::identity;
    std::function<std::shared_ptr<const FeatureStack>()> load;

    static FeatureRef in_memory(std::shared_ptr<const FeatureStack> stack);
};

/// One labelled image with every exported view. The mask is in original
/// orientation; targets for flipped views are derived from it.
struct TrainingCase {
    std::vector<FeatureRef> views;
    BinaryMask mask;
};

/// Loss and gradient of the batch-mean loss for one (features, target) pair list.
struct Sample {
    const FeatureStack* features = nullptr;
    const BinaryMask* target = nullptr;
};

/// Returns the mean loss over `batch`; when `grad` is non-null it receives the
/// gradient in ProbeParams' flat layout.
double loss_and_gradient(std::span<const Sample> batch, const ProbeParams& params, double lambda_dice,
                         double epsilon, std::vector<double>* grad);

struct TrainResult {
    ProbeParams params;
    std::vector<double> epoch_losses;
};

/// Trains one probe from scratch on every view of `resolution` (flipped views
/// act as augmented samples). Deterministic given config.seed.
TrainResult train_probe(std::span<const TrainingCase> cases, std::uint32_t resolution, const TrainConfig& config);

/// Independent probe per resolution.
ProbeSet train_probes(std::span<const TrainingCase> cases, std::span<const std::uint32_t> resolutions,
                      const TrainConfig& config);

}  // namespace mvr::probe
