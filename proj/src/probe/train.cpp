#include "mvr/probe/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mvr/core/error.hpp"
#include "mvr/core/resample.hpp"
#include "mvr/core/rng.hpp"
#include "mvr/core/transform.hpp"
#include "mvr/probe/loss.hpp"

namespace mvr::probe {

void TrainConfig::validate() const {
    if (lambda_dice < 0.0) throw ConfigError("lambda_dice must be >= 0");
    if (epsilon <= 0.0) throw ConfigError("epsilon must be > 0");
    if (learning_rate <= 0.0) throw ConfigError("learning_rate must be > 0");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (hidden < 1) throw ConfigError("hidden must be >= 1");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) throw ConfigError("Adam betas must be in [0, 1)");
    if (adam_epsilon <= 0.0) throw ConfigError("adam_epsilon must be > 0");
}

FeatureRef FeatureRef::in_memory(std::shared_ptr<const FeatureStack> stack) {
    FeatureRef ref;
    ref.resolution = stack->resolution_tag;
    ref.transform = stack->transform_tag;
    ref.load = [stack] { return stack; };
    return ref;
}

namespace {

// Accumulates one sample's contribution (already scaled by `weight`) into grad.
double accumulate_sample(const FeatureStack& f, const BinaryMask& target, const ProbeParams& params,
                         double lambda_dice, double epsilon, double weight, std::vector<double>* grad) {
    if (f.channels != params.in_dim()) throw DimensionError("training features do not match probe in_dim");
    const int hidden = params.hidden();
    const std::size_t patches = f.patch_count();
    const auto w1 = params.w1();
    const auto b1 = params.b1();
    const auto w2 = params.w2();

    std::vector<double> pre(patches * static_cast<std::size_t>(hidden));
    RealGrid logits(f.height, f.width);
    for (std::size_t p = 0; p < patches; ++p) {
        double* row_pre = pre.data() + p * hidden;
        std::copy(b1.begin(), b1.end(), row_pre);
        const float* feat = f.data.data() + p * f.channels;
        for (int k = 0; k < f.channels; ++k) {
            const double fk = feat[k];
            const double* wrow = w1.data() + static_cast<std::size_t>(k) * hidden;
            for (int h = 0; h < hidden; ++h) row_pre[h] += fk * wrow[h];
        }
        double a = params.b2();
        for (int h = 0; h < hidden; ++h) a += w2[static_cast<std::size_t>(h)] * std::max(row_pre[h], 0.0);
        logits[p] = a;
    }

    const RealGrid z = resize_bilinear(logits, target.height(), target.width());
    const RealGrid prob = sigmoid_real(z);
    const auto terms = loss_terms(prob.values(), target, lambda_dice, epsilon);
    if (grad == nullptr) return terms.total;

    // dL/dz = dL/dp * p(1 - p); the BCE part simplifies to (p - y) / n off the clamp.
    const RealGrid dldp_dice = loss_grad_wrt_prob(prob.values(), target, lambda_dice, epsilon);
    const double inv_n = 1.0 / static_cast<double>(prob.size());
    RealGrid dz(z.height(), z.width());
    for (std::size_t i = 0; i < prob.size(); ++i) {
        const double p = prob[i];
        const double y = target[i];
        double bce_dp = 0.0;
        if (p > kProbabilityClamp && p < 1.0 - kProbabilityClamp) bce_dp = y ? -inv_n / p : inv_n / (1.0 - p);
        const double dice_dp = dldp_dice[i] - bce_dp;
        double dzi = dice_dp * p * (1.0 - p);
        if (bce_dp != 0.0) dzi += (p - y) * inv_n;
        dz[i] = weight * dzi;
    }
    const RealGrid da = resize_bilinear_adjoint(dz, f.height, f.width);

    auto& g = *grad;
    double* g_w1 = g.data();
    double* g_b1 = g_w1 + w1.size();
    double* g_w2 = g_b1 + hidden;
    double& g_b2 = g.back();
    std::vector<double> dpre(static_cast<std::size_t>(hidden));
    for (std::size_t p = 0; p < patches; ++p) {
        const double dap = da[p];
        if (dap == 0.0) continue;
        g_b2 += dap;
        const double* row_pre = pre.data() + p * hidden;
        for (int h = 0; h < hidden; ++h) {
            const double act = std::max(row_pre[h], 0.0);
            g_w2[h] += dap * act;
            const double d = row_pre[h] > 0.0 ? dap * w2[static_cast<std::size_t>(h)] : 0.0;
            dpre[static_cast<std::size_t>(h)] = d;
            g_b1[h] += d;
        }
        const float* feat = f.data.data() + p * f.channels;
        for (int k = 0; k < f.channels; ++k) {
            const double fk = feat[k];
            if (fk == 0.0) continue;
            double* grow = g_w1 + static_cast<std::size_t>(k) * hidden;
            for (int h = 0; h < hidden; ++h) grow[h] += fk * dpre[static_cast<std::size_t>(h)];
        }
    }
    return terms.total;
}

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long step = 0;
};

void adam_update(ProbeParams& params, const std::vector<double>& grad, AdamState& st, const TrainConfig& cfg) {
    ++st.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.step));
    auto values = params.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
        st.m[i] = cfg.beta1 * st.m[i] + (1.0 - cfg.beta1) * grad[i];
        st.v[i] = cfg.beta2 * st.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        const double mhat = st.m[i] / bc1;
        const double vhat = st.v[i] / bc2;
        values[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_epsilon);
    }
}

struct SampleRef {
    const FeatureRef* ref = nullptr;
    BinaryMask target;
};

}  // namespace

double loss_and_gradient(std::span<const Sample> batch, const ProbeParams& params, double lambda_dice,
                         double epsilon, std::vector<double>* grad) {
    if (batch.empty()) throw InvalidArgument("loss_and_gradient: empty batch");
    if (grad != nullptr) grad->assign(params.parameter_count(), 0.0);
    const double weight = 1.0 / static_cast<double>(batch.size());
    double total = 0.0;
    for (const auto& s : batch) {
        total += accumulate_sample(*s.features, *s.target, params, lambda_dice, epsilon, weight, grad);
    }
    return total * weight;
}

TrainResult train_probe(std::span<const TrainingCase> cases, std::uint32_t resolution, const TrainConfig& config) {
    config.validate();
    if (cases.empty()) throw InvalidArgument("train_probe: empty dataset");

    std::vector<SampleRef> samples;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        bool found = false;
        for (const auto& view : cases[i].views) {
            if (view.resolution != resolution) continue;
            if (!config.augment && view.transform != TransformId::identity) continue;
            samples.push_back({&view, apply_transform(cases[i].mask, view.transform)});
            found = view.transform == TransformId::identity || found;
        }
        if (!found) {
            throw MissingViewError("training case " + std::to_string(i) + " has no identity view at resolution " +
                                   std::to_string(resolution));
        }
    }

    std::shared_ptr<const FeatureStack> probe_shape = samples.front().ref->load();
    TrainResult result;
    result.params = ProbeParams::initialized(probe_shape->channels, config.hidden,
                                             derive_seed(config.seed, 2 * static_cast<std::uint64_t>(resolution)));
    Rng order_rng(derive_seed(config.seed, 2 * static_cast<std::uint64_t>(resolution) + 1));

    AdamState adam;
    adam.m.assign(result.params.parameter_count(), 0.0);
    adam.v.assign(result.params.parameter_count(), 0.0);
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> grad;
    const auto batch_size = static_cast<std::size_t>(config.batch_size);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        order_rng.shuffle(std::span<std::size_t>(order));
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            const std::size_t end = std::min(order.size(), start + batch_size);
            std::vector<std::shared_ptr<const FeatureStack>> held;
            std::vector<Sample> batch;
            for (std::size_t k = start; k < end; ++k) {
                const auto& s = samples[order[k]];
                held.push_back(s.ref->load());
                batch.push_back({held.back().get(), &s.target});
            }
            const double loss = loss_and_gradient(batch, result.params, config.lambda_dice, config.epsilon, &grad);
            epoch_loss += loss * static_cast<double>(batch.size());
            adam_update(result.params, grad, adam, config);
        }
        result.epoch_losses.push_back(epoch_loss / static_cast<double>(samples.size()));
    }
    return result;
}

ProbeSet train_probes(std::span<const TrainingCase> cases, std::span<const std::uint32_t> resolutions,
                      const TrainConfig& config) {
    if (cases.empty()) throw InvalidArgument("train_probes: empty dataset");
    ProbeSet out;
    for (auto r : resolutions) out[r] = train_probe(cases, r, config).params;
    return out;
}

}  // namespace mvr::probe
