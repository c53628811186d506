#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "mvr/core/feature_stack.hpp"
#include "mvr/core/grid.hpp"

namespace mvr::probe {

inline constexpr int kDefaultInDim = 2304;
inline constexpr int kDefaultHidden = 256;

/// Two-layer readout in_dim -> hidden -> 1 with a ReLU hidden layer.
///
/// All trainable values live in one flat buffer laid out as
/// [w1 (in_dim x hidden, row-major) | b1 (hidden) | w2 (hidden) | b2], which is
/// also the order of the serialized payload and of gradient vectors.
class ProbeParams {
public:
    ProbeParams() = default;
    ProbeParams(int in_dim, int hidden);

    /// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
    static ProbeParams initialized(int in_dim, int hidden, std::uint64_t seed);

    static std::size_t parameter_count(int in_dim, int hidden) {
        return static_cast<std::size_t>(in_dim) * hidden + 2 * static_cast<std::size_t>(hidden) + 1;
    }
    std::size_t parameter_count() const { return values_.size(); }

    int in_dim() const { return in_dim_; }
    int hidden() const { return hidden_; }

    std::span<double> w1() { return {values_.data(), w1_size()}; }
    std::span<const double> w1() const { return {values_.data(), w1_size()}; }
    std::span<double> b1() { return {values_.data() + w1_size(), static_cast<std::size_t>(hidden_)}; }
    std::span<const double> b1() const { return {values_.data() + w1_size(), static_cast<std::size_t>(hidden_)}; }
    std::span<double> w2() { return {values_.data() + w1_size() + hidden_, static_cast<std::size_t>(hidden_)}; }
    std::span<const double> w2() const {
        return {values_.data() + w1_size() + hidden_, static_cast<std::size_t>(hidden_)};
    }
    double& b2() { return values_.back(); }
    double b2() const { return values_.back(); }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    friend bool operator==(const ProbeParams&, const ProbeParams&) = default;

private:
    std::size_t w1_size() const { return static_cast<std::size_t>(in_dim_) * hidden_; }

    int in_dim_ = 0;
    int hidden_ = 0;
    std::vector<double> values_;
};

/// One probe per input resolution.
using ProbeSet = std::map<std::uint32_t, ProbeParams>;

/// Patch logits: w2 . relu(w1^T f + b1) + b2 for every patch feature f.
RealGrid probe_forward(const FeatureStack& features, const ProbeParams& params);

/// sigmoid(resize_bilinear(probe_forward(...), out_h, out_w)).
ProbabilityMap predict_probability(const FeatureStack& features, const ProbeParams& params, int out_h, int out_w);

// MVRP: magic "MVRP", u16 version, u32 in_dim, u32 hidden, then w1, b1, w2, b2
// as little-endian f32.
std::vector<std::uint8_t> encode_probe(const ProbeParams& params);
ProbeParams decode_probe(std::span<const std::uint8_t> bytes);
void save_probe(const std::filesystem::path& path, const ProbeParams& params);
ProbeParams load_probe(const std::filesystem::path& path);

}  // namespace mvr::probe
