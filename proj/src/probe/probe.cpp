#include "mvr/probe/probe.hpp"

#include <cmath>
#include <cstring>

#include "mvr/core/binary_io.hpp"
#include "mvr/core/error.hpp"
#include "mvr/core/resample.hpp"
#include "mvr/core/rng.hpp"

namespace mvr::probe {

namespace {

constexpr char kMagic[4] = {'M', 'V', 'R', 'P'};
constexpr std::uint16_t kVersion = 1;

}  // namespace

ProbeParams::ProbeParams(int in_dim, int hidden) : in_dim_(in_dim), hidden_(hidden) {
    if (in_dim < 1 || hidden < 1) throw DimensionError("probe dimensions must be >= 1");
    values_.assign(parameter_count(in_dim, hidden), 0.0);
}

ProbeParams ProbeParams::initialized(int in_dim, int hidden, std::uint64_t seed) {
    ProbeParams p(in_dim, hidden);
    Rng rng(seed);
    const double a1 = std::sqrt(6.0 / (in_dim + hidden));
    for (double& w : p.w1()) w = rng.uniform(-a1, a1);
    const double a2 = std::sqrt(6.0 / (hidden + 1));
    for (double& w : p.w2()) w = rng.uniform(-a2, a2);
    return p;
}

RealGrid probe_forward(const FeatureStack& features, const ProbeParams& params) {
    if (features.channels != params.in_dim()) {
        throw DimensionError("probe_forward: feature channels (" + std::to_string(features.channels) +
                             ") != probe in_dim (" + std::to_string(params.in_dim()) + ")");
    }
    const int hidden = params.hidden();
    const auto w1 = params.w1();
    const auto b1 = params.b1();
    const auto w2 = params.w2();
    RealGrid logits(features.height, features.width);
    std::vector<double> pre(static_cast<std::size_t>(hidden));
    for (int r = 0; r < features.height; ++r) {
        for (int c = 0; c < features.width; ++c) {
            const auto f = features.at(r, c);
            std::copy(b1.begin(), b1.end(), pre.begin());
            for (int k = 0; k < params.in_dim(); ++k) {
                const double fk = f[static_cast<std::size_t>(k)];
                if (fk == 0.0) continue;
                const double* row = w1.data() + static_cast<std::size_t>(k) * hidden;
                for (int h = 0; h < hidden; ++h) pre[static_cast<std::size_t>(h)] += fk * row[h];
            }
            double a = params.b2();
            for (int h = 0; h < hidden; ++h) {
                a += w2[static_cast<std::size_t>(h)] * std::max(pre[static_cast<std::size_t>(h)], 0.0);
            }
            logits(r, c) = a;
        }
    }
    return logits;
}

ProbabilityMap predict_probability(const FeatureStack& features, const ProbeParams& params, int out_h, int out_w) {
    return apply_sigmoid(resize_bilinear(probe_forward(features, params), out_h, out_w));
}

std::vector<std::uint8_t> encode_probe(const ProbeParams& params) {
    io::ByteWriter w;
    w.bytes(kMagic, 4);
    w.u16(kVersion);
    w.u32(static_cast<std::uint32_t>(params.in_dim()));
    w.u32(static_cast<std::uint32_t>(params.hidden()));
    for (double v : params.values()) w.f32(static_cast<float>(v));
    return w.take();
}

ProbeParams decode_probe(std::span<const std::uint8_t> bytes) {
    io::ByteReader r(bytes);
    char magic[4];
    std::uint16_t version = 0;
    std::uint32_t in_dim = 0;
    std::uint32_t hidden = 0;
    if (!r.bytes(magic, 4) || !r.u16(version) || !r.u32(in_dim) || !r.u32(hidden)) {
        throw CorruptHeaderError("probe file shorter than its header");
    }
    if (std::memcmp(magic, kMagic, 4) != 0) throw CorruptHeaderError("probe file has wrong magic");
    if (version != kVersion) throw UnsupportedVersionError("unsupported probe file version " + std::to_string(version));
    if (in_dim == 0 || hidden == 0 || in_dim > (1u << 24) || hidden > (1u << 24)) {
        throw CorruptHeaderError("probe file has invalid dimensions");
    }
    const std::size_t count = ProbeParams::parameter_count(static_cast<int>(in_dim), static_cast<int>(hidden));
    if (r.remaining() < count * 4) throw TruncatedPayloadError("probe payload truncated");
    if (r.remaining() > count * 4) throw CorruptHeaderError("probe payload has trailing bytes");
    ProbeParams p(static_cast<int>(in_dim), static_cast<int>(hidden));
    for (double& v : p.values()) {
        float f = 0.0f;
        r.f32(f);
        if (!std::isfinite(f)) throw CorruptHeaderError("probe payload contains non-finite values");
        v = f;
    }
    return p;
}

void save_probe(const std::filesystem::path& path, const ProbeParams& params) {
    io::write_file(path, encode_probe(params));
}

ProbeParams load_probe(const std::filesystem::path& path) { return decode_probe(io::read_file(path)); }

}  // namespace mvr::probe
