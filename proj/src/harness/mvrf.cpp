#include "mvr/harness/mvrf.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "mvr/core/binary_io.hpp"
#include "mvr/core/error.hpp"

namespace mvr::harness {

namespace {

constexpr char kMagic[4] = {'M', 'V', 'R', 'F'};

}  // namespace

std::vector<std::uint8_t> encode_feature_stack(const FeatureStack& stack) {
    stack.validate();
    io::ByteWriter w;
    w.bytes(kMagic, 4);
    w.u16(kMvrfVersion);
    w.u32(stack.resolution_tag);
    w.u32(static_cast<std::uint32_t>(stack.height));
    w.u32(static_cast<std::uint32_t>(stack.width));
    w.u32(static_cast<std::uint32_t>(stack.channels));
    w.u8(static_cast<std::uint8_t>(stack.transform_tag));
    w.u8(0);
    w.u16(0);
    for (float v : stack.data) w.f32(v);
    return w.take();
}

FeatureStack decode_feature_stack(std::span<const std::uint8_t> bytes) {
    io::ByteReader r(bytes);
    char magic[4];
    std::uint16_t version = 0;
    std::uint32_t resolution = 0;
    std::uint32_t height = 0;
    std::uint32_t width = 0;
    std::uint32_t channels = 0;
    std::uint8_t transform = 0;
    std::uint8_t dtype = 0;
    std::uint16_t reserved = 0;
    if (!r.bytes(magic, 4) || !r.u16(version) || !r.u32(resolution) || !r.u32(height) || !r.u32(width) ||
        !r.u32(channels) || !r.u8(transform) || !r.u8(dtype) || !r.u16(reserved)) {
        throw CorruptHeaderError("MVRF file shorter than its header");
    }
    if (std::memcmp(magic, kMagic, 4) != 0) throw CorruptHeaderError("MVRF: bad magic");
    if (version != kMvrfVersion) throw UnsupportedVersionError("MVRF: unsupported version " + std::to_string(version));
    if (transform > 2) throw CorruptHeaderError("MVRF: unknown transform tag " + std::to_string(transform));
    if (dtype != 0) throw CorruptHeaderError("MVRF: unsupported dtype " + std::to_string(dtype));
    if (reserved != 0) throw CorruptHeaderError("MVRF: reserved field is not zero");
    constexpr std::uint32_t kMaxDim = 1u << 20;
    if (height == 0 || width == 0 || channels == 0 || height > kMaxDim || width > kMaxDim || channels > kMaxDim) {
        throw CorruptHeaderError("MVRF: invalid dimensions");
    }
    const std::uint64_t count = static_cast<std::uint64_t>(height) * width * channels;
    const std::uint64_t expected = count * 4;
    if (r.remaining() < expected) throw TruncatedPayloadError("MVRF: payload truncated");
    if (r.remaining() > expected) throw CorruptHeaderError("MVRF: payload longer than header declares");

    FeatureStack s(static_cast<int>(height), static_cast<int>(width), static_cast<int>(channels), resolution,
                   static_cast<TransformId>(transform));
    for (float& v : s.data) {
        r.f32(v);
        if (!std::isfinite(v)) throw FormatError("MVRF: non-finite feature value");
    }
    return s;
}

void write_feature_file(const std::filesystem::path& path, const FeatureStack& stack) {
    io::write_file(path, encode_feature_stack(stack));
}

FeatureStack load_feature_file(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw Error("feature file '" + path.string() + "' does not exist");
    return decode_feature_stack(io::read_file(path));
}

}  // namespace mvr::harness
