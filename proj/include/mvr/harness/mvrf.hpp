#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mvr/core/feature_stack.hpp"

namespace mvr::harness {

// MVRF v1, little-endian:
//   "MVRF" | u16 version=1 | u32 resolution | u32 height | u32 width | u32 channels
//   | u8 transform (0 id, 1 hflip, 2 vflip) | u8 dtype (0 = f32) | u16 reserved=0
//   | height*width*channels f32, row-major, channel fastest.
inline constexpr std::size_t kMvrfHeaderBytes = 26;
inline constexpr std::uint16_t kMvrfVersion = 1;

std::vector<std::uint8_t> encode_feature_stack(const FeatureStack& stack);

/// Throws CorruptHeaderError, TruncatedPayloadError or UnsupportedVersionError;
/// never returns a partial stack.
FeatureStack decode_feature_stack(std::span<const std::uint8_t> bytes);

void write_feature_file(const std::filesystem::path& path, const FeatureStack& stack);
FeatureStack load_feature_file(const std::filesystem::path& path);

}  // namespace mvr::harness
