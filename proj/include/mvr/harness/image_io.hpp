#pragma once

#include <filesystem>

#include "mvr/core/grid.hpp"
#include "mvr/crf/crf.hpp"

namespace mvr::harness {

/// 8-bit single-channel PNG; any nonzero value is foreground.
BinaryMask read_mask_png(const std::filesystem::path& path);
/// Writes 0 / 255.
void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask);

/// 8-bit RGB (gray inputs are replicated).
crf::GuideImage read_guide_png(const std::filesystem::path& path);
void write_guide_png(const std::filesystem::path& path, const crf::GuideImage& guide);

/// Probability maps as float32 .npy arrays of shape (height, width).
void write_probability_npy(const std::filesystem::path& path, const ProbabilityMap& map);
ProbabilityMap read_probability_npy(const std::filesystem::path& path);

}  // namespace mvr::harness
