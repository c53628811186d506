#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mvr/harness/case_data.hpp"

namespace mvr::harness {

/// Patch grid exported for one input resolution.
struct SyntheticGrid {
    std::uint32_t resolution = 0;
    int height = 0;
    int width = 0;
};

/// Stand-in for frozen backbone features. Each patch feature mixes two fixed
/// class prototypes by the patch's foreground fraction, then adds noise.
struct SyntheticSpec {
    int image_height = 64;
    int image_width = 64;
    std::vector<SyntheticGrid> grids{{128, 8, 8}, {256, 16, 16}};
    std::vector<TransformId> transforms{TransformId::identity, TransformId::hflip, TransformId::vflip};
    int channels = 16;
    double noise_sigma = 0.5;         // per channel, independent per view
    double prototype_distance = 2.0;  // |mu_fg - mu_bg|
    std::uint64_t prototype_seed = 7;
    float guide_foreground = 170.0f;
    float guide_background = 80.0f;
    float guide_noise = 12.0f;

    void validate() const;
};

/// Volumes of stacked slices through an object of constant cross-section.
struct VolumeSpec {
    int depth = 24;
    // Offsets along the class direction, added to every patch: one draw per
    // patient and an independent draw per slice (shared by the slice's views).
    double patient_shift = 0.3;
    double slice_shift = 0.5;
};

/// Grid used for resolution r when none is given explicitly: (r/16) x (r/16).
SyntheticGrid default_grid(std::uint32_t resolution);

CaseData generate_synthetic_case(const SyntheticSpec& spec, std::uint64_t seed);

/// Single-resolution case on a grid_h x grid_w patch grid with 4x4-pixel patches.
CaseData generate_synthetic_case(std::uint64_t seed, int grid_h, int grid_w, int channels);

/// Slices of one patient in depth order; ids are "<patient>_s<z>".
std::vector<CaseData> generate_synthetic_patient(const SyntheticSpec& spec, const VolumeSpec& volume,
                                                 const std::string& patient_id, std::uint64_t seed);

/// `count` cases, the first `train_count` tagged "train", the rest "test".
std::vector<CaseData> generate_synthetic_dataset(const SyntheticSpec& spec, int count, int train_count,
                                                 std::uint64_t seed);

/// `patients` volumes; the first `train_patients` are tagged "train".
std::vector<CaseData> generate_synthetic_volumes(const SyntheticSpec& spec, const VolumeSpec& volume, int patients,
                                                 int train_patients, std::uint64_t seed);

/// Writes MVRF features, mask and guide PNGs and a manifest.jsonl under `dir`.
Manifest write_dataset(const std::filesystem::path& dir, const std::vector<CaseData>& cases,
                       const std::string& provenance);

}  // namespace mvr::harness
