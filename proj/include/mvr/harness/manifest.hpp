#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mvr/core/feature_stack.hpp"

namespace mvr::harness {

struct ViewEntry {
    std::uint32_t resolution = 0;
    TransformId transform = TransformId::identity;
    std::filesystem::path path;  // absolute once loaded
};

/// One image (or one slice of a volume) and everything exported for it.
struct CaseRecord {
    std::string case_id;
    std::optional<std::string> patient_id;
    std::optional<int> slice_index;
    std::filesystem::path mask;
    std::vector<ViewEntry> views;
    std::optional<std::filesystem::path> guide;
    int height = 0;
    int width = 0;
    std::string split;       // "train", "test" or empty
    std::string provenance;  // free-form exporter notes

    const ViewEntry* find_view(std::uint32_t resolution, TransformId t) const;
};

/// Line-delimited JSON, one case per line. Relative paths resolve against the
/// manifest's directory.
struct Manifest {
    std::filesystem::path root;
    std::vector<CaseRecord> cases;

    static Manifest load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    /// Unique ids, existing files, consistent in-plane shape per patient.
    void validate() const;
    /// Throws MissingViewError naming the first case lacking a configured view.
    void require_views(std::span<const std::uint32_t> resolutions, std::span<const TransformId> transforms) const;

    /// Cases whose split matches; an empty filter or "all" keeps everything.
    Manifest filtered(const std::string& split) const;
    bool volumetric() const;
};

}  // namespace mvr::harness
