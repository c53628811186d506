#include "mvr/harness/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "mvr/core/error.hpp"
#include "mvr/core/resample.hpp"
#include "mvr/core/rng.hpp"
#include "mvr/core/transform.hpp"
#include "mvr/harness/image_io.hpp"
#include "mvr/harness/mvrf.hpp"

namespace mvr::harness {

namespace fs = std::filesystem;

void SyntheticSpec::validate() const {
    if (image_height < 1 || image_width < 1) throw InvalidArgument("synthetic image size must be >= 1");
    if (channels < 1) throw InvalidArgument("synthetic channels must be >= 1");
    if (grids.empty()) throw InvalidArgument("synthetic spec needs at least one grid");
    for (const auto& g : grids) {
        if (g.height < 1 || g.width < 1) throw InvalidArgument("synthetic grid dims must be >= 1");
    }
    if (noise_sigma < 0.0 || prototype_distance < 0.0) throw InvalidArgument("negative synthetic scale");
}

SyntheticGrid default_grid(std::uint32_t resolution) {
    const int g = static_cast<int>(resolution / 16);
    return {resolution, g, g};
}

namespace {

struct Prototypes {
    std::vector<double> background;
    std::vector<double> direction;  // unit vector from background to foreground
};

Prototypes make_prototypes(const SyntheticSpec& spec, std::uint32_t resolution) {
    Rng rng(derive_seed(spec.prototype_seed, resolution));
    Prototypes p;
    p.background.resize(static_cast<std::size_t>(spec.channels));
    p.direction.resize(static_cast<std::size_t>(spec.channels));
    for (auto& v : p.background) v = rng.normal();
    double norm = 0.0;
    for (auto& v : p.direction) {
        v = rng.normal();
        norm += v * v;
    }
    norm = std::sqrt(norm);
    for (auto& v : p.direction) v = norm > 0.0 ? v / norm : 1.0;
    return p;
}

// Smooth star-shaped region: radius varies with two low harmonics of the angle.
struct Blob {
    double cy = 0, cx = 0, radius = 0;
    double a1 = 0, p1 = 0, a2 = 0, p2 = 0;
    double aspect = 1;

    bool contains(double y, double x, double scale) const {
        const double dy = (y - cy) / aspect;
        const double dx = x - cx;
        const double th = std::atan2(dy, dx);
        const double r = radius * scale * (1.0 + a1 * std::cos(th + p1) + a2 * std::cos(2.0 * th + p2));
        return dy * dy + dx * dx <= r * r;
    }
};

Blob random_blob(Rng& rng, int h, int w) {
    const double m = std::min(h, w);
    Blob b;
    b.radius = rng.uniform(0.2, 0.32) * m;
    b.cy = rng.uniform(0.35, 0.65) * h;
    b.cx = rng.uniform(0.35, 0.65) * w;
    b.a1 = rng.uniform(0.0, 0.15);
    b.p1 = rng.uniform(0.0, 2.0 * std::numbers::pi);
    b.a2 = rng.uniform(0.0, 0.15);
    b.p2 = rng.uniform(0.0, 2.0 * std::numbers::pi);
    b.aspect = rng.uniform(0.75, 1.33);
    return b;
}

BinaryMask render(const Blob& blob, int h, int w, double scale) {
    BinaryMask m(h, w);
    if (scale <= 0.0) return m;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) m.set(r, c, blob.contains(r + 0.5, c + 0.5, scale));
    }
    return m;
}

// Foreground fraction of the image pixels whose centres fall in each patch.
RealGrid patch_coverage(const BinaryMask& mask, int gh, int gw) {
    RealGrid sum(gh, gw);
    RealGrid count(gh, gw);
    const auto rows = nearest_indices(gh, mask.height());
    const auto cols = nearest_indices(gw, mask.width());
    for (int r = 0; r < mask.height(); ++r) {
        for (int c = 0; c < mask.width(); ++c) {
            sum(rows[r], cols[c]) += mask(r, c);
            count(rows[r], cols[c]) += 1.0;
        }
    }
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = count[i] > 0.0 ? sum[i] / count[i] : 0.0;
    return sum;
}

FeatureStack clean_features(const SyntheticSpec& spec, const SyntheticGrid& grid, const Prototypes& proto,
                            const RealGrid& coverage, double shift) {
    FeatureStack f(grid.height, grid.width, spec.channels, grid.resolution, TransformId::identity);
    for (int r = 0; r < grid.height; ++r) {
        for (int c = 0; c < grid.width; ++c) {
            const double along = coverage(r, c) * spec.prototype_distance + shift;
            auto v = f.at(r, c);
            for (int k = 0; k < spec.channels; ++k) {
                v[static_cast<std::size_t>(k)] = static_cast<float>(proto.background[k] + along * proto.direction[k]);
            }
        }
    }
    return f;
}

void add_noise(FeatureStack& f, double sigma, Rng& rng) {
    if (sigma == 0.0) return;
    for (auto& v : f.data) v = static_cast<float>(v + sigma * rng.normal());
}

crf::GuideImage render_guide(const SyntheticSpec& spec, const BinaryMask& mask, Rng& rng) {
    Grid<float> gray(mask.height(), mask.width());
    for (std::size_t i = 0; i < gray.size(); ++i) {
        const double base = mask[i] ? spec.guide_foreground : spec.guide_background;
        gray[i] = static_cast<float>(std::clamp(base + spec.guide_noise * rng.normal(), 0.0, 255.0));
    }
    return crf::GuideImage::from_gray(gray);
}

// Features for every configured view of one image. `shift` moves all patches
// along the class direction (shared by every view).
CaseData assemble(const SyntheticSpec& spec, std::string id, BinaryMask mask, double shift, std::uint64_t seed) {
    CaseData d;
    d.case_id = std::move(id);
    d.height = spec.image_height;
    d.width = spec.image_width;
    Rng guide_rng(derive_seed(seed, 1));
    d.guide = render_guide(spec, mask, guide_rng);
    std::uint64_t stream = 16;
    for (const auto& grid : spec.grids) {
        const Prototypes proto = make_prototypes(spec, grid.resolution);
        const RealGrid coverage = patch_coverage(mask, grid.height, grid.width);
        const FeatureStack clean = clean_features(spec, grid, proto, coverage, shift);
        for (auto t : spec.transforms) {
            FeatureStack view = apply_transform(clean, t);
            view.transform_tag = t;
            Rng noise(derive_seed(seed, stream++));
            add_noise(view, spec.noise_sigma, noise);
            d.features[{grid.resolution, t}] = std::make_shared<const FeatureStack>(std::move(view));
        }
    }
    d.mask = std::move(mask);
    return d;
}

}  // namespace

CaseData generate_synthetic_case(const SyntheticSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(derive_seed(seed, 0));
    const Blob blob = random_blob(rng, spec.image_height, spec.image_width);
    return assemble(spec, fmt::format("case_{:016x}", seed),
                    render(blob, spec.image_height, spec.image_width, 1.0), 0.0, seed);
}

CaseData generate_synthetic_case(std::uint64_t seed, int grid_h, int grid_w, int channels) {
    if (grid_h < 1 || grid_w < 1 || channels < 1) throw InvalidArgument("synthetic dims must be >= 1");
    SyntheticSpec spec;
    spec.image_height = 4 * grid_h;
    spec.image_width = 4 * grid_w;
    spec.channels = channels;
    spec.grids = {{static_cast<std::uint32_t>(16 * grid_h), grid_h, grid_w}};
    return generate_synthetic_case(spec, seed);
}

std::vector<CaseData> generate_synthetic_patient(const SyntheticSpec& spec, const VolumeSpec& volume,
                                                 const std::string& patient_id, std::uint64_t seed) {
    spec.validate();
    if (volume.depth < 1) throw InvalidArgument("volume depth must be >= 1");
    Rng rng(derive_seed(seed, 0));
    const Blob blob = random_blob(rng, spec.image_height, spec.image_width);
    // The object crosses the whole scanned slab with a fixed cross-section, so
    // every difference between slices comes from the per-slice noise.
    const BinaryMask mask = render(blob, spec.image_height, spec.image_width, 1.0);
    const double patient_offset = volume.patient_shift * rng.normal();

    std::vector<CaseData> slices;
    for (int z = 0; z < volume.depth; ++z) {
        const double shift = patient_offset + volume.slice_shift * rng.normal();
        CaseData d = assemble(spec, fmt::format("{}_s{:03d}", patient_id, z), mask, shift,
                              derive_seed(seed, 1000 + static_cast<std::uint64_t>(z)));
        d.patient_id = patient_id;
        d.slice_index = z;
        slices.push_back(std::move(d));
    }
    return slices;
}

std::vector<CaseData> generate_synthetic_dataset(const SyntheticSpec& spec, int count, int train_count,
                                                 std::uint64_t seed) {
    if (count < 1 || train_count < 0 || train_count > count) throw InvalidArgument("bad synthetic split sizes");
    std::vector<CaseData> out;
    for (int i = 0; i < count; ++i) {
        CaseData d = generate_synthetic_case(spec, derive_seed(seed, static_cast<std::uint64_t>(i)));
        d.case_id = fmt::format("case_{:03d}", i);
        d.split = i < train_count ? "train" : "test";
        out.push_back(std::move(d));
    }
    return out;
}

std::vector<CaseData> generate_synthetic_volumes(const SyntheticSpec& spec, const VolumeSpec& volume, int patients,
                                                 int train_patients, std::uint64_t seed) {
    if (patients < 1 || train_patients < 0 || train_patients > patients) {
        throw InvalidArgument("bad synthetic patient split");
    }
    std::vector<CaseData> out;
    for (int i = 0; i < patients; ++i) {
        auto slices = generate_synthetic_patient(spec, volume, fmt::format("p{:02d}", i),
                                                 derive_seed(seed, static_cast<std::uint64_t>(i)));
        for (auto& s : slices) {
            s.split = i < train_patients ? "train" : "test";
            out.push_back(std::move(s));
        }
    }
    return out;
}

Manifest write_dataset(const fs::path& dir, const std::vector<CaseData>& cases, const std::string& provenance) {
    fs::create_directories(dir / "features");
    fs::create_directories(dir / "masks");
    fs::create_directories(dir / "guides");
    Manifest m;
    m.root = fs::absolute(dir);
    for (const auto& d : cases) {
        CaseRecord rec;
        rec.case_id = d.case_id;
        rec.patient_id = d.patient_id;
        if (d.patient_id) rec.slice_index = d.slice_index;
        rec.height = d.height;
        rec.width = d.width;
        rec.split = d.split;
        rec.provenance = provenance;
        rec.mask = fs::path("masks") / (d.case_id + ".png");
        write_mask_png(m.root / rec.mask, d.mask);
        if (d.guide) {
            rec.guide = fs::path("guides") / (d.case_id + ".png");
            write_guide_png(m.root / *rec.guide, *d.guide);
        }
        for (const auto& [spec, stack] : d.features) {
            const fs::path rel = fs::path("features") / fmt::format("{}_r{}_{}.mvrf", d.case_id, spec.resolution,
                                                                    to_string(spec.transform));
            write_feature_file(m.root / rel, *stack);
            rec.views.push_back({spec.resolution, spec.transform, rel});
        }
        m.cases.push_back(std::move(rec));
    }
    m.save(m.root / "manifest.jsonl");
    // Re-resolve paths the same way a fresh load would.
    return Manifest::load(m.root / "manifest.jsonl");
}

}  // namespace mvr::harness
