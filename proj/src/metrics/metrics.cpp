#include "mvr/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "mvr/core/error.hpp"
#include "mvr/core/resample.hpp"
#include "mvr/fusion/fusion.hpp"

namespace mvr::metrics {

namespace {

constexpr double kFar = std::numeric_limits<double>::infinity();

void check_same(const BinaryMask& a, const BinaryMask& b) {
    if (a.height() != b.height() || a.width() != b.width()) throw DimensionError("metrics: mask shapes differ");
}

void check_same(const MaskVolume& a, const MaskVolume& b) {
    if (a.size() != b.size()) throw DimensionError("metrics: volume depths differ");
    for (std::size_t z = 0; z < a.size(); ++z) {
        check_same(a[z], b[z]);
        check_same(a[z], a.front());
    }
}

struct Counts {
    std::size_t a = 0;
    std::size_t b = 0;
    std::size_t both = 0;
};

void count(const BinaryMask& pred, const BinaryMask& gt, Counts& c) {
    for (std::size_t i = 0; i < pred.size(); ++i) {
        c.a += pred[i];
        c.b += gt[i];
        c.both += pred[i] & gt[i];
    }
}

double dice_from(const Counts& c) {
    if (c.a + c.b == 0) return 1.0;
    return 2.0 * static_cast<double>(c.both) / static_cast<double>(c.a + c.b);
}

double iou_from(const Counts& c) {
    const std::size_t uni = c.a + c.b - c.both;
    if (uni == 0) return 1.0;
    return static_cast<double>(c.both) / static_cast<double>(uni);
}

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher) along one line,
// built from the finite samples only so the arithmetic stays exact on integers.
void edt_line(const double* f, double* out, std::size_t n, std::size_t stride, std::vector<int>& v,
              std::vector<double>& z) {
    v.resize(n);
    z.resize(n + 1);
    int k = -1;
    for (std::size_t q = 0; q < n; ++q) {
        const double fq = f[q * stride];
        if (fq == kFar) continue;
        const auto qi = static_cast<int>(q);
        double s = 0.0;
        while (k >= 0) {
            const int p = v[static_cast<std::size_t>(k)];
            const double fp = f[static_cast<std::size_t>(p) * stride];
            s = ((fq + static_cast<double>(qi) * qi) - (fp + static_cast<double>(p) * p)) / (2.0 * (qi - p));
            if (s <= z[static_cast<std::size_t>(k)]) {
                --k;
            } else {
                break;
            }
        }
        ++k;
        v[static_cast<std::size_t>(k)] = qi;
        z[static_cast<std::size_t>(k)] = k == 0 ? -kFar : s;
        z[static_cast<std::size_t>(k) + 1] = kFar;
    }
    if (k < 0) {
        for (std::size_t q = 0; q < n; ++q) out[q * stride] = kFar;
        return;
    }
    int j = 0;
    for (std::size_t q = 0; q < n; ++q) {
        const auto qd = static_cast<double>(q);
        while (z[static_cast<std::size_t>(j) + 1] < qd) ++j;
        const int p = v[static_cast<std::size_t>(j)];
        const double d = qd - p;
        out[q * stride] = d * d + f[static_cast<std::size_t>(p) * stride];
    }
}

// Squared Euclidean distance to the nearest site, in place over a dense
// row-major array of the given extents (sites hold 0, others kFar).
void squared_edt(std::vector<double>& field, std::span<const int> extents) {
    std::vector<std::size_t> strides(extents.size());
    std::size_t s = 1;
    for (std::size_t d = extents.size(); d-- > 0;) {
        strides[d] = s;
        s *= static_cast<std::size_t>(extents[d]);
    }
    std::vector<double> line_in;
    std::vector<double> line_out;
    std::vector<int> v;
    std::vector<double> z;
    for (std::size_t d = 0; d < extents.size(); ++d) {
        const auto n = static_cast<std::size_t>(extents[d]);
        const std::size_t inner = strides[d];
        const std::size_t outer = field.size() / (n * inner);
        line_in.resize(n);
        line_out.resize(n);
        for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t in = 0; in < inner; ++in) {
                const std::size_t start = o * n * inner + in;
                for (std::size_t x = 0; x < n; ++x) line_in[x] = field[start + x * inner];
                edt_line(line_in.data(), line_out.data(), n, 1, v, z);
                for (std::size_t x = 0; x < n; ++x) field[start + x * inner] = line_out[x];
            }
        }
    }
}

template <std::size_t D>
std::vector<double> directed_distances(const std::vector<std::array<int, D>>& from,
                                       const std::vector<std::array<int, D>>& to, std::span<const int> extents) {
    std::size_t total = 1;
    for (int e : extents) total *= static_cast<std::size_t>(e);
    std::vector<double> field(total, kFar);
    auto index = [&](const std::array<int, D>& p) {
        std::size_t idx = 0;
        for (std::size_t d = 0; d < D; ++d) idx = idx * static_cast<std::size_t>(extents[d]) + p[d];
        return idx;
    };
    for (const auto& p : to) field[index(p)] = 0.0;
    squared_edt(field, extents);
    std::vector<double> out;
    out.reserve(from.size());
    for (const auto& p : from) out.push_back(std::sqrt(field[index(p)]));
    return out;
}

template <std::size_t D>
double hd95_from(const std::vector<std::array<int, D>>& bp, const std::vector<std::array<int, D>>& bg,
                 std::span<const int> extents) {
    if (bp.empty() && bg.empty()) return 0.0;
    if (bp.empty() || bg.empty()) return kInfinity;
    auto pooled = directed_distances<D>(bp, bg, extents);
    const auto back = directed_distances<D>(bg, bp, extents);
    pooled.insert(pooled.end(), back.begin(), back.end());
    return percentile_linear(std::move(pooled), 95.0);
}

}  // namespace

double dice(const BinaryMask& pred, const BinaryMask& gt) {
    check_same(pred, gt);
    Counts c;
    count(pred, gt, c);
    return dice_from(c);
}

double iou(const BinaryMask& pred, const BinaryMask& gt) {
    check_same(pred, gt);
    Counts c;
    count(pred, gt, c);
    return iou_from(c);
}

double dice(const MaskVolume& pred, const MaskVolume& gt) {
    check_same(pred, gt);
    Counts c;
    for (std::size_t z = 0; z < pred.size(); ++z) count(pred[z], gt[z], c);
    return dice_from(c);
}

double iou(const MaskVolume& pred, const MaskVolume& gt) {
    check_same(pred, gt);
    Counts c;
    for (std::size_t z = 0; z < pred.size(); ++z) count(pred[z], gt[z], c);
    return iou_from(c);
}

std::vector<std::array<int, 2>> boundary_2d(const BinaryMask& m) {
    std::vector<std::array<int, 2>> out;
    const int h = m.height();
    const int w = m.width();
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (!m(r, c)) continue;
            const bool edge = r == 0 || c == 0 || r == h - 1 || c == w - 1 || !m(r - 1, c) || !m(r + 1, c) ||
                              !m(r, c - 1) || !m(r, c + 1);
            if (edge) out.push_back({r, c});
        }
    }
    return out;
}

std::vector<std::array<int, 3>> boundary_3d(const MaskVolume& v) {
    std::vector<std::array<int, 3>> out;
    const int d = static_cast<int>(v.size());
    if (d == 0) return out;
    const int h = v.front().height();
    const int w = v.front().width();
    for (int z = 0; z < d; ++z) {
        const auto& s = v[static_cast<std::size_t>(z)];
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c < w; ++c) {
                if (!s(r, c)) continue;
                const bool edge = z == 0 || z == d - 1 || r == 0 || c == 0 || r == h - 1 || c == w - 1 ||
                                  !v[static_cast<std::size_t>(z - 1)](r, c) ||
                                  !v[static_cast<std::size_t>(z + 1)](r, c) || !s(r - 1, c) || !s(r + 1, c) ||
                                  !s(r, c - 1) || !s(r, c + 1);
                if (edge) out.push_back({z, r, c});
            }
        }
    }
    return out;
}

double percentile_linear(std::vector<double> values, double q) {
    if (values.empty()) throw InvalidArgument("percentile of an empty list");
    std::sort(values.begin(), values.end());
    const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

double hd95(const BinaryMask& pred, const BinaryMask& gt) {
    check_same(pred, gt);
    const std::array<int, 2> extents{pred.height(), pred.width()};
    return hd95_from<2>(boundary_2d(pred), boundary_2d(gt), extents);
}

double hd95(const MaskVolume& pred, const MaskVolume& gt) {
    check_same(pred, gt);
    if (pred.empty()) return 0.0;
    const std::array<int, 3> extents{static_cast<int>(pred.size()), pred.front().height(), pred.front().width()};
    return hd95_from<3>(boundary_3d(pred), boundary_3d(gt), extents);
}

MetricPair to_metric_grid(const ProbabilityMap& pred, const BinaryMask& gt, int size, double level) {
    ProbabilityMap resized(resize_bilinear(pred.grid(), size, size));
    return {fusion::threshold(resized, level), resize_nearest(gt, size, size)};
}

MetricPair to_metric_grid(const BinaryMask& pred, const BinaryMask& gt, int size) {
    return {resize_nearest(pred, size, size), resize_nearest(gt, size, size)};
}

CaseMetrics case_metrics(std::string case_id, const BinaryMask& pred, const BinaryMask& gt) {
    return {std::move(case_id), dice(pred, gt), iou(pred, gt), hd95(pred, gt)};
}

CaseMetrics volumetric_metrics(std::string case_id, const MaskVolume& pred, const MaskVolume& gt) {
    return {std::move(case_id), dice(pred, gt), iou(pred, gt), hd95(pred, gt)};
}

AggregateReport aggregate(std::span<const CaseMetrics> cases) {
    if (cases.empty()) throw InvalidArgument("aggregate: no cases");
    AggregateReport r;
    r.total_cases = cases.size();
    double sum_hd = 0.0;
    std::size_t finite = 0;
    for (const auto& c : cases) {
        r.mean_dice += c.dice;
        r.mean_iou += c.iou;
        if (c.hd95_infinite()) {
            ++r.infinite_hd95_count;
        } else {
            sum_hd += c.hd95;
            ++finite;
        }
    }
    r.mean_dice /= static_cast<double>(cases.size());
    r.mean_iou /= static_cast<double>(cases.size());
    r.mean_hd95_finite = finite ? sum_hd / static_cast<double>(finite) : std::numeric_limits<double>::quiet_NaN();
    return r;
}

std::string format_number(double v, int decimals) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{:.{}f}", v, decimals);
}

std::string format_failures(std::size_t failures, std::size_t total) {
    const double pct = total ? 100.0 * static_cast<double>(failures) / static_cast<double>(total) : 0.0;
    return fmt::format("{}/{} ({:.2f}%)", failures, total, pct);
}

std::string format_report(std::span<const CaseMetrics> cases, const AggregateReport& r) {
    std::string out = "# case_id\tdice\tiou\thd95\n";
    for (const auto& c : cases) {
        out += fmt::format("{}\t{}\t{}\t{}\n", c.case_id, format_number(c.dice), format_number(c.iou),
                           format_number(c.hd95));
    }
    out += fmt::format("# cases {}\n", r.total_cases);
    out += fmt::format("# mean_dice {}\n", format_number(r.mean_dice));
    out += fmt::format("# mean_iou {}\n", format_number(r.mean_iou));
    out += fmt::format("# mean_hd95_finite {}\n", format_number(r.mean_hd95_finite));
    out += fmt::format("# infinite_hd95 {}\n", format_failures(r.infinite_hd95_count, r.total_cases));
    return out;
}

double read_mean_dice(const std::filesystem::path& report) {
    std::ifstream in(report);
    if (!in) throw Error("cannot open reference report '" + report.string() + "'");
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) {
            if (tok == "mean_dice") {
                double v = 0.0;
                if (ls >> v) return v;
            }
        }
    }
    throw Error("no mean_dice entry in '" + report.string() + "'");
}

}  // namespace mvr::metrics
