#pragma once

#include <array>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mvr/core/grid.hpp"

namespace mvr::metrics {

inline constexpr int kMetricGrid = 256;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Depth-ordered slices of equal shape.
using MaskVolume = std::vector<BinaryMask>;

struct CaseMetrics {
    std::string case_id;
    double dice = 0.0;
    double iou = 0.0;
    double hd95 = 0.0;  // +inf when exactly one of pred/gt is empty

    bool hd95_infinite() const { return hd95 == kInfinity; }
};

struct AggregateReport {
    double mean_dice = 0.0;
    double mean_iou = 0.0;
    double mean_hd95_finite = 0.0;  // NaN when no case is finite
    std::size_t infinite_hd95_count = 0;
    std::size_t total_cases = 0;
};

// Both-empty masks score Dice = IoU = 1 and HD95 = 0.
double dice(const BinaryMask& pred, const BinaryMask& gt);
double iou(const BinaryMask& pred, const BinaryMask& gt);
double dice(const MaskVolume& pred, const MaskVolume& gt);
double iou(const MaskVolume& pred, const MaskVolume& gt);

/// Foreground pixels with a 4-neighbour that is background or out of bounds.
std::vector<std::array<int, 2>> boundary_2d(const BinaryMask& mask);
/// Foreground voxels with a 6-neighbour that is background or out of bounds.
std::vector<std::array<int, 3>> boundary_3d(const MaskVolume& volume);

/// Inclusive linear-interpolation percentile (q in [0, 100]) of a non-empty list.
double percentile_linear(std::vector<double> values, double q);

/// 95th percentile of the pooled directed nearest-boundary distances, in
/// pixel (voxel) units. Uses exact squared Euclidean distance transforms.
double hd95(const BinaryMask& pred, const BinaryMask& gt);
double hd95(const MaskVolume& pred, const MaskVolume& gt);

struct MetricPair {
    BinaryMask pred;
    BinaryMask gt;
};

/// Probability maps are resized bilinearly then thresholded; masks use nearest.
MetricPair to_metric_grid(const ProbabilityMap& pred, const BinaryMask& gt, int size = kMetricGrid,
                          double level = 0.5);
MetricPair to_metric_grid(const BinaryMask& pred, const BinaryMask& gt, int size = kMetricGrid);

CaseMetrics case_metrics(std::string case_id, const BinaryMask& pred, const BinaryMask& gt);
CaseMetrics volumetric_metrics(std::string case_id, const MaskVolume& pred, const MaskVolume& gt);

/// Means in input order; HD95 averaged over finite cases only.
AggregateReport aggregate(std::span<const CaseMetrics> cases);

/// One line per case (id, dice, iou, hd95 or "inf") followed by an aggregate footer.
std::string format_report(std::span<const CaseMetrics> cases, const AggregateReport& report);
std::string format_number(double v, int decimals = 6);
/// "3/200 (1.50%)"
std::string format_failures(std::size_t failures, std::size_t total);

/// Reads the mean Dice from a report footer (or any "mean_dice <v>" line).
double read_mean_dice(const std::filesystem::path& report);

}  // namespace mvr::metrics
