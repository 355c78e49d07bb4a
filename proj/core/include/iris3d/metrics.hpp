#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "iris3d/boundary.hpp"
#include "iris3d/image_io.hpp"

namespace iris3d::metrics {

struct ConfusionCounts {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::uint64_t total() const { return tp + fp + tn + fn; }
};

ConfusionCounts confusion(const SegMask& pred, const SegMask& gt);

struct RegionMetrics {
  double sen = 0.0;
  double dice = 0.0;
  double acc = 0.0;
};

// An empty ground truth gives Sen = 1 when nothing was missed; Dice is 1 only
// when the prediction is empty too. Throws ShapeError on differing extents.
RegionMetrics region_metrics(const SegMask& pred, const SegMask& gt);
RegionMetrics region_metrics(const ConfusionCounts& c);

// Root mean squared depth difference over the columns both boundaries
// cover, divided by the image height. Columns are matched by rounded x.
double rnmse(const Polyline& pred, const Polyline& gt, double image_height);

using Vec2 = Eigen::Vector2d;

// Symmetric Hausdorff distance by exhaustive search.
double hausdorff(std::span<const Vec2> a, std::span<const Vec2> b);
double hausdorff(const Polyline& a, const Polyline& b);

// The TIC point of a half-boundary is its most peripheral point, the one
// farthest from the centre column. Returns its pixel distance to `reference`.
BoundaryPoint tic_point(const Polyline& half, double center_column);
double tic_error(const Polyline& pred_half, const BoundaryPoint& reference, double center_column);

struct ClassificationMetrics {
  double acc = 0.0, sen = 0.0, spe = 0.0;
  std::optional<double> auc;  // empty when only one class is present
};

// Scores are class-1 probabilities thresholded at 0.5. Sen (Spe) is 1 when
// there are no positives (negatives), mirroring the region convention.
ClassificationMetrics classification_metrics(std::span<const double> scores, std::span<const int> labels);

// Mann-Whitney U / (n_pos n_neg) with ties counted half. Throws
// InvariantError when a class is missing.
double auc(std::span<const double> scores, std::span<const int> labels);

// {"name": value, ...} with values in fixed notation, six decimals, keys in
// the given order.
using Report = std::vector<std::pair<std::string, double>>;
void write_report(std::ostream& os, const Report& report);
void write_report(const std::filesystem::path& path, const Report& report);

}  // namespace iris3d::metrics
