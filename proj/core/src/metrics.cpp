#include "iris3d/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>

#include "iris3d/error.hpp"

namespace iris3d::metrics {

ConfusionCounts confusion(const SegMask& pred, const SegMask& gt) {
  if (pred.width != gt.width || pred.height != gt.height)
    throw ShapeError("metrics: prediction " + std::to_string(pred.width) + "x" + std::to_string(pred.height) +
                     " vs ground truth " + std::to_string(gt.width) + "x" + std::to_string(gt.height));
  ConfusionCounts c;
  for (std::size_t i = 0; i < gt.labels.size(); ++i) {
    const bool p = pred.labels[i] != 0, g = gt.labels[i] != 0;
    if (p && g) ++c.tp;
    else if (p) ++c.fp;
    else if (g) ++c.fn;
    else ++c.tn;
  }
  return c;
}

RegionMetrics region_metrics(const ConfusionCounts& c) {
  RegionMetrics m;
  const auto d = [](std::uint64_t v) { return static_cast<double>(v); };
  m.sen = c.tp + c.fn > 0 ? d(c.tp) / d(c.tp + c.fn) : (c.fn == 0 ? 1.0 : 0.0);
  const std::uint64_t dice_den = 2 * c.tp + c.fp + c.fn;
  m.dice = dice_den > 0 ? 2.0 * d(c.tp) / d(dice_den) : 1.0;
  m.acc = c.total() > 0 ? d(c.tp + c.tn) / d(c.total()) : 1.0;
  return m;
}

RegionMetrics region_metrics(const SegMask& pred, const SegMask& gt) { return region_metrics(confusion(pred, gt)); }

double rnmse(const Polyline& pred, const Polyline& gt, double image_height) {
  if (!(image_height > 0.0)) throw InvariantError("rnmse: image height must be positive");
  std::map<long, double> gt_by_col;
  for (const auto& p : gt) gt_by_col[std::lround(p.x)] = p.z;
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& p : pred) {
    const auto it = gt_by_col.find(std::lround(p.x));
    if (it == gt_by_col.end()) continue;
    const double d = p.z - it->second;
    sum += d * d;
    ++n;
  }
  if (n == 0) throw InvariantError("rnmse: boundaries share no columns");
  return std::sqrt(sum / static_cast<double>(n)) / image_height;
}

namespace {

double directed(std::span<const Vec2> a, std::span<const Vec2> b) {
  double worst = 0.0;
  for (const auto& p : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : b) best = std::min(best, (p - q).squaredNorm());
    worst = std::max(worst, best);
  }
  return worst;
}

std::vector<Vec2> to_points(const Polyline& line) {
  std::vector<Vec2> out;
  out.reserve(line.size());
  for (const auto& p : line) out.emplace_back(p.x, p.z);
  return out;
}

}  // namespace

double hausdorff(std::span<const Vec2> a, std::span<const Vec2> b) {
  if (a.empty() || b.empty()) throw InvariantError("hausdorff: empty point set");
  return std::sqrt(std::max(directed(a, b), directed(b, a)));
}

double hausdorff(const Polyline& a, const Polyline& b) {
  const auto pa = to_points(a), pb = to_points(b);
  return hausdorff(pa, pb);
}

BoundaryPoint tic_point(const Polyline& half, double center_column) {
  if (half.empty()) throw InvariantError("tic: empty boundary");
  return *std::max_element(half.begin(), half.end(), [&](const BoundaryPoint& a, const BoundaryPoint& b) {
    return std::abs(a.x - center_column) < std::abs(b.x - center_column);
  });
}

double tic_error(const Polyline& pred_half, const BoundaryPoint& reference, double center_column) {
  const BoundaryPoint p = tic_point(pred_half, center_column);
  return std::hypot(p.x - reference.x, p.z - reference.z);
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ShapeError("auc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Mid-ranks over tie groups, then U = R_pos - n_pos (n_pos + 1) / 2.
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] == 1) {
        rank_sum += mid;
        ++n_pos;
      }
    i = j;
  }
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw InvariantError("auc: both classes must be present");
  const double np = static_cast<double>(n_pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

ClassificationMetrics classification_metrics(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ShapeError("classification metrics: scores and labels differ in length");
  if (scores.empty()) throw InvariantError("classification metrics: no samples");
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw InvariantError("classification metrics: labels must be 0 or 1");
    const bool p = scores[i] >= 0.5, g = labels[i] == 1;
    if (p && g) ++c.tp;
    else if (p) ++c.fp;
    else if (g) ++c.fn;
    else ++c.tn;
  }
  const auto d = [](std::uint64_t v) { return static_cast<double>(v); };
  ClassificationMetrics m;
  m.acc = d(c.tp + c.tn) / d(c.total());
  m.sen = c.tp + c.fn > 0 ? d(c.tp) / d(c.tp + c.fn) : 1.0;
  m.spe = c.tn + c.fp > 0 ? d(c.tn) / d(c.tn + c.fp) : 1.0;
  if (c.tp + c.fn > 0 && c.tn + c.fp > 0) m.auc = auc(scores, labels);
  return m;
}

void write_report(std::ostream& os, const Report& report) {
  char buf[64];
  os << "{";
  for (std::size_t i = 0; i < report.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6f", report[i].second);
    os << (i ? ",\n  \"" : "\n  \"") << report[i].first << "\": " << buf;
  }
  os << (report.empty() ? "}\n" : "\n}\n");
  if (!os) throw IoError("metric report: write failed");
}

void write_report(const std::filesystem::path& path, const Report& report) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_report(os, report);
}

}  // namespace iris3d::metrics
