#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "knotdet/ellipse.hpp"

namespace knotdet {

/// Discretized IoU between two ellipses. intersection/union are raw sample
/// counts; grid_w/grid_h are the sample-lattice dimensions.
struct IoUResult {
  double iou = 0.0;
  std::int64_t intersection_samples = 0;
  std::int64_t union_samples = 0;
  std::int64_t grid_w = 0;
  std::int64_t grid_h = 0;
};

/// IoU by counting integer-pixel lattice points over the tightest axis-aligned
/// rectangle covering both ellipses; one sample per pixel location. Rectangles
/// narrower than 4 px on either axis are supersampled at 16x density so tiny
/// ellipses do not collapse to 0/0. An empty union yields iou = 0.
/// Row loop runs under OpenMP; counts are integers, so the result is
/// bit-identical to iou_grid_serial.
IoUResult iou_grid(const Ellipse& a, const Ellipse& b);

/// Serial reference for iou_grid, kept for testing and benchmarking.
IoUResult iou_grid_serial(const Ellipse& a, const Ellipse& b);

/// High-accuracy check: same covering rectangle, samples_per_axis^2 midpoint
/// samples. Converges to the true area IoU; used to bound iou_grid's error.
/// samples_per_axis must be >= 256.
double iou_oracle(const Ellipse& a, const Ellipse& b, int samples_per_axis);

/// Serial reference for iou_oracle.
double iou_oracle_serial(const Ellipse& a, const Ellipse& b,
                         int samples_per_axis);

struct MatchPair {
  int det = -1;
  int gt = -1;
  double iou = 0.0;
};

/// One-to-one detection/ground-truth matching with both mean-IoU flavors:
/// mean_iou_matched averages matched pairs only, mean_iou_penalized divides by
/// max(|detections|, |ground truths|) counting misses as 0.
struct MatchReport {
  std::vector<MatchPair> pairs;  // sorted by descending iou
  std::vector<int> unmatched_detections;
  std::vector<int> unmatched_ground_truths;
  double mean_iou_matched = 0.0;
  double mean_iou_penalized = 0.0;
};

/// Greedy matching by descending pairwise iou_grid; pairs with IoU <= min_iou
/// stay unmatched. Ties broken by (detection index, ground-truth index) so the
/// result is deterministic. min_iou must lie in [0, 1).
MatchReport match_and_score(const std::vector<Ellipse>& detections,
                            const std::vector<Ellipse>& ground_truths,
                            double min_iou);

/// {"pairs":[{"det","gt","iou"}], "unmatched_detections":[...],
///  "unmatched_ground_truths":[...], "mean_iou_matched", "mean_iou_penalized"}
nlohmann::json to_json(const MatchReport& report);
MatchReport match_report_from_json(const nlohmann::json& j);

}  // namespace knotdet
