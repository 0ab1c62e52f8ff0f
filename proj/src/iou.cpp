#include "knotdet/iou.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

namespace knotdet {

namespace {

// Sample lattice over a covering rectangle: points x0 + i*step, y0 + j*step.
struct SampleLattice {
  double x0 = 0.0;
  double y0 = 0.0;
  double step = 1.0;
  std::int64_t nx = 0;
  std::int64_t ny = 0;
};

// Integer-pixel lattice per the grid method; 16x density under 4 px so the
// rectangle always holds enough samples to count.
SampleLattice grid_lattice(const AxisBox& rect) {
  SampleLattice g;
  if (rect.width() < 4.0 || rect.height() < 4.0) {
    g.step = 1.0 / 16.0;
  }
  const double inv = 1.0 / g.step;
  const double fx = std::ceil(rect.x_min * inv);
  const double fy = std::ceil(rect.y_min * inv);
  g.x0 = fx * g.step;
  g.y0 = fy * g.step;
  g.nx = static_cast<std::int64_t>(std::floor(rect.x_max * inv) - fx) + 1;
  g.ny = static_cast<std::int64_t>(std::floor(rect.y_max * inv) - fy) + 1;
  g.nx = std::max<std::int64_t>(g.nx, 0);
  g.ny = std::max<std::int64_t>(g.ny, 0);
  return g;
}

struct Counts {
  std::int64_t both = 0;
  std::int64_t either = 0;
};

Counts count_rows_serial(const EllipseQuadratic& qa, const EllipseQuadratic& qb,
                         double x0, double dx, std::int64_t nx, double y0,
                         double dy, std::int64_t ny) {
  Counts c;
  for (std::int64_t iy = 0; iy < ny; ++iy) {
    const double y = y0 + static_cast<double>(iy) * dy;
    std::int64_t row_both = 0;
    std::int64_t row_either = 0;
    for (std::int64_t ix = 0; ix < nx; ++ix) {
      const double x = x0 + static_cast<double>(ix) * dx;
      const bool in_a = qa.eval(x, y) <= 1.0;
      const bool in_b = qb.eval(x, y) <= 1.0;
      row_both += (in_a && in_b) ? 1 : 0;
      row_either += (in_a || in_b) ? 1 : 0;
    }
    c.both += row_both;
    c.either += row_either;
  }
  return c;
}

Counts count_rows_parallel(const EllipseQuadratic& qa,
                           const EllipseQuadratic& qb, double x0, double dx,
                           std::int64_t nx, double y0, double dy,
                           std::int64_t ny) {
  std::int64_t both = 0;
  std::int64_t either = 0;
#pragma omp parallel for schedule(static) reduction(+ : both, either)
  for (std::int64_t iy = 0; iy < ny; ++iy) {
    const double y = y0 + static_cast<double>(iy) * dy;
    std::int64_t row_both = 0;
    std::int64_t row_either = 0;
    for (std::int64_t ix = 0; ix < nx; ++ix) {
      const double x = x0 + static_cast<double>(ix) * dx;
      const bool in_a = qa.eval(x, y) <= 1.0;
      const bool in_b = qb.eval(x, y) <= 1.0;
      row_both += (in_a && in_b) ? 1 : 0;
      row_either += (in_a || in_b) ? 1 : 0;
    }
    both += row_both;
    either += row_either;
  }
  return Counts{both, either};
}

IoUResult grid_result(const Ellipse& a, const Ellipse& b, bool parallel) {
  validate(a);
  validate(b);
  const AxisBox rect = merge(ellipse_bbox(a), ellipse_bbox(b));
  const SampleLattice g = grid_lattice(rect);
  const EllipseQuadratic qa = quadratic_of(a);
  const EllipseQuadratic qb = quadratic_of(b);

  const Counts c = parallel
                       ? count_rows_parallel(qa, qb, g.x0, g.step, g.nx, g.y0,
                                             g.step, g.ny)
                       : count_rows_serial(qa, qb, g.x0, g.step, g.nx, g.y0,
                                           g.step, g.ny);

  IoUResult r;
  r.intersection_samples = c.both;
  r.union_samples = c.either;
  r.grid_w = g.nx;
  r.grid_h = g.ny;
  r.iou = c.either == 0 ? 0.0
                        : static_cast<double>(c.both) /
                              static_cast<double>(c.either);
  return r;
}

double oracle_result(const Ellipse& a, const Ellipse& b, int samples_per_axis,
                     bool parallel) {
  validate(a);
  validate(b);
  if (samples_per_axis < 256) {
    throw InvalidInputError("iou_oracle requires samples_per_axis >= 256");
  }
  const AxisBox rect = merge(ellipse_bbox(a), ellipse_bbox(b));
  const double dx = rect.width() / samples_per_axis;
  const double dy = rect.height() / samples_per_axis;
  const double x0 = rect.x_min + 0.5 * dx;
  const double y0 = rect.y_min + 0.5 * dy;
  const EllipseQuadratic qa = quadratic_of(a);
  const EllipseQuadratic qb = quadratic_of(b);

  const Counts c =
      parallel ? count_rows_parallel(qa, qb, x0, dx, samples_per_axis, y0, dy,
                                     samples_per_axis)
               : count_rows_serial(qa, qb, x0, dx, samples_per_axis, y0, dy,
                                   samples_per_axis);
  return c.either == 0
             ? 0.0
             : static_cast<double>(c.both) / static_cast<double>(c.either);
}

}  // namespace

IoUResult iou_grid(const Ellipse& a, const Ellipse& b) {
  return grid_result(a, b, /*parallel=*/true);
}

IoUResult iou_grid_serial(const Ellipse& a, const Ellipse& b) {
  return grid_result(a, b, /*parallel=*/false);
}

double iou_oracle(const Ellipse& a, const Ellipse& b, int samples_per_axis) {
  return oracle_result(a, b, samples_per_axis, /*parallel=*/true);
}

double iou_oracle_serial(const Ellipse& a, const Ellipse& b,
                         int samples_per_axis) {
  return oracle_result(a, b, samples_per_axis, /*parallel=*/false);
}

MatchReport match_and_score(const std::vector<Ellipse>& detections,
                            const std::vector<Ellipse>& ground_truths,
                            double min_iou) {
  if (!(min_iou >= 0.0 && min_iou < 1.0)) {
    throw InvalidInputError("min_iou must lie in [0, 1)");
  }

  struct Candidate {
    double iou;
    int det;
    int gt;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(detections.size() * ground_truths.size());
  for (int d = 0; d < static_cast<int>(detections.size()); ++d) {
    for (int g = 0; g < static_cast<int>(ground_truths.size()); ++g) {
      const double iou = iou_grid(detections[d], ground_truths[g]).iou;
      if (iou > min_iou) {
        candidates.push_back(Candidate{iou, d, g});
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.iou != b.iou) return a.iou > b.iou;
              if (a.det != b.det) return a.det < b.det;
              return a.gt < b.gt;
            });

  MatchReport report;
  std::vector<bool> det_used(detections.size(), false);
  std::vector<bool> gt_used(ground_truths.size(), false);
  for (const Candidate& c : candidates) {
    if (det_used[c.det] || gt_used[c.gt]) continue;
    det_used[c.det] = true;
    gt_used[c.gt] = true;
    report.pairs.push_back(MatchPair{c.det, c.gt, c.iou});
  }
  for (int d = 0; d < static_cast<int>(detections.size()); ++d) {
    if (!det_used[d]) report.unmatched_detections.push_back(d);
  }
  for (int g = 0; g < static_cast<int>(ground_truths.size()); ++g) {
    if (!gt_used[g]) report.unmatched_ground_truths.push_back(g);
  }

  const double matched_sum =
      std::accumulate(report.pairs.begin(), report.pairs.end(), 0.0,
                      [](double acc, const MatchPair& p) { return acc + p.iou; });
  const std::size_t denom =
      std::max(detections.size(), ground_truths.size());
  report.mean_iou_matched =
      report.pairs.empty() ? 0.0 : matched_sum / report.pairs.size();
  report.mean_iou_penalized =
      denom == 0 ? 0.0 : matched_sum / static_cast<double>(denom);
  return report;
}

nlohmann::json to_json(const MatchReport& report) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const MatchPair& p : report.pairs) {
    pairs.push_back({{"det", p.det}, {"gt", p.gt}, {"iou", p.iou}});
  }
  return nlohmann::json{
      {"pairs", std::move(pairs)},
      {"unmatched_detections", report.unmatched_detections},
      {"unmatched_ground_truths", report.unmatched_ground_truths},
      {"mean_iou_matched", report.mean_iou_matched},
      {"mean_iou_penalized", report.mean_iou_penalized}};
}

MatchReport match_report_from_json(const nlohmann::json& j) {
  MatchReport report;
  for (const nlohmann::json& p : j.at("pairs")) {
    report.pairs.push_back(MatchPair{p.at("det").get<int>(),
                                     p.at("gt").get<int>(),
                                     p.at("iou").get<double>()});
  }
  report.unmatched_detections =
      j.at("unmatched_detections").get<std::vector<int>>();
  report.unmatched_ground_truths =
      j.at("unmatched_ground_truths").get<std::vector<int>>();
  report.mean_iou_matched = j.at("mean_iou_matched").get<double>();
  report.mean_iou_penalized = j.at("mean_iou_penalized").get<double>();
  return report;
}

}  // namespace knotdet
