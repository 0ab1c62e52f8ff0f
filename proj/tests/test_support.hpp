#pragma once

// Shared generators, synthetic fixtures, and independent oracles for the test
// and acceptance suites. Everything here is test-only and must stay
// independent of the implementation paths it checks.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "knotdet/align.hpp"
#include "knotdet/ellipse.hpp"
#include "knotdet/image.hpp"

namespace knotdet::testing {

constexpr double kPi = 3.14159265358979323846;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Ellipse random_ellipse(std::mt19937_64& rng, double center_lo = -100.0,
                              double center_hi = 100.0, double radius_lo = 0.5,
                              double radius_hi = 50.0) {
  Ellipse e;
  e.cx = uniform(rng, center_lo, center_hi);
  e.cy = uniform(rng, center_lo, center_hi);
  e.rx = uniform(rng, radius_lo, radius_hi);
  e.ry = uniform(rng, radius_lo, radius_hi);
  e.theta = uniform(rng, -kPi / 2.0, kPi / 2.0);
  return e;
}

/// SPD matrix with eigenvalues in [lambda_lo, lambda_hi] and condition number
/// at most max_cond, built from an explicit rotation so tests control the
/// eigenbasis independently of the code under test.
inline Eigen::Matrix2d random_spd(std::mt19937_64& rng, double lambda_lo,
                                  double lambda_hi, double max_cond) {
  const double l1 = uniform(rng, lambda_lo, lambda_hi);
  const double l2 = l1 / uniform(rng, 1.0, max_cond);
  const double angle = uniform(rng, -kPi / 2.0, kPi / 2.0);
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Eigen::Matrix2d r;
  r << c, s, -s, c;
  Eigen::Matrix2d m =
      r.transpose() * Eigen::Vector2d(l1, l2).asDiagonal() * r;
  m(0, 1) = m(1, 0) = 0.5 * (m(0, 1) + m(1, 0));
  return m;
}

inline Gaussian2 random_gaussian(std::mt19937_64& rng,
                                 double center_span = 100.0,
                                 double lambda_lo = 0.25,
                                 double lambda_hi = 2500.0,
                                 double max_cond = 100.0) {
  Gaussian2 g;
  g.mu << uniform(rng, -center_span, center_span),
      uniform(rng, -center_span, center_span);
  g.sigma = random_spd(rng, lambda_lo, lambda_hi, max_cond);
  return g;
}

/// Eigendecomposition route to the SPD square root; the independent oracle
/// for the closed-form implementation.
inline Eigen::Matrix2d spd_sqrt_eigen_oracle(const Eigen::Matrix2d& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es;
  es.computeDirect(m);
  return es.eigenvectors() *
         es.eigenvalues().cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

/// Area IoU of two equal circles of radius r at center distance d, from the
/// lens (circular segment) formula.
inline double circle_lens_iou(double r, double d) {
  if (d >= 2.0 * r) return 0.0;
  const double inter = 2.0 * r * r * std::acos(d / (2.0 * r)) -
                       (d / 2.0) * std::sqrt(4.0 * r * r - d * d);
  const double uni = 2.0 * kPi * r * r - inter;
  return inter / uni;
}

/// Equality modulo the documented theta equivalence class: axis swap with
/// theta +- pi/2, theta sign at |theta| = pi/2, arbitrary theta for rx = ry.
inline bool ellipses_equivalent(const Ellipse& a, const Ellipse& b,
                                double tol) {
  const auto canonical = [](const Ellipse& e) {
    struct {
      double sl, ss, angle;
    } c{};
    if (e.rx >= e.ry) {
      c.sl = e.rx;
      c.ss = e.ry;
      c.angle = e.theta;
    } else {
      c.sl = e.ry;
      c.ss = e.rx;
      c.angle = normalize_theta(e.theta + kPi / 2.0);
    }
    return c;
  };
  const auto ca = canonical(a);
  const auto cb = canonical(b);
  if (std::abs(a.cx - b.cx) > tol || std::abs(a.cy - b.cy) > tol) return false;
  if (std::abs(ca.sl - cb.sl) > tol || std::abs(ca.ss - cb.ss) > tol) {
    return false;
  }
  if (ca.sl - ca.ss <= tol * ca.sl) return true;  // circular: any theta
  if (std::abs(ca.angle - cb.angle) <= tol) return true;
  // Sign flip at the +-pi/2 boundary.
  return std::abs(std::abs(ca.angle) - kPi / 2.0) <= tol &&
         std::abs(std::abs(cb.angle) - kPi / 2.0) <= tol;
}

// --- synthetic scan boards ---------------------------------------------------

struct SyntheticBoard {
  GrayImage original;        // aligned content
  GrayImage jittered;        // per-column displacement applied
  std::vector<int> jitter;   // downward displacement per column; jitter[0] = 0
};

/// Board with a bright horizontal band on black background, each column
/// displaced by a random amount within +-amplitude (first column fixed at 0).
/// The band keeps margins wider than the displacement on both sides, so the
/// displacement is exactly invertible.
inline SyntheticBoard make_band_board(int width, int height, int amplitude,
                                      std::uint64_t seed,
                                      std::uint8_t band_value = 200) {
  SyntheticBoard board;
  board.original = GrayImage::filled(width, height, 0);
  const int band_top = amplitude + 6;
  const int band_bottom = height - amplitude - 6;
  for (int y = band_top; y < band_bottom; ++y) {
    for (int x = 0; x < width; ++x) {
      board.original.at(x, y) = band_value;
    }
  }

  std::mt19937_64 rng(seed);
  board.jitter.assign(width, 0);
  for (int x = 1; x < width; ++x) {
    board.jitter[x] = uniform_int(rng, -amplitude, amplitude);
  }
  ShiftProfile displacement;
  displacement.shifts = board.jitter;
  board.jittered = apply_shifts(board.original, displacement, std::uint8_t{0});
  return board;
}

/// Band board with a dark notch eating into the band's top edge over a column
/// range, mimicking an edge-touching defect whose color matches the
/// background. The notch intensity stays below typical thresholds, so the
/// first-bright-pixel baseline mislocates the edge there.
inline SyntheticBoard make_edge_defect_board(int width, int height,
                                             int amplitude, std::uint64_t seed,
                                             int defect_start, int defect_end,
                                             int defect_depth,
                                             std::uint8_t defect_value = 10) {
  SyntheticBoard board = make_band_board(width, height, amplitude, seed);
  const int band_top = amplitude + 6;
  for (int x = defect_start; x < defect_end && x < width; ++x) {
    for (int y = band_top; y < band_top + defect_depth && y < height; ++y) {
      board.original.at(x, y) = defect_value;
    }
  }
  ShiftProfile displacement;
  displacement.shifts = board.jitter;
  board.jittered = apply_shifts(board.original, displacement, std::uint8_t{0});
  return board;
}

}  // namespace knotdet::testing
