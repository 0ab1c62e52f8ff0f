#pragma once

#include <Eigen/Dense>

#include "knotdet/errors.hpp"

namespace knotdet {

/// 5-parameter ellipse in pixel coordinates: center (cx, cy), semi-diameters
/// rx/ry along the ellipse's own first/second axis (measured pre-rotation),
/// and counterclockwise rotation theta in radians, normalized to [-pi/2, pi/2].
/// rx is not required to be the major axis; conversions canonicalize
/// major/minor internally so the annotation-style parameterization stays lossless.
struct Ellipse {
  double cx = 0.0;
  double cy = 0.0;
  double rx = 1.0;
  double ry = 1.0;
  double theta = 0.0;
};

/// 2D Gaussian with mean in pixels and symmetric positive-definite covariance
/// in pixels^2. The ellipse it parameterizes is the unit Mahalanobis contour.
struct Gaussian2 {
  Eigen::Vector2d mu = Eigen::Vector2d::Zero();
  Eigen::Matrix2d sigma = Eigen::Matrix2d::Identity();
};

/// Axis-aligned box, inclusive extents.
struct AxisBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
};

/// Wraps an angle into [-pi/2, pi/2] with period pi. Idempotent; both
/// endpoints are fixed points (pi/2 stays pi/2, -pi/2 stays -pi/2).
double normalize_theta(double theta);

/// Throw InvalidInputError unless e satisfies the Ellipse invariants
/// (finite fields, rx > 0, ry > 0, theta within [-pi/2, pi/2]).
void validate(const Ellipse& e);

/// Throw InvalidInputError unless g.sigma is symmetric (1e-9 relative) and
/// positive definite.
void validate(const Gaussian2& g);

/// R(theta) = [[cos, sin], [-sin, cos]]; maps world coordinates into the
/// ellipse's own frame. Orthogonal for any finite theta.
Eigen::Matrix2d rotation_matrix(double theta);

/// Covariance construction: sigma = R^T(a) diag(sl^2, ss^2) R(a) where
/// (sl, ss, a) is the major/minor canonicalization of (rx, ry, theta).
Gaussian2 ellipse_to_gaussian(const Ellipse& e);

/// Inverse of ellipse_to_gaussian via the closed-form 2x2 eigendecomposition:
/// rx = sqrt(largest eigenvalue), ry = sqrt(smallest), theta = angle of the
/// major eigenvector in [-pi/2, pi/2]. Eigenvalues within 1e-9 relative are
/// treated as equal and report theta = 0.
Ellipse gaussian_to_ellipse(const Gaussian2& g);

/// Tightest axis-aligned box around the ellipse:
/// hx = sqrt(sl^2 cos^2 + ss^2 sin^2), hy = sqrt(sl^2 sin^2 + ss^2 cos^2).
AxisBox ellipse_bbox(const Ellipse& e);

/// Interior test: Mahalanobis quadratic form <= 1 (boundary counts as inside).
bool contains(const Ellipse& e, const Eigen::Vector2d& point);

/// Smallest box covering both arguments.
AxisBox merge(const AxisBox& a, const AxisBox& b);

bool intersects(const AxisBox& a, const AxisBox& b);

/// Precomputed coefficients of the Mahalanobis form
///   q(x, y) = A dx^2 + 2 B dx dy + C dy^2,  dx = x - cx, dy = y - cy,
/// so point-in-ellipse is q <= 1. Kept flat for the IoU sampling kernels.
struct EllipseQuadratic {
  double cx, cy, a, b, c;

  double eval(double x, double y) const {
    const double dx = x - cx;
    const double dy = y - cy;
    return a * dx * dx + 2.0 * b * dx * dy + c * dy * dy;
  }
};

EllipseQuadratic quadratic_of(const Ellipse& e);

}  // namespace knotdet
