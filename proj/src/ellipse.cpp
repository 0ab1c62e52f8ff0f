#include "knotdet/ellipse.hpp"

#include <algorithm>
#include <cmath>

namespace knotdet {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kHalfPi = kPi / 2.0;
// Eigenvalues closer than this (relative) are treated as equal.
constexpr double kDegenerateEigTol = 1e-9;

struct EigenPair2 {
  double lambda_max;
  double lambda_min;
  double angle;  // of the lambda_max eigenvector, in [-pi/2, pi/2]
};

// Closed-form eigendecomposition of a symmetric 2x2 matrix. Treats
// near-equal eigenvalues as degenerate and reports angle 0 for them.
EigenPair2 symmetric_eigen(const Eigen::Matrix2d& m) {
  const double a = m(0, 0);
  const double b = 0.5 * (m(0, 1) + m(1, 0));
  const double c = m(1, 1);
  const double mean = 0.5 * (a + c);
  const double half_gap = 0.5 * (a - c);
  const double r = std::hypot(half_gap, b);

  EigenPair2 out;
  out.lambda_max = mean + r;
  out.lambda_min = mean - r;
  const double scale = std::max(std::abs(out.lambda_max), std::abs(out.lambda_min));
  if (out.lambda_max - out.lambda_min <= kDegenerateEigTol * scale) {
    out.angle = 0.0;
  } else {
    out.angle = 0.5 * std::atan2(2.0 * b, a - c);
  }
  return out;
}

}  // namespace

double normalize_theta(double theta) {
  double t = std::fmod(theta, kPi);
  if (t > kHalfPi) {
    t -= kPi;
  } else if (t < -kHalfPi) {
    t += kPi;
  }
  return t;
}

void validate(const Ellipse& e) {
  if (!std::isfinite(e.cx) || !std::isfinite(e.cy) || !std::isfinite(e.rx) ||
      !std::isfinite(e.ry) || !std::isfinite(e.theta)) {
    throw InvalidInputError("ellipse has non-finite field");
  }
  if (!(e.rx > 0.0) || !(e.ry > 0.0)) {
    throw InvalidInputError("ellipse semi-diameters must be positive");
  }
  if (std::abs(e.theta) > kHalfPi + 1e-12) {
    throw InvalidInputError("ellipse theta outside [-pi/2, pi/2]");
  }
}

void validate(const Gaussian2& g) {
  if (!g.mu.allFinite() || !g.sigma.allFinite()) {
    throw InvalidInputError("gaussian has non-finite entries");
  }
  const double scale = g.sigma.cwiseAbs().maxCoeff();
  if (std::abs(g.sigma(0, 1) - g.sigma(1, 0)) > 1e-9 * std::max(scale, 1e-300)) {
    throw InvalidInputError("covariance is not symmetric");
  }
  // SPD for symmetric 2x2: positive leading entry and positive determinant.
  if (!(g.sigma(0, 0) > 0.0) || !(g.sigma.determinant() > 0.0)) {
    throw InvalidInputError("covariance is not positive definite");
  }
}

Eigen::Matrix2d rotation_matrix(double theta) {
  if (!std::isfinite(theta)) {
    throw InvalidInputError("rotation angle must be finite");
  }
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Eigen::Matrix2d r;
  r << c, s, -s, c;
  return r;
}

Gaussian2 ellipse_to_gaussian(const Ellipse& e) {
  validate(e);
  double sl = e.rx;
  double ss = e.ry;
  double angle = e.theta;
  if (e.rx < e.ry) {
    std::swap(sl, ss);
    angle = normalize_theta(angle + kHalfPi);
  }
  const Eigen::Matrix2d r = rotation_matrix(angle);
  const Eigen::Vector2d d(sl * sl, ss * ss);
  Gaussian2 g;
  g.mu << e.cx, e.cy;
  g.sigma = r.transpose() * d.asDiagonal() * r;
  // The product is symmetric up to roundoff; make it exact.
  g.sigma(0, 1) = g.sigma(1, 0) = 0.5 * (g.sigma(0, 1) + g.sigma(1, 0));
  return g;
}

Ellipse gaussian_to_ellipse(const Gaussian2& g) {
  validate(g);
  const EigenPair2 eig = symmetric_eigen(g.sigma);
  Ellipse e;
  e.cx = g.mu(0);
  e.cy = g.mu(1);
  e.rx = std::sqrt(eig.lambda_max);
  e.ry = std::sqrt(eig.lambda_min);
  e.theta = eig.angle;
  return e;
}

AxisBox ellipse_bbox(const Ellipse& e) {
  validate(e);
  const double c = std::cos(e.theta);
  const double s = std::sin(e.theta);
  // Swapping (rx, ry) with a pi/2 shift leaves these symmetric, so the
  // annotation-style parameters can be used directly.
  const double hx = std::sqrt(e.rx * e.rx * c * c + e.ry * e.ry * s * s);
  const double hy = std::sqrt(e.rx * e.rx * s * s + e.ry * e.ry * c * c);
  return AxisBox{e.cx - hx, e.cy - hy, e.cx + hx, e.cy + hy};
}

bool contains(const Ellipse& e, const Eigen::Vector2d& point) {
  validate(e);
  if (!point.allFinite()) {
    throw InvalidInputError("point has non-finite coordinates");
  }
  // Boundary points count as inside; the 1e-9 slack absorbs roundoff in the
  // quadratic so exact contour points do not flip outside.
  return quadratic_of(e).eval(point(0), point(1)) <= 1.0 + 1e-9;
}

AxisBox merge(const AxisBox& a, const AxisBox& b) {
  return AxisBox{std::min(a.x_min, b.x_min), std::min(a.y_min, b.y_min),
                 std::max(a.x_max, b.x_max), std::max(a.y_max, b.y_max)};
}

bool intersects(const AxisBox& a, const AxisBox& b) {
  return a.x_min <= b.x_max && b.x_min <= a.x_max && a.y_min <= b.y_max &&
         b.y_min <= a.y_max;
}

EllipseQuadratic quadratic_of(const Ellipse& e) {
  const double c = std::cos(e.theta);
  const double s = std::sin(e.theta);
  const double ia = 1.0 / (e.rx * e.rx);
  const double ib = 1.0 / (e.ry * e.ry);
  EllipseQuadratic q;
  q.cx = e.cx;
  q.cy = e.cy;
  q.a = c * c * ia + s * s * ib;
  q.b = c * s * (ia - ib);
  q.c = s * s * ia + c * c * ib;
  return q;
}

}  // namespace knotdet
