#pragma once

#include <array>

#include <Eigen/Dense>

#include "knotdet/ellipse.hpp"

namespace knotdet {

enum class MetricKind { KL, W2Squared, W2 };

const char* metric_kind_name(MetricKind kind);

struct MetricValue {
  double value = 0.0;
  MetricKind kind = MetricKind::KL;
};

/// Gradient of a metric with respect to an ellipse's (cx, cy, rx, ry, theta).
/// degenerate_theta marks near-circular ellipses, whose theta direction is
/// meaningless; the theta entry is forced to 0 in that case.
struct Gradient5 {
  std::array<double, 5> d{};
  bool degenerate_theta = false;
};

/// D_KL(p || t) = 1/2 [ tr(St^-1 Sp) + (mp-mt)^T St^-1 (mp-mt)
///                      + log(|St|/|Sp|) - 2 ].
/// Throws NumericalError when t's covariance has condition number > 1e12;
/// eigenvalues of St are clamped to >= 1e-12 * tr(St) before inversion.
MetricValue kl_divergence(const Gaussian2& p, const Gaussian2& t);

/// Principal square root of a 2x2 SPD matrix via the closed form
///   S = (m + sqrt(det m) I) / sqrt(tr m + 2 sqrt(det m)).
/// S is SPD and S*S = m.
Eigen::Matrix2d spd_sqrt(const Eigen::Matrix2d& m);

/// Squared 2-Wasserstein distance between Gaussians:
///   ||mp - mt||^2 + tr[ Sp + St - 2 (Sp^1/2 St Sp^1/2)^1/2 ].
/// Symmetric in its arguments; never negative.
MetricValue wasserstein2_squared(const Gaussian2& p, const Gaussian2& t);

/// Simplified form valid when the covariances commute:
///   ||mp - mt||^2 + ||Sp^1/2 - St^1/2||_F^2.
/// Equals wasserstein2_squared whenever Sp St = St Sp.
double wasserstein2_squared_commuting(const Gaussian2& p, const Gaussian2& t);

/// Converts both ellipses to Gaussians and dispatches on kind
/// (W2 is the square root of W2Squared).
MetricValue metric_between_ellipses(const Ellipse& a, const Ellipse& b,
                                    MetricKind kind);

/// Central finite differences of metric_between_ellipses with respect to a's
/// five parameters; step h = 1e-5 * max(|param|, 1) per parameter. Ellipses
/// with |rx - ry| < 1e-6 * max(rx, ry) get a zero theta entry and the
/// degenerate flag instead of an unstable difference quotient.
Gradient5 metric_gradient(const Ellipse& a, const Ellipse& b, MetricKind kind);

}  // namespace knotdet
