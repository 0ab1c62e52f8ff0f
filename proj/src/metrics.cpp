#include "knotdet/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace knotdet {

namespace {

constexpr double kConditionLimit = 1e12;
constexpr double kEigenFloor = 1e-12;
constexpr double kCircularTol = 1e-6;

void require_spd(const Eigen::Matrix2d& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidInputError(std::string(what) + ": non-finite entries");
  }
  const double scale = m.cwiseAbs().maxCoeff();
  if (std::abs(m(0, 1) - m(1, 0)) > 1e-9 * std::max(scale, 1e-300)) {
    throw InvalidInputError(std::string(what) + ": not symmetric");
  }
  if (!(m(0, 0) > 0.0) || !(m.determinant() > 0.0)) {
    throw InvalidInputError(std::string(what) + ": not positive definite");
  }
}

}  // namespace

const char* metric_kind_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::KL:
      return "kl";
    case MetricKind::W2Squared:
      return "w2_squared";
    case MetricKind::W2:
      return "w2";
  }
  return "unknown";
}

MetricValue kl_divergence(const Gaussian2& p, const Gaussian2& t) {
  validate(p);
  validate(t);

  // Work with t's eigenvalues so the near-singular guard and the clamp share
  // one decomposition.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es;
  es.computeDirect(t.sigma);
  const double lmin = es.eigenvalues()(0);
  const double lmax = es.eigenvalues()(1);
  if (!(lmin > 0.0) || lmax / lmin > kConditionLimit) {
    throw NumericalError("kl_divergence: target covariance is near-singular");
  }
  const double floor = kEigenFloor * t.sigma.trace();
  const Eigen::Vector2d lam(std::max(lmin, floor), std::max(lmax, floor));
  const Eigen::Matrix2d v = es.eigenvectors();
  const Eigen::Matrix2d t_inv =
      v * lam.cwiseInverse().asDiagonal() * v.transpose();
  const double det_t = lam(0) * lam(1);
  const double det_p = p.sigma.determinant();

  const Eigen::Vector2d d = p.mu - t.mu;
  const double trace_term = (t_inv * p.sigma).trace();
  const double maha = d.dot(t_inv * d);
  const double value =
      0.5 * (trace_term + maha + std::log(det_t / det_p) - 2.0);
  return MetricValue{value, MetricKind::KL};
}

Eigen::Matrix2d spd_sqrt(const Eigen::Matrix2d& m) {
  require_spd(m, "spd_sqrt input");
  const double sqrt_det = std::sqrt(m.determinant());
  const double denom = std::sqrt(m.trace() + 2.0 * sqrt_det);
  return (m + sqrt_det * Eigen::Matrix2d::Identity()) / denom;
}

MetricValue wasserstein2_squared(const Gaussian2& p, const Gaussian2& t) {
  validate(p);
  validate(t);

  const Eigen::Matrix2d root_p = spd_sqrt(p.sigma);
  Eigen::Matrix2d inner = root_p * t.sigma * root_p;
  // Symmetric in exact arithmetic; remove roundoff skew before the sqrt.
  inner = 0.5 * (inner + inner.transpose().eval());
  const Eigen::Matrix2d cross = spd_sqrt(inner);

  const double mean_term = (p.mu - t.mu).squaredNorm();
  const double trace_term =
      p.sigma.trace() + t.sigma.trace() - 2.0 * cross.trace();
  return MetricValue{std::max(0.0, mean_term + trace_term),
                     MetricKind::W2Squared};
}

double wasserstein2_squared_commuting(const Gaussian2& p, const Gaussian2& t) {
  validate(p);
  validate(t);
  const Eigen::Matrix2d diff = spd_sqrt(p.sigma) - spd_sqrt(t.sigma);
  return (p.mu - t.mu).squaredNorm() + diff.squaredNorm();
}

MetricValue metric_between_ellipses(const Ellipse& a, const Ellipse& b,
                                    MetricKind kind) {
  const Gaussian2 ga = ellipse_to_gaussian(a);
  const Gaussian2 gb = ellipse_to_gaussian(b);
  switch (kind) {
    case MetricKind::KL:
      return kl_divergence(ga, gb);
    case MetricKind::W2Squared:
      return wasserstein2_squared(ga, gb);
    case MetricKind::W2: {
      const MetricValue sq = wasserstein2_squared(ga, gb);
      return MetricValue{std::sqrt(sq.value), MetricKind::W2};
    }
  }
  throw InvalidInputError("unknown metric kind");
}

Gradient5 metric_gradient(const Ellipse& a, const Ellipse& b,
                          MetricKind kind) {
  validate(a);
  validate(b);

  Gradient5 grad;
  grad.degenerate_theta =
      std::abs(a.rx - a.ry) < kCircularTol * std::max(a.rx, a.ry);

  const auto eval = [&](const Ellipse& e) {
    return metric_between_ellipses(e, b, kind).value;
  };
  const auto field = [](Ellipse& e, int i) -> double& {
    double* fields[5] = {&e.cx, &e.cy, &e.rx, &e.ry, &e.theta};
    return *fields[i];
  };

  for (int i = 0; i < 5; ++i) {
    if (i == 4 && grad.degenerate_theta) {
      grad.d[4] = 0.0;
      continue;
    }
    Ellipse lo = a;
    Ellipse hi = a;
    const double param = field(hi, i);
    const double h = 1e-5 * std::max(std::abs(param), 1.0);
    field(hi, i) = param + h;
    field(lo, i) = param - h;
    if (i == 4) {
      // The metric is pi-periodic in theta, so rewrapping keeps the
      // difference quotient valid at the interval ends.
      hi.theta = normalize_theta(hi.theta);
      lo.theta = normalize_theta(lo.theta);
    }
    grad.d[i] = (eval(hi) - eval(lo)) / (2.0 * h);
    if (!std::isfinite(grad.d[i])) {
      throw NumericalError("metric_gradient: non-finite difference quotient");
    }
  }
  return grad;
}

}  // namespace knotdet
