#include "knotdet/fit.hpp"

#include <algorithm>
#include <cmath>

namespace knotdet {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLossCeiling = 1e12;
constexpr double kMinStep = 1e-12;

// Difference wrapped into [-pi/2, pi/2): theta and theta + pi describe the
// same ellipse axis, so the loss must not see the pi jump.
double wrap_theta_diff(double d) {
  double t = std::fmod(d + kPi / 2.0, kPi);
  if (t < 0.0) t += kPi;
  return t - kPi / 2.0;
}

double& param(Ellipse& e, int i) {
  double* fields[5] = {&e.cx, &e.cy, &e.rx, &e.ry, &e.theta};
  return *fields[i];
}

bool usable(const Ellipse& e) {
  return std::isfinite(e.cx) && std::isfinite(e.cy) && e.rx > 0.0 &&
         e.ry > 0.0 && std::isfinite(e.rx) && std::isfinite(e.ry) &&
         std::isfinite(e.theta);
}

// Central finite differences for the L2 parameter loss; the metric losses go
// through metric_gradient so their degeneracy handling stays in one place.
Gradient5 l2_gradient(const Ellipse& a, const Ellipse& b) {
  Gradient5 g;
  for (int i = 0; i < 5; ++i) {
    Ellipse lo = a;
    Ellipse hi = a;
    const double v = param(hi, i);
    const double h = 1e-5 * std::max(std::abs(v), 1.0);
    param(hi, i) = v + h;
    param(lo, i) = v - h;
    if (i == 4) {
      hi.theta = normalize_theta(hi.theta);
      lo.theta = normalize_theta(lo.theta);
    }
    g.d[i] = (l2_param_loss(hi, b) - l2_param_loss(lo, b)) / (2.0 * h);
  }
  return g;
}

}  // namespace

const char* fit_metric_name(FitMetric m) {
  switch (m) {
    case FitMetric::KL:
      return "kl";
    case FitMetric::W2Squared:
      return "w2_squared";
    case FitMetric::L2Params:
      return "l2_params";
  }
  return "unknown";
}

void validate(const FitConfig& cfg) {
  if (!(cfg.step_size > 0.0)) {
    throw InvalidInputError("fit step_size must be positive");
  }
  if (cfg.max_iters < 1) {
    throw InvalidInputError("fit max_iters must be >= 1");
  }
  if (!(cfg.grad_tolerance > 0.0)) {
    throw InvalidInputError("fit grad_tolerance must be positive");
  }
}

void validate(const LossWeights& w) {
  if (!std::isfinite(w.w_proposal) || !std::isfinite(w.w_regression) ||
      !std::isfinite(w.w_classification)) {
    throw InvalidInputError("loss weights must be finite");
  }
  if (w.w_proposal < 0.0 || w.w_regression < 0.0 || w.w_classification < 0.0) {
    throw InvalidInputError("loss weights must be nonnegative");
  }
  if (w.w_proposal == 0.0 && w.w_regression == 0.0 &&
      w.w_classification == 0.0) {
    throw InvalidInputError("loss weights must not all be zero");
  }
}

double l2_param_loss(const Ellipse& a, const Ellipse& b) {
  validate(a);
  validate(b);
  const double dcx = a.cx - b.cx;
  const double dcy = a.cy - b.cy;
  const double drx = a.rx - b.rx;
  const double dry = a.ry - b.ry;
  const double dth = wrap_theta_diff(a.theta - b.theta);
  return dcx * dcx + dcy * dcy + drx * drx + dry * dry + dth * dth;
}

FitTrace fit_ellipse(const Ellipse& init, const Ellipse& target,
                     const FitConfig& cfg) {
  validate(init);
  validate(target);
  validate(cfg);

  const auto loss = [&](const Ellipse& e) -> double {
    switch (cfg.metric) {
      case FitMetric::KL:
        return metric_between_ellipses(e, target, MetricKind::KL).value;
      case FitMetric::W2Squared:
        return metric_between_ellipses(e, target, MetricKind::W2Squared).value;
      case FitMetric::L2Params:
        return l2_param_loss(e, target);
    }
    throw InvalidInputError("unknown fit metric");
  };
  const auto gradient = [&](const Ellipse& e) -> Gradient5 {
    switch (cfg.metric) {
      case FitMetric::KL:
        return metric_gradient(e, target, MetricKind::KL);
      case FitMetric::W2Squared:
        return metric_gradient(e, target, MetricKind::W2Squared);
      default:
        return l2_gradient(e, target);
    }
  };

  FitTrace trace;
  Ellipse cur = init;
  cur.theta = normalize_theta(cur.theta);
  double cur_loss = loss(cur);
  trace.loss_history.push_back(cur_loss);
  if (!std::isfinite(cur_loss) || cur_loss > kLossCeiling) {
    throw DivergenceError(fit_metric_name(cfg.metric), 0);
  }

  int iter = 0;
  while (iter < cfg.max_iters) {
    const Gradient5 g = gradient(cur);
    double g_inf = 0.0;
    for (const double v : g.d) g_inf = std::max(g_inf, std::abs(v));
    if (g_inf < cfg.grad_tolerance) break;

    bool accepted = false;
    for (double step = cfg.step_size; step >= kMinStep; step *= 0.5) {
      Ellipse cand = cur;
      for (int i = 0; i < 5; ++i) param(cand, i) -= step * g.d[i];
      cand.theta = normalize_theta(cand.theta);
      if (!usable(cand)) continue;
      const double cand_loss = loss(cand);
      if (cand_loss < cur_loss) {
        cur = cand;
        cur_loss = cand_loss;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;

    ++iter;
    trace.loss_history.push_back(cur_loss);
    if (!std::isfinite(cur_loss) || cur_loss > kLossCeiling) {
      throw DivergenceError(fit_metric_name(cfg.metric), iter);
    }
  }

  trace.iterations = iter;
  trace.final_params = cur;
  trace.final_loss = cur_loss;
  return trace;
}

double composite_loss(const Ellipse& proposal, const Ellipse& refined,
                      const Ellipse& target, double class_prob, bool is_object,
                      const LossWeights& w) {
  validate(w);
  const double q = std::clamp(class_prob, 1e-12, 1.0 - 1e-12);
  const double ce = is_object ? -std::log(q) : -std::log1p(-q);
  const double proposal_term =
      metric_between_ellipses(proposal, target, MetricKind::KL).value;
  const double regression_term =
      metric_between_ellipses(refined, target, MetricKind::W2Squared).value;
  return w.w_proposal * proposal_term + w.w_regression * regression_term +
         w.w_classification * ce;
}

}  // namespace knotdet
