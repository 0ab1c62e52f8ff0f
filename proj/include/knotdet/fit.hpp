#pragma once

#include <vector>

#include "knotdet/ellipse.hpp"
#include "knotdet/metrics.hpp"

namespace knotdet {

enum class FitMetric { KL, W2Squared, L2Params };

const char* fit_metric_name(FitMetric m);

struct FitConfig {
  FitMetric metric = FitMetric::W2Squared;
  double step_size = 0.25;
  int max_iters = 5000;
  double grad_tolerance = 1e-6;
};

struct LossWeights {
  double w_proposal = 1.0;
  double w_regression = 1.0;
  double w_classification = 1.0;
};

/// Record of one descent run. loss_history starts at the initial loss and is
/// weakly decreasing (every accepted line-search step strictly decreases it).
struct FitTrace {
  int iterations = 0;
  Ellipse final_params;
  double final_loss = 0.0;
  std::vector<double> loss_history;
};

void validate(const FitConfig& cfg);
void validate(const LossWeights& w);

/// Sum of squared parameter differences with the theta difference wrapped into
/// [-pi/2, pi/2) before squaring (an ellipse is invariant under theta + pi).
double l2_param_loss(const Ellipse& a, const Ellipse& b);

/// Gradient descent with backtracking line search (step halves until the loss
/// decreases, floored at 1e-12) on the configured metric. Stops when the
/// gradient's infinity norm drops below grad_tolerance, the line search stalls,
/// or max_iters is reached. theta is optimized unconstrained and rewrapped
/// each step; absolute parameters are fitted (no anchor-frame normalization).
/// Throws DivergenceError if the loss exceeds 1e12.
FitTrace fit_ellipse(const Ellipse& init, const Ellipse& target,
                     const FitConfig& cfg);

/// Three-part detection loss:
///   w_proposal * KL(proposal -> target) + w_regression * W2^2(refined, target)
///   + w_classification * cross-entropy(class_prob, is_object),
/// with class_prob silently clamped to [1e-12, 1 - 1e-12].
double composite_loss(const Ellipse& proposal, const Ellipse& refined,
                      const Ellipse& target, double class_prob, bool is_object,
                      const LossWeights& w);

}  // namespace knotdet
