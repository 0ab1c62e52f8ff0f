#include "knotdet/fit.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "knotdet/iou.hpp"
#include "test_support.hpp"

using namespace knotdet;
using namespace knotdet::testing;

namespace {

const Ellipse kTarget{100, 100, 30, 15, 0.4};
const Ellipse kPerturbedInit{110, 110, 45, 22.5, normalize_theta(0.7)};

FitConfig config(FitMetric metric, double step) {
  FitConfig cfg;
  cfg.metric = metric;
  cfg.step_size = step;
  cfg.max_iters = 5000;
  cfg.grad_tolerance = 1e-6;
  return cfg;
}

struct BasinStats {
  int converged = 0;
  int diverged = 0;
};

BasinStats run_basin(FitMetric metric, double step, int pairs,
                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  BasinStats stats;
  for (int i = 0; i < pairs; ++i) {
    Ellipse target;
    target.cx = uniform(rng, 100, 400);
    target.cy = uniform(rng, 100, 400);
    target.rx = uniform(rng, 15, 60);
    target.ry = uniform(rng, 10, std::max(10.5, target.rx - 2.0));
    target.theta = uniform(rng, -1.2, 1.2);
    Ellipse init = target;
    init.cx += uniform(rng, -10, 10);
    init.cy += uniform(rng, -10, 10);
    init.rx *= uniform(rng, 0.67, 1.5);
    init.ry *= uniform(rng, 0.67, 1.5);
    init.theta = normalize_theta(init.theta + uniform(rng, -0.3, 0.3));
    try {
      const FitTrace t = fit_ellipse(init, target, config(metric, step));
      if (iou_grid(t.final_params, target).iou > 0.99) ++stats.converged;
    } catch (const DivergenceError&) {
      ++stats.diverged;
    }
  }
  return stats;
}

}  // namespace

TEST(L2ParamLoss, ZeroForEqual) {
  const Ellipse e{10, 20, 5, 3, 0.7};
  EXPECT_DOUBLE_EQ(l2_param_loss(e, e), 0.0);
}

TEST(L2ParamLoss, SingleCoordinateDifference) {
  EXPECT_DOUBLE_EQ(
      l2_param_loss(Ellipse{1, 0, 1, 1, 0}, Ellipse{0, 0, 1, 1, 0}), 1.0);
}

TEST(L2ParamLoss, ThetaWrapsAcrossTheBoundary) {
  const Ellipse a{0, 0, 2, 1, kPi / 2 - 0.01};
  const Ellipse b{0, 0, 2, 1, -kPi / 2 + 0.01};
  // The two angles are 0.02 apart through the boundary, not pi - 0.02.
  EXPECT_NEAR(l2_param_loss(a, b), 0.02 * 0.02, 1e-12);
}

TEST(FitEllipse, InitAtTargetStops) {
  const FitTrace t =
      fit_ellipse(kTarget, kTarget, config(FitMetric::W2Squared, 0.25));
  EXPECT_EQ(t.iterations, 0);
  EXPECT_NEAR(t.final_loss, 0.0, 1e-9);
  ASSERT_EQ(t.loss_history.size(), 1u);
}

TEST(FitEllipse, W2ConvergesOnWorkedExample) {
  const FitTrace t =
      fit_ellipse(kPerturbedInit, kTarget, config(FitMetric::W2Squared, 0.25));
  EXPECT_LE(t.iterations, 5000);
  EXPECT_GT(iou_grid(t.final_params, kTarget).iou, 0.99);
  EXPECT_LT(t.final_loss, 1e-4);  // metric-minimum consistency
}

TEST(FitEllipse, KlConvergesOnWorkedExample) {
  const FitTrace t =
      fit_ellipse(kPerturbedInit, kTarget, config(FitMetric::KL, 16.0));
  EXPECT_LE(t.iterations, 5000);
  EXPECT_GT(iou_grid(t.final_params, kTarget).iou, 0.99);
  EXPECT_LT(t.final_loss, 1e-4);
}

TEST(FitEllipse, L2ParamsConverges) {
  const FitTrace t =
      fit_ellipse(kPerturbedInit, kTarget, config(FitMetric::L2Params, 0.25));
  EXPECT_NEAR(t.final_params.cx, kTarget.cx, 1e-3);
  EXPECT_NEAR(t.final_params.ry, kTarget.ry, 1e-3);
  EXPECT_NEAR(t.final_params.theta, kTarget.theta, 1e-3);
}

TEST(FitEllipse, LossHistoryWeaklyDecreasing) {
  const FitTrace t =
      fit_ellipse(kPerturbedInit, kTarget, config(FitMetric::W2Squared, 1.0));
  ASSERT_GE(t.loss_history.size(), 2u);
  for (std::size_t i = 1; i < t.loss_history.size(); ++i) {
    EXPECT_LE(t.loss_history[i], t.loss_history[i - 1]);
  }
  EXPECT_EQ(static_cast<int>(t.loss_history.size()) - 1, t.iterations);
  EXPECT_DOUBLE_EQ(t.loss_history.back(), t.final_loss);
}

TEST(FitEllipse, DivergenceErrorNamesMetricAndIteration) {
  // A target with micron-scale covariance makes the initial KL astronomical.
  const Ellipse far_init{10000, 0, 1, 2, 0};
  const Ellipse tiny_target{0, 0, 1e-3, 2e-3, 0};
  try {
    fit_ellipse(far_init, tiny_target, config(FitMetric::KL, 0.25));
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.metric(), "kl");
    EXPECT_EQ(e.iteration(), 0);
    EXPECT_NE(std::string(e.what()).find("kl"), std::string::npos);
  }
}

TEST(FitEllipse, ValidatesConfig) {
  FitConfig bad = config(FitMetric::W2Squared, 0.0);
  EXPECT_THROW(fit_ellipse(kPerturbedInit, kTarget, bad), InvalidInputError);
  bad = config(FitMetric::W2Squared, 0.25);
  bad.max_iters = 0;
  EXPECT_THROW(fit_ellipse(kPerturbedInit, kTarget, bad), InvalidInputError);
  bad = config(FitMetric::W2Squared, 0.25);
  bad.grad_tolerance = 0.0;
  EXPECT_THROW(fit_ellipse(kPerturbedInit, kTarget, bad), InvalidInputError);
}

TEST(FitEllipse, BasinComparisonW2NeverDivergesMoreThanKl) {
  const BasinStats w2 = run_basin(FitMetric::W2Squared, 0.25, 20, 404);
  const BasinStats kl = run_basin(FitMetric::KL, 256.0, 20, 404);
  EXPECT_LE(w2.diverged, kl.diverged);
  EXPECT_GE(w2.converged, 19);  // the W2 objective is the dependable one
}

TEST(CompositeLoss, NearZeroAtPerfectPrediction) {
  const double loss = composite_loss(kTarget, kTarget, kTarget, 1.0 - 1e-12,
                                     true, LossWeights{});
  EXPECT_NEAR(loss, 0.0, 1e-9);
}

TEST(CompositeLoss, CrossEntropyAtHalf) {
  const double loss =
      composite_loss(kTarget, kTarget, kTarget, 0.5, true, LossWeights{});
  EXPECT_NEAR(loss, std::log(2.0), 1e-9);
  const double negative =
      composite_loss(kTarget, kTarget, kTarget, 0.5, false, LossWeights{});
  EXPECT_NEAR(negative, std::log(2.0), 1e-9);
}

TEST(CompositeLoss, LinearInEachWeight) {
  const Ellipse proposal{95, 102, 28, 17, 0.3};
  const Ellipse refined{99, 100, 29, 15.5, 0.38};
  std::mt19937_64 rng(61);
  for (int i = 0; i < 50; ++i) {
    LossWeights w{uniform(rng, 0.1, 3.0), uniform(rng, 0.1, 3.0),
                  uniform(rng, 0.1, 3.0)};
    const double base =
        composite_loss(proposal, refined, kTarget, 0.8, true, w);
    LossWeights doubled{2 * w.w_proposal, 2 * w.w_regression,
                        2 * w.w_classification};
    EXPECT_NEAR(composite_loss(proposal, refined, kTarget, 0.8, true, doubled),
                2.0 * base, 1e-9 * std::max(1.0, base));

    // Linearity in one weight holding the others fixed.
    LossWeights bumped = w;
    bumped.w_regression += 1.0;
    const double with_unit_regression =
        composite_loss(proposal, refined, kTarget, 0.8, true,
                       LossWeights{0.0, 1.0, 0.0});
    EXPECT_NEAR(composite_loss(proposal, refined, kTarget, 0.8, true, bumped),
                base + with_unit_regression, 1e-9 * std::max(1.0, base));
  }
}

TEST(CompositeLoss, ClampsProbabilitySilently) {
  EXPECT_TRUE(std::isfinite(
      composite_loss(kTarget, kTarget, kTarget, 0.0, true, LossWeights{})));
  EXPECT_TRUE(std::isfinite(
      composite_loss(kTarget, kTarget, kTarget, 1.0, false, LossWeights{})));
}

TEST(CompositeLoss, RejectsBadWeights) {
  EXPECT_THROW(composite_loss(kTarget, kTarget, kTarget, 0.5, true,
                              LossWeights{-1.0, 1.0, 1.0}),
               InvalidInputError);
  EXPECT_THROW(composite_loss(kTarget, kTarget, kTarget, 0.5, true,
                              LossWeights{0.0, 0.0, 0.0}),
               InvalidInputError);
  EXPECT_THROW(
      composite_loss(kTarget, kTarget, kTarget, 0.5, true,
                     LossWeights{std::nan(""), 1.0, 1.0}),
      InvalidInputError);
}
