// First-order minimization of the empirical risk: EM, gradient descent
// and Nesterov-accelerated gradient descent.
#pragma once

#include <vector>

#include "orbitml/risk.hpp"

namespace orbitml {

enum class OptMethod { EM, GD, AGD };

struct OptimConfig {
  OptMethod method = OptMethod::AGD;
  double eta = 0.0;       // step size for GD/AGD; <= 0 selects sigma^4
  int max_iters = 250;
  double grad_tol = 0.0;  // <= 0 selects 1e-8 / sigma^2
  int record_every = 1;
};

struct TracePoint {
  int iter = 0;
  double risk = 0.0;
  double grad_norm = 0.0;
  Vec theta;
  std::vector<double> ref_dists;  // orbit distances to the reference points
};

struct OptimTrace {
  std::vector<TracePoint> points;
  Vec final_theta;
  double final_risk = 0.0;
  double final_grad_norm = 0.0;
  int iters_run = 0;
  bool converged = false;
  bool diverged = false;
  double seconds = 0.0;
};

/// (1/n) sum_i E[g^T Y_i | Y_i, theta], the posterior-mean average that
/// the EM update assigns to the next iterate. Accumulated independently
/// of the risk gradient path.
Vec posterior_mean_average(const RiskModel& model, const Vec& theta);

/// One EM update from theta.
Vec em_step(const RiskModel& model, const Vec& theta);

/// Radius of the divergence guard: 1e3 (||theta*|| + sigma sqrt(d)) when
/// the dataset records theta*, otherwise 1e3 (mean ||Y_i|| + sigma sqrt(d)).
double divergence_guard_radius(const RiskModel& model);

/// Runs the configured method from theta0. Records a trace point every
/// record_every iterations and always at the first and final iterate;
/// each point carries orbit distances to the given reference points.
/// AGD uses the momentum sequence lambda_0 = 0,
/// lambda_t = (1 + sqrt(1 + 4 lambda_{t-1}^2))/2,
/// tau_t = (lambda_t - 1)/lambda_{t+1}, with
///   mu^{t+1} = theta^t - eta grad R_n(theta^t),
///   theta^{t+1} = (1 + tau_t) mu^{t+1} - tau_t mu^t.
OptimTrace run_optimizer(const RiskModel& model, const OptimConfig& cfg,
                         const Vec& theta0,
                         const std::vector<Vec>& reference_points = {});

}  // namespace orbitml
