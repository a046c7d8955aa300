// Negative log-likelihood of the orbit recovery model and its derivatives.
//
// For data Y_1..Y_n the empirical risk is
//   R_n(theta) = ||theta||^2 / (2 sigma^2)
//              - (1/n) sum_i log E_g exp(<Y_i, g theta> / sigma^2),
// with E_g the uniform average over the group. Derivatives are posterior
// cumulants of g^T Y_i under p(g | Y_i, theta) proportional to
// exp(<Y_i, g theta>/sigma^2):
//   grad    = (theta - avg_i E[g^T Y_i]) / sigma^2
//   hess    = Id/sigma^2 - (1/sigma^4) avg_i Cov[g^T Y_i]
//   D^l     = -(1/sigma^(2l)) avg_i kappa_l[g^T Y_i]   for l >= 3.
#pragma once

#include <cstdint>
#include <optional>

#include "orbitml/groups.hpp"
#include "orbitml/model.hpp"
#include "orbitml/tensor.hpp"

namespace orbitml {

struct RiskModel {
  const GroupAction* group = nullptr;
  const Dataset* data = nullptr;
  double sigma = 1.0;

  RiskModel(const GroupAction& G, const Dataset& D)
      : group(&G), data(&D), sigma(D.sigma) {}
  RiskModel(const GroupAction& G, const Dataset& D, double sig)
      : group(&G), data(&D), sigma(sig) {}
};

struct EvalWant {
  bool grad = false;
  bool hess = false;
  bool tensor3 = false;
  bool tensor4 = false;

  static EvalWant value_only() { return {}; }
  static EvalWant up_to(int order) {
    EvalWant w;
    w.grad = order >= 1;
    w.hess = order >= 2;
    w.tensor3 = order >= 3;
    w.tensor4 = order >= 4;
    return w;
  }
};

struct EvalResult {
  double value = 0.0;
  std::optional<Vec> grad;
  std::optional<Mat> hess;
  std::optional<DenseTensor> tensor3;
  std::optional<DenseTensor> tensor4;
};

/// Posterior law of the group element given one observation:
/// w_k proportional to exp(<y, g_k theta>/sigma^2), computed with
/// log-sum-exp shifting; sums to 1 within 1e-12.
Vec posterior_weights(const GroupAction& G, double sigma, const Vec& theta,
                      const Vec& y);

/// Empirical risk and requested derivatives. Per-sample contributions are
/// reduced with fixed-order chunked pairwise summation (chunk 1024), so
/// results do not depend on the thread count.
EvalResult empirical_risk(const RiskModel& model, const Vec& theta,
                          const EvalWant& want = {});

struct McConfig {
  std::int64_t N = 100000;  // number of noise draws, must be even
  std::uint64_t seed = 0;
};

/// Population counterpart, evaluated by Monte Carlo over y = theta* + sigma
/// eps with a common-random-number stream determined by mc.seed. The stream
/// uses antithetic pairs (eps, -eps) and is rescaled once so the empirical
/// mean of ||eps||^2 equals d exactly. Standard errors (over antithetic
/// pairs) are returned alongside each requested quantity.
struct PopulationEval {
  EvalResult eval;
  double value_se = 0.0;
  Vec grad_se;
  Mat hess_se;
};
PopulationEval population_risk(const GroupAction& G, const Vec& theta_star,
                               double sigma, const Vec& theta,
                               const McConfig& mc, const EvalWant& want = {});

/// The same noise stream materialized as a dataset (rows theta* + sigma
/// eps_j), for callers that evaluate many theta against one stream.
Dataset population_noise_dataset(const Vec& theta_star, double sigma,
                                 std::int64_t N, std::uint64_t seed);

/// Deterministic Gauss-Hermite cross-check of the population risk value,
/// only for d <= 2 (tensor-product rule, given order per axis).
double population_risk_quadrature(const GroupAction& G, const Vec& theta_star,
                                  double sigma, const Vec& theta,
                                  int order = 40);

}  // namespace orbitml
