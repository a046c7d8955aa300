#include "orbitml/optim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "orbitml/parallel.hpp"

namespace orbitml {

Vec posterior_mean_average(const RiskModel& model, const Vec& theta) {
  const GroupAction& G = *model.group;
  const Mat& Y = model.data->Y;
  const double sigma2 = model.sigma * model.sigma;
  if (theta.size() != G.d) {
    throw std::invalid_argument(
        "posterior_mean_average: theta must have length d");
  }
  const int d = G.d;
  const int K = G.K;
  const std::int64_t n = model.data->n;

  Mat B(d, K);
  for (int k = 0; k < K; ++k) B.col(k) = (G.elements[k] * theta) / sigma2;
  std::vector<Mat> Gt(K);
  for (int k = 0; k < K; ++k) Gt[k] = G.elements[k].transpose();

  const std::size_t chunks =
      (static_cast<std::size_t>(n) + kReduceChunk - 1) / kReduceChunk;
  std::vector<Vec> partials(chunks, Vec::Zero(d));
  parallel_for(chunks, [&](std::size_t c) {
    const std::int64_t lo = static_cast<std::int64_t>(c * kReduceChunk);
    const std::int64_t hi = std::min<std::int64_t>(
        n, static_cast<std::int64_t>((c + 1) * kReduceChunk));
    const int m = static_cast<int>(hi - lo);
    const auto Yc = Y.middleRows(lo, m);
    Mat S(m, K);
    S.noalias() = Yc * B;
    Vec rowmax = S.rowwise().maxCoeff();
    S.colwise() -= rowmax;
    Mat W = S.array().exp().matrix();
    Vec Z = W.rowwise().sum();
    W.array().colwise() /= Z.array();
    Mat zmat(d, K);
    zmat.noalias() = Yc.transpose() * W;
    Vec acc = Vec::Zero(d);
    for (int k = 0; k < K; ++k) acc.noalias() += Gt[k] * zmat.col(k);
    partials[c] = acc;
  });
  Vec total = pairwise_combine(
      partials, [](const Vec& a, const Vec& b) -> Vec { return a + b; });
  return total / static_cast<double>(n);
}

Vec em_step(const RiskModel& model, const Vec& theta) {
  return posterior_mean_average(model, theta);
}

double divergence_guard_radius(const RiskModel& model) {
  const double sigma = model.sigma;
  const double root_d = std::sqrt(static_cast<double>(model.group->d));
  if (model.data->meta && model.data->meta->theta_star.size() > 0) {
    return 1e3 * (model.data->meta->theta_star.norm() + sigma * root_d);
  }
  const std::int64_t n = model.data->n;
  double mean_norm = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    mean_norm += model.data->Y.row(i).norm();
  }
  mean_norm /= static_cast<double>(n);
  return 1e3 * (mean_norm + sigma * root_d);
}

OptimTrace run_optimizer(const RiskModel& model, const OptimConfig& cfg,
                         const Vec& theta0,
                         const std::vector<Vec>& reference_points) {
  if (theta0.size() != model.group->d) {
    throw std::invalid_argument("run_optimizer: theta0 must have length d");
  }
  if (cfg.max_iters < 1) {
    throw std::invalid_argument("run_optimizer: max_iters must be >= 1");
  }
  if (cfg.record_every < 1) {
    throw std::invalid_argument("run_optimizer: record_every must be >= 1");
  }
  const double sigma2 = model.sigma * model.sigma;
  const double eta = cfg.eta > 0.0 ? cfg.eta : sigma2 * sigma2;
  const double tol = cfg.grad_tol > 0.0 ? cfg.grad_tol : 1e-8 / sigma2;
  const double guard = divergence_guard_radius(model);

  const auto t_start = std::chrono::steady_clock::now();
  OptimTrace trace;
  Vec theta = theta0;
  Vec mu_prev = theta0;
  double lambda_cur = 1.0;

  EvalWant want;
  want.grad = true;

  auto record = [&](int iter, double risk, double gnorm) {
    TracePoint pt;
    pt.iter = iter;
    pt.risk = risk;
    pt.grad_norm = gnorm;
    pt.theta = theta;
    pt.ref_dists.reserve(reference_points.size());
    for (const Vec& ref : reference_points) {
      pt.ref_dists.push_back(orbit_distance(*model.group, theta, ref));
    }
    trace.points.push_back(std::move(pt));
  };

  int iter = 0;
  double risk = 0.0;
  double gnorm = 0.0;
  while (true) {
    EvalResult ev = empirical_risk(model, theta, want);
    risk = ev.value;
    gnorm = ev.grad->norm();
    const bool converging = gnorm <= tol;
    const bool last = converging || iter == cfg.max_iters;
    if (iter % cfg.record_every == 0 || last) record(iter, risk, gnorm);
    if (converging) trace.converged = true;
    if (last) break;

    switch (cfg.method) {
      case OptMethod::EM:
        theta = posterior_mean_average(model, theta);
        break;
      case OptMethod::GD:
        theta -= eta * (*ev.grad);
        break;
      case OptMethod::AGD: {
        const double lambda_next =
            0.5 * (1.0 + std::sqrt(1.0 + 4.0 * lambda_cur * lambda_cur));
        const double tau = (lambda_cur - 1.0) / lambda_next;
        Vec mu_new = theta - eta * (*ev.grad);
        theta = (1.0 + tau) * mu_new - tau * mu_prev;
        mu_prev = std::move(mu_new);
        lambda_cur = lambda_next;
        break;
      }
    }
    ++iter;
    if (theta.norm() > guard) {
      EvalResult evd = empirical_risk(model, theta, want);
      risk = evd.value;
      gnorm = evd.grad->norm();
      record(iter, risk, gnorm);
      trace.diverged = true;
      break;
    }
  }

  trace.final_theta = theta;
  trace.final_risk = risk;
  trace.final_grad_norm = gnorm;
  trace.iters_run = iter;
  trace.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t_start)
                      .count();
  return trace;
}

}  // namespace orbitml
