#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "orbitml/groups.hpp"
#include "orbitml/model.hpp"
#include "orbitml/optim.hpp"
#include "orbitml/risk.hpp"
#include "orbitml/rng.hpp"

using namespace orbitml;

namespace {

Vec random_vec(int d, std::uint64_t seed) {
  Vec v(d);
  for (int i = 0; i < d; ++i)
    v(i) = 2.0 * rng_unit_at(seed, static_cast<std::uint64_t>(i)) - 1.0;
  return v;
}

}  // namespace

TEST_SUITE("optim") {

TEST_CASE("em step equals gradient descent at the natural step size") {
  for (int trial = 0; trial < 5; ++trial) {
    const GroupAction G = make_cyclic(3 + trial % 3);
    const Vec star = random_vec(G.d, 900 + trial);
    const double sigma = 0.5 + 0.4 * trial;
    const Dataset data = sample_dataset(G, star, sigma, 30, 901 + trial);
    const RiskModel model(G, data, sigma);

    Vec theta = random_vec(G.d, 902 + trial);
    EvalWant want;
    want.grad = true;
    for (int step = 0; step < 10; ++step) {
      const Vec em = em_step(model, theta);
      const Vec gd =
          theta - sigma * sigma * (*empirical_risk(model, theta, want).grad);
      REQUIRE((em - gd).cwiseAbs().maxCoeff() <= 1e-12);
      theta = em;
    }
  }
}

TEST_CASE("em iterations never increase the risk") {
  const GroupAction G = make_rotations(3);
  Vec star(2);
  star << 1.0, 0.0;
  const Dataset data = sample_dataset(G, star, 1.0, 400, 11);
  const RiskModel model(G, data, 1.0);

  OptimConfig cfg;
  cfg.method = OptMethod::EM;
  cfg.max_iters = 60;
  const OptimTrace trace = run_optimizer(model, cfg, random_vec(2, 12));
  for (std::size_t i = 1; i < trace.points.size(); ++i)
    CHECK(trace.points[i].risk <= trace.points[i - 1].risk + 1e-12);
}

TEST_CASE("agd follows the published momentum recursion") {
  const GroupAction G = make_cyclic(4);
  const Vec star = random_vec(4, 21);
  const double sigma = 1.3;
  const Dataset data = sample_dataset(G, star, sigma, 50, 22);
  const RiskModel model(G, data, sigma);
  const double eta = 0.4;

  OptimConfig cfg;
  cfg.method = OptMethod::AGD;
  cfg.eta = eta;
  cfg.max_iters = 8;
  cfg.grad_tol = 1e-300;
  const Vec theta0 = random_vec(4, 23);
  const OptimTrace trace = run_optimizer(model, cfg, theta0);

  EvalWant want;
  want.grad = true;
  Vec theta = theta0;
  Vec mu_prev = theta0;
  double lambda = 1.0;
  for (int t = 0; t < 8; ++t) {
    const Vec mu =
        theta - eta * (*empirical_risk(model, theta, want).grad);
    const double lambda_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * lambda * lambda));
    const double tau = (lambda - 1.0) / lambda_next;
    theta = (1.0 + tau) * mu - tau * mu_prev;
    mu_prev = mu;
    lambda = lambda_next;
  }
  CHECK((trace.final_theta - theta).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("gradient tolerance stops the run and flags convergence") {
  const GroupAction G = make_rotations(3);
  Vec star(2);
  star << 1.0, 0.0;
  const double sigma = 0.5;
  const Dataset data = sample_dataset(G, star, sigma, 500, 31);
  const RiskModel model(G, data, sigma);

  OptimConfig cfg;
  cfg.method = OptMethod::EM;
  cfg.max_iters = 2000;
  const OptimTrace trace = run_optimizer(model, cfg, star + 0.1 * random_vec(2, 32));
  CHECK(trace.converged);
  CHECK(!trace.diverged);
  CHECK(trace.final_grad_norm <= 1e-8 / (sigma * sigma));
  CHECK(trace.iters_run < 2000);
}

TEST_CASE("absurd step sizes trip the divergence guard") {
  const GroupAction G = make_cyclic(3);
  const Vec star = random_vec(3, 41);
  const Dataset data = sample_dataset(G, star, 1.0, 40, 42);
  const RiskModel model(G, data, 1.0);

  OptimConfig cfg;
  cfg.method = OptMethod::GD;
  cfg.eta = 1e8;
  cfg.max_iters = 50;
  const OptimTrace trace = run_optimizer(model, cfg, random_vec(3, 43));
  CHECK(trace.diverged);
  CHECK(trace.iters_run < 50);
}

TEST_CASE("trace recording honors the stride and reference points") {
  const GroupAction G = make_rotations(4);
  Vec star(2);
  star << 0.7, -0.4;
  const Dataset data = sample_dataset(G, star, 1.0, 100, 51);
  const RiskModel model(G, data, 1.0);

  OptimConfig cfg;
  cfg.method = OptMethod::GD;
  cfg.max_iters = 25;
  cfg.record_every = 10;
  cfg.grad_tol = 1e-300;
  const OptimTrace trace =
      run_optimizer(model, cfg, random_vec(2, 52), {star});
  REQUIRE(trace.points.size() >= 3);
  CHECK(trace.points.front().iter == 0);
  CHECK(trace.points.back().iter == trace.iters_run);
  for (const TracePoint& pt : trace.points) {
    REQUIRE(pt.ref_dists.size() == 1);
    CHECK(pt.ref_dists[0] >= 0.0);
    CHECK(pt.theta.size() == 2);
  }
}

TEST_CASE("low noise runs recover the planted orbit") {
  const GroupAction G = make_rotations(3);
  Vec star(2);
  star << 1.0, 0.0;
  const double sigma = 0.4;
  const Dataset data = sample_dataset(G, star, sigma, 4000, 61);
  const RiskModel model(G, data, sigma);

  OptimConfig cfg;
  cfg.method = OptMethod::AGD;
  cfg.max_iters = 400;
  Vec theta0(2);
  theta0 << 1.0, 1.0;
  const OptimTrace trace = run_optimizer(model, cfg, theta0);
  CHECK(orbit_distance(G, trace.final_theta, star) <= 0.1);
}

}  // TEST_SUITE
