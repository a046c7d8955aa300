#include "orbitml/landscape.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "orbitml/parallel.hpp"
#include "orbitml/rng.hpp"
#include "orbitml/series.hpp"

namespace orbitml {

namespace {

FisherResult finish_fisher(Mat matrix, Mat se, std::string method) {
  FisherResult res;
  res.matrix = std::move(matrix);
  res.se = std::move(se);
  res.method = std::move(method);
  Eigen::SelfAdjointEigenSolver<Mat> es(res.matrix);
  res.eigvals = es.eigenvalues();
  res.eigvecs = es.eigenvectors();
  return res;
}

/// Standard normal start for slot s, filled from the counter stream of
/// the given seed so surveys are reproducible and order independent.
Vec normal_start(std::uint64_t seed, int s, int d) {
  const std::uint64_t stride = 2 * ((static_cast<std::uint64_t>(d) + 1) / 2);
  Vec theta(d);
  for (int j = 0; j < d; j += 2) {
    double z0 = 0.0;
    double z1 = 0.0;
    rng_normal_pair_at(seed, static_cast<std::uint64_t>(s) * stride + j, z0, z1);
    theta(j) = z0;
    if (j + 1 < d) theta(j + 1) = z1;
  }
  return theta;
}

}  // namespace

FisherResult fisher_information_mc(const GroupAction& G, const Vec& theta_star,
                                   double sigma, const McConfig& mc) {
  EvalWant want;
  want.grad = true;
  want.hess = true;
  PopulationEval pe = population_risk(G, theta_star, sigma, theta_star, mc, want);
  return finish_fisher(*pe.eval.hess, pe.hess_se, "mc");
}

FisherResult fisher_information_series(const GroupAction& G,
                                       const Vec& theta_star, double sigma,
                                       int order) {
  EvalWant want;
  want.grad = true;
  want.hess = true;
  EvalResult ev = truncated_risk(G, theta_star, theta_star, sigma, order, want);
  return finish_fisher(*ev.hess, Mat::Zero(G.d, G.d), "series");
}

std::vector<int> band_dims(const GroupAction& G) {
  const auto paren = G.name.find('(');
  const auto close = G.name.find(')');
  if (paren == std::string::npos || close == std::string::npos ||
      close < paren) {
    throw std::invalid_argument("band_dims: unsupported group " + G.name);
  }
  const std::string family = G.name.substr(0, paren);
  const int arg = std::stoi(G.name.substr(paren + 1, close - paren - 1));
  if (family == "rotations") {
    if (arg == 1) return {2};
    if (arg == 2) return {0, 2};
    std::vector<int> dims(arg, 0);
    dims[1] = 1;
    dims[arg - 1] = 1;
    return dims;
  }
  if (family == "cyclic") {
    if (arg == 1) return {1};
    return {1, (arg - 1 + 1) / 2, (arg - 1) / 2};
  }
  if (family == "symmetric") {
    return std::vector<int>(arg, 1);
  }
  throw std::invalid_argument("band_dims: unsupported group " + G.name);
}

GradedSpectrum graded_spectrum(const Mat& fisher, double sigma,
                               const std::vector<int>& dims) {
  const int d = static_cast<int>(fisher.rows());
  if (std::accumulate(dims.begin(), dims.end(), 0) != d) {
    throw std::invalid_argument(
        "graded_spectrum: band dimensions do not sum to the matrix size");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(fisher);
  GradedSpectrum gs;
  gs.eigvals = es.eigenvalues().reverse();
  gs.scaled.resize(d);
  gs.band_of.resize(d);
  const int L = static_cast<int>(dims.size());
  gs.band_min.assign(L, 0.0);
  gs.band_max.assign(L, 0.0);
  gs.resolved.assign(L, true);
  int next = 0;
  for (int ell = 1; ell <= L; ++ell) {
    const int dl = dims[ell - 1];
    if (dl == 0) continue;
    double lo = 0.0;
    double hi = 0.0;
    for (int i = 0; i < dl; ++i, ++next) {
      gs.band_of[next] = ell;
      const double s = gs.eigvals(next) * std::pow(sigma, 2.0 * ell);
      gs.scaled(next) = s;
      lo = (i == 0) ? s : std::min(lo, s);
      hi = (i == 0) ? s : std::max(hi, s);
    }
    gs.band_min[ell - 1] = lo;
    gs.band_max[ell - 1] = hi;
    gs.resolved[ell - 1] = lo > 0.0 && hi <= 10.0 * lo;
  }
  return gs;
}

double plugin_variance(const Mat& fisher, const Vec& psi_grad) {
  if (fisher.rows() != psi_grad.size()) {
    throw std::invalid_argument("plugin_variance: dimension mismatch");
  }
  Eigen::LDLT<Mat> ldlt(fisher);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0) {
    throw std::runtime_error(
        "plugin_variance: Fisher matrix is not positive definite");
  }
  return psi_grad.dot(ldlt.solve(psi_grad));
}

PseudoMinimizerReport pseudo_minimizer_check(
    const GroupAction& G, const Vec& theta_tilde, const Vec& theta_star,
    const Chart& chart, const std::vector<int>& dims, double grad_tol,
    double eig_tol) {
  PseudoMinimizerReport report;
  report.pass = true;
  const int L = static_cast<int>(dims.size());
  for (int ell = 1; ell <= L; ++ell) {
    if (dims[ell - 1] == 0) continue;
    const SeriesMethod method =
        (ell <= 3) ? SeriesMethod::ClosedForm : SeriesMethod::Generic;
    Vec grad = S_ell_grad(G, theta_tilde, theta_star, ell, method);
    Mat hess = S_ell_hess(G, theta_tilde, theta_star, ell, method);
    Pullback pb = pullback(chart, theta_tilde, grad, hess);
    std::vector<int> idx = chart_band_indices(chart, dims, ell);
    if (idx.empty()) {
      throw std::invalid_argument(
          "pseudo_minimizer_check: chart exposes no coordinates for a "
          "nonempty band");
    }
    BandCheck bc;
    bc.ell = ell;
    bc.indices = idx;
    double g2 = 0.0;
    for (int i : idx) g2 += pb.grad(i) * pb.grad(i);
    bc.grad_norm = std::sqrt(g2);
    const int b = static_cast<int>(idx.size());
    Mat block(b, b);
    for (int i = 0; i < b; ++i) {
      for (int j = 0; j < b; ++j) block(i, j) = pb.hess(idx[i], idx[j]);
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(block);
    bc.min_eig = es.eigenvalues().minCoeff();
    bc.pass = bc.grad_norm <= grad_tol && bc.min_eig >= -eig_tol;
    report.pass = report.pass && bc.pass;
    report.bands.push_back(std::move(bc));
  }
  return report;
}

Vec newton_polish(const RiskModel& model, const Vec& theta, int max_iters,
                  double grad_tol) {
  const double sigma2 = model.sigma * model.sigma;
  const double tol = grad_tol > 0.0 ? grad_tol : 1e-10 / sigma2;
  EvalWant want;
  want.grad = true;
  want.hess = true;
  Vec cur = theta;
  Vec best = theta;
  double best_gnorm = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iters; ++it) {
    EvalResult ev = empirical_risk(model, cur, want);
    const double gnorm = ev.grad->norm();
    if (gnorm < best_gnorm) {
      best_gnorm = gnorm;
      best = cur;
    }
    if (gnorm <= tol) break;
    if (gnorm > 100.0 * best_gnorm && best_gnorm < 1.0) break;
    Eigen::SelfAdjointEigenSolver<Mat> es(*ev.hess);
    const double lam_max = es.eigenvalues().cwiseAbs().maxCoeff();
    const double clip = 1e-10 * lam_max;
    Vec coef = es.eigenvectors().transpose() * (*ev.grad);
    Vec step = Vec::Zero(cur.size());
    for (int i = 0; i < cur.size(); ++i) {
      if (std::abs(es.eigenvalues()(i)) >= clip) {
        step -= coef(i) / es.eigenvalues()(i) * es.eigenvectors().col(i);
      }
    }
    cur += step;
  }
  EvalWant wg;
  wg.grad = true;
  EvalResult ev = empirical_risk(model, cur, wg);
  if (ev.grad->norm() < best_gnorm) best = cur;
  return best;
}

std::vector<CriticalPoint> find_critical_points(const RiskModel& model,
                                                int n_starts,
                                                std::uint64_t seed,
                                                const OptimConfig& cfg,
                                                bool polish, double dedup_tol) {
  if (n_starts < 1) {
    throw std::invalid_argument("find_critical_points: n_starts must be >= 1");
  }
  const GroupAction& G = *model.group;
  std::vector<Vec> finals(n_starts);
  std::vector<char> ok(n_starts, 0);
  for (int s = 0; s < n_starts; ++s) {
    OptimTrace tr = run_optimizer(model, cfg, normal_start(seed, s, G.d));
    if (!tr.diverged) {
      finals[s] = polish ? newton_polish(model, tr.final_theta) : tr.final_theta;
      ok[s] = 1;
    }
  }
  std::vector<CriticalPoint> points;
  EvalWant want;
  want.grad = true;
  want.hess = true;
  for (int s = 0; s < n_starts; ++s) {
    if (!ok[s]) continue;
    bool merged = false;
    for (CriticalPoint& cp : points) {
      if (orbit_distance(G, finals[s], cp.theta) <= dedup_tol) {
        ++cp.multiplicity;
        merged = true;
        break;
      }
    }
    if (merged) continue;
    CriticalPoint cp;
    cp.theta = finals[s];
    EvalResult ev = empirical_risk(model, cp.theta, want);
    cp.value = ev.value;
    cp.grad_norm = ev.grad->norm();
    Eigen::SelfAdjointEigenSolver<Mat> es(*ev.hess);
    cp.min_eig = es.eigenvalues().minCoeff();
    cp.max_eig = es.eigenvalues().maxCoeff();
    if (std::abs(cp.min_eig) <= 1e-8 || std::abs(cp.max_eig) <= 1e-8) {
      cp.kind = "degenerate";
    } else if (cp.min_eig > 0.0) {
      cp.kind = "minimizer";
    } else if (cp.max_eig < 0.0) {
      cp.kind = "maximizer";
    } else {
      cp.kind = "saddle";
    }
    cp.multiplicity = 1;
    points.push_back(std::move(cp));
  }
  std::sort(points.begin(), points.end(),
            [](const CriticalPoint& a, const CriticalPoint& b) {
              return a.value < b.value;
            });
  return points;
}

BasinResult basin_fractions(const RiskModel& model,
                            const std::vector<Vec>& references, int n_starts,
                            std::uint64_t seed, const OptimConfig& cfg,
                            double radius) {
  if (references.empty()) {
    throw std::invalid_argument("basin_fractions: need reference points");
  }
  if (n_starts < 1) {
    throw std::invalid_argument("basin_fractions: n_starts must be >= 1");
  }
  const GroupAction& G = *model.group;
  BasinResult res;
  res.runs.resize(n_starts);
  parallel_for(static_cast<std::size_t>(n_starts), [&](std::size_t s) {
    const int si = static_cast<int>(s);
    OptimTrace tr = run_optimizer(model, cfg, normal_start(seed, si, G.d));
    BasinRun run;
    run.start = si;
    run.final_theta = tr.final_theta;
    run.final_risk = tr.final_risk;
    run.final_grad_norm = tr.final_grad_norm;
    run.diverged = tr.diverged;
    run.ref_dists.reserve(references.size());
    double best = std::numeric_limits<double>::infinity();
    int best_idx = -1;
    for (std::size_t r = 0; r < references.size(); ++r) {
      const double dist = orbit_distance(G, tr.final_theta, references[r]);
      run.ref_dists.push_back(dist);
      if (dist < best) {
        best = dist;
        best_idx = static_cast<int>(r);
      }
    }
    run.assigned = (!tr.diverged && best <= radius) ? best_idx : -1;
    res.runs[s] = std::move(run);
  });
  res.fractions.assign(references.size(), 0.0);
  int unresolved = 0;
  for (const BasinRun& run : res.runs) {
    if (run.assigned >= 0) {
      res.fractions[run.assigned] += 1.0;
    } else {
      ++unresolved;
    }
  }
  for (double& f : res.fractions) f /= n_starts;
  res.unresolved = static_cast<double>(unresolved) / n_starts;
  return res;
}

}  // namespace orbitml
