#include "orbitml/risk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "orbitml/cumulants.hpp"
#include "orbitml/parallel.hpp"
#include "orbitml/rng.hpp"

namespace orbitml {

namespace {

// Per-chunk partial sums. Combined over chunks with a fixed pairwise tree.
struct Accum {
  double value = 0.0;
  Vec mu;
  Mat cov;
  DenseTensor k3, k4;

  static Accum zeros(int d, const EvalWant& want) {
    Accum a;
    if (want.grad || want.hess) a.mu = Vec::Zero(d);
    if (want.hess) a.cov = Mat::Zero(d, d);
    if (want.tensor3) a.k3 = DenseTensor(d, 3);
    if (want.tensor4) a.k4 = DenseTensor(d, 4);
    return a;
  }

  static Accum add(const Accum& x, const Accum& y) {
    Accum r = x;
    r.value += y.value;
    if (r.mu.size()) r.mu += y.mu;
    if (r.cov.size()) r.cov += y.cov;
    if (r.k3.size()) r.k3 += y.k3;
    if (r.k4.size()) r.k4 += y.k4;
    return r;
  }
};

struct SampleStats {
  double logmean = 0.0;  // log E_g exp(<y, g theta>/sigma^2)
  Vec mu;                // posterior mean of g^T y
  Mat cov;               // posterior covariance of g^T y
  DenseTensor k3, k4;    // posterior cumulant tensors of g^T y
};

// Scratch shared by the per-sample kernels of one worker.
struct Workspace {
  Vec s;       // K exponents
  Vec w;       // K posterior weights
  Mat U;       // K x d back-rotated observation
  Vec scratch; // d
};

// Posterior statistics for a single observation. B has columns g_k theta
// scaled by 1/sigma^2; Gt[k] is g_k^T.
void sample_stats(const std::vector<Mat>& Gt, const Mat& B, const Vec& y,
                  const EvalWant& want, Workspace& ws, SampleStats& out) {
  const int K = static_cast<int>(Gt.size());
  const int d = static_cast<int>(y.size());
  ws.s.noalias() = B.transpose() * y;
  const double m = ws.s.maxCoeff();
  double Z = 0.0;
  ws.w.resize(K);
  for (int k = 0; k < K; ++k) {
    ws.w(k) = std::exp(ws.s(k) - m);
    Z += ws.w(k);
  }
  out.logmean = m + std::log(Z) - std::log(static_cast<double>(K));
  if (!(want.grad || want.hess || want.tensor3 || want.tensor4)) return;
  ws.w /= Z;

  ws.U.resize(K, d);
  for (int k = 0; k < K; ++k) ws.U.row(k).noalias() = (Gt[k] * y).transpose();
  out.mu.noalias() = ws.U.transpose() * ws.w;
  if (want.hess) {
    out.cov.noalias() = ws.U.transpose() * ws.w.asDiagonal() * ws.U;
    out.cov.noalias() -= out.mu * out.mu.transpose();
  }
  if (want.tensor3 || want.tensor4) {
    FiniteLaw law{ws.U, ws.w};
    if (want.tensor3) out.k3 = cumulant_tensor(law, 3);
    if (want.tensor4) out.k4 = cumulant_tensor(law, 4);
  }
}

void check_model(const RiskModel& model, const Vec& theta) {
  if (!model.group || !model.data) {
    throw std::invalid_argument("risk: model is missing group or data");
  }
  if (model.sigma <= 0.0) throw std::invalid_argument("risk: sigma <= 0");
  if (theta.size() != model.group->d ||
      model.data->Y.cols() != model.group->d) {
    throw std::invalid_argument("risk: dimension mismatch");
  }
}

Mat exponent_matrix(const GroupAction& G, const Vec& theta, double sigma) {
  Mat B(G.d, G.K);
  for (int k = 0; k < G.K; ++k) {
    B.col(k) = (G.elements[k] * theta) / (sigma * sigma);
  }
  return B;
}

std::vector<Mat> transposed_elements(const GroupAction& G) {
  std::vector<Mat> Gt;
  Gt.reserve(G.K);
  for (const Mat& g : G.elements) Gt.push_back(g.transpose());
  return Gt;
}

}  // namespace

Vec posterior_weights(const GroupAction& G, double sigma, const Vec& theta,
                      const Vec& y) {
  if (theta.size() != G.d || y.size() != G.d) {
    throw std::invalid_argument("posterior_weights: dimension mismatch");
  }
  if (sigma <= 0.0) throw std::invalid_argument("posterior_weights: sigma <= 0");
  const Mat B = exponent_matrix(G, theta, sigma);
  Vec s = B.transpose() * y;
  const double m = s.maxCoeff();
  Vec w(G.K);
  double Z = 0.0;
  for (int k = 0; k < G.K; ++k) {
    w(k) = std::exp(s(k) - m);
    Z += w(k);
  }
  return w / Z;
}

EvalResult empirical_risk(const RiskModel& model, const Vec& theta,
                          const EvalWant& want) {
  check_model(model, theta);
  const GroupAction& G = *model.group;
  const Mat& Y = model.data->Y;
  const std::int64_t n = Y.rows();
  const int d = G.d;
  const int K = G.K;
  const double sigma = model.sigma;

  if (want.tensor3) enumerate_partitions(3);
  if (want.tensor4) enumerate_partitions(4);

  const Mat B = exponent_matrix(G, theta, sigma);
  const std::vector<Mat> Gt = transposed_elements(G);
  const double logK = std::log(static_cast<double>(K));
  const bool per_sample = want.hess || want.tensor3 || want.tensor4;

  const std::size_t chunks =
      (static_cast<std::size_t>(n) + kReduceChunk - 1) / kReduceChunk;
  std::vector<Accum> partials(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    Accum acc = Accum::zeros(d, want);
    const std::int64_t lo = static_cast<std::int64_t>(c * kReduceChunk);
    const std::int64_t hi = std::min<std::int64_t>(
        n, static_cast<std::int64_t>((c + 1) * kReduceChunk));
    const int m = static_cast<int>(hi - lo);
    const auto Yc = Y.middleRows(lo, m);

    // Batched posterior pass: exponents, log-sum-exp, weights.
    Mat S(m, K);
    S.noalias() = Yc * B;
    Vec rowmax = S.rowwise().maxCoeff();
    S.colwise() -= rowmax;
    Mat W = S.array().exp().matrix();
    Vec Z = W.rowwise().sum();
    Vec logZ = Z.array().log().matrix();
    for (int i = 0; i < m; ++i) acc.value += rowmax(i) + logZ(i) - logK;

    if (acc.mu.size() && !per_sample) {
      // Deferred posterior-mean accumulation: one GEMM per chunk.
      W.array().colwise() /= Z.array();
      Mat zmat(d, K);
      zmat.noalias() = Yc.transpose() * W;
      for (int k = 0; k < K; ++k) acc.mu.noalias() += Gt[k] * zmat.col(k);
    } else if (per_sample) {
      W.array().colwise() /= Z.array();
      Mat U(K, d);
      Vec mu(d), y(d), w(K);
      for (int i = 0; i < m; ++i) {
        y = Yc.row(i).transpose();
        w = W.row(i).transpose();
        for (int k = 0; k < K; ++k) U.row(k).noalias() = (Gt[k] * y).transpose();
        mu.noalias() = U.transpose() * w;
        if (acc.mu.size()) acc.mu += mu;
        if (acc.cov.size()) {
          acc.cov.noalias() += U.transpose() * w.asDiagonal() * U;
          acc.cov.noalias() -= mu * mu.transpose();
        }
        if (want.tensor3 || want.tensor4) {
          FiniteLaw law{U, w};
          if (want.tensor3) acc.k3 += cumulant_tensor(law, 3);
          if (want.tensor4) acc.k4 += cumulant_tensor(law, 4);
        }
      }
    }
    partials[c] = std::move(acc);
  });
  const Accum total = pairwise_combine(partials, Accum::add);

  const double inv_n = 1.0 / static_cast<double>(n);
  const double s2 = sigma * sigma;
  EvalResult res;
  res.value = theta.squaredNorm() / (2.0 * s2) - total.value * inv_n;
  if (want.grad) res.grad = (theta - total.mu * inv_n) / s2;
  if (want.hess) {
    res.hess = Mat::Identity(d, d) / s2 - total.cov * (inv_n / (s2 * s2));
  }
  if (want.tensor3) {
    DenseTensor t = total.k3;
    t *= -inv_n / (s2 * s2 * s2);
    res.tensor3 = std::move(t);
  }
  if (want.tensor4) {
    DenseTensor t = total.k4;
    t *= -inv_n / (s2 * s2 * s2 * s2);
    res.tensor4 = std::move(t);
  }
  return res;
}

namespace {

// Noise vector p of the raw stream (before antithetic mirroring).
void raw_noise(std::uint64_t seed, std::int64_t p, int d, Vec& z) {
  const std::uint64_t stride = 2 * ((static_cast<std::uint64_t>(d) + 1) / 2);
  const std::uint64_t base = static_cast<std::uint64_t>(p) * stride;
  for (int j = 0; j < d; j += 2) {
    double z0, z1;
    rng_normal_pair_at(seed, base + static_cast<std::uint64_t>(j), z0, z1);
    z(j) = z0;
    if (j + 1 < d) z(j + 1) = z1;
  }
}

// One global rescale so the stream's empirical mean of ||eps||^2 is d.
double moment_match_scale(std::uint64_t seed, std::int64_t pairs, int d) {
  const std::size_t chunks =
      (static_cast<std::size_t>(pairs) + kReduceChunk - 1) / kReduceChunk;
  std::vector<double> partials(chunks, 0.0);
  parallel_for(chunks, [&](std::size_t c) {
    Vec z(d);
    double s = 0.0;
    const std::int64_t lo = static_cast<std::int64_t>(c * kReduceChunk);
    const std::int64_t hi = std::min<std::int64_t>(
        pairs, static_cast<std::int64_t>((c + 1) * kReduceChunk));
    for (std::int64_t p = lo; p < hi; ++p) {
      raw_noise(seed, p, d, z);
      s += z.squaredNorm();
    }
    partials[c] = s;
  });
  const double ssq = 2.0 * pairwise_sum(partials);
  const double N = 2.0 * static_cast<double>(pairs);
  return std::sqrt(static_cast<double>(d) * N / ssq);
}

struct PairAccum {
  // Sums and squared sums of antithetic pair averages.
  double value = 0.0, value_sq = 0.0;
  Vec mu, mu_sq;
  Mat cov, cov_sq;
  DenseTensor k3, k4;

  static PairAccum zeros(int d, const EvalWant& want) {
    PairAccum a;
    if (want.grad || want.hess) {
      a.mu = Vec::Zero(d);
      a.mu_sq = Vec::Zero(d);
    }
    if (want.hess) {
      a.cov = Mat::Zero(d, d);
      a.cov_sq = Mat::Zero(d, d);
    }
    if (want.tensor3) a.k3 = DenseTensor(d, 3);
    if (want.tensor4) a.k4 = DenseTensor(d, 4);
    return a;
  }

  static PairAccum add(const PairAccum& x, const PairAccum& y) {
    PairAccum r = x;
    r.value += y.value;
    r.value_sq += y.value_sq;
    if (r.mu.size()) {
      r.mu += y.mu;
      r.mu_sq += y.mu_sq;
    }
    if (r.cov.size()) {
      r.cov += y.cov;
      r.cov_sq += y.cov_sq;
    }
    if (r.k3.size()) r.k3 += y.k3;
    if (r.k4.size()) r.k4 += y.k4;
    return r;
  }
};

}  // namespace

PopulationEval population_risk(const GroupAction& G, const Vec& theta_star,
                               double sigma, const Vec& theta,
                               const McConfig& mc, const EvalWant& want) {
  if (theta.size() != G.d || theta_star.size() != G.d) {
    throw std::invalid_argument("population_risk: dimension mismatch");
  }
  if (sigma <= 0.0) throw std::invalid_argument("population_risk: sigma <= 0");
  if (mc.N < 2 || mc.N % 2 != 0) {
    throw std::invalid_argument("population_risk: N must be even and >= 2");
  }
  const int d = G.d;
  const std::int64_t pairs = mc.N / 2;
  if (want.tensor3) enumerate_partitions(3);
  if (want.tensor4) enumerate_partitions(4);

  const double scale = moment_match_scale(mc.seed, pairs, d);
  const Mat B = exponent_matrix(G, theta, sigma);
  const std::vector<Mat> Gt = transposed_elements(G);

  const std::size_t chunks =
      (static_cast<std::size_t>(pairs) + kReduceChunk - 1) / kReduceChunk;
  std::vector<PairAccum> partials(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    PairAccum acc = PairAccum::zeros(d, want);
    Workspace ws;
    SampleStats plus, minus;
    Vec z(d), y(d);
    const std::int64_t lo = static_cast<std::int64_t>(c * kReduceChunk);
    const std::int64_t hi = std::min<std::int64_t>(
        pairs, static_cast<std::int64_t>((c + 1) * kReduceChunk));
    for (std::int64_t p = lo; p < hi; ++p) {
      raw_noise(mc.seed, p, d, z);
      z *= scale;
      y = theta_star + sigma * z;
      sample_stats(Gt, B, y, want, ws, plus);
      y = theta_star - sigma * z;
      sample_stats(Gt, B, y, want, ws, minus);

      const double v = 0.5 * (plus.logmean + minus.logmean);
      acc.value += v;
      acc.value_sq += v * v;
      if (acc.mu.size()) {
        const Vec mv = 0.5 * (plus.mu + minus.mu);
        acc.mu += mv;
        acc.mu_sq += mv.cwiseProduct(mv);
      }
      if (acc.cov.size()) {
        const Mat cv = 0.5 * (plus.cov + minus.cov);
        acc.cov += cv;
        acc.cov_sq += cv.cwiseProduct(cv);
      }
      if (want.tensor3) {
        plus.k3 += minus.k3;
        plus.k3 *= 0.5;
        acc.k3 += plus.k3;
      }
      if (want.tensor4) {
        plus.k4 += minus.k4;
        plus.k4 *= 0.5;
        acc.k4 += plus.k4;
      }
    }
    partials[c] = std::move(acc);
  });
  const PairAccum total = pairwise_combine(partials, PairAccum::add);

  const double P = static_cast<double>(pairs);
  const double s2 = sigma * sigma;
  auto se_of = [&](double sum, double sumsq) {
    const double var = std::max(0.0, sumsq / P - (sum / P) * (sum / P));
    return std::sqrt(var / P);
  };

  PopulationEval out;
  out.eval.value = theta.squaredNorm() / (2.0 * s2) - total.value / P;
  out.value_se = se_of(total.value, total.value_sq);
  if (want.grad) {
    out.eval.grad = (theta - total.mu / P) / s2;
    out.grad_se.resize(d);
    for (int j = 0; j < d; ++j) {
      out.grad_se(j) = se_of(total.mu(j), total.mu_sq(j)) / s2;
    }
  }
  if (want.hess) {
    out.eval.hess = Mat::Identity(d, d) / s2 - total.cov / (P * s2 * s2);
    out.hess_se.resize(d, d);
    for (int r = 0; r < d; ++r) {
      for (int cc = 0; cc < d; ++cc) {
        out.hess_se(r, cc) = se_of(total.cov(r, cc), total.cov_sq(r, cc)) /
                             (s2 * s2);
      }
    }
  }
  if (want.tensor3) {
    DenseTensor t = total.k3;
    t *= -1.0 / (P * s2 * s2 * s2);
    out.eval.tensor3 = std::move(t);
  }
  if (want.tensor4) {
    DenseTensor t = total.k4;
    t *= -1.0 / (P * s2 * s2 * s2 * s2);
    out.eval.tensor4 = std::move(t);
  }
  return out;
}

Dataset population_noise_dataset(const Vec& theta_star, double sigma,
                                 std::int64_t N, std::uint64_t seed) {
  if (N < 2 || N % 2 != 0) {
    throw std::invalid_argument(
        "population_noise_dataset: N must be even and >= 2");
  }
  const int d = static_cast<int>(theta_star.size());
  const std::int64_t pairs = N / 2;
  const double scale = moment_match_scale(seed, pairs, d);
  Dataset data;
  data.Y.resize(N, d);
  data.sigma = sigma;
  data.n = N;
  data.seed = seed;
  data.meta = DatasetMeta{theta_star, "", "population"};
  const std::size_t chunks =
      (static_cast<std::size_t>(pairs) + kReduceChunk - 1) / kReduceChunk;
  parallel_for(chunks, [&](std::size_t c) {
    Vec z(d);
    const std::int64_t lo = static_cast<std::int64_t>(c * kReduceChunk);
    const std::int64_t hi = std::min<std::int64_t>(
        pairs, static_cast<std::int64_t>((c + 1) * kReduceChunk));
    for (std::int64_t p = lo; p < hi; ++p) {
      raw_noise(seed, p, d, z);
      z *= scale;
      data.Y.row(2 * p) = (theta_star + sigma * z).transpose();
      data.Y.row(2 * p + 1) = (theta_star - sigma * z).transpose();
    }
  });
  return data;
}

namespace {

// Probabilists' Gauss-Hermite rule: E[f(Z)] for Z standard normal.
void gauss_hermite(int order, std::vector<double>& nodes,
                   std::vector<double>& weights) {
  Mat J = Mat::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double b = std::sqrt(static_cast<double>(k));
    J(k - 1, k) = b;
    J(k, k - 1) = b;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(J);
  nodes.resize(order);
  weights.resize(order);
  for (int i = 0; i < order; ++i) {
    nodes[i] = es.eigenvalues()(i);
    const double v = es.eigenvectors()(0, i);
    weights[i] = v * v;
  }
}

}  // namespace

double population_risk_quadrature(const GroupAction& G, const Vec& theta_star,
                                  double sigma, const Vec& theta, int order) {
  if (G.d > 2) {
    throw std::invalid_argument(
        "population_risk_quadrature: only d <= 2 is supported");
  }
  if (order < 2) throw std::invalid_argument("quadrature: order must be >= 2");
  if (theta.size() != G.d || theta_star.size() != G.d) {
    throw std::invalid_argument("quadrature: dimension mismatch");
  }
  std::vector<double> x, w;
  gauss_hermite(order, x, w);
  const Mat B = exponent_matrix(G, theta, sigma);
  const int d = G.d;
  Vec y(d), s(G.K);
  double acc = 0.0;
  auto log_mean = [&](const Vec& yy) {
    s.noalias() = B.transpose() * yy;
    const double m = s.maxCoeff();
    double Z = 0.0;
    for (int k = 0; k < G.K; ++k) Z += std::exp(s(k) - m);
    return m + std::log(Z) - std::log(static_cast<double>(G.K));
  };
  if (d == 1) {
    for (int i = 0; i < order; ++i) {
      y(0) = theta_star(0) + sigma * x[i];
      acc += w[i] * log_mean(y);
    }
  } else {
    for (int i = 0; i < order; ++i) {
      for (int j = 0; j < order; ++j) {
        y(0) = theta_star(0) + sigma * x[i];
        y(1) = theta_star(1) + sigma * x[j];
        acc += w[i] * w[j] * log_mean(y);
      }
    }
  }
  return theta.squaredNorm() / (2.0 * sigma * sigma) - acc;
}

}  // namespace orbitml
