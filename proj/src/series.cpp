#include "orbitml/series.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace orbitml {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double b = 1.0;
  for (int i = 0; i < k; ++i) b = b * (n - i) / (i + 1);
  return b;
}

void check_theta_dims(const GroupAction& G, const Vec& theta,
                      const Vec& theta_star, const char* where) {
  if (theta.size() != G.d || theta_star.size() != G.d) {
    throw std::invalid_argument(std::string(where) +
                                ": theta and theta_star must have length d");
  }
}

int find_root(std::vector<int>& parent, int a) {
  while (parent[a] != a) {
    parent[a] = parent[parent[a]];
    a = parent[a];
  }
  return a;
}

/// Sum over assignments t in {0..K-1}^{blocks} of
/// prod_{(a,b) in edges} A(t_a, t_b) * prod_b bpow[b][t_b],
/// where bpow[b] is the per-element unary factor of local block b.
double component_sum(const Mat& A, const std::vector<std::pair<int, int>>& edges,
                     const std::vector<std::vector<double>>& bpow) {
  const int nb = static_cast<int>(bpow.size());
  const int K = static_cast<int>(A.rows());
  std::vector<int> t(nb, 0);
  double total = 0.0;
  while (true) {
    double prod = 1.0;
    for (int b = 0; b < nb && prod != 0.0; ++b) prod *= bpow[b][t[b]];
    if (prod != 0.0) {
      for (const auto& [a, b] : edges) prod *= A(t[a], t[b]);
    }
    total += prod;
    int pos = nb - 1;
    while (pos >= 0 && ++t[pos] == K) t[pos--] = 0;
    if (pos < 0) break;
  }
  return total;
}

}  // namespace

DenseTensor moment_tensor(const GroupAction& G, const Vec& theta, int ell) {
  if (ell < 1 || ell > 4) {
    throw std::invalid_argument("moment_tensor: order must be in 1..4");
  }
  if (theta.size() != G.d) {
    throw std::invalid_argument("moment_tensor: theta must have length d");
  }
  const int d = G.d;
  DenseTensor T(d, ell);
  std::vector<Vec> u(G.K);
  for (int k = 0; k < G.K; ++k) u[k] = G.elements[k] * theta;

  std::vector<int> idx(ell, 0);
  while (true) {
    double val = 0.0;
    for (int k = 0; k < G.K; ++k) {
      double p = 1.0;
      for (int j = 0; j < ell; ++j) p *= u[k](idx[j]);
      val += p;
    }
    val /= G.K;
    std::vector<int> perm = idx;
    do {
      T.at(perm) = val;
    } while (std::next_permutation(perm.begin(), perm.end()));
    int pos = ell - 1;
    while (pos >= 0 && idx[pos] + 1 >= d) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int j = pos + 1; j < ell; ++j) idx[j] = idx[pos];
  }
  return T;
}

double moment_objective(const GroupAction& G, const Vec& theta,
                        const Vec& theta_star, int ell) {
  check_theta_dims(G, theta, theta_star, "moment_objective");
  DenseTensor T = moment_tensor(G, theta, ell);
  T -= moment_tensor(G, theta_star, ell);
  return T.squared_norm();
}

double M_lm(const GroupAction& G, const SetPartition& pi, int m,
            const Vec& theta, const Vec& theta_star) {
  check_theta_dims(G, theta, theta_star, "M_lm");
  if (m < 0 || 2 * m > pi.n) {
    throw std::invalid_argument("M_lm: need 0 <= 2m <= n");
  }
  if (pi.n > 8) {
    throw std::invalid_argument("M_lm: l + m must be at most 8");
  }
  const int K = G.K;
  const int nb = pi.num_blocks;

  // Per-element unary factors b_t = <theta*, g_t theta> and the Gram
  // matrix A(s,t) = <g_s theta, g_t theta>.
  Mat U(G.d, K);
  for (int k = 0; k < K; ++k) U.col(k) = G.elements[k] * theta;
  Vec bvec = U.transpose() * theta_star;
  Mat A = U.transpose() * U;

  std::vector<int> star_count(nb, 0);
  for (int j = 2 * m; j < pi.n; ++j) ++star_count[pi.block_of[j]];

  std::vector<std::pair<int, int>> edges;
  int same_block_pairs = 0;
  for (int j = 0; j < m; ++j) {
    int a = pi.block_of[2 * j];
    int b = pi.block_of[2 * j + 1];
    if (a == b) {
      ++same_block_pairs;
    } else {
      edges.emplace_back(a, b);
    }
  }

  std::vector<int> parent(nb);
  std::iota(parent.begin(), parent.end(), 0);
  for (const auto& [a, b] : edges) {
    parent[find_root(parent, a)] = find_root(parent, b);
  }

  std::vector<std::vector<int>> comp_blocks;
  std::vector<int> comp_of(nb, -1);
  for (int b = 0; b < nb; ++b) {
    int r = find_root(parent, b);
    if (comp_of[r] < 0) {
      comp_of[r] = static_cast<int>(comp_blocks.size());
      comp_blocks.emplace_back();
    }
    comp_of[b] = comp_of[r];
    comp_blocks[comp_of[r]].push_back(b);
  }

  double result = std::pow(theta.squaredNorm(), same_block_pairs);
  for (const auto& blocks : comp_blocks) {
    const int cb = static_cast<int>(blocks.size());
    double states = std::pow(static_cast<double>(K), cb);
    if (states > 1e7) {
      throw std::invalid_argument(
          "M_lm: component enumeration exceeds the 1e7 state cap");
    }
    std::vector<int> local(nb, -1);
    for (int i = 0; i < cb; ++i) local[blocks[i]] = i;
    std::vector<std::pair<int, int>> local_edges;
    for (const auto& [a, b] : edges) {
      if (local[a] >= 0) local_edges.emplace_back(local[a], local[b]);
    }
    std::vector<std::vector<double>> bpow(cb, std::vector<double>(K, 1.0));
    for (int i = 0; i < cb; ++i) {
      int e = star_count[blocks[i]];
      for (int t = 0; t < K; ++t) bpow[i][t] = std::pow(bvec(t), e);
    }
    result *= component_sum(A, local_edges, bpow) / states;
  }
  return result;
}

namespace {

double S_ell_generic(const GroupAction& G, const Vec& theta,
                     const Vec& theta_star, int ell) {
  double total = 0.0;
  for (int m = 0; m <= ell; ++m) {
    const double coeff = binom(ell, m) / std::pow(2.0, m);
    double inner = 0.0;
    for (const SetPartition& pi : filtered_partitions(ell, m)) {
      const double sign = (pi.num_blocks % 2 == 0) ? 1.0 : -1.0;
      inner += sign * factorial(pi.num_blocks - 1) *
               M_lm(G, pi, m, theta, theta_star);
    }
    total += coeff * inner;
  }
  return total / factorial(ell);
}

struct MeanZeroWork {
  std::vector<Vec> u;  // h_k x
  Vec a;               // <x*, h_k x>
  Vec c;               // <x, h_k x>
  Vec p;               // sum_k a_k u_k
  Vec q;               // sum_k c_k u_k
};

MeanZeroWork mean_zero_work(const GroupAction& H, const Vec& x,
                            const Vec& xs) {
  MeanZeroWork w;
  const int K = H.K;
  w.u.resize(K);
  w.a.resize(K);
  w.c.resize(K);
  w.p = Vec::Zero(x.size());
  w.q = Vec::Zero(x.size());
  for (int k = 0; k < K; ++k) {
    w.u[k] = H.elements[k] * x;
    w.a(k) = xs.dot(w.u[k]);
    w.c(k) = x.dot(w.u[k]);
    w.p += w.a(k) * w.u[k];
    w.q += w.c(k) * w.u[k];
  }
  return w;
}

double S2_mean_zero(const GroupAction& H, const Vec& x, const Vec& xs) {
  MeanZeroWork w = mean_zero_work(H, x, xs);
  const double K = H.K;
  return -0.5 * w.a.squaredNorm() / K + 0.25 * w.c.squaredNorm() / K;
}

double S3_mean_zero(const GroupAction& H, const Vec& x, const Vec& xs) {
  MeanZeroWork w = mean_zero_work(H, x, xs);
  const double K = H.K;
  double a3 = 0.0;
  double c3 = 0.0;
  for (int k = 0; k < H.K; ++k) {
    a3 += w.a(k) * w.a(k) * w.a(k);
    c3 += w.c(k) * w.c(k) * w.c(k);
  }
  return -a3 / (6.0 * K) + c3 / (12.0 * K) +
         0.5 * w.p.squaredNorm() / (K * K) -
         w.q.squaredNorm() / (3.0 * K * K);
}

Vec S2_mean_zero_grad(const GroupAction& H, const Vec& x, const Vec& xs) {
  MeanZeroWork w = mean_zero_work(H, x, xs);
  const double K = H.K;
  Vec g = Vec::Zero(x.size());
  for (int k = 0; k < H.K; ++k) {
    const Mat& h = H.elements[k];
    g += (-w.a(k) / K) * (h.transpose() * xs);
    g += (0.5 * w.c(k) / K) * (h.transpose() * x + w.u[k]);
  }
  return g;
}

Vec S3_mean_zero_grad(const GroupAction& H, const Vec& x, const Vec& xs) {
  MeanZeroWork w = mean_zero_work(H, x, xs);
  const double K = H.K;
  Vec g = Vec::Zero(x.size());
  for (int k = 0; k < H.K; ++k) {
    const Mat& h = H.elements[k];
    Vec wk = h.transpose() * xs;       // grad of a_k
    Vec vk = h.transpose() * x + w.u[k];  // grad of c_k
    g += (-0.5 * w.a(k) * w.a(k) / K) * wk;
    g += (0.25 * w.c(k) * w.c(k) / K) * vk;
    g += (1.0 / (K * K)) * (w.u[k].dot(w.p) * wk + w.a(k) * (h.transpose() * w.p));
    g += (-2.0 / (3.0 * K * K)) *
         (w.u[k].dot(w.q) * vk + w.c(k) * (h.transpose() * w.q));
  }
  return g;
}

double S_ell_closed(const GroupAction& G, const Vec& theta,
                    const Vec& theta_star, int ell) {
  if (ell > 3) {
    throw std::invalid_argument(
        "S_ell: closed form is only available for orders 1..3");
  }
  KernelDecomposition kd = kernel_decomposition(G);
  if (ell == 1) {
    if (kd.V1.cols() == 0) return 0.0;
    Vec t1 = kd.V1.transpose() * theta;
    Vec s1 = kd.V1.transpose() * theta_star;
    return 0.5 * t1.squaredNorm() - s1.dot(t1);
  }
  if (kd.V2.cols() == 0) return 0.0;
  Vec x = kd.V2.transpose() * theta;
  Vec xs = kd.V2.transpose() * theta_star;
  return (ell == 2) ? S2_mean_zero(kd.G2, x, xs) : S3_mean_zero(kd.G2, x, xs);
}

/// Richardson-extrapolated central difference of a scalar function.
template <typename F>
Vec fd_gradient(F&& f, const Vec& theta) {
  const int d = static_cast<int>(theta.size());
  const double h = 1e-5 * std::max(1.0, theta.norm());
  Vec g(d);
  for (int j = 0; j < d; ++j) {
    auto central = [&](double step) {
      Vec tp = theta;
      Vec tm = theta;
      tp(j) += step;
      tm(j) -= step;
      return (f(tp) - f(tm)) / (2.0 * step);
    };
    const double dh = central(h);
    const double dh2 = central(0.5 * h);
    g(j) = (4.0 * dh2 - dh) / 3.0;
  }
  return g;
}

/// Richardson-extrapolated central difference of a vector function,
/// symmetrized.
template <typename F>
Mat fd_jacobian_sym(F&& f, const Vec& theta) {
  const int d = static_cast<int>(theta.size());
  const double h = 1e-5 * std::max(1.0, theta.norm());
  Mat J(d, d);
  for (int j = 0; j < d; ++j) {
    auto central = [&](double step) -> Vec {
      Vec tp = theta;
      Vec tm = theta;
      tp(j) += step;
      tm(j) -= step;
      return (f(tp) - f(tm)) / (2.0 * step);
    };
    const Vec dh = central(h);
    const Vec dh2 = central(0.5 * h);
    J.col(j) = (4.0 * dh2 - dh) / 3.0;
  }
  return 0.5 * (J + J.transpose());
}

}  // namespace

double S_ell(const GroupAction& G, const Vec& theta, const Vec& theta_star,
             int ell, SeriesMethod method) {
  check_theta_dims(G, theta, theta_star, "S_ell");
  if (ell < 1 || ell > 4) {
    throw std::invalid_argument("S_ell: order must be in 1..4");
  }
  if (method == SeriesMethod::ClosedForm) {
    return S_ell_closed(G, theta, theta_star, ell);
  }
  return S_ell_generic(G, theta, theta_star, ell);
}

Vec S_ell_grad_closed(const GroupAction& G, const Vec& theta,
                      const Vec& theta_star, int ell) {
  check_theta_dims(G, theta, theta_star, "S_ell_grad_closed");
  if (ell < 1 || ell > 3) {
    throw std::invalid_argument(
        "S_ell_grad_closed: order must be in 1..3");
  }
  KernelDecomposition kd = kernel_decomposition(G);
  if (ell == 1) {
    if (kd.V1.cols() == 0) return Vec::Zero(G.d);
    Vec t1 = kd.V1.transpose() * theta;
    Vec s1 = kd.V1.transpose() * theta_star;
    return kd.V1 * (t1 - s1);
  }
  if (kd.V2.cols() == 0) return Vec::Zero(G.d);
  Vec x = kd.V2.transpose() * theta;
  Vec xs = kd.V2.transpose() * theta_star;
  Vec gx = (ell == 2) ? S2_mean_zero_grad(kd.G2, x, xs)
                      : S3_mean_zero_grad(kd.G2, x, xs);
  return kd.V2 * gx;
}

Vec S_ell_grad(const GroupAction& G, const Vec& theta, const Vec& theta_star,
               int ell, SeriesMethod method) {
  check_theta_dims(G, theta, theta_star, "S_ell_grad");
  if (method == SeriesMethod::ClosedForm && ell <= 3) {
    return S_ell_grad_closed(G, theta, theta_star, ell);
  }
  return fd_gradient(
      [&](const Vec& t) {
        return S_ell(G, t, theta_star, ell, SeriesMethod::Generic);
      },
      theta);
}

Mat S_ell_hess(const GroupAction& G, const Vec& theta, const Vec& theta_star,
               int ell, SeriesMethod method) {
  check_theta_dims(G, theta, theta_star, "S_ell_hess");
  if (method == SeriesMethod::ClosedForm && ell <= 3) {
    return fd_jacobian_sym(
        [&](const Vec& t) { return S_ell_grad_closed(G, t, theta_star, ell); },
        theta);
  }
  return fd_jacobian_sym(
      [&](const Vec& t) {
        return fd_gradient(
            [&](const Vec& s) {
              return S_ell(G, s, theta_star, ell, SeriesMethod::Generic);
            },
            t);
      },
      theta);
}

EvalResult truncated_risk(const GroupAction& G, const Vec& theta,
                          const Vec& theta_star, double sigma, int k,
                          const EvalWant& want) {
  check_theta_dims(G, theta, theta_star, "truncated_risk");
  if (k < 1 || k > 4) {
    throw std::invalid_argument("truncated_risk: order must be in 1..4");
  }
  if (sigma <= 0.0) {
    throw std::invalid_argument("truncated_risk: sigma must be positive");
  }
  if (want.tensor3 || want.tensor4) {
    throw std::invalid_argument(
        "truncated_risk: only value, gradient and Hessian are available");
  }
  EvalResult res;
  if (want.grad) res.grad = Vec::Zero(G.d);
  if (want.hess) res.hess = Mat::Zero(G.d, G.d);
  for (int ell = 1; ell <= k; ++ell) {
    const double w = std::pow(sigma, -2.0 * ell);
    const SeriesMethod method =
        (ell <= 3) ? SeriesMethod::ClosedForm : SeriesMethod::Generic;
    res.value += w * S_ell(G, theta, theta_star, ell, method);
    if (want.grad) *res.grad += w * S_ell_grad(G, theta, theta_star, ell, method);
    if (want.hess) *res.hess += w * S_ell_hess(G, theta, theta_star, ell, method);
  }
  return res;
}

double empirical_term(const GroupAction& G, const Vec& eps, const Vec& theta,
                      const Vec& theta_star, int ell) {
  check_theta_dims(G, theta, theta_star, "empirical_term");
  if (eps.size() != G.d) {
    throw std::invalid_argument("empirical_term: eps must have length d");
  }
  if (ell < 1 || ell > 8) {
    throw std::invalid_argument("empirical_term: order must be in 1..8");
  }
  FiniteLaw law;
  law.atoms.resize(G.K, 2);
  law.weights = Vec::Constant(G.K, 1.0 / G.K);
  for (int k = 0; k < G.K; ++k) {
    Vec u = G.elements[k] * theta;
    law.atoms(k, 0) = eps.dot(u);
    law.atoms(k, 1) = theta_star.dot(u);
  }
  double total = (ell == 2) ? 0.5 * theta.squaredNorm() : 0.0;
  for (int k = (ell + 1) / 2; k <= ell; ++k) {
    std::vector<int> coords;
    coords.insert(coords.end(), 2 * k - ell, 0);
    coords.insert(coords.end(), ell - k, 1);
    total -= binom(k, ell - k) / factorial(k) * mixed_cumulant(law, coords);
  }
  return total;
}

}  // namespace orbitml
