#include "orbitml/groups.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace orbitml {

namespace {

Mat identity(int d) { return Mat::Identity(d, d); }

double max_abs(const Mat& A) { return A.cwiseAbs().maxCoeff(); }

int find_element(const GroupAction& G, const Mat& M, double tol) {
  for (int k = 0; k < G.K; ++k) {
    if (max_abs(G.elements[k] - M) <= tol) return k;
  }
  return -1;
}

}  // namespace

void validate_group(const GroupAction& G) {
  const double orth_tol = 1e-12;
  const double axiom_tol = 1e-10;
  if (G.d < 1) throw std::invalid_argument("group: d must be >= 1");
  if (G.K < 1 || static_cast<int>(G.elements.size()) != G.K) {
    throw std::invalid_argument("group: element count does not match K");
  }
  for (const Mat& g : G.elements) {
    if (g.rows() != G.d || g.cols() != G.d) {
      throw std::invalid_argument("group: element has wrong dimensions");
    }
    if (max_abs(g.transpose() * g - identity(G.d)) > orth_tol) {
      throw std::invalid_argument("group: element is not orthogonal");
    }
  }
  if (max_abs(G.elements[0] - identity(G.d)) > axiom_tol) {
    throw std::invalid_argument("group: element 0 is not the identity");
  }
  for (int a = 0; a < G.K; ++a) {
    if (find_element(G, G.elements[a].transpose(), axiom_tol) < 0) {
      throw std::invalid_argument("group: missing inverse element");
    }
    for (int b = 0; b < G.K; ++b) {
      if (find_element(G, G.elements[a] * G.elements[b], axiom_tol) < 0) {
        throw std::invalid_argument("group: not closed under products");
      }
    }
  }
}

GroupAction make_rotations(int K) {
  if (K < 1) throw std::invalid_argument("make_rotations: K must be >= 1");
  GroupAction G;
  G.name = "rotations(" + std::to_string(K) + ")";
  G.d = 2;
  G.K = K;
  G.elements.reserve(K);
  for (int k = 0; k < K; ++k) {
    const double a = 2.0 * std::numbers::pi * k / K;
    Mat R(2, 2);
    R << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    G.elements.push_back(R);
  }
  return G;
}

GroupAction make_cyclic(int d) {
  if (d < 1) throw std::invalid_argument("make_cyclic: d must be >= 1");
  GroupAction G;
  G.name = "cyclic(" + std::to_string(d) + ")";
  G.d = d;
  G.K = d;
  G.elements.reserve(d);
  for (int k = 0; k < d; ++k) {
    Mat S = Mat::Zero(d, d);
    for (int j = 0; j < d; ++j) S(j, (j - k + d) % d) = 1.0;
    G.elements.push_back(S);
  }
  return G;
}

GroupAction make_symmetric(int d, long max_order) {
  if (d < 1) throw std::invalid_argument("make_symmetric: d must be >= 1");
  long order = 1;
  for (int i = 2; i <= d; ++i) {
    order *= i;
    if (order > max_order) {
      throw std::invalid_argument(
          "make_symmetric: d! exceeds the order cap of " +
          std::to_string(max_order));
    }
  }
  GroupAction G;
  G.name = "symmetric(" + std::to_string(d) + ")";
  G.d = d;
  G.K = static_cast<int>(order);
  std::vector<int> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    Mat P = Mat::Zero(d, d);
    // (P x)_j = x_{perm[j]}
    for (int j = 0; j < d; ++j) P(j, perm[j]) = 1.0;
    G.elements.push_back(P);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return G;
}

GroupAction make_product(const GroupAction& A, const GroupAction& B) {
  GroupAction G;
  G.name = "product(" + A.name + "," + B.name + ")";
  G.d = A.d + B.d;
  G.K = A.K * B.K;
  G.elements.reserve(G.K);
  for (int i = 0; i < A.K; ++i) {
    for (int j = 0; j < B.K; ++j) {
      Mat M = Mat::Zero(G.d, G.d);
      M.topLeftCorner(A.d, A.d) = A.elements[i];
      M.bottomRightCorner(B.d, B.d) = B.elements[j];
      G.elements.push_back(M);
    }
  }
  return G;
}

Mat mean_projection(const GroupAction& G) {
  Mat P = Mat::Zero(G.d, G.d);
  for (const Mat& g : G.elements) P += g;
  P /= static_cast<double>(G.K);
  return P;
}

KernelDecomposition kernel_decomposition(const GroupAction& G) {
  const Mat P = mean_projection(G);
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (P + P.transpose()));
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("kernel_decomposition: eigensolver failed");
  }
  // Eigenvalues of a projection are 0 or 1; split at 0.5.
  std::vector<int> fixed, kernel;
  for (int i = 0; i < G.d; ++i) {
    if (es.eigenvalues()(i) > 0.5) fixed.push_back(i);
    else kernel.push_back(i);
  }
  KernelDecomposition out;
  out.V1.resize(G.d, static_cast<int>(fixed.size()));
  for (int c = 0; c < out.V1.cols(); ++c) {
    out.V1.col(c) = es.eigenvectors().col(fixed[c]);
  }
  out.V2.resize(G.d, static_cast<int>(kernel.size()));
  for (int c = 0; c < out.V2.cols(); ++c) {
    out.V2.col(c) = es.eigenvectors().col(kernel[c]);
  }
  out.G2.name = G.name + "|ker";
  out.G2.d = static_cast<int>(out.V2.cols());
  out.G2.K = G.K;
  out.G2.elements.reserve(G.K);
  for (const Mat& g : G.elements) {
    out.G2.elements.push_back(out.V2.transpose() * g * out.V2);
  }
  return out;
}

Orbit orbit(const GroupAction& G, const Vec& theta, double tol) {
  if (theta.size() != G.d) {
    throw std::invalid_argument("orbit: theta has wrong dimension");
  }
  Orbit o;
  o.points.reserve(G.K);
  for (const Mat& g : G.elements) o.points.push_back(g * theta);
  o.distinct_count = 0;
  for (int i = 0; i < G.K; ++i) {
    bool dup = false;
    for (int j = 0; j < i && !dup; ++j) {
      dup = (o.points[i] - o.points[j]).norm() <= tol;
    }
    if (!dup) ++o.distinct_count;
  }
  return o;
}

double orbit_distance(const GroupAction& G, const Vec& theta, const Vec& mu) {
  if (theta.size() != G.d || mu.size() != G.d) {
    throw std::invalid_argument("orbit_distance: dimension mismatch");
  }
  double best = std::numeric_limits<double>::infinity();
  for (const Mat& g : G.elements) best = std::min(best, (theta - g * mu).norm());
  return best;
}

void save_group_json(const GroupAction& G, const std::string& path) {
  nlohmann::json j;
  j["name"] = G.name;
  j["d"] = G.d;
  j["K"] = G.K;
  auto& elems = j["elements"] = nlohmann::json::array();
  for (const Mat& g : G.elements) {
    nlohmann::json m = nlohmann::json::array();
    for (int r = 0; r < G.d; ++r) {
      for (int c = 0; c < G.d; ++c) m.push_back(g(r, c));
    }
    elems.push_back(std::move(m));
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_group_json: cannot open " + path);
  out << j.dump(2) << "\n";
}

GroupAction load_group_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_group_json: cannot open " + path);
  nlohmann::json j;
  in >> j;
  GroupAction G;
  G.name = j.at("name").get<std::string>();
  G.d = j.at("d").get<int>();
  G.K = j.at("K").get<int>();
  const auto& elems = j.at("elements");
  if (static_cast<int>(elems.size()) != G.K) {
    throw std::runtime_error("load_group_json: element count mismatch");
  }
  for (const auto& m : elems) {
    if (static_cast<int>(m.size()) != G.d * G.d) {
      throw std::runtime_error("load_group_json: element size mismatch");
    }
    Mat g(G.d, G.d);
    int idx = 0;
    for (int r = 0; r < G.d; ++r) {
      for (int c = 0; c < G.d; ++c) g(r, c) = m[idx++].get<double>();
    }
    G.elements.push_back(std::move(g));
  }
  validate_group(G);
  return G;
}

}  // namespace orbitml
