// Finite orthogonal matrix group actions on R^d.
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace orbitml {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// A finite subgroup of O(d), stored as an explicit list of matrices.
/// Element 0 is always the identity. Instances are immutable after
/// construction and safe to share across threads.
struct GroupAction {
  std::string name;
  int d = 0;
  int K = 0;
  std::vector<Mat> elements;
};

/// Validates orthogonality (max-norm 1e-12) and the group axioms
/// (closure, identity first, inverses; tolerance 1e-10). Throws
/// std::invalid_argument on violation.
void validate_group(const GroupAction& G);

/// Planar rotations by multiples of 2*pi/K (d = 2, order K >= 1).
GroupAction make_rotations(int K);

/// Cyclic coordinate shifts on R^d (order d >= 1). Element k sends
/// (x_0,...,x_{d-1}) to the vector with (h^k x)_j = x_{(j-k) mod d}.
GroupAction make_cyclic(int d);

/// All coordinate permutations of R^d in lexicographic order (identity
/// first). Throws if d! exceeds max_order (default 5040).
GroupAction make_symmetric(int d, long max_order = 5040);

/// Block-diagonal product acting on R^{d1+d2}; element index i*K2+j is
/// diag(A_i, B_j), so the identity stays first.
GroupAction make_product(const GroupAction& A, const GroupAction& B);

/// P = mean of all elements; an orthogonal projection onto the fixed
/// subspace of the action.
Mat mean_projection(const GroupAction& G);

/// Orthonormal split R^d = range(P) + ker(P) and the restriction of the
/// action to ker(P), which has mean zero and the same order.
struct KernelDecomposition {
  Mat V1;          // d x d1, basis of the fixed subspace
  Mat V2;          // d x d2, basis of its orthogonal complement
  GroupAction G2;  // elements V2^T g V2, mean zero, order K
};
KernelDecomposition kernel_decomposition(const GroupAction& G);

/// The orbit {g theta : g in G}; distinct_count counts points that are
/// pairwise further than tol apart.
struct Orbit {
  std::vector<Vec> points;
  int distinct_count = 0;
};
Orbit orbit(const GroupAction& G, const Vec& theta, double tol = 1e-10);

/// min_g || theta - g mu ||.
double orbit_distance(const GroupAction& G, const Vec& theta, const Vec& mu);

/// JSON round trip: {name, d, K, elements (row-major)}.
void save_group_json(const GroupAction& G, const std::string& path);
GroupAction load_group_json(const std::string& path);

}  // namespace orbitml
