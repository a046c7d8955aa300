// Set partitions and cumulants of finitely supported laws.
#pragma once

#include <vector>

#include "orbitml/groups.hpp"
#include "orbitml/tensor.hpp"

namespace orbitml {

/// Partition of {0,...,n-1} in restricted-growth form: block_of[i] is the
/// block index of element i, and blocks are numbered by first occurrence,
/// so block_of[0] == 0 and each new label is the previous maximum plus 1.
struct SetPartition {
  int n = 0;
  std::vector<int> block_of;
  int num_blocks = 0;
};

/// All partitions of an n-element set (n <= 10), in the deterministic
/// order produced by lexicographic restricted-growth enumeration.
/// The result is cached per n; Bell(10) = 115975.
const std::vector<SetPartition>& enumerate_partitions(int n);

/// Partitions of {0,...,ell+m-1} whose first m position pairs (2j, 2j+1)
/// land in distinct blocks.
std::vector<SetPartition> filtered_partitions(int ell, int m);

/// A finitely supported law on R^dim: atom a is row a of atoms, with
/// probability weights(a). Weights must sum to 1 within 1e-12.
struct FiniteLaw {
  Mat atoms;    // A x dim
  Vec weights;  // length A
};

void validate_law(const FiniteLaw& law);

/// Joint mixed cumulant kappa(X_{c_1},...,X_{c_k}) of the coordinates
/// listed in coords (k <= 8), via the Moebius sum over set partitions:
///   sum_pi (|pi|-1)! (-1)^{|pi|-1} prod_{B in pi} E[prod_{i in B} X_{c_i}].
double mixed_cumulant(const FiniteLaw& law, const std::vector<int>& coords);

/// Order-ell cumulant tensor (ell <= 4, dim^ell <= 1e6); symmetric, so
/// entries are computed on sorted index tuples and mirrored.
DenseTensor cumulant_tensor(const FiniteLaw& law, int ell);

}  // namespace orbitml
