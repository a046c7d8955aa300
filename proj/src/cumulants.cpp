#include "orbitml/cumulants.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace orbitml {

namespace {

constexpr int kMaxPartitionN = 10;

std::vector<SetPartition> build_partitions(int n) {
  // Lexicographic enumeration of restricted-growth strings.
  std::vector<SetPartition> out;
  std::vector<int> a(n, 0);
  for (;;) {
    SetPartition p;
    p.n = n;
    p.block_of = a;
    p.num_blocks = *std::max_element(a.begin(), a.end()) + 1;
    out.push_back(std::move(p));
    // Advance to the next restricted-growth string.
    int i = n - 1;
    for (; i > 0; --i) {
      const int cap = 1 + *std::max_element(a.begin(), a.begin() + i);
      if (a[i] < cap) break;
    }
    if (i == 0) break;
    ++a[i];
    std::fill(a.begin() + i + 1, a.end(), 0);
  }
  return out;
}

}  // namespace

const std::vector<SetPartition>& enumerate_partitions(int n) {
  if (n < 1 || n > kMaxPartitionN) {
    throw std::invalid_argument("enumerate_partitions: n must be in [1, 10]");
  }
  static std::array<std::vector<SetPartition>, kMaxPartitionN + 1> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  if (cache[n].empty()) cache[n] = build_partitions(n);
  return cache[n];
}

std::vector<SetPartition> filtered_partitions(int ell, int m) {
  if (m < 0 || ell < 0 || m > ell) {
    throw std::invalid_argument("filtered_partitions: need 0 <= m <= ell");
  }
  const int n = ell + m;
  std::vector<SetPartition> out;
  for (const SetPartition& p : enumerate_partitions(n)) {
    bool ok = true;
    for (int j = 0; j < m && ok; ++j) {
      ok = p.block_of[2 * j] != p.block_of[2 * j + 1];
    }
    if (ok) out.push_back(p);
  }
  return out;
}

void validate_law(const FiniteLaw& law) {
  if (law.atoms.rows() < 1 || law.atoms.cols() < 1) {
    throw std::invalid_argument("law: needs at least one atom and coordinate");
  }
  if (law.weights.size() != law.atoms.rows()) {
    throw std::invalid_argument("law: weight count does not match atoms");
  }
  if (law.weights.minCoeff() < 0.0) {
    throw std::invalid_argument("law: negative weight");
  }
  if (std::abs(law.weights.sum() - 1.0) > 1e-12) {
    throw std::invalid_argument("law: weights must sum to 1");
  }
}

namespace {

// E[prod_{i in subset} X_{coords[i]}] for each block of the partition.
double partition_moment_product(const FiniteLaw& law,
                                const std::vector<int>& coords,
                                const SetPartition& p) {
  double prod = 1.0;
  for (int b = 0; b < p.num_blocks; ++b) {
    double m = 0.0;
    for (int a = 0; a < law.atoms.rows(); ++a) {
      double term = law.weights(a);
      for (int i = 0; i < p.n; ++i) {
        if (p.block_of[i] == b) term *= law.atoms(a, coords[i]);
      }
      m += term;
    }
    prod *= m;
  }
  return prod;
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

double mixed_cumulant(const FiniteLaw& law, const std::vector<int>& coords) {
  validate_law(law);
  const int k = static_cast<int>(coords.size());
  if (k < 1 || k > 8) {
    throw std::invalid_argument("mixed_cumulant: order must be in [1, 8]");
  }
  for (int c : coords) {
    if (c < 0 || c >= law.atoms.cols()) {
      throw std::invalid_argument("mixed_cumulant: coordinate out of range");
    }
  }
  double sum = 0.0;
  for (const SetPartition& p : enumerate_partitions(k)) {
    const double sign = (p.num_blocks % 2 == 1) ? 1.0 : -1.0;
    sum += sign * factorial(p.num_blocks - 1) *
           partition_moment_product(law, coords, p);
  }
  return sum;
}

DenseTensor cumulant_tensor(const FiniteLaw& law, int ell) {
  validate_law(law);
  if (ell < 1 || ell > 4) {
    throw std::invalid_argument("cumulant_tensor: order must be in [1, 4]");
  }
  const int d = static_cast<int>(law.atoms.cols());
  DenseTensor T(d, ell);

  // Fill sorted index tuples, then mirror over all permutations.
  std::vector<int> idx(ell, 0);
  std::vector<int> perm(ell);
  for (;;) {
    const double v = mixed_cumulant(law, idx);
    std::copy(idx.begin(), idx.end(), perm.begin());
    do {
      T.at(perm) = v;
    } while (std::next_permutation(perm.begin(), perm.end()));
    // Advance the nondecreasing tuple.
    int pos = ell - 1;
    while (pos >= 0 && idx[pos] == d - 1) --pos;
    if (pos < 0) break;
    const int v0 = idx[pos] + 1;
    for (int j = pos; j < ell; ++j) idx[j] = v0;
  }
  return T;
}

}  // namespace orbitml
