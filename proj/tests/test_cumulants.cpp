#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "orbitml/cumulants.hpp"

using namespace orbitml;

namespace {

FiniteLaw bernoulli(double p) {
  FiniteLaw law;
  law.atoms = Mat::Zero(2, 1);
  law.atoms(1, 0) = 1.0;
  law.weights = Vec(2);
  law.weights << 1.0 - p, p;
  return law;
}

/// Independent product of two one-dimensional laws on coordinates 0, 1.
FiniteLaw product_law(const FiniteLaw& a, const FiniteLaw& b) {
  const int na = static_cast<int>(a.atoms.rows());
  const int nb = static_cast<int>(b.atoms.rows());
  FiniteLaw law;
  law.atoms = Mat::Zero(na * nb, 2);
  law.weights = Vec(na * nb);
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j) {
      law.atoms(i * nb + j, 0) = a.atoms(i, 0);
      law.atoms(i * nb + j, 1) = b.atoms(j, 0);
      law.weights(i * nb + j) = a.weights(i) * b.weights(j);
    }
  return law;
}

}  // namespace

TEST_SUITE("cumulants") {

TEST_CASE("partition counts are the Bell numbers") {
  const int bell[9] = {1, 1, 2, 5, 15, 52, 203, 877, 4140};
  for (int n = 1; n <= 8; ++n)
    CHECK(static_cast<int>(enumerate_partitions(n).size()) == bell[n]);
  CHECK_THROWS_AS(enumerate_partitions(11), std::invalid_argument);
}

TEST_CASE("partitions are valid restricted growth strings") {
  for (const SetPartition& pi : enumerate_partitions(5)) {
    REQUIRE(static_cast<int>(pi.block_of.size()) == 5);
    int max_seen = -1;
    for (int b : pi.block_of) {
      CHECK(b <= max_seen + 1);
      max_seen = std::max(max_seen, b);
    }
    CHECK(pi.num_blocks == max_seen + 1);
  }
}

TEST_CASE("filtered partitions separate the designated pairs") {
  const auto filtered = filtered_partitions(2, 1);
  CHECK(static_cast<int>(filtered.size()) == 3);
  for (const SetPartition& pi : filtered)
    CHECK(pi.block_of[0] != pi.block_of[1]);

  int count = 0;
  for (const SetPartition& pi : enumerate_partitions(4))
    if (pi.block_of[0] != pi.block_of[1] && pi.block_of[2] != pi.block_of[3])
      ++count;
  CHECK(static_cast<int>(filtered_partitions(2, 2).size()) == count);
}

TEST_CASE("bernoulli cumulants match the classical formulas") {
  const double p = 0.3;
  const FiniteLaw law = bernoulli(p);
  const double q = 1.0 - p;
  CHECK(mixed_cumulant(law, {0}) == doctest::Approx(p).epsilon(1e-12));
  CHECK(mixed_cumulant(law, {0, 0}) == doctest::Approx(p * q).epsilon(1e-12));
  CHECK(mixed_cumulant(law, {0, 0, 0}) ==
        doctest::Approx(p * q * (1.0 - 2.0 * p)).epsilon(1e-12));
  CHECK(mixed_cumulant(law, {0, 0, 0, 0}) ==
        doctest::Approx(p * q * (1.0 - 6.0 * p * q)).epsilon(1e-12));
}

TEST_CASE("second mixed cumulant is the covariance") {
  FiniteLaw law;
  law.atoms = Mat(3, 2);
  law.atoms << 1.0, 2.0, -0.5, 0.3, 2.0, -1.0;
  law.weights = Vec(3);
  law.weights << 0.2, 0.5, 0.3;

  Vec mean = Vec::Zero(2);
  for (int a = 0; a < 3; ++a) mean += law.weights(a) * law.atoms.row(a).transpose();
  double cov = 0.0;
  for (int a = 0; a < 3; ++a)
    cov += law.weights(a) * (law.atoms(a, 0) - mean(0)) * (law.atoms(a, 1) - mean(1));
  CHECK(mixed_cumulant(law, {0, 1}) == doctest::Approx(cov).epsilon(1e-12));
  CHECK(mixed_cumulant(law, {1, 0}) == doctest::Approx(cov).epsilon(1e-12));
}

TEST_CASE("cumulants of independent coordinates vanish") {
  const FiniteLaw law = product_law(bernoulli(0.4), bernoulli(0.7));
  CHECK(std::abs(mixed_cumulant(law, {0, 1})) <= 1e-14);
  CHECK(std::abs(mixed_cumulant(law, {0, 0, 1})) <= 1e-14);
  CHECK(std::abs(mixed_cumulant(law, {0, 1, 1, 0})) <= 1e-14);
}

TEST_CASE("shift invariance beyond first order") {
  FiniteLaw law;
  law.atoms = Mat(3, 1);
  law.atoms << -1.0, 0.5, 2.0;
  law.weights = Vec(3);
  law.weights << 0.25, 0.5, 0.25;
  FiniteLaw shifted = law;
  shifted.atoms.array() += 3.7;

  for (int k = 2; k <= 4; ++k) {
    const std::vector<int> coords(k, 0);
    CHECK(mixed_cumulant(shifted, coords) ==
          doctest::Approx(mixed_cumulant(law, coords)).epsilon(1e-10));
  }
  CHECK(mixed_cumulant(shifted, {0}) ==
        doctest::Approx(mixed_cumulant(law, {0}) + 3.7).epsilon(1e-12));
}

TEST_CASE("cumulant tensor entries agree with mixed cumulants") {
  FiniteLaw law;
  law.atoms = Mat(4, 2);
  law.atoms << 0.3, -1.0, 1.2, 0.4, -0.8, 0.9, 0.1, 0.2;
  law.weights = Vec::Constant(4, 0.25);

  const DenseTensor t3 = cumulant_tensor(law, 3);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        const int idx[3] = {i, j, k};
        CHECK(t3.at(idx) ==
              doctest::Approx(mixed_cumulant(law, {i, j, k})).epsilon(1e-12));
      }
}

TEST_CASE("law validation rejects bad weights") {
  FiniteLaw law;
  law.atoms = Mat::Zero(2, 1);
  law.weights = Vec(2);
  law.weights << 0.7, 0.2;
  CHECK_THROWS_AS(validate_law(law), std::invalid_argument);
}

}  // TEST_SUITE
