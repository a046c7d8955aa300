#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "orbitml/groups.hpp"

using namespace orbitml;

namespace {

/// Re-checks the group axioms directly: every product lands back in the
/// element list and every element has an inverse in the list.
void check_axioms(const GroupAction& G) {
  REQUIRE(G.K == static_cast<int>(G.elements.size()));
  const Mat id = Mat::Identity(G.d, G.d);
  CHECK((G.elements[0] - id).cwiseAbs().maxCoeff() <= 1e-12);
  for (int a = 0; a < G.K; ++a) {
    CHECK((G.elements[a] * G.elements[a].transpose() - id).cwiseAbs().maxCoeff() <= 1e-10);
    bool has_inverse = false;
    for (int b = 0; b < G.K; ++b) {
      if ((G.elements[a] * G.elements[b] - id).cwiseAbs().maxCoeff() <= 1e-8)
        has_inverse = true;
      bool in_set = false;
      const Mat prod = G.elements[a] * G.elements[b];
      for (int c = 0; c < G.K; ++c)
        if ((prod - G.elements[c]).cwiseAbs().maxCoeff() <= 1e-8) in_set = true;
      CHECK(in_set);
    }
    CHECK(has_inverse);
  }
}

}  // namespace

TEST_SUITE("groups") {

TEST_CASE("constructors satisfy the group axioms") {
  check_axioms(make_rotations(1));
  check_axioms(make_rotations(5));
  check_axioms(make_cyclic(2));
  check_axioms(make_cyclic(6));
  check_axioms(make_symmetric(3));
  check_axioms(make_symmetric(4));
  check_axioms(make_product(make_rotations(3), make_cyclic(3)));
}

TEST_CASE("constructor shapes and names") {
  const GroupAction rot = make_rotations(4);
  CHECK(rot.d == 2);
  CHECK(rot.K == 4);
  CHECK(rot.name == "rotations(4)");

  const GroupAction cyc = make_cyclic(5);
  CHECK(cyc.d == 5);
  CHECK(cyc.K == 5);
  CHECK(cyc.name == "cyclic(5)");

  const GroupAction sym = make_symmetric(4);
  CHECK(sym.d == 4);
  CHECK(sym.K == 24);
  CHECK(sym.name == "symmetric(4)");

  const GroupAction prod = make_product(rot, cyc);
  CHECK(prod.d == 7);
  CHECK(prod.K == 20);
}

TEST_CASE("cyclic elements are coordinate shifts") {
  const GroupAction G = make_cyclic(4);
  Vec theta(4);
  theta << 1.0, 2.0, 3.0, 4.0;
  const Vec shifted = G.elements[1] * theta;
  bool matches_shift = false;
  Vec expect(4);
  expect << 4.0, 1.0, 2.0, 3.0;
  if ((shifted - expect).norm() <= 1e-12) matches_shift = true;
  expect << 2.0, 3.0, 4.0, 1.0;
  if ((shifted - expect).norm() <= 1e-12) matches_shift = true;
  CHECK(matches_shift);
}

TEST_CASE("order caps are enforced") {
  CHECK_THROWS_AS(make_symmetric(8), std::invalid_argument);
  CHECK_NOTHROW(make_symmetric(7));
  CHECK_THROWS_AS(make_rotations(0), std::invalid_argument);
  CHECK_THROWS_AS(make_cyclic(0), std::invalid_argument);
}

TEST_CASE("mean projection is the average and a projection") {
  const GroupAction rot = make_rotations(3);
  CHECK(mean_projection(rot).cwiseAbs().maxCoeff() <= 1e-12);

  const GroupAction cyc = make_cyclic(5);
  const Mat P = mean_projection(cyc);
  CHECK((P * P - P).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(std::abs(P.trace() - 1.0) <= 1e-12);
  for (const Mat& g : cyc.elements)
    CHECK((g * P - P).cwiseAbs().maxCoeff() <= 1e-12);

  const GroupAction sym = make_symmetric(3);
  const Mat Q = mean_projection(sym);
  CHECK((Q - Mat::Constant(3, 3, 1.0 / 3.0)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("kernel decomposition splits fixed and mean-zero parts") {
  for (const GroupAction& G :
       {make_cyclic(5), make_symmetric(3), make_rotations(4)}) {
    const KernelDecomposition kd = kernel_decomposition(G);
    const int d1 = static_cast<int>(kd.V1.cols());
    const int d2 = static_cast<int>(kd.V2.cols());
    REQUIRE(d1 + d2 == G.d);

    Mat B(G.d, G.d);
    if (d1 > 0) B.leftCols(d1) = kd.V1;
    if (d2 > 0) B.rightCols(d2) = kd.V2;
    CHECK((B.transpose() * B - Mat::Identity(G.d, G.d)).cwiseAbs().maxCoeff() <= 1e-10);

    for (const Mat& g : G.elements)
      if (d1 > 0) CHECK((g * kd.V1 - kd.V1).cwiseAbs().maxCoeff() <= 1e-10);

    REQUIRE(kd.G2.K == G.K);
    if (d2 > 0) {
      CHECK(mean_projection(kd.G2).cwiseAbs().maxCoeff() <= 1e-10);
      for (int k = 0; k < G.K; ++k)
        CHECK((kd.V2.transpose() * G.elements[k] * kd.V2 - kd.G2.elements[k])
                  .cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("orbit counts distinct points") {
  const GroupAction cyc = make_cyclic(5);
  Vec theta(5);
  theta << 0.3, -1.2, 0.7, 2.0, -0.5;
  const Orbit orb = orbit(cyc, theta);
  CHECK(static_cast<int>(orb.points.size()) == 5);
  CHECK(orb.distinct_count == 5);

  const Orbit fixed_orb = orbit(cyc, Vec::Constant(5, 1.5));
  CHECK(fixed_orb.distinct_count == 1);

  const GroupAction sym = make_symmetric(3);
  Vec rep(3);
  rep << 1.0, 1.0, 2.0;
  CHECK(orbit(sym, rep).distinct_count == 3);
}

TEST_CASE("orbit distance vanishes on the orbit and is symmetric") {
  const GroupAction G = make_cyclic(6);
  Vec theta(6);
  theta << 1.0, -0.4, 0.2, 0.9, -1.1, 0.3;
  const Vec shifted = G.elements[2] * theta;
  CHECK(orbit_distance(G, theta, shifted) <= 1e-12);

  Vec mu(6);
  mu << 0.5, 0.1, -0.7, 1.3, 0.8, -0.2;
  CHECK(std::abs(orbit_distance(G, theta, mu) - orbit_distance(G, mu, theta)) <= 1e-12);
  CHECK(orbit_distance(G, theta, mu) <= (theta - mu).norm() + 1e-15);
}

TEST_CASE("group json round trip") {
  const GroupAction G = make_product(make_rotations(3), make_symmetric(3));
  const std::string path = "group_roundtrip.json";
  save_group_json(G, path);
  const GroupAction H = load_group_json(path);
  std::remove(path.c_str());

  CHECK(H.name == G.name);
  REQUIRE(H.d == G.d);
  REQUIRE(H.K == G.K);
  double worst = 0.0;
  for (int k = 0; k < G.K; ++k)
    worst = std::max(worst, (H.elements[k] - G.elements[k]).cwiseAbs().maxCoeff());
  CHECK(worst == 0.0);
  CHECK_NOTHROW(validate_group(H));
}

}  // TEST_SUITE
