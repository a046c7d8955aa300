#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "orbitml/cumulants.hpp"
#include "orbitml/groups.hpp"
#include "orbitml/mra.hpp"
#include "orbitml/rng.hpp"
#include "orbitml/series.hpp"

using namespace orbitml;

namespace {

Vec random_vec(int d, std::uint64_t seed) {
  Vec v(d);
  for (int i = 0; i < d; ++i)
    v(i) = 2.0 * rng_unit_at(seed, static_cast<std::uint64_t>(i)) - 1.0;
  return v;
}

/// Direct enumeration of the block-moment: one independent uniform group
/// element per block, expectation taken by full K^(#blocks) enumeration.
double brute_M_lm(const GroupAction& G, const SetPartition& pi, int m,
                  const Vec& theta, const Vec& theta_star) {
  const int total = pi.n;
  const int nb = pi.num_blocks;
  std::vector<int> assign(nb, 0);
  double acc = 0.0;
  long count = 0;
  while (true) {
    double prod = 1.0;
    for (int j = 0; j < m; ++j) {
      const Vec ga = G.elements[assign[pi.block_of[2 * j]]] * theta;
      const Vec gb = G.elements[assign[pi.block_of[2 * j + 1]]] * theta;
      prod *= ga.dot(gb);
    }
    for (int j = 2 * m; j < total; ++j)
      prod *= theta_star.dot(G.elements[assign[pi.block_of[j]]] * theta);
    acc += prod;
    ++count;
    int pos = nb - 1;
    while (pos >= 0 && assign[pos] + 1 >= G.K) --pos;
    if (pos < 0) break;
    ++assign[pos];
    for (int j = pos + 1; j < nb; ++j) assign[j] = 0;
  }
  return acc / static_cast<double>(count);
}

double fd_partial(const GroupAction& G, const Vec& theta, const Vec& theta_star,
                  int ell, int i, double h) {
  Vec tp = theta, tm = theta;
  tp(i) += h;
  tm(i) -= h;
  return (S_ell(G, tp, theta_star, ell) - S_ell(G, tm, theta_star, ell)) /
         (2.0 * h);
}

}  // namespace

TEST_SUITE("series") {

TEST_CASE("block moments match full enumeration") {
  const GroupAction cyc = make_cyclic(3);
  const GroupAction rot = make_rotations(4);
  for (int ell = 1; ell <= 3; ++ell) {
    for (int m = 0; 2 * m <= ell; ++m) {
      for (const SetPartition& pi : filtered_partitions(ell, m)) {
        const Vec t3 = random_vec(3, 17 * ell + m);
        const Vec s3 = random_vec(3, 29 * ell + m);
        CHECK(M_lm(cyc, pi, m, t3, s3) ==
              doctest::Approx(brute_M_lm(cyc, pi, m, t3, s3)).epsilon(1e-11));
        const Vec t2 = random_vec(2, 37 * ell + m);
        const Vec s2 = random_vec(2, 41 * ell + m);
        CHECK(M_lm(rot, pi, m, t2, s2) ==
              doctest::Approx(brute_M_lm(rot, pi, m, t2, s2)).epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("generic and closed forms of the series terms agree") {
  std::vector<GroupAction> groups;
  for (int k = 3; k <= 5; ++k) groups.push_back(make_rotations(k));
  for (int d = 3; d <= 6; ++d) groups.push_back(make_cyclic(d));
  for (int d = 3; d <= 4; ++d) groups.push_back(make_symmetric(d));

  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const GroupAction& G = groups[gi];
    const Vec theta = random_vec(G.d, 1000 + gi);
    const Vec star = random_vec(G.d, 2000 + gi);
    for (int ell = 1; ell <= 3; ++ell) {
      const double generic = S_ell(G, theta, star, ell, SeriesMethod::Generic);
      const double closed = S_ell(G, theta, star, ell, SeriesMethod::ClosedForm);
      const double scale = std::max(1.0, std::abs(generic));
      CHECK(std::abs(generic - closed) / scale <= 1e-10);
    }
  }
}

TEST_CASE("first term only sees the fixed subspace") {
  const GroupAction G = make_cyclic(4);
  const Vec theta = random_vec(4, 11);
  const Vec star = random_vec(4, 12);
  const double v1t = 2.0 * theta.mean();
  const double v1s = 2.0 * star.mean();
  CHECK(S_ell(G, theta, star, 1) ==
        doctest::Approx(0.5 * v1t * v1t - v1s * v1t).epsilon(1e-12));
}

TEST_CASE("planar rotations second term has a radial closed form") {
  for (int K = 3; K <= 6; ++K) {
    const GroupAction G = make_rotations(K);
    const Vec theta = 1.7 * random_vec(2, 60 + K);
    const Vec star = 1.3 * random_vec(2, 70 + K);
    const double r2 = theta.squaredNorm();
    const double expect = r2 * r2 / 8.0 - r2 * star.squaredNorm() / 4.0;
    CHECK(S_ell(G, theta, star, 2) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(S_ell(G, theta, star, 2, SeriesMethod::Generic) ==
          doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("coordinate shifts second term matches the spectrum formula") {
  for (int d = 3; d <= 6; ++d) {
    const GroupAction G = make_cyclic(d);
    const Vec theta = random_vec(d, 80 + d);
    const Vec star = random_vec(d, 90 + d);
    double expect = 0.0;
    for (int i = 1; i < d; ++i) {
      double ar = 0.0, ai = 0.0, br = 0.0, bi = 0.0;
      for (int j = 0; j < d; ++j) {
        const double ang = 2.0 * M_PI * i * j / d;
        ar += theta(j) * std::cos(ang);
        ai += theta(j) * std::sin(ang);
        br += star(j) * std::cos(ang);
        bi += star(j) * std::sin(ang);
      }
      const double ri2 = (ar * ar + ai * ai) / d;
      const double si2 = (br * br + bi * bi) / d;
      expect += -0.5 * si2 * ri2 + 0.25 * ri2 * ri2;
    }
    CHECK(S_ell(G, theta, star, 2) == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("third term difference equals the phase surrogate difference") {
  const GroupAction G = make_cyclic(6);
  Vec star(6);
  {
    FourierCoords fc;
    fc.d = 6;
    fc.even = true;
    fc.v0 = 0.0;
    fc.v = {std::complex<double>(1.0, 0.0), std::complex<double>(2.0, 0.0)};
    fc.r = Vec(2);
    fc.r << 1.0, 2.0;
    fc.t = Vec::Zero(2);
    fc.v_half = 1.0;
    star = inv_fourier(fc);
  }
  const Vec s = spectrum_weights(star);
  Vec r_star(2);
  r_star << 1.0, 2.0;

  for (int branch : {+1, -1}) {
    Vec t1(2), t2(2);
    t1 << 0.7, 1.9;
    t2 << 2.4, 0.3;
    const Vec th1 = theta_from_phase(r_star, star, t1, branch);
    const Vec th2 = theta_from_phase(r_star, star, t2, branch);
    const double lhs = S_ell(G, th1, star, 3) - S_ell(G, th2, star, 3);
    const double rhs =
        F_pm(6, s, t1, branch).value - F_pm(6, s, t2, branch).value;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
  }
}

TEST_CASE("closed gradients match finite differences") {
  std::vector<GroupAction> groups = {make_rotations(4), make_cyclic(5),
                                     make_symmetric(3)};
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const GroupAction& G = groups[gi];
    const Vec theta = random_vec(G.d, 3000 + gi);
    const Vec star = random_vec(G.d, 4000 + gi);
    for (int ell = 1; ell <= 3; ++ell) {
      const Vec grad = S_ell_grad(G, theta, star, ell);
      for (int i = 0; i < G.d; ++i) {
        const double fd = fd_partial(G, theta, star, ell, i, 1e-5);
        CHECK(grad(i) == doctest::Approx(fd).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("hessians are symmetric and match gradient differences") {
  const GroupAction G = make_cyclic(4);
  const Vec theta = random_vec(4, 21);
  const Vec star = random_vec(4, 22);
  for (int ell = 1; ell <= 3; ++ell) {
    const Mat H = S_ell_hess(G, theta, star, ell);
    CHECK((H - H.transpose()).cwiseAbs().maxCoeff() <= 1e-9);
    const double h = 1e-5;
    for (int i = 0; i < 4; ++i) {
      Vec tp = theta, tm = theta;
      tp(i) += h;
      tm(i) -= h;
      const Vec gp = S_ell_grad(G, tp, star, ell);
      const Vec gm = S_ell_grad(G, tm, star, ell);
      for (int j = 0; j < 4; ++j)
        CHECK(H(i, j) == doctest::Approx((gp(j) - gm(j)) / (2.0 * h)).epsilon(5e-5));
    }
  }
}

TEST_CASE("truncated risk assembles the scaled terms") {
  const GroupAction G = make_rotations(3);
  const Vec theta = random_vec(2, 31);
  const Vec star = random_vec(2, 32);
  const double sigma = 3.0;
  EvalWant want;
  want.grad = true;
  const EvalResult res = truncated_risk(G, theta, star, sigma, 3, want);

  double expect = 0.0;
  Vec egrad = Vec::Zero(2);
  for (int ell = 1; ell <= 3; ++ell) {
    const double scale = std::pow(sigma, -2.0 * ell);
    expect += scale * S_ell(G, theta, star, ell);
    egrad += scale * S_ell_grad(G, theta, star, ell);
  }
  CHECK(res.value == doctest::Approx(expect).epsilon(1e-12));
  CHECK((*res.grad - egrad).norm() <= 1e-12);
  CHECK_THROWS(truncated_risk(G, theta, star, sigma, 3, EvalWant::up_to(3)));
}

TEST_CASE("noise averaged empirical terms recover the series") {
  const GroupAction G = make_cyclic(3);
  const Vec theta = random_vec(3, 41);
  const Vec star = random_vec(3, 42);

  const std::int64_t N = 40000;
  double sum2 = 0.0, sumsq2 = 0.0, sum1 = 0.0;
  for (std::int64_t j = 0; j < N; j += 2) {
    Vec eps(3);
    double z0 = 0.0, z1 = 0.0, z2 = 0.0, zspare = 0.0;
    rng_normal_pair_at(77, 2 * static_cast<std::uint64_t>(j), z0, z1);
    rng_normal_pair_at(77, 2 * static_cast<std::uint64_t>(j) + 2, z2, zspare);
    eps << z0, z1, z2;
    for (int sign = 0; sign < 2; ++sign) {
      const Vec e = sign == 0 ? eps : Vec(-eps);
      const double p2 = empirical_term(G, e, theta, star, 2);
      sum2 += p2;
      sumsq2 += p2 * p2;
      sum1 += empirical_term(G, e, theta, star, 1);
    }
  }
  const double mean2 = sum2 / static_cast<double>(N);
  const double se2 = std::sqrt((sumsq2 / N - mean2 * mean2) / N);
  CHECK(std::abs(mean2 - S_ell(G, theta, star, 1)) <= 6.0 * se2 + 1e-10);
  CHECK(std::abs(sum1 / static_cast<double>(N)) <= 0.05);
}

TEST_CASE("moment tensors average the orbit powers") {
  const GroupAction G = make_symmetric(3);
  const Vec theta = random_vec(3, 51);
  const DenseTensor t2 = moment_tensor(G, theta, 2);
  Mat expect = Mat::Zero(3, 3);
  for (const Mat& g : G.elements) {
    const Vec gt = g * theta;
    expect += gt * gt.transpose();
  }
  expect /= static_cast<double>(G.K);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const int idx[2] = {i, j};
      CHECK(t2.at(idx) == doctest::Approx(expect(i, j)).epsilon(1e-12));
    }
}

}  // TEST_SUITE
