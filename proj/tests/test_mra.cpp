#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "orbitml/groups.hpp"
#include "orbitml/mra.hpp"
#include "orbitml/rng.hpp"

using namespace orbitml;

namespace {

constexpr double kTau = 6.283185307179586476925286766559;

Vec random_vec(int d, std::uint64_t seed) {
  Vec v(d);
  for (int i = 0; i < d; ++i)
    v(i) = 2.0 * rng_unit_at(seed, static_cast<std::uint64_t>(i)) - 1.0;
  return v;
}

Vec random_weights(int len, std::uint64_t seed) {
  Vec s(len);
  for (int i = 0; i < len; ++i)
    s(i) = 0.25 + rng_unit_at(seed, static_cast<std::uint64_t>(i));
  return s;
}

double circle_gap(double a, double b) {
  double diff = std::fmod(std::fabs(a - b), kTau);
  if (diff > kTau / 2.0) diff = kTau - diff;
  return diff;
}

/// The reference signal with unit mean coefficient that has spectrum
/// (1, 4, 1): v0 = 0, (v1, v2, v3) = (1, 2, 1).
Vec example_signal() {
  FourierCoords fc;
  fc.d = 6;
  fc.even = true;
  fc.v0 = 0.0;
  fc.v = {std::complex<double>(1.0, 0.0), std::complex<double>(2.0, 0.0)};
  fc.r = Vec(2);
  fc.r << 1.0, 2.0;
  fc.t = Vec::Zero(2);
  fc.v_half = 1.0;
  return inv_fourier(fc);
}

}  // namespace

TEST_SUITE("mra") {

TEST_CASE("fourier transform round trips") {
  for (int d : {3, 4, 5, 6, 7, 8}) {
    const Vec ref = random_vec(d, 100 + d);
    const Vec theta = 2.0 * random_vec(d, 200 + d);
    const FourierCoords fc = fourier(theta, ref);
    CHECK((inv_fourier(fc) - theta).norm() <= 1e-12);
  }
}

TEST_CASE("phases vanish at the reference and vanishing references throw") {
  const Vec ref = random_vec(5, 300);
  const FourierCoords fc = fourier(ref, ref);
  CHECK(fc.t.cwiseAbs().maxCoeff() <= 1e-12);

  const Vec flat = Vec::Constant(5, 2.0);
  CHECK_THROWS_AS(fourier(random_vec(5, 301), flat), std::invalid_argument);
}

TEST_CASE("the spectrum (1,4,1) signal matches its printed coordinates") {
  const Vec star = example_signal();
  Vec expect(6);
  expect << 7.0, -2.0, -2.0, 1.0, -2.0, -2.0;
  expect /= std::sqrt(6.0);
  CHECK((star - expect).cwiseAbs().maxCoeff() <= 1e-12);

  const Vec s = spectrum_weights(star);
  REQUIRE(s.size() == 3);
  CHECK(s(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s(1) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(s(2) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("surrogate gradient vanishes at zero phases") {
  EvalWant want;
  want.grad = true;
  for (int d : {3, 5, 6, 8}) {
    const int m = phase_count(d);
    const Vec s = random_weights(m + (d % 2 == 0 ? 1 : 0), 400 + d);
    const EvalResult res = F_pm(d, s, Vec::Zero(m), +1, want);
    CHECK(res.grad->norm() == 0.0);
  }
}

TEST_CASE("surrogate derivatives match finite differences") {
  EvalWant want;
  want.grad = true;
  want.hess = true;
  for (int d : {5, 6, 7, 8}) {
    const int m = phase_count(d);
    const std::vector<int> branches =
        (d % 2 == 0) ? std::vector<int>{+1, -1} : std::vector<int>{+1};
    for (int branch : branches) {
      const Vec s = random_weights(m + (d % 2 == 0 ? 1 : 0), 500 + d);
      const Vec t = kTau * random_vec(m, 600 + d).cwiseAbs();
      const EvalResult res = F_pm(d, s, t, branch, want);
      const double h = 1e-6;
      for (int i = 0; i < m; ++i) {
        Vec tp = t, tm = t;
        tp(i) += h;
        tm(i) -= h;
        const double fd =
            (F_pm(d, s, tp, branch).value - F_pm(d, s, tm, branch).value) /
            (2.0 * h);
        CHECK((*res.grad)(i) == doctest::Approx(fd).epsilon(1e-6));
        EvalWant gw;
        gw.grad = true;
        const Vec gp = *F_pm(d, s, tp, branch, gw).grad;
        const Vec gm = *F_pm(d, s, tm, branch, gw).grad;
        for (int j = 0; j < m; ++j)
          CHECK((*res.hess)(i, j) ==
                doctest::Approx((gp(j) - gm(j)) / (2.0 * h)).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("branch minus requires an even dimension") {
  const Vec s = random_weights(2, 700);
  CHECK_THROWS_AS(F_pm(5, s, Vec::Zero(2), -1), std::invalid_argument);
  CHECK_THROWS_AS(F_pm(5, s, Vec::Zero(2), 0), std::invalid_argument);
}

TEST_CASE("three dimensional surrogate reduces to a single cosine") {
  const double s1 = 1.7;
  Vec s(1);
  s << s1;
  EvalWant want;
  want.grad = true;
  for (double t1 : {0.3, 1.1, 2.9, 4.4}) {
    Vec t(1);
    t << t1;
    const EvalResult res = F_pm(3, s, t, +1, want);
    CHECK(res.value ==
          doctest::Approx(-(s1 * s1 * s1 / 3.0) * std::cos(3.0 * t1)).epsilon(1e-12));
    CHECK((*res.grad)(0) ==
          doctest::Approx(s1 * s1 * s1 * std::sin(3.0 * t1)).epsilon(1e-12));
  }
}

TEST_CASE("four dimensional surrogate is a pure pair term") {
  Vec s(2);
  s << 1.3, 0.8;
  for (double t1 : {0.2, 1.7, 3.3}) {
    Vec t(1);
    t << t1;
    const double expect = s(0) * s(0) * s(1) * std::cos(2.0 * t1);
    CHECK(F_pm(4, s, t, +1).value == doctest::Approx(-expect).epsilon(1e-12));
    CHECK(F_pm(4, s, t, -1).value == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("five dimensional hessian satisfies the determinant identity") {
  const Vec s = random_weights(2, 800);
  EvalWant want;
  want.hess = true;
  for (int trial = 0; trial < 6; ++trial) {
    const Vec t = kTau * random_vec(2, 900 + trial).cwiseAbs();
    const Mat H = *F_pm(5, s, t, +1, want).hess;
    const double u1 = 2.0 * t(0) - t(1);
    const double u2 = t(0) + 2.0 * t(1);
    const double expect = 25.0 * std::pow(s(0), 3) * std::pow(s(1), 3) *
                          std::cos(u1) * std::cos(u2);
    const double det = H(0, 0) * H(1, 1) - H(0, 1) * H(1, 0);
    CHECK(det == doctest::Approx(expect).epsilon(1e-8));
  }
}

TEST_CASE("six dimensional surrogate matches the explicit trig form") {
  Vec s(3);
  s << 1.0, 4.0, 1.0;
  for (int trial = 0; trial < 5; ++trial) {
    const Vec t = kTau * random_vec(2, 1000 + trial).cwiseAbs();
    const double base = (64.0 / 3.0) * std::cos(3.0 * t(1)) +
                        4.0 * std::cos(2.0 * t(0) - t(1));
    const double pair = 8.0 * std::cos(t(0) + t(1));
    CHECK(F_pm(6, s, t, +1).value ==
          doctest::Approx(-(base + pair)).epsilon(1e-12));
    CHECK(F_pm(6, s, t, -1).value ==
          doctest::Approx(-(base - pair)).epsilon(1e-12));
  }
}

TEST_CASE("critical family values and bounds") {
  const Vec t = critical_family(6, 1);
  REQUIRE(t.size() == 2);
  CHECK(t(0) == doctest::Approx(kTau / 6.0).epsilon(1e-14));
  CHECK(t(1) == doctest::Approx(kTau / 3.0).epsilon(1e-14));
  CHECK(critical_family(6, 0).norm() == 0.0);

  CHECK_THROWS_AS(critical_family(6, 6), std::invalid_argument);
  CHECK_THROWS_AS(critical_family(6, -1), std::invalid_argument);
  CHECK_THROWS_AS(critical_family(6, 1, true), std::invalid_argument);
  CHECK_NOTHROW(critical_family(7, 3, true));
}

TEST_CASE("the whole phase family is stationary with parity matched values") {
  EvalWant want;
  want.grad = true;
  for (int d : {6, 8, 10}) {
    const int m = phase_count(d);
    const Vec s = random_weights(m + 1, 1100 + d);
    for (int branch : {+1, -1}) {
      const double fp0 = F_pm(d, s, critical_family(d, 0), +1).value;
      const double fm0 = F_pm(d, s, critical_family(d, 0), -1).value;
      for (int a = 0; a < d; ++a) {
        const EvalResult res = F_pm(d, s, critical_family(d, a), branch, want);
        CHECK(res.grad->norm() <= 1e-10);
        const int eff = (a % 2 == 0) ? branch : -branch;
        const double match = (eff == +1) ? fp0 : fm0;
        CHECK(std::abs(res.value - match) <= 1e-12 * (1.0 + std::abs(match)));
      }
    }
  }
  for (int d : {7, 9}) {
    const int m = phase_count(d);
    const Vec s = random_weights(m, 1150 + d);
    const double f0 = F_pm(d, s, critical_family(d, 0), +1).value;
    for (int a = 0; a < d; ++a) {
      const EvalResult res = F_pm(d, s, critical_family(d, a), +1, want);
      CHECK(res.grad->norm() <= 1e-10);
      CHECK(std::abs(res.value - f0) <= 1e-12 * (1.0 + std::abs(f0)));
    }
  }
}

TEST_CASE("reconstruction from phases inverts and shifts") {
  const Vec star = example_signal();
  const FourierCoords ref = fourier(star, star);
  CHECK((theta_from_phase(ref.r, star, Vec::Zero(2), +1) - star).norm() <= 1e-12);

  for (int a : {1, 2, 3}) {
    const Vec t = critical_family(6, a);
    const int half_sign = (a % 2 == 0) ? +1 : -1;
    const Vec shifted = theta_from_phase(ref.r, star, t, half_sign);
    Vec expect(6);
    for (int j = 0; j < 6; ++j) expect(j) = star(((j - a) % 6 + 6) % 6);
    CHECK((shifted - expect).norm() <= 1e-10);
  }

  const Vec ref5 = random_vec(5, 1200);
  const FourierCoords f5 = fourier(ref5, ref5);
  for (int a : {1, 4}) {
    const Vec shifted = theta_from_phase(f5.r, ref5, critical_family(5, a), +1);
    Vec expect(5);
    for (int j = 0; j < 5; ++j) expect(j) = ref5(((j - a) % 5 + 5) % 5);
    CHECK((shifted - expect).norm() <= 1e-10);
  }
}

TEST_CASE("even spurious construction certifies") {
  const SpuriousCertificate c6 = spurious_even(6);
  CHECK(c6.pass);
  CHECK(c6.worst_grad_norm <= 1e-9);
  CHECK(c6.worst_min_eig > 0.0);
  REQUIRE(c6.s.size() == 3);
  CHECK(c6.s(0) == 1.0);
  CHECK(c6.s(1) == 1.0);

  const SpuriousCertificate c8 = spurious_even(8);
  CHECK(c8.pass);

  CHECK_THROWS_AS(spurious_even(4), std::invalid_argument);
  CHECK_THROWS_AS(spurious_even(7), std::invalid_argument);
}

TEST_CASE("the paper spectrum (1,4,1) also certifies as spurious") {
  Vec s(3);
  s << 1.0, 4.0, 1.0;
  for (int branch : {+1, -1}) {
    const FamilyCertificate cert = certify_family(6, s, branch);
    CHECK(cert.pass);
    CHECK(cert.worst_min_eig > 0.0);
  }
}

TEST_CASE("odd spurious construction certifies for m = 26") {
  const SpuriousCertificate cert = spurious_odd(26);
  CHECK(cert.pass);
  CHECK(cert.plus_family_minimal);
  CHECK(cert.worst_grad_norm <= 1e-9);
  CHECK(cert.worst_min_eig > 0.0);
  REQUIRE(cert.s.size() == 26);
  CHECK(cert.s(0) == doctest::Approx(0.5 * std::sqrt(26.0)).epsilon(1e-14));

  CHECK_THROWS_AS(spurious_odd(25), std::invalid_argument);
}

TEST_CASE("phase survey finds the right minima in low dimensions") {
  Vec s3(1);
  s3 << 1.4;
  const auto min3 = phase_minimize(3, s3, +1, 12);
  REQUIRE(min3.size() == 3);
  const double expect3[3] = {0.0, kTau / 3.0, 2.0 * kTau / 3.0};
  for (const PhaseMinimum& pm : min3) {
    double best = 1e9;
    for (double e : expect3) best = std::min(best, circle_gap(pm.t(0), e));
    CHECK(best <= 1e-6);
    CHECK(pm.min_eig > 0.0);
  }

  const Vec s5 = random_weights(2, 1300);
  const auto min5 = phase_minimize(5, s5, +1, 14);
  REQUIRE(min5.size() == 5);
  const double fifth = kTau / 5.0;
  const double expect5[5][2] = {{0.0, 0.0},
                                {fifth, 2.0 * fifth},
                                {2.0 * fifth, 4.0 * fifth},
                                {3.0 * fifth, fifth},
                                {4.0 * fifth, 3.0 * fifth}};
  for (const PhaseMinimum& pm : min5) {
    double best = 1e9;
    for (const auto& e : expect5)
      best = std::min(best,
                      std::max(circle_gap(pm.t(0), e[0]), circle_gap(pm.t(1), e[1])));
    CHECK(best <= 1e-6);
  }
}

TEST_CASE("phase survey on the spectrum (1,4,1) finds six minima per branch") {
  Vec s(3);
  s << 1.0, 4.0, 1.0;
  for (int branch : {+1, -1}) {
    const auto minima = phase_minimize(6, s, branch, 6);
    REQUIRE(minima.size() == 6);
    for (const PhaseMinimum& pm : minima) {
      double best = 1e9;
      for (int a = 0; a < 6; ++a) {
        const Vec fam = critical_family(6, a);
        best = std::min(best, std::max(circle_gap(pm.t(0), fam(0)),
                                       circle_gap(pm.t(1), fam(1))));
      }
      CHECK(best <= 1e-6);
    }
  }
}

TEST_CASE("certified minima reconstruct the two printed signals") {
  const Vec star = example_signal();
  const FourierCoords ref = fourier(star, star);
  Vec mu(6);
  mu << 5.0, 0.0, -4.0, 3.0, -4.0, 0.0;
  mu /= std::sqrt(6.0);

  const GroupAction G = make_cyclic(6);
  Vec s(3);
  s << 1.0, 4.0, 1.0;
  for (int branch : {+1, -1}) {
    const auto minima = phase_minimize(6, s, branch, 6);
    REQUIRE(minima.size() == 6);
    for (const PhaseMinimum& pm : minima) {
      int nearest_a = 0;
      double nearest = 1e9;
      for (int a = 0; a < 6; ++a) {
        const Vec fam = critical_family(6, a);
        const double gap = std::max(circle_gap(pm.t(0), fam(0)),
                                    circle_gap(pm.t(1), fam(1)));
        if (gap < nearest) {
          nearest = gap;
          nearest_a = a;
        }
      }
      const Vec rec = theta_from_phase(ref.r, star, pm.t, branch);
      const int parity = (nearest_a % 2 == 0) ? +1 : -1;
      const Vec& target = (branch == parity) ? star : mu;
      CHECK(orbit_distance(G, rec, target) <= 1e-6);
    }
  }
}

}  // TEST_SUITE
