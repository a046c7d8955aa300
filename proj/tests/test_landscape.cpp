#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "orbitml/groups.hpp"
#include "orbitml/landscape.hpp"
#include "orbitml/model.hpp"
#include "orbitml/optim.hpp"
#include "orbitml/parallel.hpp"
#include "orbitml/reparam.hpp"
#include "orbitml/risk.hpp"

using namespace orbitml;

TEST_SUITE("landscape") {

TEST_CASE("band dimensions for the built-in families") {
  CHECK(band_dims(make_rotations(1)) == std::vector<int>{2});
  CHECK(band_dims(make_rotations(2)) == std::vector<int>{0, 2});
  CHECK(band_dims(make_rotations(3)) == std::vector<int>{0, 1, 1});
  CHECK(band_dims(make_rotations(4)) == std::vector<int>{0, 1, 0, 1});
  CHECK(band_dims(make_cyclic(5)) == std::vector<int>{1, 2, 2});
  CHECK(band_dims(make_cyclic(6)) == std::vector<int>{1, 3, 2});
  CHECK(band_dims(make_symmetric(3)) == std::vector<int>{1, 1, 1});

  const GroupAction P = make_product(make_rotations(2), make_cyclic(3));
  CHECK_THROWS_AS(band_dims(P), std::invalid_argument);
}

TEST_CASE("series Fisher information has the graded rotation spectrum") {
  const GroupAction G = make_rotations(3);
  Vec star(2);
  star << 1.0, 0.0;
  const double sigma = 8.0;
  const FisherResult fr = fisher_information_series(G, star, sigma, 3);
  REQUIRE(fr.eigvals.size() == 2);
  CHECK(fr.method == "series");

  const double phase = fr.eigvals(0) * std::pow(sigma, 6.0);
  const double radial = fr.eigvals(1) * std::pow(sigma, 4.0);
  CHECK(phase == doctest::Approx(0.375).epsilon(1e-6));
  CHECK(radial == doctest::Approx(1.0).epsilon(0.05));

  const GradedSpectrum gs = graded_spectrum(fr.matrix, sigma, band_dims(G));
  REQUIRE(gs.band_of.size() == 2);
  CHECK(gs.band_of[0] == 2);
  CHECK(gs.band_of[1] == 3);
  CHECK(gs.resolved[1]);
  CHECK(gs.resolved[2]);
}

TEST_CASE("low noise Fisher information approaches the identity") {
  const GroupAction G = make_rotations(3);
  Vec star(2);
  star << 1.0, 0.0;
  const double sigma = 0.1;
  McConfig mc;
  mc.N = 20000;
  mc.seed = 11;
  const FisherResult fr = fisher_information_mc(G, star, sigma, mc);
  CHECK(fr.method == "mc");
  const Mat dev = sigma * sigma * fr.matrix - Mat::Identity(2, 2);
  CHECK(dev.norm() <= 0.02);
}

TEST_CASE("graded spectrum assignment and resolution flags") {
  const double sigma = 10.0;
  Vec diag(4);
  diag << 1.0 * std::pow(sigma, -2.0), 2.0 * std::pow(sigma, -4.0),
      0.4 * std::pow(sigma, -4.0), 1.0 * std::pow(sigma, -6.0);
  const Mat F = diag.asDiagonal();
  const std::vector<int> dims = {1, 2, 1};

  const GradedSpectrum gs = graded_spectrum(F, sigma, dims);
  CHECK(gs.band_of == std::vector<int>{1, 2, 2, 3});
  CHECK(gs.scaled(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(gs.scaled(1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(gs.scaled(2) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(gs.scaled(3) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(gs.band_min[1] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(gs.band_max[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(gs.resolved == std::vector<bool>{true, true, true});

  Vec wide = diag;
  wide(2) = 0.05 * std::pow(sigma, -4.0);
  const GradedSpectrum gw = graded_spectrum(Mat(wide.asDiagonal()), sigma, dims);
  CHECK_FALSE(gw.resolved[1]);
  CHECK(gw.resolved[0]);
  CHECK(gw.resolved[2]);

  CHECK_THROWS_AS(graded_spectrum(F, sigma, std::vector<int>{1, 2}),
                  std::invalid_argument);
}

TEST_CASE("plugin variance is the inverse quadratic form") {
  Vec diag(2);
  diag << 2.0, 5.0;
  const Mat F = diag.asDiagonal();
  Vec g(2);
  g << 1.0, 1.0;
  CHECK(plugin_variance(F, g) == doctest::Approx(0.7).epsilon(1e-12));

  Vec bad(2);
  bad << 1.0, -1.0;
  CHECK_THROWS_AS(plugin_variance(Mat(bad.asDiagonal()), g), std::runtime_error);
}

TEST_CASE("grade by grade certification accepts the truth") {
  {
    const GroupAction G = make_rotations(3);
    Vec star(2);
    star << 1.0, 0.0;
    const Chart chart = make_polar2_chart(star);
    const PseudoMinimizerReport rep =
        pseudo_minimizer_check(G, star, star, chart, band_dims(G));
    CHECK(rep.pass);
    REQUIRE(rep.bands.size() == 2);
    for (const BandCheck& bc : rep.bands) {
      CHECK(bc.pass);
      CHECK(bc.grad_norm <= 1e-7);
      CHECK(bc.min_eig > 0.0);
    }

    const Vec scaled = 1.3 * star;
    const PseudoMinimizerReport bad =
        pseudo_minimizer_check(G, scaled, star, make_polar2_chart(scaled),
                               band_dims(G));
    CHECK_FALSE(bad.pass);
  }
  {
    const GroupAction G = make_symmetric(3);
    Vec star(3);
    star << 0.3, 1.1, 2.0;
    const Chart chart = make_power_sums_chart(star);
    const PseudoMinimizerReport rep =
        pseudo_minimizer_check(G, star, star, chart, band_dims(G));
    CHECK(rep.pass);
    REQUIRE(rep.bands.size() == 3);
  }
  {
    const GroupAction G = make_cyclic(5);
    Vec star(5);
    star << 1.1, -0.4, 0.35, 0.8, -0.7;
    const Chart chart = make_fourier_mra_chart(star);
    const PseudoMinimizerReport rep =
        pseudo_minimizer_check(G, star, star, chart, band_dims(G));
    CHECK(rep.pass);
    REQUIRE(rep.bands.size() == 3);
    CHECK(rep.bands[1].indices == std::vector<int>{1, 2});
    CHECK(rep.bands[2].indices == std::vector<int>{3, 4});
  }
}

TEST_CASE("newton polish drives the gradient to roundoff") {
  const GroupAction G = make_rotations(3);
  Vec star(2);
  star << 1.0, 0.0;
  const Dataset data = sample_dataset(G, star, 0.5, 2000, 21);
  const RiskModel model(G, data);

  Vec start = star;
  start(0) += 0.05;
  start(1) -= 0.04;
  const Vec polished = newton_polish(model, start);
  EvalWant want;
  want.grad = true;
  const EvalResult ev = empirical_risk(model, polished, want);
  CHECK(ev.grad->norm() <= 1e-9);
  CHECK((polished - star).norm() <= 0.2);
}

TEST_CASE("multistart survey finds a certified minimizer") {
  const GroupAction G = make_rotations(3);
  Vec star(2);
  star << 1.0, 0.0;
  const Dataset data = sample_dataset(G, star, 4.0, 2000, 33);
  const RiskModel model(G, data);

  OptimConfig cfg;
  cfg.method = OptMethod::AGD;
  cfg.max_iters = 400;
  const auto points = find_critical_points(model, 30, 5, cfg);
  REQUIRE(!points.empty());
  CHECK(points.front().kind == "minimizer");
  CHECK(points.front().grad_norm <= 1e-6);
  int total = 0;
  for (const CriticalPoint& cp : points) {
    CHECK(cp.multiplicity >= 1);
    total += cp.multiplicity;
  }
  CHECK(total <= 30);
  for (std::size_t i = 1; i < points.size(); ++i)
    CHECK(points[i - 1].value <= points[i].value + 1e-12);

  CHECK_THROWS_AS(find_critical_points(model, 0, 5, cfg), std::invalid_argument);
}

TEST_CASE("basin fractions bookkeeping and thread invariance") {
  const GroupAction G = make_rotations(3);
  Vec star(2);
  star << 1.0, 0.0;
  const Dataset data = sample_dataset(G, star, 1.0, 2000, 44);
  const RiskModel model(G, data);
  const Vec ref = newton_polish(model, star);

  OptimConfig cfg;
  cfg.method = OptMethod::AGD;
  cfg.max_iters = 300;

  const int saved = num_threads();
  set_num_threads(1);
  const BasinResult one = basin_fractions(model, {ref}, 16, 7, cfg);
  set_num_threads(4);
  const BasinResult four = basin_fractions(model, {ref}, 16, 7, cfg);
  set_num_threads(saved);

  REQUIRE(one.fractions.size() == 1);
  REQUIRE(one.runs.size() == 16);
  CHECK(one.fractions[0] + one.unresolved == 1.0);
  CHECK(one.fractions[0] >= 0.5);
  for (const BasinRun& run : one.runs) {
    REQUIRE(run.ref_dists.size() == 1);
    CHECK((run.assigned == -1 || run.assigned == 0));
    if (run.assigned == 0) CHECK(run.ref_dists[0] <= 0.2);
  }

  REQUIRE(four.runs.size() == 16);
  CHECK(one.fractions[0] == four.fractions[0]);
  for (int i = 0; i < 16; ++i) {
    const Vec& a = one.runs[i].final_theta;
    const Vec& b = four.runs[i].final_theta;
    REQUIRE(a.size() == b.size());
    for (int j = 0; j < a.size(); ++j) CHECK(a(j) == b(j));
  }

  CHECK_THROWS_AS(basin_fractions(model, {}, 4, 7, cfg), std::invalid_argument);
}

}  // TEST_SUITE
