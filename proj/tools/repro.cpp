#include "repro.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "cli_util.hpp"
#include "orbitml/groups.hpp"
#include "orbitml/landscape.hpp"
#include "orbitml/model.hpp"
#include "orbitml/optim.hpp"
#include "orbitml/risk.hpp"

namespace orbitcli {

using orbitml::Dataset;
using orbitml::GroupAction;
using orbitml::OptimConfig;
using orbitml::OptimTrace;
using orbitml::OptMethod;
using orbitml::RiskModel;
using orbitml::Vec;

namespace {

std::uint64_t pick_seed(const ReproCommon& common, std::uint64_t fallback) {
  return common.seed_set ? common.seed : fallback;
}

std::string join_path(const std::string& dir, const std::string& name) {
  if (dir.empty() || dir == ".") return name;
  return dir + "/" + name;
}

Vec rotations_star() {
  Vec star(2);
  star << 1.0, 0.0;
  return star;
}

/// The length-6 example signal with power spectrum (1, 4, 1) and its
/// companion that differs only in the sign of the top Fourier mode.
Vec shift_star() {
  Vec star(6);
  star << 7.0, -2.0, -2.0, 1.0, -2.0, -2.0;
  return star / std::sqrt(6.0);
}

Vec shift_mu() {
  Vec mu(6);
  mu << 5.0, 0.0, -4.0, 3.0, -4.0, 0.0;
  return mu / std::sqrt(6.0);
}

void write_fig1_case(const std::string& out_dir, std::uint64_t seed,
                     double sigma, std::int64_t n, const std::string& tag) {
  const GroupAction G = orbitml::make_rotations(3);
  const Vec star = rotations_star();
  const Dataset data = orbitml::sample_dataset(G, star, sigma, n, seed);
  const RiskModel model(G, data);

  json meta = {{"cmd", "repro-fig1"},
               {"group", G.name},
               {"theta_star", vec_to_json(star)},
               {"sigma", sigma},
               {"n", n},
               {"seed", seed}};

  {
    CsvWriter scatter(join_path(out_dir, "fig1_scatter_" + tag + ".csv"), meta,
                      {"y0", "y1"});
    for (std::int64_t i = 0; i < n; ++i) {
      scatter.row({data.Y(i, 0), data.Y(i, 1)});
    }
    scatter.close();
  }

  const double lo = -2.0;
  const double hi = 2.0;
  const int points = 81;
  json grid_meta = meta;
  grid_meta["grid"] = {{"min", lo}, {"max", hi}, {"points", points}};
  CsvWriter contour(join_path(out_dir, "fig1_contour_" + tag + ".csv"),
                    grid_meta, {"x", "y", "risk"});
  const double step = (hi - lo) / (points - 1);
  Vec theta(2);
  for (int ix = 0; ix < points; ++ix) {
    for (int iy = 0; iy < points; ++iy) {
      theta << lo + ix * step, lo + iy * step;
      const double risk = orbitml::empirical_risk(model, theta).value;
      if (!std::isfinite(risk)) {
        throw std::runtime_error("repro-fig1: non-finite risk value");
      }
      contour.row({theta(0), theta(1), risk});
    }
  }
  contour.close();
}

void trace_to_csv(const std::string& path, const json& meta,
                  const OptimTrace& trace) {
  CsvWriter csv(path, meta,
                {"iter", "risk", "grad_norm", "dist_orbit_0", "theta_0",
                 "theta_1"});
  for (const orbitml::TracePoint& p : trace.points) {
    csv.row({static_cast<double>(p.iter), p.risk, p.grad_norm, p.ref_dists[0],
             p.theta(0), p.theta(1)});
  }
  csv.close();
}

}  // namespace

void repro_fig1(const ReproCommon& common) {
  ensure_dir(common.out_dir);
  const std::uint64_t seed = pick_seed(common, kFig1Seed);
  write_fig1_case(common.out_dir, seed, 0.4, 10000, "sigma0.4");
  write_fig1_case(common.out_dir, seed, 4.0, 100000, "sigma4");

  if (common.gnuplot) {
    write_text_file(join_path(common.out_dir, "fig1.gnuplot"),
                    "set datafile separator ','\n"
                    "set datafile commentschars '#'\n"
                    "set size ratio -1\n"
                    "set multiplot layout 2,2\n"
                    "set title 'samples, sigma=0.4'\n"
                    "plot 'fig1_scatter_sigma0.4.csv' using 1:2 with dots "
                    "notitle\n"
                    "set title 'samples, sigma=4'\n"
                    "plot 'fig1_scatter_sigma4.csv' using 1:2 with dots "
                    "notitle\n"
                    "set title 'risk, sigma=0.4'\n"
                    "set view map\n"
                    "set dgrid3d 81,81\n"
                    "splot 'fig1_contour_sigma0.4.csv' using 1:2:3 with pm3d "
                    "notitle\n"
                    "set title 'risk, sigma=4'\n"
                    "splot 'fig1_contour_sigma4.csv' using 1:2:3 with pm3d "
                    "notitle\n"
                    "unset multiplot\n");
  }
}

void repro_fig2(const ReproCommon& common) {
  ensure_dir(common.out_dir);
  const std::uint64_t seed = pick_seed(common, kFig2Seed);
  const GroupAction G = orbitml::make_rotations(3);
  const Vec star = rotations_star();
  const double sigma = 4.0;
  const std::int64_t n = 100000;
  const Dataset data = orbitml::sample_dataset(G, star, sigma, n, seed);
  const RiskModel model(G, data);

  Vec theta0(2);
  theta0 << 1.0, 1.0;
  const double eta = sigma * sigma * sigma * sigma;

  const struct {
    const char* tag;
    OptMethod method;
    double eta;
  } runs[] = {{"em", OptMethod::EM, 0.0},
              {"gd", OptMethod::GD, eta},
              {"agd", OptMethod::AGD, eta}};

  for (const auto& run : runs) {
    OptimConfig cfg;
    cfg.method = run.method;
    cfg.eta = run.eta;
    cfg.max_iters = 250;
    cfg.record_every = 1;
    const OptimTrace trace = orbitml::run_optimizer(model, cfg, theta0, {star});
    if (trace.diverged) {
      throw std::runtime_error(std::string("repro-fig2: ") + run.tag +
                               " diverged");
    }
    json meta = {{"cmd", "repro-fig2"},
                 {"group", G.name},
                 {"theta_star", vec_to_json(star)},
                 {"sigma", sigma},
                 {"n", n},
                 {"seed", seed},
                 {"method", run.tag},
                 {"eta", run.eta},
                 {"iters", 250},
                 {"theta0", vec_to_json(theta0)}};
    trace_to_csv(
        join_path(common.out_dir, std::string("fig2_") + run.tag + ".csv"),
        meta, trace);
  }

  if (common.gnuplot) {
    write_text_file(join_path(common.out_dir, "fig2.gnuplot"),
                    "set datafile separator ','\n"
                    "set datafile commentschars '#'\n"
                    "set logscale y\n"
                    "set xlabel 'iteration'\n"
                    "set ylabel 'orbit distance to theta*'\n"
                    "plot 'fig2_em.csv' using 1:4 with lines title 'EM', \\\n"
                    "     'fig2_gd.csv' using 1:4 with lines title 'GD', \\\n"
                    "     'fig2_agd.csv' using 1:4 with lines title 'AGD'\n");
  }
}

void repro_fig4(const ReproCommon& common, Fig4Options opts) {
  ensure_dir(common.out_dir);
  if (opts.full) {
    opts.n = 1000000;
    opts.starts = 500;
  }
  const std::uint64_t seed = pick_seed(common, kFig4Seed);
  const std::uint64_t start_seed = seed ^ 0x4649473400000000ull;
  const GroupAction G = orbitml::make_cyclic(6);
  const Vec star = shift_star();
  const Vec mu = shift_mu();

  json meta = {{"cmd", "repro-fig4"},
               {"group", G.name},
               {"theta_star", vec_to_json(star)},
               {"mu_star", vec_to_json(mu)},
               {"sigmas", opts.sigmas},
               {"n", opts.n},
               {"starts", opts.starts},
               {"iters", opts.iters},
               {"eta", "sigma^2"},
               {"seed", seed},
               {"start_seed", start_seed},
               {"radius", 0.2},
               {"full", opts.full}};

  CsvWriter fractions(join_path(common.out_dir, "fig4_fractions.csv"), meta,
                      {"sigma", "frac_main", "frac_spurious", "unresolved"});
  std::vector<std::string> run_cols = {"sigma",     "start",
                                       "assigned",  "dist_main",
                                       "dist_spurious", "final_risk",
                                       "final_grad_norm"};
  for (int j = 0; j < 6; ++j) run_cols.push_back("theta_" + std::to_string(j));
  CsvWriter runs_csv(join_path(common.out_dir, "fig4_runs.csv"), meta,
                     run_cols);
  std::vector<std::string> ref_cols = {"sigma", "ref", "grad_norm"};
  for (int j = 0; j < 6; ++j) ref_cols.push_back("theta_" + std::to_string(j));
  CsvWriter refs_csv(join_path(common.out_dir, "fig4_refs.csv"), meta,
                     ref_cols);

  orbitml::EvalWant grad_want;
  grad_want.grad = true;

  for (double sigma : opts.sigmas) {
    const Dataset data = orbitml::sample_dataset(G, star, sigma, opts.n, seed);
    const RiskModel model(G, data);

    const Vec main_ref = orbitml::newton_polish(model, star);
    const Vec spur_ref = orbitml::newton_polish(model, mu);
    for (int r = 0; r < 2; ++r) {
      const Vec& ref = (r == 0) ? main_ref : spur_ref;
      const double gn =
          orbitml::empirical_risk(model, ref, grad_want).grad->norm();
      std::vector<double> row = {sigma, static_cast<double>(r), gn};
      for (int j = 0; j < 6; ++j) row.push_back(ref(j));
      refs_csv.row(row);
    }

    OptimConfig cfg;
    cfg.method = OptMethod::AGD;
    cfg.eta = sigma * sigma;
    cfg.max_iters = opts.iters;
    cfg.record_every = opts.iters;
    const orbitml::BasinResult basins = orbitml::basin_fractions(
        model, {main_ref, spur_ref}, opts.starts, start_seed, cfg);

    fractions.row(
        {sigma, basins.fractions[0], basins.fractions[1], basins.unresolved});
    for (const orbitml::BasinRun& run : basins.runs) {
      std::vector<double> row = {sigma, static_cast<double>(run.start),
                                 static_cast<double>(run.assigned),
                                 run.ref_dists[0], run.ref_dists[1],
                                 run.final_risk, run.final_grad_norm};
      for (int j = 0; j < 6; ++j) row.push_back(run.final_theta(j));
      runs_csv.row(row);
    }
  }
  fractions.close();
  runs_csv.close();
  refs_csv.close();

  if (common.gnuplot) {
    write_text_file(join_path(common.out_dir, "fig4.gnuplot"),
                    "set datafile separator ','\n"
                    "set datafile commentschars '#'\n"
                    "set xlabel 'sigma'\n"
                    "set ylabel 'fraction of runs'\n"
                    "set yrange [0:1]\n"
                    "plot 'fig4_fractions.csv' using 1:2 with linespoints "
                    "title 'main orbit', \\\n"
                    "     'fig4_fractions.csv' using 1:3 with linespoints "
                    "title 'spurious orbit', \\\n"
                    "     'fig4_fractions.csv' using 1:4 with linespoints "
                    "title 'unresolved'\n");
  }
}

}  // namespace orbitcli
