// orbit: command line front end for the orbit recovery library.
#include <CLI11.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cli_util.hpp"
#include "orbitml/groups.hpp"
#include "orbitml/landscape.hpp"
#include "orbitml/model.hpp"
#include "orbitml/mra.hpp"
#include "orbitml/optim.hpp"
#include "orbitml/parallel.hpp"
#include "orbitml/risk.hpp"
#include "orbitml/series.hpp"
#include "repro.hpp"

namespace {

using orbitcli::json;
using orbitml::Dataset;
using orbitml::GroupAction;
using orbitml::Mat;
using orbitml::RiskModel;
using orbitml::Vec;

struct GlobalArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int threads = 0;
  bool gnuplot = false;

  bool out_set = false;
  bool seed_set = false;
  bool gnuplot_set = false;

  orbitcli::CliConfig config;

  void resolve() {
    if (!config_path.empty()) config = orbitcli::load_config(config_path);
    if (!out_set && config.has("outputs") &&
        config.raw["outputs"].contains("dir")) {
      out_dir = config.raw["outputs"]["dir"].get<std::string>();
      out_set = true;
    }
    if (!gnuplot_set && config.has("outputs") &&
        config.raw["outputs"].contains("gnuplot")) {
      gnuplot = config.raw["outputs"]["gnuplot"].get<bool>();
    }
    if (!seed_set && config.has("seed")) {
      seed = config.raw["seed"].get<std::uint64_t>();
      seed_set = true;
    }
  }

  std::string config_string(const std::string& flag_value, bool flag_set,
                            const std::string& key,
                            const std::string& what) const {
    if (flag_set) return flag_value;
    if (config.has(key)) return config.raw[key].get<std::string>();
    if (!flag_value.empty()) return flag_value;
    throw std::invalid_argument(what + " is required (flag or config)");
  }

  std::string join_out(const std::string& name) const {
    if (out_dir.empty() || out_dir == ".") return name;
    return out_dir + "/" + name;
  }
};

GroupAction resolve_group(const GlobalArgs& ga, const std::string& flag_value,
                          bool flag_set, const Dataset* data) {
  if (flag_set) return orbitcli::parse_group(flag_value);
  if (data && data->meta && !data->meta->group_name.empty()) {
    return orbitcli::parse_group(data->meta->group_name);
  }
  if (ga.config.has("group")) {
    return orbitcli::parse_group(ga.config.raw["group"].get<std::string>());
  }
  throw std::invalid_argument("group is required (flag, config or data meta)");
}

Vec resolve_theta_star(const GlobalArgs& ga, const std::string& flag_value,
                       bool flag_set, const Dataset* data) {
  if (flag_set) return orbitcli::parse_vec(flag_value);
  if (data && data->meta && data->meta->theta_star.size() > 0) {
    return data->meta->theta_star;
  }
  if (ga.config.has("theta_star")) {
    return orbitcli::json_to_vec(ga.config.raw["theta_star"]);
  }
  throw std::invalid_argument(
      "theta_star is required (flag, config or data meta)");
}

void check_finite(double x, const std::string& what) {
  if (!std::isfinite(x)) {
    throw std::runtime_error(what + ": non-finite value");
  }
}

json bands_to_json(const orbitml::GradedSpectrum& gs,
                   const std::vector<int>& dims) {
  json bands = {{"dims", dims},
                {"band_of", gs.band_of},
                {"scaled", orbitcli::vec_to_json(gs.scaled)},
                {"band_min", gs.band_min},
                {"band_max", gs.band_max}};
  json resolved = json::array();
  for (bool r : gs.resolved) resolved.push_back(r);
  bands["resolved"] = resolved;
  return bands;
}

int run_generate(const GlobalArgs& ga, const std::string& group_spec,
                 bool group_set, const std::string& theta_star_csv,
                 bool star_set, double sigma, bool sigma_set, std::int64_t n,
                 bool n_set, const std::string& law_spec,
                 const std::string& name, bool binary) {
  const GroupAction G = resolve_group(ga, group_spec, group_set, nullptr);
  const Vec star = resolve_theta_star(ga, theta_star_csv, star_set, nullptr);
  if (!sigma_set) {
    if (!ga.config.has("sigma"))
      throw std::invalid_argument("sigma is required (flag or config)");
    sigma = ga.config.raw["sigma"].get<double>();
  }
  if (!n_set) {
    if (!ga.config.has("n"))
      throw std::invalid_argument("n is required (flag or config)");
    n = ga.config.raw["n"].get<std::int64_t>();
  }
  const orbitml::HLaw law = orbitcli::parse_law(law_spec, G.K);
  const Dataset data =
      orbitml::sample_dataset(G, star, sigma, n, ga.seed, law);

  orbitcli::ensure_dir(ga.out_dir);
  const std::string path = ga.join_out(name + (binary ? ".bin" : ".csv"));
  if (binary) {
    orbitml::save_dataset_bin(data, path);
  } else {
    orbitml::save_dataset_csv(data, path);
  }
  orbitcli::emit_json("", json{{"path", path},
                               {"group", G.name},
                               {"d", G.d},
                               {"K", G.K},
                               {"n", n},
                               {"sigma", sigma},
                               {"seed", ga.seed}});
  return 0;
}

int run_risk_eval(const GlobalArgs& ga, const std::string& data_path,
                  const std::vector<std::string>& theta_csvs, int order,
                  const std::string& group_spec, bool group_set,
                  const std::string& out_path) {
  if (order < 0 || order > 4) {
    throw std::invalid_argument("risk-eval: order must be in 0..4");
  }
  const Dataset data = orbitcli::load_dataset_any(data_path);
  const GroupAction G = resolve_group(ga, group_spec, group_set, &data);
  const RiskModel model(G, data);
  const orbitml::EvalWant want = orbitml::EvalWant::up_to(order);

  json evals = json::array();
  for (const std::string& csv : theta_csvs) {
    const Vec theta = orbitcli::parse_vec(csv);
    if (theta.size() != G.d) {
      throw std::invalid_argument("risk-eval: theta has wrong dimension");
    }
    const orbitml::EvalResult ev = orbitml::empirical_risk(model, theta, want);
    check_finite(ev.value, "risk-eval");
    json entry = {{"theta", orbitcli::vec_to_json(theta)},
                  {"value", ev.value}};
    if (ev.grad) {
      entry["grad"] = orbitcli::vec_to_json(*ev.grad);
      entry["grad_norm"] = ev.grad->norm();
    }
    if (ev.hess) entry["hess"] = orbitcli::mat_to_json(*ev.hess);
    if (ev.tensor3) entry["tensor3"] = orbitcli::tensor3_to_json(*ev.tensor3);
    if (ev.tensor4) entry["tensor4"] = orbitcli::tensor4_to_json(*ev.tensor4);
    evals.push_back(entry);
  }

  orbitcli::emit_json(out_path, json{{"cmd", "risk-eval"},
                                     {"data", data_path},
                                     {"group", G.name},
                                     {"sigma", data.sigma},
                                     {"n", data.n},
                                     {"order", order},
                                     {"evals", evals}});
  return 0;
}

int run_series(const GlobalArgs& ga, const std::string& group_spec,
               bool group_set, const std::string& theta_csv,
               const std::string& theta_star_csv, int lmax, double sigma,
               const std::string& out_path) {
  const GroupAction G = resolve_group(ga, group_spec, group_set, nullptr);
  const Vec theta = orbitcli::parse_vec(theta_csv);
  const Vec star = orbitcli::parse_vec(theta_star_csv);
  if (theta.size() != G.d || star.size() != G.d) {
    throw std::invalid_argument("series: theta dimensions must match group");
  }
  if (lmax < 1 || lmax > 4) {
    throw std::invalid_argument("series: lmax must be in 1..4");
  }
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("series: sigma must be positive");
  }

  json terms = json::array();
  double running = 0.0;
  json truncations = json::array();
  for (int ell = 1; ell <= lmax; ++ell) {
    const orbitml::SeriesMethod method = ell <= 3
                                             ? orbitml::SeriesMethod::ClosedForm
                                             : orbitml::SeriesMethod::Generic;
    const double s = orbitml::S_ell(G, theta, star, ell, method);
    check_finite(s, "series");
    const double weighted = s * std::pow(sigma, -2.0 * ell);
    terms.push_back({{"ell", ell}, {"S", s}, {"weighted", weighted}});
    running += weighted;
    truncations.push_back({{"k", ell}, {"value", running}});
  }

  orbitcli::emit_json(out_path, json{{"cmd", "series"},
                                     {"group", G.name},
                                     {"sigma", sigma},
                                     {"lmax", lmax},
                                     {"theta", orbitcli::vec_to_json(theta)},
                                     {"theta_star", orbitcli::vec_to_json(star)},
                                     {"terms", terms},
                                     {"truncations", truncations}});
  return 0;
}

int run_optimize(const GlobalArgs& ga, const std::string& data_path,
                 const std::string& method_name, bool method_set,
                 const std::string& eta_spec, const std::string& init_spec,
                 int iters, bool iters_set, double grad_tol, int record_every,
                 const std::vector<std::string>& ref_csvs,
                 const std::string& group_spec, bool group_set,
                 std::string trace_path) {
  const Dataset data = orbitcli::load_dataset_any(data_path);
  const GroupAction G = resolve_group(ga, group_spec, group_set, &data);
  const RiskModel model(G, data);

  orbitml::OptimConfig cfg;
  std::string method = method_name;
  if (!method_set && ga.config.has("method")) {
    method = ga.config.raw["method"].get<std::string>();
  }
  cfg.method = orbitcli::parse_method(method);
  cfg.eta = orbitcli::parse_eta(eta_spec);
  if (!iters_set && ga.config.has("iters")) {
    iters = ga.config.raw["iters"].get<int>();
  }
  cfg.max_iters = iters;
  cfg.grad_tol = grad_tol;
  cfg.record_every = record_every;

  Vec theta0;
  std::uint64_t init_seed = ga.seed;
  bool random_init = false;
  if (init_spec.rfind("random:", 0) == 0) {
    init_seed = std::stoull(init_spec.substr(7));
    random_init = true;
  } else if (init_spec == "random") {
    random_init = true;
  }
  theta0 = random_init ? orbitcli::random_theta(G.d, init_seed)
                       : orbitcli::parse_vec(init_spec);
  if (theta0.size() != G.d) {
    throw std::invalid_argument("optimize: init has wrong dimension");
  }

  std::vector<Vec> refs;
  for (const std::string& csv : ref_csvs) refs.push_back(orbitcli::parse_vec(csv));
  if (refs.empty() && data.meta && data.meta->theta_star.size() > 0) {
    refs.push_back(data.meta->theta_star);
  }

  const orbitml::OptimTrace trace =
      orbitml::run_optimizer(model, cfg, theta0, refs);

  const double sigma2 = data.sigma * data.sigma;
  const double eta_eff = cfg.method == orbitml::OptMethod::EM
                             ? sigma2
                             : (cfg.eta > 0.0 ? cfg.eta : sigma2 * sigma2);
  json meta = {{"cmd", "optimize"},
               {"data", data_path},
               {"group", G.name},
               {"sigma", data.sigma},
               {"n", data.n},
               {"method", method},
               {"eta", eta_eff},
               {"iters", iters},
               {"record_every", record_every},
               {"init", orbitcli::vec_to_json(theta0)}};
  json refs_json = json::array();
  for (const Vec& r : refs) refs_json.push_back(orbitcli::vec_to_json(r));
  meta["references"] = refs_json;

  if (trace_path.empty()) trace_path = ga.join_out("trace.csv");
  orbitcli::ensure_dir(ga.out_dir);
  std::vector<std::string> cols = {"iter", "risk", "grad_norm"};
  for (std::size_t r = 0; r < refs.size(); ++r) {
    cols.push_back("dist_orbit_" + std::to_string(r));
  }
  for (int j = 0; j < G.d; ++j) cols.push_back("theta_" + std::to_string(j));
  orbitcli::CsvWriter csv(trace_path, meta, cols);
  for (const orbitml::TracePoint& p : trace.points) {
    std::vector<double> row = {static_cast<double>(p.iter), p.risk,
                               p.grad_norm};
    for (double d : p.ref_dists) row.push_back(d);
    for (int j = 0; j < G.d; ++j) row.push_back(p.theta(j));
    csv.row(row);
  }
  csv.close();

  orbitcli::emit_json(
      "", json{{"trace", trace_path},
               {"final_theta", orbitcli::vec_to_json(trace.final_theta)},
               {"final_risk", trace.final_risk},
               {"final_grad_norm", trace.final_grad_norm},
               {"iters_run", trace.iters_run},
               {"converged", trace.converged},
               {"diverged", trace.diverged}});
  if (trace.diverged) {
    throw std::runtime_error("optimize: iteration diverged");
  }
  check_finite(trace.final_risk, "optimize");
  return 0;
}

int run_fisher(const GlobalArgs& ga, const std::string& group_spec,
               bool group_set, const std::string& theta_star_csv, bool star_set,
               double sigma, bool sigma_set, const std::string& method,
               int order, std::int64_t mc_n) {
  const GroupAction G = resolve_group(ga, group_spec, group_set, nullptr);
  const Vec star = resolve_theta_star(ga, theta_star_csv, star_set, nullptr);
  if (!sigma_set) {
    if (!ga.config.has("sigma"))
      throw std::invalid_argument("sigma is required (flag or config)");
    sigma = ga.config.raw["sigma"].get<double>();
  }

  orbitml::FisherResult fr;
  if (method == "series") {
    fr = orbitml::fisher_information_series(G, star, sigma, order);
  } else if (method == "mc") {
    orbitml::McConfig mc;
    mc.N = mc_n;
    mc.seed = ga.seed;
    fr = orbitml::fisher_information_mc(G, star, sigma, mc);
  } else {
    throw std::invalid_argument("fisher: method must be series or mc");
  }

  json doc = {{"cmd", "fisher"},
              {"group", G.name},
              {"theta_star", orbitcli::vec_to_json(star)},
              {"sigma", sigma},
              {"method", fr.method},
              {"order", order},
              {"mc_n", mc_n},
              {"seed", ga.seed},
              {"matrix", orbitcli::mat_to_json(fr.matrix)},
              {"eigvals", orbitcli::vec_to_json(fr.eigvals)}};
  if (fr.method == "mc") doc["se"] = orbitcli::mat_to_json(fr.se);

  json meta = doc;
  meta.erase("matrix");
  meta.erase("eigvals");
  meta.erase("se");

  orbitcli::ensure_dir(ga.out_dir);
  bool have_bands = true;
  std::vector<int> dims;
  try {
    dims = orbitml::band_dims(G);
  } catch (const std::invalid_argument&) {
    have_bands = false;
  }
  if (have_bands) {
    const orbitml::GradedSpectrum gs =
        orbitml::graded_spectrum(fr.matrix, sigma, dims);
    doc["bands"] = bands_to_json(gs, dims);
    orbitcli::CsvWriter csv(ga.join_out("fisher_eigvals.csv"), meta,
                            {"index", "eigval", "band", "scaled"});
    for (int i = 0; i < gs.eigvals.size(); ++i) {
      csv.row({static_cast<double>(i), gs.eigvals(i),
               static_cast<double>(gs.band_of[i]), gs.scaled(i)});
    }
    csv.close();
  } else {
    doc["bands"] = nullptr;
    orbitcli::CsvWriter csv(ga.join_out("fisher_eigvals.csv"), meta,
                            {"index", "eigval"});
    for (int i = 0; i < fr.eigvals.size(); ++i) {
      csv.row({static_cast<double>(i), fr.eigvals(i)});
    }
    csv.close();
  }

  orbitcli::emit_json(ga.join_out("fisher.json"), doc);
  return 0;
}

int run_landscape(const GlobalArgs& ga, const std::string& data_path,
                  const std::string& group_spec, bool group_set,
                  const std::string& theta_star_csv, bool star_set, int starts,
                  int iters, const std::string& method_name,
                  const std::string& eta_spec, int order, double radius) {
  const Dataset data = orbitcli::load_dataset_any(data_path);
  const GroupAction G = resolve_group(ga, group_spec, group_set, &data);
  const RiskModel model(G, data);

  orbitml::OptimConfig cfg;
  cfg.method = orbitcli::parse_method(method_name);
  cfg.eta = orbitcli::parse_eta(eta_spec);
  cfg.max_iters = iters;

  const auto points =
      orbitml::find_critical_points(model, starts, ga.seed, cfg);
  json points_json = json::array();
  std::vector<Vec> minimizers;
  for (const orbitml::CriticalPoint& cp : points) {
    points_json.push_back({{"theta", orbitcli::vec_to_json(cp.theta)},
                           {"value", cp.value},
                           {"grad_norm", cp.grad_norm},
                           {"min_eig", cp.min_eig},
                           {"max_eig", cp.max_eig},
                           {"kind", cp.kind},
                           {"multiplicity", cp.multiplicity}});
    if (cp.kind == "minimizer") minimizers.push_back(cp.theta);
  }

  json doc = {{"cmd", "landscape"}, {"data", data_path},
              {"group", G.name},    {"sigma", data.sigma},
              {"n", data.n},        {"starts", starts},
              {"iters", iters},     {"seed", ga.seed},
              {"radius", radius},   {"critical_points", points_json}};

  if (!minimizers.empty()) {
    const orbitml::BasinResult basins = orbitml::basin_fractions(
        model, minimizers, starts, ga.seed, cfg, radius);
    json refs_json = json::array();
    for (const Vec& r : minimizers) refs_json.push_back(orbitcli::vec_to_json(r));
    doc["basin_fractions"] = {{"references", refs_json},
                              {"fractions", basins.fractions},
                              {"unresolved", basins.unresolved}};
  } else {
    doc["basin_fractions"] = nullptr;
  }

  orbitcli::ensure_dir(ga.out_dir);
  bool have_star = true;
  Vec star;
  try {
    star = resolve_theta_star(ga, theta_star_csv, star_set, &data);
  } catch (const std::invalid_argument&) {
    have_star = false;
  }
  if (have_star) {
    const orbitml::FisherResult fr =
        orbitml::fisher_information_series(G, star, data.sigma, order);
    doc["eigvals"] = orbitcli::vec_to_json(fr.eigvals);
    bool have_bands = true;
    std::vector<int> dims;
    try {
      dims = orbitml::band_dims(G);
    } catch (const std::invalid_argument&) {
      have_bands = false;
    }
    json meta = {{"cmd", "landscape"},
                 {"data", data_path},
                 {"group", G.name},
                 {"sigma", data.sigma},
                 {"order", order}};
    if (have_bands) {
      const orbitml::GradedSpectrum gs =
          orbitml::graded_spectrum(fr.matrix, data.sigma, dims);
      doc["bands"] = bands_to_json(gs, dims);
      orbitcli::CsvWriter csv(ga.join_out("landscape_eigvals.csv"), meta,
                              {"index", "eigval", "band", "scaled"});
      for (int i = 0; i < gs.eigvals.size(); ++i) {
        csv.row({static_cast<double>(i), gs.eigvals(i),
                 static_cast<double>(gs.band_of[i]), gs.scaled(i)});
      }
      csv.close();
    } else {
      doc["bands"] = nullptr;
    }
  } else {
    doc["eigvals"] = nullptr;
    doc["bands"] = nullptr;
  }

  orbitcli::emit_json(ga.join_out("landscape.json"), doc);
  return 0;
}

json family_cert_json(const orbitml::FamilyCertificate& cert) {
  return {{"pass", cert.pass},
          {"worst_grad_norm", cert.worst_grad_norm},
          {"worst_min_eig", cert.worst_min_eig}};
}

int run_mra(const GlobalArgs& ga, int d, const std::string& s_csv, bool s_set,
            const std::string& construct, bool construct_set,
            const std::string& branch_str, const std::string& survey,
            bool survey_set, const std::string& theta_ref_csv, bool ref_set,
            const std::string& out_path) {
  if (s_set == construct_set) {
    throw std::invalid_argument("mra: give exactly one of --s and --construct");
  }
  int branch = 0;
  if (branch_str == "+") branch = +1;
  else if (branch_str == "-") branch = -1;
  else throw std::invalid_argument("mra: branch must be + or -");

  const bool even = d % 2 == 0;
  const int m = orbitml::phase_count(d);

  json doc = {{"cmd", "mra"}, {"d", d}, {"m", m},
              {"branch", branch_str}};

  Vec s;
  if (s_set) {
    s = orbitcli::parse_vec(s_csv);
    doc["construct"] = nullptr;
  } else {
    orbitml::SpuriousCertificate cert;
    if (construct == "even") {
      cert = orbitml::spurious_even(d);
    } else if (construct == "odd") {
      if (even) throw std::invalid_argument("mra: odd construction needs odd d");
      cert = orbitml::spurious_odd(m);
    } else {
      throw std::invalid_argument("mra: construct must be even or odd");
    }
    s = cert.s;
    doc["construct"] = construct;
    json spur = {{"pass", cert.pass},
                 {"s", orbitcli::vec_to_json(cert.s)},
                 {"worst_grad_norm", cert.worst_grad_norm},
                 {"worst_min_eig", cert.worst_min_eig},
                 {"retries", cert.retries}};
    if (construct == "odd") {
      spur["plus_family_minimal"] = cert.plus_family_minimal;
    }
    doc["spurious"] = spur;
  }
  const int expect_s = m + (even ? 1 : 0);
  if (s.size() != expect_s) {
    throw std::invalid_argument("mra: spectrum has wrong length");
  }
  doc["s"] = orbitcli::vec_to_json(s);

  json family = {{"plus", family_cert_json(orbitml::certify_family(d, s, +1))}};
  family["minus"] =
      even ? family_cert_json(orbitml::certify_family(d, s, -1)) : json();
  doc["family"] = family;

  Vec theta_ref;
  if (ref_set) {
    theta_ref = orbitcli::parse_vec(theta_ref_csv);
    if (theta_ref.size() != d) {
      throw std::invalid_argument("mra: theta_star has wrong dimension");
    }
  } else {
    orbitml::FourierCoords fc;
    fc.d = d;
    fc.even = even;
    fc.v0 = 0.0;
    fc.r = Vec(m);
    fc.t = Vec::Zero(m);
    for (int k = 0; k < m; ++k) {
      fc.r(k) = std::sqrt(s(k));
      fc.v.push_back(std::complex<double>(fc.r(k), 0.0));
    }
    fc.v_half = even ? std::sqrt(s(m)) : 0.0;
    theta_ref = orbitml::inv_fourier(fc);
  }
  doc["theta_ref"] = orbitcli::vec_to_json(theta_ref);

  if (survey_set) {
    if (survey.rfind("grid:", 0) != 0) {
      throw std::invalid_argument("mra: survey must be grid:N");
    }
    const int grid = std::stoi(survey.substr(5));
    const orbitml::FourierCoords ref_fc =
        orbitml::fourier(theta_ref, theta_ref);
    const auto minima = orbitml::phase_minimize(d, s, branch, grid, ga.seed);
    json minima_json = json::array();
    for (const orbitml::PhaseMinimum& pm : minima) {
      const Vec rec =
          orbitml::theta_from_phase(ref_fc.r, theta_ref, pm.t, branch);
      minima_json.push_back({{"t", orbitcli::vec_to_json(pm.t)},
                             {"value", pm.value},
                             {"grad_norm", pm.grad_norm},
                             {"min_eig", pm.min_eig},
                             {"multiplicity", pm.multiplicity},
                             {"theta_tilde", orbitcli::vec_to_json(rec)}});
    }
    doc["survey"] = {{"grid", grid}, {"minima", minima_json}};
  } else {
    doc["survey"] = nullptr;
  }

  orbitcli::emit_json(out_path, doc);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"maximum-likelihood orbit recovery toolkit"};
  app.require_subcommand(1);

  GlobalArgs ga;
  auto* config_opt = app.add_option("--config", ga.config_path,
                                    "JSON experiment config file");
  auto* seed_opt = app.add_option("--seed", ga.seed, "RNG seed");
  auto* threads_opt =
      app.add_option("--threads", ga.threads, "worker thread count");
  auto* out_opt = app.add_option("--out", ga.out_dir, "output directory");
  auto* gnuplot_opt =
      app.add_flag("--gnuplot", ga.gnuplot, "also emit gnuplot scripts");
  (void)config_opt;
  (void)threads_opt;

  // generate
  auto* gen = app.add_subcommand("generate", "sample and save a dataset");
  std::string gen_group, gen_star, gen_law = "uniform", gen_name = "dataset";
  double gen_sigma = 0.0;
  std::int64_t gen_n = 0;
  bool gen_binary = false;
  auto* gen_group_opt = gen->add_option("--group", gen_group, "group spec");
  auto* gen_star_opt =
      gen->add_option("--theta-star", gen_star, "signal, comma separated");
  auto* gen_sigma_opt = gen->add_option("--sigma", gen_sigma, "noise level");
  auto* gen_n_opt = gen->add_option("--n", gen_n, "sample count");
  gen->add_option("--law", gen_law, "uniform | fixed:I | weights:CSV");
  gen->add_option("--name", gen_name, "output basename");
  gen->add_flag("--binary", gen_binary, "write the binary format");

  // risk-eval
  auto* re = app.add_subcommand("risk-eval",
                                "evaluate the empirical risk and derivatives");
  std::string re_data, re_group, re_out;
  std::vector<std::string> re_thetas;
  int re_order = 2;
  re->add_option("--data", re_data, "dataset path")->required();
  re->add_option("--theta", re_thetas, "evaluation point, comma separated")
      ->required();
  re->add_option("--order", re_order, "highest derivative order, 0..4");
  auto* re_group_opt = re->add_option("--group", re_group, "group spec");
  re->add_option("--out", re_out, "JSON output path (default stdout)");

  // series
  auto* se = app.add_subcommand("series", "high-noise series terms");
  std::string se_group, se_theta, se_star, se_out;
  int se_lmax = 3;
  double se_sigma = 1.0;
  auto* se_group_opt = se->add_option("--group", se_group, "group spec");
  se->add_option("--theta", se_theta, "evaluation point")->required();
  se->add_option("--theta-star", se_star, "signal")->required();
  se->add_option("--lmax", se_lmax, "highest series order, 1..4");
  se->add_option("--sigma", se_sigma, "noise level");
  se->add_option("--out", se_out, "JSON output path (default stdout)");

  // optimize
  auto* op = app.add_subcommand("optimize", "run EM, GD or AGD on a dataset");
  std::string op_data, op_method = "agd", op_eta = "auto", op_init = "random";
  std::string op_group, op_trace;
  std::vector<std::string> op_refs;
  int op_iters = 250, op_record = 1;
  double op_grad_tol = 0.0;
  op->add_option("--data", op_data, "dataset path")->required();
  auto* op_method_opt =
      op->add_option("--method", op_method, "em | gd | agd");
  op->add_option("--eta", op_eta, "step size, auto | VALUE");
  op->add_option("--init", op_init, "CSV theta0 or random[:SEED]");
  auto* op_iters_opt = op->add_option("--iters", op_iters, "iteration budget");
  op->add_option("--grad-tol", op_grad_tol, "stop threshold, 0 = default");
  op->add_option("--record-every", op_record, "trace stride");
  op->add_option("--ref", op_refs, "reference point, comma separated");
  auto* op_group_opt = op->add_option("--group", op_group, "group spec");
  op->add_option("--trace-out", op_trace, "trace CSV path");

  // fisher
  auto* fi = app.add_subcommand("fisher", "Fisher information report");
  std::string fi_group, fi_star, fi_method = "series";
  double fi_sigma = 0.0;
  int fi_order = 3;
  std::int64_t fi_mc_n = 100000;
  auto* fi_group_opt = fi->add_option("--group", fi_group, "group spec");
  auto* fi_star_opt = fi->add_option("--theta-star", fi_star, "signal");
  auto* fi_sigma_opt = fi->add_option("--sigma", fi_sigma, "noise level");
  fi->add_option("--method", fi_method, "series | mc");
  fi->add_option("--order", fi_order, "series truncation order");
  fi->add_option("--mc-n", fi_mc_n, "Monte Carlo draws");

  // landscape
  auto* la = app.add_subcommand("landscape",
                                "critical point survey and basin report");
  std::string la_data, la_group, la_star, la_method = "agd", la_eta = "auto";
  int la_starts = 100, la_iters = 250, la_order = 3;
  double la_radius = 0.2;
  la->add_option("--data", la_data, "dataset path")->required();
  auto* la_group_opt = la->add_option("--group", la_group, "group spec");
  auto* la_star_opt = la->add_option("--theta-star", la_star, "signal");
  la->add_option("--starts", la_starts, "number of multistart runs");
  la->add_option("--iters", la_iters, "iteration budget per run");
  la->add_option("--method", la_method, "em | gd | agd");
  la->add_option("--eta", la_eta, "step size, auto | VALUE");
  la->add_option("--order", la_order, "Fisher series order");
  la->add_option("--radius", la_radius, "basin assignment radius");

  // mra
  auto* mr = app.add_subcommand("mra", "phase surrogate analysis");
  int mr_d = 0;
  std::string mr_s, mr_construct, mr_branch = "+", mr_survey, mr_ref, mr_out;
  mr->add_option("--d", mr_d, "signal dimension")->required();
  auto* mr_s_opt = mr->add_option("--s", mr_s, "power spectrum, comma separated");
  auto* mr_construct_opt =
      mr->add_option("--construct", mr_construct, "even | odd");
  mr->add_option("--branch", mr_branch, "+ | -");
  auto* mr_survey_opt = mr->add_option("--survey", mr_survey, "grid:N");
  auto* mr_ref_opt =
      mr->add_option("--theta-star", mr_ref, "reference signal");
  mr->add_option("--out", mr_out, "JSON output path (default stdout)");

  // repro
  auto* rp = app.add_subcommand("repro", "scripted figure reproduction");
  rp->require_subcommand(1);
  auto* rp1 = rp->add_subcommand("fig1", "sample scatter and risk contours");
  auto* rp2 = rp->add_subcommand("fig2", "three-method convergence traces");
  auto* rp4 = rp->add_subcommand("fig4", "basin fraction sweep");
  std::string rp4_sigmas = "5.0,5.4,5.8,6.2";
  orbitcli::Fig4Options fig4_opts;
  bool rp4_full = false;
  rp4->add_option("--sigmas", rp4_sigmas, "noise levels, comma separated");
  auto* rp4_n_opt = rp4->add_option("--n", fig4_opts.n, "sample count");
  auto* rp4_starts_opt =
      rp4->add_option("--starts", fig4_opts.starts, "starts per noise level");
  rp4->add_option("--iters", fig4_opts.iters, "iteration budget per run");
  rp4->add_flag("--full", rp4_full, "paper scale: n=1e6, 500 starts");

  for (CLI::App* sub : {gen, re, se, op, fi, la, mr, rp}) {
    sub->fallthrough();
  }
  for (CLI::App* sub : {rp1, rp2, rp4}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    ga.out_set = out_opt->count() > 0;
    ga.seed_set = seed_opt->count() > 0;
    ga.gnuplot_set = gnuplot_opt->count() > 0;
    ga.resolve();
    if (ga.threads > 0) orbitml::set_num_threads(ga.threads);

    if (gen->parsed()) {
      return run_generate(ga, gen_group, gen_group_opt->count() > 0, gen_star,
                          gen_star_opt->count() > 0, gen_sigma,
                          gen_sigma_opt->count() > 0, gen_n,
                          gen_n_opt->count() > 0, gen_law, gen_name,
                          gen_binary);
    }
    if (re->parsed()) {
      return run_risk_eval(ga, re_data, re_thetas, re_order, re_group,
                           re_group_opt->count() > 0, re_out);
    }
    if (se->parsed()) {
      return run_series(ga, se_group, se_group_opt->count() > 0, se_theta,
                        se_star, se_lmax, se_sigma, se_out);
    }
    if (op->parsed()) {
      return run_optimize(ga, op_data, op_method, op_method_opt->count() > 0,
                          op_eta, op_init, op_iters, op_iters_opt->count() > 0,
                          op_grad_tol, op_record, op_refs, op_group,
                          op_group_opt->count() > 0, op_trace);
    }
    if (fi->parsed()) {
      return run_fisher(ga, fi_group, fi_group_opt->count() > 0, fi_star,
                        fi_star_opt->count() > 0, fi_sigma,
                        fi_sigma_opt->count() > 0, fi_method, fi_order,
                        fi_mc_n);
    }
    if (la->parsed()) {
      return run_landscape(ga, la_data, la_group, la_group_opt->count() > 0,
                           la_star, la_star_opt->count() > 0, la_starts,
                           la_iters, la_method, la_eta, la_order, la_radius);
    }
    if (mr->parsed()) {
      return run_mra(ga, mr_d, mr_s, mr_s_opt->count() > 0, mr_construct,
                     mr_construct_opt->count() > 0, mr_branch, mr_survey,
                     mr_survey_opt->count() > 0, mr_ref,
                     mr_ref_opt->count() > 0, mr_out);
    }
    if (rp->parsed()) {
      orbitcli::ReproCommon common;
      common.out_dir = ga.out_dir;
      common.seed = ga.seed;
      common.seed_set = ga.seed_set;
      common.gnuplot = ga.gnuplot;
      if (rp1->parsed()) {
        orbitcli::repro_fig1(common);
        return 0;
      }
      if (rp2->parsed()) {
        orbitcli::repro_fig2(common);
        return 0;
      }
      if (rp4->parsed()) {
        fig4_opts.full = rp4_full;
        fig4_opts.sigmas = orbitcli::parse_double_list(rp4_sigmas);
        if (rp4_n_opt->count() == 0 && rp4_starts_opt->count() == 0) {
          // defaults already set
        }
        orbitcli::repro_fig4(common, fig4_opts);
        return 0;
      }
    }
    throw std::invalid_argument("no subcommand selected");
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  }
}
