#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ispls/benchmark.hpp"
#include "ispls/csv.hpp"
#include "ispls/ispls.hpp"
#include "ispls/model.hpp"
#include "ispls/simulate.hpp"
#include "ispls/tuning.hpp"
#include "ispls/types.hpp"

namespace {

using nlohmann::json;
using namespace ispls;
namespace fs = std::filesystem;

Model parse_model(const std::string& s) {
  if (s == "homo") return Model::Homogeneity;
  if (s == "hetero") return Model::Heterogeneity;
  throw DataError("unknown model '" + s + "' (expected homo or hetero)");
}

Contrast parse_contrast(const std::string& s) {
  if (s == "mag") return Contrast::Magnitude;
  if (s == "sign") return Contrast::Sign;
  throw DataError("unknown contrast '" + s + "' (expected mag or sign)");
}

Scenario parse_scenario(const std::string& s) {
  if (s == "s1" || s == "S1") return Scenario::S1;
  if (s == "s2" || s == "S2") return Scenario::S2;
  if (s == "s3" || s == "S3") return Scenario::S3;
  if (s == "s4" || s == "S4") return Scenario::S4;
  throw DataError("unknown scenario '" + s + "' (expected s1..s4)");
}

MultiStudyData load_studies(const std::vector<std::string>& xs,
                            const std::vector<std::string>& ys) {
  if (xs.empty()) throw DataError("need at least one --x/--y study pair");
  if (xs.size() != ys.size())
    throw DataError("got " + std::to_string(xs.size()) + " --x files but " +
                    std::to_string(ys.size()) + " --y files");
  MultiStudyData d;
  for (std::size_t i = 0; i < xs.size(); ++i)
    d.studies.push_back(
        {read_matrix_csv(xs[i]), read_matrix_csv(ys[i]), "study" + std::to_string(i + 1)});
  d.validate();
  return d;
}

MultiStudyData prepare_data(const json& m) {
  MultiStudyData data = load_studies(m.at("inputs").at("x").get<std::vector<std::string>>(),
                                     m.at("inputs").at("y").get<std::vector<std::string>>());
  if (m.at("params").at("standardize").get<bool>()) {
    StandardizeResult st = standardize(data);
    for (const auto& w : st.warnings)
      std::fprintf(stderr, "warning: study %zu column %zu has zero variance; left centered\n",
                   w.study + 1, w.column + 1);
    data = std::move(st.data);
  }
  return data;
}

void ensure_outdir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw DataError("cannot create output directory '" + out + "'");
}

PenaltySpec penalty_from_json(const json& p) {
  PenaltySpec s;
  s.model = parse_model(p.at("model").get<std::string>());
  s.contrast = parse_contrast(p.at("contrast").get<std::string>());
  s.mu1 = p.at("mu1").get<double>();
  s.mu2 = p.at("mu2").get<double>();
  s.a = p.at("a").get<double>();
  if (!p.at("b").is_null()) s.b = p.at("b").get<double>();
  s.tau2 = p.at("tau2").get<double>();
  s.kappa = p.at("kappa").get<double>();
  s.printed_sign_denominator = p.at("printed_sign_denominator").get<bool>();
  return s;
}

IsplsConfig config_from_json(const json& p) {
  IsplsConfig c;
  c.penalty = penalty_from_json(p);
  c.outer_max_iter = p.at("outer_max_iter").get<int>();
  c.outer_tol = p.at("outer_tol").get<double>();
  c.c_step.inner_max_iter = p.at("inner_max_iter").get<int>();
  c.c_step.inner_tol = p.at("inner_tol").get<double>();
  c.c_step.sweep_max = p.at("sweep_max").get<int>();
  c.refit_on_selected = p.at("refit_on_selected").get<bool>();
  return c;
}

ScenarioSpec scenario_from_json(const json& p, const std::string& name) {
  ScenarioSpec s;
  s.scenario = parse_scenario(name);
  s.n_studies = p.at("l").get<std::size_t>();
  s.p = p.at("p").get<std::size_t>();
  s.q = p.at("q").get<std::size_t>();
  s.n_per_study = p.at("n").get<std::size_t>();
  s.rho = p.at("rho").get<double>();
  s.n_signal = p.at("n_signal").get<std::size_t>();
  s.noise_sd = p.at("noise_sd").get<double>();
  s.seed = p.at("seed").get<std::uint64_t>();
  s.validate();
  return s;
}

std::vector<Method> methods_from_json(const json& names) {
  std::vector<Method> out;
  for (const auto& n : names) {
    const auto m = method_from_name(n.get<std::string>());
    if (!m) throw DataError("unknown method '" + n.get<std::string>() + "'");
    out.push_back(*m);
  }
  if (out.empty()) throw DataError("need at least one method");
  return out;
}

json fit_and_write(const MultiStudyData& data, const IsplsConfig& cfg,
                   const std::string& out) {
  const FitResult fit = fit_ispls(data, cfg);
  const std::size_t L = data.n_studies();
  const auto p = static_cast<Eigen::Index>(data.p());

  MatrixXd dirs(static_cast<Eigen::Index>(L), p), sel(static_cast<Eigen::Index>(L), p);
  for (std::size_t l = 0; l < L; ++l) {
    dirs.row(static_cast<Eigen::Index>(l)) = fit.directions[l].transpose();
    for (Eigen::Index j = 0; j < p; ++j)
      sel(static_cast<Eigen::Index>(l), j) = fit.selected[l][static_cast<std::size_t>(j)] ? 1.0 : 0.0;
  }
  write_matrix_csv(out + "/directions.csv", dirs);
  write_matrix_csv(out + "/selection.csv", sel);
  for (std::size_t l = 0; l < L; ++l)
    write_matrix_csv(out + "/beta_study" + std::to_string(l + 1) + ".csv", fit.beta[l]);

  json results;
  results["converged"] = fit.converged;
  results["fully_penalized"] = fit.fully_penalized;
  results["iterations"] = fit.iterations;
  results["objective_trace"] = fit.objective_trace;
  return results;
}

json run_fit(const json& m, const std::string& out) {
  const MultiStudyData data = prepare_data(m);
  return fit_and_write(data, config_from_json(m.at("params")), out);
}

json run_cv(const json& m, const std::string& out, int workers) {
  const json& p = m.at("params");
  const MultiStudyData data = prepare_data(m);

  TuningGrid grid;
  if (p.at("mu1_grid").is_null() || p.at("mu2_grid").is_null()) {
    grid = default_grid(data);
    if (!p.at("mu1_grid").is_null())
      grid.mu1_values = p.at("mu1_grid").get<std::vector<double>>();
    if (!p.at("mu2_grid").is_null())
      grid.mu2_values = p.at("mu2_grid").get<std::vector<double>>();
  } else {
    grid.mu1_values = p.at("mu1_grid").get<std::vector<double>>();
    grid.mu2_values = p.at("mu2_grid").get<std::vector<double>>();
  }
  grid.folds = p.at("folds").get<int>();
  grid.seed = p.at("seed").get<std::uint64_t>();

  IsplsConfig base = config_from_json(p);
  const CvResult cv = cross_validate(data, base.penalty, grid, base, workers);

  MatrixXd scores(static_cast<Eigen::Index>(grid.mu1_values.size() * grid.mu2_values.size()), 3);
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < grid.mu1_values.size(); ++i)
    for (std::size_t j = 0; j < grid.mu2_values.size(); ++j, ++row) {
      scores(row, 0) = grid.mu1_values[i];
      scores(row, 1) = grid.mu2_values[j];
      scores(row, 2) = cv.scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  write_matrix_csv(out + "/cv_scores.csv", scores);

  json best;
  best["mu1"] = cv.best_mu1;
  best["mu2"] = cv.best_mu2;
  best["score"] = cv.scores(static_cast<Eigen::Index>(cv.best_i),
                            static_cast<Eigen::Index>(cv.best_j));
  write_text_file(out + "/best.json", best.dump(2) + "\n");

  IsplsConfig cfg = base;
  cfg.penalty.mu1 = cv.best_mu1;
  cfg.penalty.mu2 = cv.best_mu2;
  json results = fit_and_write(data, cfg, out);
  results["best_mu1"] = cv.best_mu1;
  results["best_mu2"] = cv.best_mu2;
  results["mu1_grid"] = grid.mu1_values;
  results["mu2_grid"] = grid.mu2_values;
  return results;
}

json run_simulate(const json& m, const std::string& out) {
  const json& p = m.at("params");
  const ScenarioSpec spec = scenario_from_json(p, p.at("scenario").get<std::string>());
  const auto [data, truth] = gen_scenario(spec);
  for (std::size_t l = 0; l < data.n_studies(); ++l) {
    write_matrix_csv(out + "/x_study" + std::to_string(l + 1) + ".csv", data.studies[l].x);
    write_matrix_csv(out + "/y_study" + std::to_string(l + 1) + ".csv", data.studies[l].y);
  }
  write_matrix_csv(out + "/truth_beta1.csv", truth.beta1);
  MatrixXd support(truth.beta1.rows(), truth.beta1.cols());
  for (Eigen::Index l = 0; l < support.rows(); ++l)
    for (Eigen::Index j = 0; j < support.cols(); ++j)
      support(l, j) = truth.support[static_cast<std::size_t>(l)][static_cast<std::size_t>(j)] ? 1.0 : 0.0;
  write_matrix_csv(out + "/truth_support.csv", support);
  json results;
  results["studies"] = data.n_studies();
  return results;
}

json run_benchmark_cmd(const json& m, const std::string& out, int workers) {
  const json& p = m.at("params");
  std::vector<ScenarioSpec> specs;
  for (const auto& name : p.at("scenarios"))
    specs.push_back(scenario_from_json(p, name.get<std::string>()));
  const std::vector<Method> methods = methods_from_json(p.at("methods"));
  const BenchmarkReport rep =
      run_benchmark(specs, methods, p.at("replicates").get<int>(),
                    p.at("seed").get<std::uint64_t>(), workers);
  write_text_file(out + "/results_long.csv", long_table_csv(rep));
  write_text_file(out + "/results_aggregate.csv", aggregate_table_csv(rep));
  write_text_file(out + "/loadings.csv", loadings_table_csv(rep));
  json results;
  results["rows"] = rep.rows.size();
  results["aggregate_rows"] = rep.aggregate.size();
  return results;
}

json run_ooi(const json& m, const std::string& out, int workers) {
  const json& p = m.at("params");
  const MultiStudyData data = prepare_data(m);
  const std::vector<Method> methods = methods_from_json(p.at("methods"));
  const OoiReport rep =
      ooi_study(data, methods, p.at("resamples").get<int>(), p.at("split").get<double>(),
                p.at("seed").get<std::uint64_t>(), workers);
  write_text_file(out + "/ooi_genes.csv", ooi_genes_csv(rep));
  write_text_file(out + "/ooi_summary.csv", ooi_summary_csv(rep));
  json results;
  results["methods"] = rep.summary.size();
  return results;
}

int execute(json manifest, const std::string& out, int workers) {
  ensure_outdir(out);
  const std::string cmd = manifest.at("command").get<std::string>();
  json results;
  if (cmd == "fit") {
    results = run_fit(manifest, out);
  } else if (cmd == "cv") {
    results = run_cv(manifest, out, workers);
  } else if (cmd == "simulate") {
    results = run_simulate(manifest, out);
  } else if (cmd == "benchmark") {
    results = run_benchmark_cmd(manifest, out, workers);
  } else if (cmd == "ooi") {
    results = run_ooi(manifest, out, workers);
  } else {
    throw DataError("unknown command '" + cmd + "' in manifest");
  }
  manifest["results"] = results;
  write_text_file(out + "/manifest.json", manifest.dump(2) + "\n");
  return 0;
}

struct PenaltyFlags {
  std::string model = "homo";
  std::string contrast = "mag";
  double mu1 = 0.0, mu2 = 0.0, a = 6.0, tau2 = 0.5, kappa = 0.5, b = 0.0;
  bool printed_sign_denominator = false;
  int outer_max_iter = 100, inner_max_iter = 50, sweep_max = 100;
  double outer_tol = 1e-4, inner_tol = 1e-6;
  bool refit_on_selected = false;
  bool standardize = true;
};

void add_penalty_flags(CLI::App* sub, PenaltyFlags& f) {
  sub->add_option("--model", f.model, "homo or hetero")->default_val("homo");
  sub->add_option("--contrast", f.contrast, "mag or sign")->default_val("mag");
  sub->add_option("--mu1", f.mu1, "sparsity penalty level");
  sub->add_option("--mu2", f.mu2, "contrast penalty level");
  sub->add_option("--a", f.a, "MCP concavity")->default_val(6.0);
  sub->add_option("--b", f.b, "outer MCP concavity (default: L*a*mu1^2/2)");
  sub->add_option("--tau2", f.tau2, "sign smoothing constant")->default_val(0.5);
  sub->add_option("--kappa", f.kappa, "w-step balance in (0, 0.5]")->default_val(0.5);
  sub->add_flag("--printed-sign-denominator", f.printed_sign_denominator,
                "use the literal printed sign-update denominator");
  sub->add_option("--outer-max-iter", f.outer_max_iter)->default_val(100);
  sub->add_option("--outer-tol", f.outer_tol)->default_val(1e-4);
  sub->add_option("--inner-max-iter", f.inner_max_iter)->default_val(50);
  sub->add_option("--inner-tol", f.inner_tol)->default_val(1e-6);
  sub->add_option("--sweep-max", f.sweep_max)->default_val(100);
  sub->add_flag("--refit-on-selected", f.refit_on_selected,
                "refit an unpenalized direction on the selected variables");
  sub->add_flag("--standardize,!--no-standardize", f.standardize,
                "center and scale X, center Y (default on)");
}

json penalty_params(const CLI::App* sub, const PenaltyFlags& f) {
  json p;
  p["model"] = f.model;
  p["contrast"] = f.contrast;
  p["mu1"] = f.mu1;
  p["mu2"] = f.mu2;
  p["a"] = f.a;
  p["b"] = sub->count("--b") ? json(f.b) : json(nullptr);
  p["tau2"] = f.tau2;
  p["kappa"] = f.kappa;
  p["printed_sign_denominator"] = f.printed_sign_denominator;
  p["outer_max_iter"] = f.outer_max_iter;
  p["outer_tol"] = f.outer_tol;
  p["inner_max_iter"] = f.inner_max_iter;
  p["inner_tol"] = f.inner_tol;
  p["sweep_max"] = f.sweep_max;
  p["refit_on_selected"] = f.refit_on_selected;
  p["standardize"] = f.standardize;
  return p;
}

struct ScenarioFlags {
  std::string scenario = "s1";
  std::size_t l = 4, p = 100, q = 5, n = 120, n_signal = 10;
  double rho = 0.2, noise_sd = 1.0;
};

void add_scenario_flags(CLI::App* sub, ScenarioFlags& f, bool single) {
  if (single) sub->add_option("--scenario", f.scenario, "s1..s4")->default_val("s1");
  sub->add_option("--l", f.l, "number of studies")->default_val(4);
  sub->add_option("--p", f.p, "number of predictors")->default_val(100);
  sub->add_option("--q", f.q, "number of responses")->default_val(5);
  sub->add_option("--n", f.n, "rows per study")->default_val(120);
  sub->add_option("--rho", f.rho, "AR(1) correlation")->default_val(0.2);
  sub->add_option("--n-signal", f.n_signal, "signal variables per study")->default_val(10);
  sub->add_option("--noise-sd", f.noise_sd, "noise standard deviation")->default_val(1.0);
}

json scenario_params(const ScenarioFlags& f) {
  json p;
  p["l"] = f.l;
  p["p"] = f.p;
  p["q"] = f.q;
  p["n"] = f.n;
  p["rho"] = f.rho;
  p["n_signal"] = f.n_signal;
  p["noise_sd"] = f.noise_sd;
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"integrative sparse partial least squares toolkit"};
  app.require_subcommand(0, 1);

  std::string from_manifest, replay_out = "out";
  int workers = 0;
  app.add_option("--from-manifest", from_manifest, "re-run a recorded manifest");
  app.add_option("--out", replay_out, "output directory for --from-manifest");
  app.add_option("--workers", workers, "worker thread cap (0 = auto)");

  std::vector<std::string> fit_x, fit_y;
  PenaltyFlags fit_flags;
  std::string fit_out = "out";
  auto* fit = app.add_subcommand("fit", "fit the integrative model at fixed (mu1, mu2)");
  fit->add_option("--x", fit_x, "per-study X csv files")->required();
  fit->add_option("--y", fit_y, "per-study Y csv files")->required();
  add_penalty_flags(fit, fit_flags);
  fit->add_option("--out", fit_out, "output directory")->default_val("out");

  std::vector<std::string> cv_x, cv_y;
  PenaltyFlags cv_flags;
  std::string cv_out = "out";
  std::vector<double> cv_mu1_grid, cv_mu2_grid;
  int cv_folds = 5;
  std::uint64_t cv_seed = 0;
  auto* cv = app.add_subcommand("cv", "cross-validate (mu1, mu2), then fit the best");
  cv->add_option("--x", cv_x, "per-study X csv files")->required();
  cv->add_option("--y", cv_y, "per-study Y csv files")->required();
  add_penalty_flags(cv, cv_flags);
  cv->add_option("--mu1-grid", cv_mu1_grid, "explicit mu1 grid (default: data-driven)");
  cv->add_option("--mu2-grid", cv_mu2_grid, "explicit mu2 grid (default: 0,0.01,0.1,1,10)");
  cv->add_option("--folds", cv_folds)->default_val(5);
  cv->add_option("--seed", cv_seed)->default_val(0);
  cv->add_option("--out", cv_out, "output directory")->default_val("out");

  ScenarioFlags sim_flags;
  std::uint64_t sim_seed = 0;
  std::string sim_out = "out";
  auto* sim = app.add_subcommand("simulate", "draw one scenario dataset");
  add_scenario_flags(sim, sim_flags, true);
  sim->add_option("--seed", sim_seed)->default_val(0);
  sim->add_option("--out", sim_out, "output directory")->default_val("out");

  ScenarioFlags bench_flags;
  std::vector<std::string> bench_scenarios = {"s1"};
  std::vector<std::string> bench_methods;
  int bench_replicates = 50;
  std::uint64_t bench_seed = 0;
  std::string bench_out = "out";
  auto* bench = app.add_subcommand("benchmark", "replicate the simulation study");
  bench->add_option("--scenario", bench_scenarios, "scenarios s1..s4 (share --rho/--n)");
  add_scenario_flags(bench, bench_flags, false);
  bench->add_option("--methods", bench_methods, "method names (default: all)");
  bench->add_option("--replicates", bench_replicates)->default_val(50);
  bench->add_option("--seed", bench_seed)->default_val(0);
  bench->add_option("--out", bench_out, "output directory")->default_val("out");

  std::vector<std::string> ooi_x, ooi_y;
  std::vector<std::string> ooi_methods;
  int ooi_resamples = 100;
  double ooi_split = 0.75;
  std::uint64_t ooi_seed = 0;
  bool ooi_standardize = true;
  std::string ooi_out = "out";
  auto* ooi = app.add_subcommand("ooi", "observed occurrence index over resampled splits");
  ooi->add_option("--x", ooi_x, "per-study X csv files")->required();
  ooi->add_option("--y", ooi_y, "per-study Y csv files")->required();
  ooi->add_option("--methods", ooi_methods, "method names (default: all)");
  ooi->add_option("--resamples", ooi_resamples)->default_val(100);
  ooi->add_option("--split", ooi_split, "training fraction")->default_val(0.75);
  ooi->add_option("--seed", ooi_seed)->default_val(0);
  ooi->add_flag("--standardize,!--no-standardize", ooi_standardize,
                "center and scale X, center Y (default on)");
  ooi->add_option("--out", ooi_out, "output directory")->default_val("out");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (!from_manifest.empty()) {
      json manifest = json::parse(read_text_file(from_manifest));
      manifest.erase("results");
      return execute(std::move(manifest), replay_out, workers);
    }
    if (fit->parsed()) {
      json m;
      m["command"] = "fit";
      m["inputs"] = {{"x", fit_x}, {"y", fit_y}};
      m["params"] = penalty_params(fit, fit_flags);
      return execute(std::move(m), fit_out, workers);
    }
    if (cv->parsed()) {
      json m;
      m["command"] = "cv";
      m["inputs"] = {{"x", cv_x}, {"y", cv_y}};
      json p = penalty_params(cv, cv_flags);
      p["mu1_grid"] = cv->count("--mu1-grid") ? json(cv_mu1_grid) : json(nullptr);
      p["mu2_grid"] = cv->count("--mu2-grid") ? json(cv_mu2_grid) : json(nullptr);
      p["folds"] = cv_folds;
      p["seed"] = cv_seed;
      m["params"] = std::move(p);
      return execute(std::move(m), cv_out, workers);
    }
    if (sim->parsed()) {
      json m;
      m["command"] = "simulate";
      json p = scenario_params(sim_flags);
      p["scenario"] = sim_flags.scenario;
      p["seed"] = sim_seed;
      m["params"] = std::move(p);
      return execute(std::move(m), sim_out, workers);
    }
    if (bench->parsed()) {
      json m;
      m["command"] = "benchmark";
      json p = scenario_params(bench_flags);
      p["scenarios"] = bench_scenarios;
      std::vector<std::string> names = bench_methods;
      if (names.empty())
        for (Method mm : all_methods()) names.push_back(method_name(mm));
      p["methods"] = names;
      p["replicates"] = bench_replicates;
      p["seed"] = bench_seed;
      m["params"] = std::move(p);
      return execute(std::move(m), bench_out, workers);
    }
    if (ooi->parsed()) {
      json m;
      m["command"] = "ooi";
      m["inputs"] = {{"x", ooi_x}, {"y", ooi_y}};
      json p;
      std::vector<std::string> names = ooi_methods;
      if (names.empty())
        for (Method mm : all_methods()) names.push_back(method_name(mm));
      p["methods"] = names;
      p["resamples"] = ooi_resamples;
      p["split"] = ooi_split;
      p["seed"] = ooi_seed;
      p["standardize"] = ooi_standardize;
      m["params"] = std::move(p);
      return execute(std::move(m), ooi_out, workers);
    }
    std::fprintf(stderr, "no command given; see --help\n");
    return 2;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  }
}
