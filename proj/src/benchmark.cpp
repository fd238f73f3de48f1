#include "ispls/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <random>

#include "ispls/csv.hpp"
#include "ispls/ispls.hpp"
#include "ispls/model.hpp"
#include "ispls/parallel.hpp"
#include "ispls/pls.hpp"
#include "ispls/rng.hpp"
#include "ispls/spls.hpp"
#include "ispls/tuning.hpp"

namespace ispls {

namespace {

const std::vector<double> kEtaGrid = {0.0, 0.1, 0.2, 0.3, 0.4,
                                      0.5, 0.6, 0.7, 0.8, 0.9};

MatrixXd take_rows(const MatrixXd& m, const std::vector<int>& rows) {
  MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t k = 0; k < rows.size(); ++k)
    out.row(static_cast<Eigen::Index>(k)) = m.row(rows[k]);
  return out;
}

std::string fmt_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

double sample_sd(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = {
      Method::MetaPls,      Method::MetaSpls,     Method::PooledSpls,
      Method::IsplsHomoM,   Method::IsplsHomoS,   Method::IsplsHeteroM,
      Method::IsplsHeteroS,
  };
  return methods;
}

std::string method_name(Method m) {
  switch (m) {
    case Method::MetaPls: return "meta_pls";
    case Method::MetaSpls: return "meta_spls";
    case Method::PooledSpls: return "pooled_spls";
    case Method::IsplsHomoM: return "ispls_homo_m";
    case Method::IsplsHomoS: return "ispls_homo_s";
    case Method::IsplsHeteroM: return "ispls_hetero_m";
    case Method::IsplsHeteroS: return "ispls_hetero_s";
  }
  return "unknown";
}

std::optional<Method> method_from_name(const std::string& name) {
  for (Method m : all_methods())
    if (method_name(m) == name) return m;
  return std::nullopt;
}

MethodFit run_method(Method m, const MultiStudyData& data, std::uint64_t seed,
                     int workers) {
  data.validate();
  const std::size_t L = data.n_studies();
  const auto p = static_cast<Eigen::Index>(data.p());
  const auto q = static_cast<Eigen::Index>(data.q());

  MethodFit out;
  out.directions.assign(L, VectorXd::Zero(p));
  out.beta.assign(L, MatrixXd::Zero(p, q));
  out.selected.assign(L, std::vector<bool>(data.p(), false));

  switch (m) {
    case Method::MetaPls: {
      for (std::size_t l = 0; l < L; ++l) {
        const auto& s = data.studies[l];
        out.selected[l].assign(data.p(), true);  // PLS selects everything
        const MatrixXd z = s.x.transpose() * s.y;
        if (z.norm() == 0.0) continue;
        const VectorXd dir = first_direction(z);
        out.directions[l] = dir;
        out.beta[l] = latent_regress(s.x, s.y, dir).beta;
      }
      break;
    }
    case Method::MetaSpls: {
      for (std::size_t l = 0; l < L; ++l) {
        const auto& s = data.studies[l];
        SplsConfig cfg;
        cfg.eta = spls_cv_eta(s.x, s.y, kEtaGrid, 5,
                              derive_seed(seed, {seed_tag::kFolds, l}));
        const FitResult fit = fit_spls(s.x, s.y, cfg);
        out.directions[l] = fit.directions[0];
        out.beta[l] = fit.beta[0];
        out.selected[l] = fit.selected[0];
      }
      break;
    }
    case Method::PooledSpls: {
      Eigen::Index rows = 0;
      for (const auto& s : data.studies) rows += s.x.rows();
      MatrixXd sx(rows, p), sy(rows, q);
      Eigen::Index at = 0;
      for (const auto& s : data.studies) {
        sx.middleRows(at, s.x.rows()) = s.x;
        sy.middleRows(at, s.y.rows()) = s.y;
        at += s.x.rows();
      }
      SplsConfig cfg;
      cfg.eta = spls_cv_eta(sx, sy, kEtaGrid, 5,
                            derive_seed(seed, {seed_tag::kFolds, std::uint64_t{0}}));
      const FitResult fit = fit_spls(sx, sy, cfg);
      for (std::size_t l = 0; l < L; ++l) {
        out.directions[l] = fit.directions[0];
        out.beta[l] = fit.beta[0];
        out.selected[l] = fit.selected[0];
      }
      break;
    }
    default: {
      PenaltySpec tmpl;
      tmpl.model = (m == Method::IsplsHomoM || m == Method::IsplsHomoS)
                       ? Model::Homogeneity
                       : Model::Heterogeneity;
      tmpl.contrast = (m == Method::IsplsHomoM || m == Method::IsplsHeteroM)
                          ? Contrast::Magnitude
                          : Contrast::Sign;
      TuningGrid grid = default_grid(data);
      grid.folds = 5;
      grid.seed = derive_seed(seed, {seed_tag::kFolds});
      const CvResult cv = cross_validate(data, tmpl, grid, IsplsConfig{}, workers);
      IsplsConfig cfg;
      cfg.penalty = tmpl;
      cfg.penalty.mu1 = cv.best_mu1;
      cfg.penalty.mu2 = cv.best_mu2;
      const FitResult fit = fit_ispls(data, cfg);
      out.directions = fit.directions;
      out.beta = fit.beta;
      out.selected = fit.selected;
    }
  }
  return out;
}

EvalResult evaluate(const MethodFit& fit, const GroundTruth& truth,
                    const MultiStudyData& test) {
  test.validate();
  const std::size_t L = test.n_studies();
  const std::size_t p = test.p();
  if (fit.selected.size() != L || fit.beta.size() != L ||
      truth.support.size() != L)
    throw DataError("evaluate: study counts disagree");

  EvalResult res;
  res.per_study.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    const auto& s = test.studies[l];
    auto& m = res.per_study[l];
    m.mspe = (s.y - s.x * fit.beta[l]).squaredNorm() /
             (static_cast<double>(s.n()) * static_cast<double>(s.q()));
    std::size_t tp = 0, tn = 0, pos = 0, neg = 0;
    for (std::size_t j = 0; j < p; ++j) {
      if (truth.support[l][j]) {
        ++pos;
        tp += fit.selected[l][j] ? 1 : 0;
      } else {
        ++neg;
        tn += fit.selected[l][j] ? 0 : 1;
      }
    }
    m.sensitivity = pos > 0 ? static_cast<double>(tp) / static_cast<double>(pos) : 1.0;
    m.specificity = neg > 0 ? static_cast<double>(tn) / static_cast<double>(neg) : 1.0;
    res.mean.mspe += m.mspe / static_cast<double>(L);
    res.mean.sensitivity += m.sensitivity / static_cast<double>(L);
    res.mean.specificity += m.specificity / static_cast<double>(L);
  }
  return res;
}

std::string scenario_label(const ScenarioSpec& spec) {
  return scenario_name(spec.scenario) + "-rho" + fmt_short(spec.rho) + "-n" +
         std::to_string(spec.n_per_study);
}

BenchmarkReport run_benchmark(const std::vector<ScenarioSpec>& scenarios,
                              const std::vector<Method>& methods, int replicates,
                              std::uint64_t seed, int workers) {
  if (replicates < 1) throw DataError("replicates must be >= 1");
  if (scenarios.empty()) throw DataError("need at least one scenario");
  if (methods.empty()) throw DataError("need at least one method");
  for (const auto& s : scenarios) s.validate();

  struct ItemOut {
    std::vector<BenchmarkRow> rows;
    std::vector<LoadingRow> loadings;
    std::vector<std::optional<StudyMetrics>> method_mean;
  };
  const std::size_t items = scenarios.size() * static_cast<std::size_t>(replicates);
  std::vector<ItemOut> outs(items);

  parallel_for(
      items,
      [&](std::size_t item) {
        const std::size_t si = item / static_cast<std::size_t>(replicates);
        const int r = static_cast<int>(item % static_cast<std::size_t>(replicates));
        ScenarioSpec sp = scenarios[si];
        sp.seed = derive_seed(seed, {seed_tag::kScenario, si, static_cast<std::uint64_t>(r)});
        const std::string label = scenario_label(sp);
        const GroundTruth truth = gen_truth(sp);
        const MultiStudyData train = gen_data(sp, truth, seed_tag::kTrainData);
        const MultiStudyData test = gen_data(sp, truth, seed_tag::kTestData);

        auto& out = outs[item];
        out.method_mean.assign(methods.size(), std::nullopt);
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
          const std::string mname = method_name(methods[mi]);
          try {
            const MethodFit fit = run_method(
                methods[mi], train, derive_seed(sp.seed, {seed_tag::kResample, mi}),
                workers);
            const EvalResult ev = evaluate(fit, truth, test);
            for (std::size_t l = 0; l < ev.per_study.size(); ++l)
              out.rows.push_back({label, mname, r, static_cast<int>(l),
                                  ev.per_study[l].mspe, ev.per_study[l].sensitivity,
                                  ev.per_study[l].specificity, false});
            out.method_mean[mi] = ev.mean;
            if (r == 0)
              for (std::size_t l = 0; l < fit.directions.size(); ++l)
                for (Eigen::Index j = 0; j < fit.directions[l].size(); ++j)
                  out.loadings.push_back({label, mname, static_cast<int>(l),
                                          static_cast<int>(j),
                                          fit.directions[l](j)});
          } catch (const std::exception&) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            out.rows.push_back({label, mname, r, -1, nan, nan, nan, true});
          }
        }
      },
      workers);

  BenchmarkReport rep;
  for (const auto& o : outs) {
    rep.rows.insert(rep.rows.end(), o.rows.begin(), o.rows.end());
    rep.loadings.insert(rep.loadings.end(), o.loadings.begin(), o.loadings.end());
  }
  for (std::size_t si = 0; si < scenarios.size(); ++si) {
    const std::string label = scenario_label(scenarios[si]);
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      std::vector<double> ms, se, sp;
      for (int r = 0; r < replicates; ++r) {
        const auto& mean =
            outs[si * static_cast<std::size_t>(replicates) + static_cast<std::size_t>(r)]
                .method_mean[mi];
        if (!mean) continue;
        ms.push_back(mean->mspe);
        se.push_back(mean->sensitivity);
        sp.push_back(mean->specificity);
      }
      AggregateRow row;
      row.scenario = label;
      row.method = method_name(methods[mi]);
      row.replicates = ms.size();
      if (!ms.empty()) {
        row.mspe_mean = std::accumulate(ms.begin(), ms.end(), 0.0) / static_cast<double>(ms.size());
        row.sensitivity_mean =
            std::accumulate(se.begin(), se.end(), 0.0) / static_cast<double>(se.size());
        row.specificity_mean =
            std::accumulate(sp.begin(), sp.end(), 0.0) / static_cast<double>(sp.size());
        row.mspe_sd = sample_sd(ms, row.mspe_mean);
        row.sensitivity_sd = sample_sd(se, row.sensitivity_mean);
        row.specificity_sd = sample_sd(sp, row.specificity_mean);
      }
      rep.aggregate.push_back(row);
    }
  }
  return rep;
}

std::string long_table_csv(const BenchmarkReport& report) {
  std::string out = "scenario,method,replicate,study,mspe,sensitivity,specificity,failed\n";
  for (const auto& r : report.rows) {
    out += r.scenario + "," + r.method + "," + std::to_string(r.replicate) + "," +
           std::to_string(r.study) + "," + format_double(r.mspe) + "," +
           format_double(r.sensitivity) + "," + format_double(r.specificity) + "," +
           (r.failed ? "1" : "0") + "\n";
  }
  return out;
}

std::string aggregate_table_csv(const BenchmarkReport& report) {
  std::string out =
      "scenario,method,replicates,mspe_mean,mspe_sd,sensitivity_mean,sensitivity_sd,"
      "specificity_mean,specificity_sd\n";
  for (const auto& r : report.aggregate) {
    out += r.scenario + "," + r.method + "," + std::to_string(r.replicates) + "," +
           format_double(r.mspe_mean) + "," + format_double(r.mspe_sd) + "," +
           format_double(r.sensitivity_mean) + "," + format_double(r.sensitivity_sd) +
           "," + format_double(r.specificity_mean) + "," +
           format_double(r.specificity_sd) + "\n";
  }
  return out;
}

std::string loadings_table_csv(const BenchmarkReport& report) {
  std::string out = "scenario,method,study,variable,loading\n";
  for (const auto& r : report.loadings)
    out += r.scenario + "," + r.method + "," + std::to_string(r.study) + "," +
           std::to_string(r.variable) + "," + format_double(r.loading) + "\n";
  return out;
}

OoiReport ooi_study(const MultiStudyData& data, const std::vector<Method>& methods,
                    int resamples, double split, std::uint64_t seed, int workers) {
  data.validate();
  if (methods.empty()) throw DataError("need at least one method");
  if (resamples < 1) throw DataError("resamples must be >= 1");
  if (!(split > 0.0 && split < 1.0)) throw DataError("split must be in (0, 1)");
  for (std::size_t l = 0; l < data.n_studies(); ++l)
    if (data.studies[l].n() < 3)
      throw DataError("study " + std::to_string(l + 1) +
                      " needs at least 3 rows for a train/test split");

  const std::size_t p = data.p();
  struct ROut {
    std::vector<std::vector<char>> hits;  // method x variable
    std::vector<double> rmse;
    std::vector<char> ok;
  };
  std::vector<ROut> outs(static_cast<std::size_t>(resamples));

  parallel_for(
      static_cast<std::size_t>(resamples),
      [&](std::size_t r) {
        MultiStudyData train, test;
        for (std::size_t l = 0; l < data.n_studies(); ++l) {
          const auto& s = data.studies[l];
          const std::size_t n = s.n();
          std::vector<int> order(n);
          std::iota(order.begin(), order.end(), 0);
          auto rng = make_rng(derive_seed(seed, {seed_tag::kResample, r, l}));
          std::shuffle(order.begin(), order.end(), rng);
          auto n_train = static_cast<std::size_t>(
              std::llround(split * static_cast<double>(n)));
          n_train = std::min(std::max<std::size_t>(n_train, 2), n - 1);
          std::vector<int> tr(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
          std::vector<int> te(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
          std::sort(tr.begin(), tr.end());
          std::sort(te.begin(), te.end());
          train.studies.push_back({take_rows(s.x, tr), take_rows(s.y, tr), s.id});
          test.studies.push_back({take_rows(s.x, te), take_rows(s.y, te), s.id});
        }

        auto& out = outs[r];
        out.hits.assign(methods.size(), std::vector<char>(p, 0));
        out.rmse.assign(methods.size(), std::numeric_limits<double>::quiet_NaN());
        out.ok.assign(methods.size(), 0);
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
          try {
            const MethodFit fit =
                run_method(methods[mi], train,
                           derive_seed(seed, {seed_tag::kFolds, r, mi}), workers);
            for (std::size_t l = 0; l < fit.selected.size(); ++l)
              for (std::size_t j = 0; j < p; ++j)
                if (fit.selected[l][j]) out.hits[mi][j] = 1;
            double total = 0.0;
            for (std::size_t l = 0; l < test.studies.size(); ++l) {
              const auto& s = test.studies[l];
              total += std::sqrt((s.y - s.x * fit.beta[l]).squaredNorm() /
                                 (static_cast<double>(s.n()) *
                                  static_cast<double>(s.q())));
            }
            out.rmse[mi] = total / static_cast<double>(test.studies.size());
            out.ok[mi] = 1;
          } catch (const std::exception&) {
          }
        }
      },
      workers);

  OoiReport rep;
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    std::size_t n_ok = 0;
    double rmse_total = 0.0;
    std::vector<std::size_t> counts(p, 0);
    for (const auto& o : outs) {
      if (!o.ok[mi]) continue;
      ++n_ok;
      rmse_total += o.rmse[mi];
      for (std::size_t j = 0; j < p; ++j) counts[j] += o.hits[mi][j] ? 1 : 0;
    }
    std::vector<double> ooi(p, std::numeric_limits<double>::quiet_NaN());
    if (n_ok > 0)
      for (std::size_t j = 0; j < p; ++j)
        ooi[j] = static_cast<double>(counts[j]) / static_cast<double>(n_ok);
    for (std::size_t j = 0; j < p; ++j)
      rep.genes.push_back({method_name(methods[mi]), static_cast<int>(j), ooi[j]});
    rep.summary.push_back({method_name(methods[mi]), median(ooi),
                           n_ok > 0 ? rmse_total / static_cast<double>(n_ok)
                                    : std::numeric_limits<double>::quiet_NaN()});
  }
  return rep;
}

std::string ooi_genes_csv(const OoiReport& report) {
  std::string out = "method,variable,ooi\n";
  for (const auto& g : report.genes)
    out += g.method + "," + std::to_string(g.variable) + "," + format_double(g.ooi) + "\n";
  return out;
}

std::string ooi_summary_csv(const OoiReport& report) {
  std::string out = "method,median_ooi,mean_rmse\n";
  for (const auto& s : report.summary)
    out += s.method + "," + format_double(s.median_ooi) + "," +
           format_double(s.mean_rmse) + "\n";
  return out;
}

VectorXd combined_direction(const std::vector<VectorXd>& directions) {
  if (directions.empty()) throw DataError("no directions to combine");
  const Eigen::Index p = directions.front().size();
  VectorXd ref = VectorXd::Zero(p);
  for (const auto& d : directions)
    if (d.size() != p) throw DataError("direction lengths disagree");
  for (const auto& d : directions)
    if (d.norm() > 0.0) {
      ref = d;
      break;
    }
  if (ref.norm() == 0.0) return VectorXd::Zero(p);
  VectorXd sum = VectorXd::Zero(p);
  for (const auto& d : directions) sum += d.dot(ref) < 0.0 ? (-d).eval() : d;
  const double n = sum.norm();
  return n > 0.0 ? VectorXd(sum / n) : VectorXd::Zero(p);
}

}  // namespace ispls
