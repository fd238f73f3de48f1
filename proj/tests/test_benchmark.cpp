#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ispls/benchmark.hpp"
#include "ispls/model.hpp"
#include "ispls/pls.hpp"
#include "ispls/rng.hpp"
#include "ispls/simulate.hpp"
#include "ispls/spls.hpp"
#include "ispls/tuning.hpp"
#include "ispls/types.hpp"

using namespace ispls;

namespace {

ScenarioSpec small_spec(Scenario s, std::uint64_t seed) {
  ScenarioSpec spec;
  spec.scenario = s;
  spec.n_studies = 2;
  spec.p = 12;
  spec.q = 2;
  spec.n_per_study = 30;
  spec.rho = 0.2;
  spec.n_signal = 3;
  spec.seed = seed;
  return spec;
}

MethodFit truth_fit(const GroundTruth& truth, std::size_t q) {
  MethodFit fit;
  for (std::size_t l = 0; l < truth.support.size(); ++l) {
    const VectorXd b1 = truth.beta1.row(static_cast<Eigen::Index>(l)).transpose();
    fit.directions.push_back(b1.norm() > 0 ? VectorXd(b1 / b1.norm()) : b1);
    fit.beta.push_back(truth.beta_matrix(l, q));
    fit.selected.push_back(truth.support[l]);
  }
  return fit;
}

}  // namespace

TEST_CASE("method names round-trip") {
  CHECK(all_methods().size() == 7);
  for (Method m : all_methods()) {
    const auto back = method_from_name(method_name(m));
    REQUIRE(back.has_value());
    CHECK(*back == m);
  }
  CHECK(!method_from_name("nope").has_value());
}

TEST_CASE("recovering the exact truth scores perfect selection and noise-level error") {
  ScenarioSpec spec = small_spec(Scenario::S1, 3);
  spec.n_per_study = 500;
  const auto [train, truth] = gen_scenario(spec);
  const MultiStudyData test = gen_data(spec, truth, seed_tag::kTestData);

  const EvalResult ev = evaluate(truth_fit(truth, spec.q), truth, test);
  for (const auto& st : ev.per_study) {
    CHECK(st.sensitivity == 1.0);
    CHECK(st.specificity == 1.0);
    CHECK(st.mspe > 0.7);
    CHECK(st.mspe < 1.3);
  }
  CHECK(ev.mean.sensitivity == 1.0);
  CHECK(ev.mean.specificity == 1.0);
}

TEST_CASE("selecting everything zeroes specificity") {
  const ScenarioSpec spec = small_spec(Scenario::S2, 4);
  const auto [train, truth] = gen_scenario(spec);
  const MultiStudyData test = gen_data(spec, truth, seed_tag::kTestData);

  MethodFit fit = truth_fit(truth, spec.q);
  for (auto& sel : fit.selected) sel.assign(sel.size(), true);
  const EvalResult ev = evaluate(fit, truth, test);
  for (const auto& st : ev.per_study) {
    CHECK(st.sensitivity == 1.0);
    CHECK(st.specificity == 0.0);
  }
}

TEST_CASE("evaluation is invariant under a consistent variable permutation") {
  const ScenarioSpec spec = small_spec(Scenario::S2, 5);
  const auto [train, truth] = gen_scenario(spec);
  const MultiStudyData test = gen_data(spec, truth, seed_tag::kTestData);
  MethodFit fit = truth_fit(truth, spec.q);
  // degrade the fit a little so the metrics are not pinned at the extremes
  fit.selected[0][0] = !fit.selected[0][0];
  fit.beta[0].row(2).setZero();
  const EvalResult base = evaluate(fit, truth, test);

  std::vector<Eigen::Index> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  auto rng = make_rng(99);
  std::shuffle(perm.begin(), perm.end(), rng);

  GroundTruth ptruth = truth;
  MultiStudyData ptest = test;
  MethodFit pfit = fit;
  for (std::size_t l = 0; l < 2; ++l)
    for (Eigen::Index j = 0; j < 12; ++j) {
      const Eigen::Index pj = perm[static_cast<std::size_t>(j)];
      ptruth.beta1(static_cast<Eigen::Index>(l), pj) = truth.beta1(l, j);
      ptruth.support[l][static_cast<std::size_t>(pj)] =
          truth.support[l][static_cast<std::size_t>(j)];
      ptest.studies[l].x.col(pj) = test.studies[l].x.col(j);
      pfit.beta[l].row(pj) = fit.beta[l].row(j);
      pfit.directions[l](pj) = fit.directions[l](j);
      pfit.selected[l][static_cast<std::size_t>(pj)] =
          fit.selected[l][static_cast<std::size_t>(j)];
    }
  const EvalResult perm_ev = evaluate(pfit, ptruth, ptest);
  for (std::size_t l = 0; l < 2; ++l) {
    CHECK(perm_ev.per_study[l].mspe ==
          doctest::Approx(base.per_study[l].mspe).epsilon(1e-12));
    CHECK(perm_ev.per_study[l].sensitivity == base.per_study[l].sensitivity);
    CHECK(perm_ev.per_study[l].specificity == base.per_study[l].specificity);
  }
}

TEST_CASE("meta PLS keeps every variable") {
  const auto [data, truth] = gen_scenario(small_spec(Scenario::S1, 6));
  const MethodFit fit = run_method(Method::MetaPls, data, 1);
  REQUIRE(fit.selected.size() == 2);
  for (const auto& sel : fit.selected)
    for (bool s : sel) CHECK(s);
  const auto zs = build_cross_products(data);
  for (std::size_t l = 0; l < 2; ++l)
    CHECK(std::abs(std::abs(fit.directions[l].dot(first_direction(zs[l].z))) - 1.0) <
          1e-12);
}

TEST_CASE("pooling two copies of one study equals fitting it with doubled rows") {
  const auto [data, truth] = gen_scenario(small_spec(Scenario::S1, 7));
  MultiStudyData twice;
  twice.studies = {data.studies[0], data.studies[0]};
  twice.studies[1].id = "copy";
  const MethodFit pooled = run_method(Method::PooledSpls, twice, 5);
  CHECK((pooled.directions[0] - pooled.directions[1]).cwiseAbs().maxCoeff() == 0.0);

  const auto& s = data.studies[0];
  const Eigen::Index n = s.x.rows();
  MatrixXd xs(2 * n, s.x.cols()), ys(2 * n, s.y.cols());
  xs << s.x, s.x;
  ys << s.y, s.y;
  MultiStudyData stacked;
  stacked.studies.push_back({xs, ys, "stacked"});
  const double eta = spls_cv_eta(xs, ys, {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9},
                                 5, derive_seed(5, {seed_tag::kFolds, std::uint64_t{0}}));
  SplsConfig cfg;
  cfg.eta = eta;
  const FitResult direct = fit_spls(xs, ys, cfg);
  CHECK(std::abs(std::abs(pooled.directions[0].dot(direct.directions[0])) - 1.0) <
        1e-10);
}

TEST_CASE("per-study SPLS tunes eta independently per study") {
  const auto [data, truth] = gen_scenario(small_spec(Scenario::S2, 8));
  const MethodFit fit = run_method(Method::MetaSpls, data, 2);
  REQUIRE(fit.directions.size() == 2);
  for (std::size_t l = 0; l < 2; ++l) {
    CHECK(fit.directions[l].size() == 12);
    bool any = false;
    for (bool s : fit.selected[l]) any = any || s;
    CHECK(any);
  }
}

TEST_CASE("a one-replicate meta PLS benchmark reports the known row") {
  const ScenarioSpec spec = small_spec(Scenario::S1, 9);
  const BenchmarkReport rep =
      run_benchmark({spec}, {Method::MetaPls}, 1, 1234);
  REQUIRE(rep.rows.size() == 2);  // one per study
  for (const auto& row : rep.rows) {
    CHECK(row.scenario == scenario_label(spec));
    CHECK(row.method == method_name(Method::MetaPls));
    CHECK(row.replicate == 0);
    CHECK(!row.failed);
    CHECK(row.sensitivity == 1.0);
    CHECK(row.specificity == 0.0);
    CHECK(std::isfinite(row.mspe));
  }
  REQUIRE(rep.aggregate.size() == 1);
  CHECK(rep.aggregate[0].replicates == 1);
  CHECK(rep.aggregate[0].sensitivity_mean == 1.0);
  CHECK(rep.aggregate[0].specificity_mean == 0.0);
  CHECK(rep.aggregate[0].sensitivity_sd == 0.0);

  // loadings cover replicate 0 for each study and variable
  CHECK(rep.loadings.size() == 2 * 12);
}

TEST_CASE("the same seed renders byte-identical reports at any worker count") {
  const ScenarioSpec spec = small_spec(Scenario::S2, 10);
  const std::vector<Method> methods = {Method::MetaPls, Method::IsplsHeteroM};
  const BenchmarkReport a = run_benchmark({spec}, methods, 2, 77, 1);
  const BenchmarkReport b = run_benchmark({spec}, methods, 2, 77, 4);
  CHECK(long_table_csv(a) == long_table_csv(b));
  CHECK(aggregate_table_csv(a) == aggregate_table_csv(b));
  CHECK(loadings_table_csv(a) == loadings_table_csv(b));

  const BenchmarkReport c = run_benchmark({spec}, methods, 2, 78, 1);
  CHECK(long_table_csv(a) != long_table_csv(c));
}

TEST_CASE("aggregates recompute from the long table") {
  const ScenarioSpec spec = small_spec(Scenario::S2, 11);
  const std::vector<Method> methods = {Method::MetaPls, Method::MetaSpls};
  const BenchmarkReport rep = run_benchmark({spec}, methods, 3, 5);
  for (const auto& agg : rep.aggregate) {
    std::vector<double> mspe, sens, spec_v;
    for (int r = 0; r < 3; ++r) {
      double sm = 0, ss = 0, sp = 0;
      int count = 0;
      bool failed = false;
      for (const auto& row : rep.rows) {
        if (row.scenario != agg.scenario || row.method != agg.method ||
            row.replicate != r)
          continue;
        if (row.failed) failed = true;
        sm += row.mspe;
        ss += row.sensitivity;
        sp += row.specificity;
        count++;
      }
      if (failed || count == 0) continue;
      mspe.push_back(sm / count);
      sens.push_back(ss / count);
      spec_v.push_back(sp / count);
    }
    REQUIRE(agg.replicates == mspe.size());
    auto mean = [](const std::vector<double>& v) {
      double s = 0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    auto sd = [&](const std::vector<double>& v) {
      if (v.size() < 2) return 0.0;
      const double m = mean(v);
      double s = 0;
      for (double x : v) s += (x - m) * (x - m);
      return std::sqrt(s / static_cast<double>(v.size() - 1));
    };
    CHECK(agg.mspe_mean == doctest::Approx(mean(mspe)).epsilon(1e-12));
    CHECK(agg.mspe_sd == doctest::Approx(sd(mspe)).epsilon(1e-12));
    CHECK(agg.sensitivity_mean == doctest::Approx(mean(sens)).epsilon(1e-12));
    CHECK(agg.specificity_mean == doctest::Approx(mean(spec_v)).epsilon(1e-12));
  }
}

TEST_CASE("combined_direction sign-aligns before averaging") {
  VectorXd a(3), b(3);
  a << 0.8, 0.6, 0.0;
  b << -0.8, -0.6, 0.0;  // the same axis, flipped
  const VectorXd comb = combined_direction({a, b});
  CHECK(std::abs(std::abs(comb.dot(a)) - 1.0) < 1e-12);
  CHECK(comb.norm() == doctest::Approx(1.0).epsilon(1e-12));

  VectorXd c(3);
  c << 0.0, 0.8, 0.6;
  const VectorXd mix = combined_direction({a, c});
  CHECK(mix.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a single resample gives indicator OOI values") {
  const auto [data, truth] = gen_scenario(small_spec(Scenario::S1, 12));
  const OoiReport rep = ooi_study(data, {Method::MetaPls}, 1, 0.75, 3);
  REQUIRE(rep.genes.size() == 12);
  for (const auto& g : rep.genes) {
    const bool indicator = g.ooi == 0.0 || g.ooi == 1.0;
    CHECK(indicator);
    CHECK(g.ooi == 1.0);  // meta PLS selects everything in every resample
  }
  REQUIRE(rep.summary.size() == 1);
  CHECK(rep.summary[0].median_ooi == 1.0);
  CHECK(std::isfinite(rep.summary[0].mean_rmse));

  const OoiReport again = ooi_study(data, {Method::MetaPls}, 1, 0.75, 3);
  CHECK(ooi_genes_csv(rep) == ooi_genes_csv(again));
}

TEST_CASE("true-support variables dominate the OOI ranking on a strong draw") {
  ScenarioSpec spec = small_spec(Scenario::S1, 13);
  spec.p = 20;
  spec.n_per_study = 60;
  spec.n_signal = 4;
  const auto [data, truth] = gen_scenario(spec);
  const OoiReport rep = ooi_study(data, {Method::IsplsHomoM}, 8, 0.75, 5);

  std::vector<double> on, off;
  for (const auto& g : rep.genes) {
    const bool is_true = truth.support[0][static_cast<std::size_t>(g.variable)];
    (is_true ? on : off).push_back(g.ooi);
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  CHECK(median(on) > median(off));
}
