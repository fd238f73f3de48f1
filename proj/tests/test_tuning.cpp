#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "ispls/ispls.hpp"
#include "ispls/model.hpp"
#include "ispls/pls.hpp"
#include "ispls/rng.hpp"
#include "ispls/simulate.hpp"
#include "ispls/tuning.hpp"
#include "ispls/types.hpp"

using namespace ispls;

namespace {

MultiStudyData tiny_data(std::uint64_t seed, std::size_t L = 2, Eigen::Index n = 12,
                         Eigen::Index p = 6, Eigen::Index q = 1) {
  auto rng = make_rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MultiStudyData d;
  for (std::size_t l = 0; l < L; ++l) {
    MatrixXd x(n, p), y(n, q);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < p; ++j) x(i, j) = u(rng);
      for (Eigen::Index j = 0; j < q; ++j)
        y(i, j) = x(i, 0) - 0.5 * x(i, 1) + 0.3 * u(rng);
    }
    d.studies.push_back({x, y, "s" + std::to_string(l + 1)});
  }
  return d;
}

bool same_matrix(const MatrixXd& a, const MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.rows() == 0 || (a - b).cwiseAbs().maxCoeff() == 0.0);
}

}  // namespace

TEST_CASE("assign_folds is a seeded balanced partition") {
  const MultiStudyData d = tiny_data(1, 2, 13, 4);
  const auto a = assign_folds(d, 3, 42);
  const auto b = assign_folds(d, 3, 42);
  CHECK(a == b);
  const auto c = assign_folds(d, 3, 43);
  CHECK(a != c);

  for (const auto& labels : a) {
    CHECK(labels.size() == 13);
    std::vector<int> count(3, 0);
    for (int f : labels) {
      REQUIRE(f >= 0);
      REQUIRE(f < 3);
      count[static_cast<std::size_t>(f)]++;
    }
    const auto [mn, mx] = std::minmax_element(count.begin(), count.end());
    CHECK(*mx - *mn <= 1);
    CHECK(count[0] + count[1] + count[2] == 13);
  }
}

TEST_CASE("assign_folds rejects invalid configurations") {
  const MultiStudyData d = tiny_data(2, 2, 4, 3);
  CHECK_THROWS_AS(assign_folds(d, 1, 0), DataError);
  CHECK_THROWS_AS(assign_folds(d, 5, 0), DataError);  // 4 rows, 5 folds
}

TEST_CASE("cross_validate is deterministic given the seed") {
  const MultiStudyData d = tiny_data(3);
  PenaltySpec spec;
  spec.model = Model::Heterogeneity;
  spec.contrast = Contrast::Magnitude;
  TuningGrid grid;
  grid.mu1_values = {0.05, 0.5};
  grid.mu2_values = {0.0, 0.2};
  grid.folds = 3;
  grid.seed = 9;

  const CvResult a = cross_validate(d, spec, grid);
  const CvResult b = cross_validate(d, spec, grid);
  CHECK(same_matrix(a.scores, b.scores));
  REQUIRE(a.per_fold.size() == b.per_fold.size());
  for (std::size_t f = 0; f < a.per_fold.size(); ++f)
    CHECK(same_matrix(a.per_fold[f], b.per_fold[f]));
  CHECK(a.best_i == b.best_i);
  CHECK(a.best_j == b.best_j);

  // mean over folds matches the per-fold tables it reports
  MatrixXd mean = MatrixXd::Zero(2, 2);
  for (const auto& pf : a.per_fold) mean += pf / 3.0;
  CHECK((mean - a.scores).cwiseAbs().maxCoeff() < 1e-12);

  const CvResult c = cross_validate(d, spec, grid, {}, 4);
  CHECK(same_matrix(a.scores, c.scores));
  CHECK(a.best_i == c.best_i);
  CHECK(a.best_j == c.best_j);
}

TEST_CASE("duplicated grid points score identically and ties pick the larger values") {
  const MultiStudyData d = tiny_data(4);
  PenaltySpec spec;
  spec.model = Model::Homogeneity;
  spec.contrast = Contrast::Magnitude;
  TuningGrid grid;
  grid.mu1_values = {0.3, 0.3};
  grid.mu2_values = {0.1, 0.1};
  grid.folds = 3;
  grid.seed = 5;
  const CvResult res = cross_validate(d, spec, grid);
  CHECK(res.scores(0, 0) == res.scores(0, 1));
  CHECK(res.scores(0, 0) == res.scores(1, 0));
  CHECK(res.scores(0, 0) == res.scores(1, 1));
  CHECK(res.best_i == 1);
  CHECK(res.best_j == 1);
  CHECK(res.best_mu1 == 0.3);
  CHECK(res.best_mu2 == 0.1);
}

TEST_CASE("a single-point grid returns that point") {
  const MultiStudyData d = tiny_data(5);
  PenaltySpec spec;
  TuningGrid grid;
  grid.mu1_values = {0.7};
  grid.mu2_values = {0.02};
  grid.folds = 3;
  const CvResult res = cross_validate(d, spec, grid);
  CHECK(res.scores.rows() == 1);
  CHECK(res.scores.cols() == 1);
  CHECK(res.best_i == 0);
  CHECK(res.best_j == 0);
  CHECK(res.best_mu1 == 0.7);
  CHECK(res.best_mu2 == 0.02);
}

TEST_CASE("a kill-threshold mu1 loses to one that keeps the signal") {
  ScenarioSpec s;
  s.scenario = Scenario::S1;
  s.n_studies = 2;
  s.p = 15;
  s.q = 2;
  s.n_per_study = 40;
  s.rho = 0.2;
  s.n_signal = 4;
  s.seed = 21;
  const MultiStudyData d = gen_scenario(s).first;

  double m = 0.0;
  for (const auto& z : build_cross_products(d)) {
    const VectorXd w0 = first_direction(z.z);
    m = std::max(m, (z.z * (z.z.transpose() * w0)).cwiseAbs().maxCoeff());
  }
  PenaltySpec spec;
  spec.model = Model::Heterogeneity;
  spec.contrast = Contrast::Magnitude;
  TuningGrid grid;
  grid.mu1_values = {0.01 * m, 3.0 * m};  // the larger zeroes every variable
  grid.mu2_values = {0.0};
  grid.folds = 4;
  grid.seed = 2;
  const CvResult res = cross_validate(d, spec, grid);
  CHECK(res.best_i == 0);
  CHECK(res.best_mu1 == 0.01 * m);
  CHECK(res.scores(0, 0) < res.scores(1, 0));
}

TEST_CASE("folds that starve a study of training rows are rejected up front") {
  const MultiStudyData d = tiny_data(6, 2, 2, 3);  // 2 rows per study
  PenaltySpec spec;
  TuningGrid grid;
  grid.mu1_values = {0.1};
  grid.mu2_values = {0.0};
  grid.folds = 2;  // each fold holds one row, leaving one training row
  CHECK_THROWS_AS(cross_validate(d, spec, grid), DataError);
}

TEST_CASE("grid validation rejects empty or descending grids") {
  const MultiStudyData d = tiny_data(7);
  PenaltySpec spec;
  TuningGrid g1;
  g1.mu2_values = {0.0};
  CHECK_THROWS_AS(cross_validate(d, spec, g1), DataError);
  TuningGrid g2;
  g2.mu1_values = {0.5, 0.1};
  g2.mu2_values = {0.0};
  CHECK_THROWS_AS(cross_validate(d, spec, g2), DataError);
}

TEST_CASE("numeric failures inside a fold score as infinity instead of aborting") {
  MultiStudyData d = tiny_data(8);
  for (auto& s : d.studies) s.y.setZero();  // every fit sees an all-zero X'Y
  PenaltySpec spec;
  TuningGrid grid;
  grid.mu1_values = {0.1};
  grid.mu2_values = {0.0};
  grid.folds = 3;
  const CvResult res = cross_validate(d, spec, grid);
  CHECK(std::isinf(res.scores(0, 0)));
}

TEST_CASE("default_grid spans three decades up to the initialization scale") {
  const MultiStudyData d = tiny_data(9, 3, 20, 8, 2);
  const TuningGrid grid = default_grid(d);
  REQUIRE(grid.mu1_values.size() == 10);
  CHECK(grid.mu2_values == std::vector<double>{0.0, 0.01, 0.1, 1.0, 10.0});

  // brute-force recomputation of the anchor
  double m = 0.0;
  for (const auto& z : build_cross_products(d)) {
    const VectorXd w0 = first_direction(z.z);
    const VectorXd g = z.z * (z.z.transpose() * w0);
    for (Eigen::Index j = 0; j < g.size(); ++j) m = std::max(m, std::abs(g(j)));
  }
  CHECK(grid.mu1_values.back() == doctest::Approx(m).epsilon(1e-12));
  CHECK(grid.mu1_values.front() == doctest::Approx(0.001 * m).epsilon(1e-12));
  CHECK(std::is_sorted(grid.mu1_values.begin(), grid.mu1_values.end()));
  for (std::size_t k = 1; k + 1 < grid.mu1_values.size(); ++k) {
    const double r1 = grid.mu1_values[k] / grid.mu1_values[k - 1];
    const double r2 = grid.mu1_values[k + 1] / grid.mu1_values[k];
    CHECK(r1 == doctest::Approx(r2).epsilon(1e-10));
  }
}

TEST_CASE("scaling Y rescales the whole mu1 grid by the anchor's factor") {
  const MultiStudyData d = tiny_data(10, 2, 15, 5, 2);
  MultiStudyData d2 = d;
  for (auto& s : d2.studies) s.y *= 2.0;
  const TuningGrid g1 = default_grid(d);
  const TuningGrid g2 = default_grid(d2);
  // Z doubles, so the anchor max |ZZ'w0| quadruples; every grid value moves
  // by the same factor
  const double factor = g2.mu1_values.back() / g1.mu1_values.back();
  CHECK(factor == doctest::Approx(4.0).epsilon(1e-10));
  for (std::size_t k = 0; k < 10; ++k)
    CHECK(g2.mu1_values[k] == doctest::Approx(factor * g1.mu1_values[k]).epsilon(1e-10));
  CHECK(g2.mu2_values == g1.mu2_values);
}

TEST_CASE("default_grid needs at least one nonzero cross-product") {
  MultiStudyData d = tiny_data(11);
  for (auto& s : d.studies) s.y.setZero();
  CHECK_THROWS_AS(default_grid(d), NumericError);
}

TEST_CASE("spls_cv_eta is deterministic and breaks ties toward the larger eta") {
  const MultiStudyData d = tiny_data(12, 1, 18, 5, 1);
  const MatrixXd& x = d.studies[0].x;
  const MatrixXd& y = d.studies[0].y;
  const double e1 = spls_cv_eta(x, y, {0.0, 0.3, 0.6}, 3, 7);
  const double e2 = spls_cv_eta(x, y, {0.0, 0.3, 0.6}, 3, 7);
  CHECK(e1 == e2);

  // one dominant coordinate: both candidate etas keep exactly that
  // coordinate, the normalized direction is identical, so the fold scores
  // tie bitwise and the scan must keep the larger eta
  auto rng = make_rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MatrixXd xs(18, 5), ys(18, 1);
  for (Eigen::Index i = 0; i < 18; ++i) {
    for (Eigen::Index j = 0; j < 5; ++j) xs(i, j) = u(rng);
    ys(i, 0) = 2.0 * xs(i, 0) + 0.05 * u(rng);
  }
  CHECK(spls_cv_eta(xs, ys, {0.9, 0.95}, 3, 7) == 0.95);

  CHECK_THROWS_AS(spls_cv_eta(x, y, {}, 3, 7), DataError);
  CHECK_THROWS_AS(spls_cv_eta(x, y, {0.5, 0.1}, 3, 7), DataError);
}

TEST_CASE("fold labels partition every study's rows") {
  // cross_validate splits rows by these labels, so train and held-out index
  // sets are disjoint and exhaustive exactly when the labels cover each row
  // once with an in-range fold id
  const MultiStudyData d = tiny_data(13);
  const auto labels = assign_folds(d, 3, 31);
  for (std::size_t l = 0; l < d.n_studies(); ++l) {
    REQUIRE(labels[l].size() == d.studies[l].n());
    std::vector<int> count(3, 0);
    for (int f : labels[l]) {
      REQUIRE(f >= 0);
      REQUIRE(f < 3);
      count[static_cast<std::size_t>(f)]++;
    }
    for (int cnt : count) CHECK(cnt > 0);
  }
}
