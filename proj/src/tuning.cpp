#include "ispls/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ispls/model.hpp"
#include "ispls/parallel.hpp"
#include "ispls/pls.hpp"
#include "ispls/rng.hpp"
#include "ispls/spls.hpp"

namespace ispls {

namespace {

double mspe(const MatrixXd& x, const MatrixXd& y, const MatrixXd& beta) {
  return (y - x * beta).squaredNorm() /
         (static_cast<double>(y.rows()) * static_cast<double>(y.cols()));
}

MatrixXd take_rows(const MatrixXd& m, const std::vector<int>& rows) {
  MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = m.row(rows[k]);
  return out;
}

}  // namespace

std::vector<std::vector<int>> assign_folds(const MultiStudyData& data, int folds,
                                           std::uint64_t seed) {
  data.validate();
  if (folds < 2) throw DataError("folds must be >= 2");
  std::vector<std::vector<int>> labels(data.n_studies());
  for (std::size_t l = 0; l < data.n_studies(); ++l) {
    const std::size_t n = data.studies[l].n();
    if (n < static_cast<std::size_t>(folds))
      throw DataError("study " + std::to_string(l + 1) + " has " + std::to_string(n) +
                      " rows, fewer than " + std::to_string(folds) + " folds");
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto rng = make_rng(derive_seed(seed, {seed_tag::kFolds, l}));
    std::shuffle(order.begin(), order.end(), rng);
    labels[l].assign(n, 0);
    for (std::size_t k = 0; k < n; ++k) labels[l][static_cast<std::size_t>(order[k])] = static_cast<int>(k) % folds;
  }
  return labels;
}

CvResult cross_validate(const MultiStudyData& data, const PenaltySpec& spec_template,
                        const TuningGrid& grid, const IsplsConfig& base, int workers) {
  data.validate();
  if (grid.mu1_values.empty() || grid.mu2_values.empty())
    throw DataError("tuning grid must be nonempty");
  if (!std::is_sorted(grid.mu1_values.begin(), grid.mu1_values.end()) ||
      !std::is_sorted(grid.mu2_values.begin(), grid.mu2_values.end()))
    throw DataError("tuning grid values must be ascending");

  const std::size_t L = data.n_studies();
  const auto labels = assign_folds(data, grid.folds, grid.seed);
  const auto folds = static_cast<std::size_t>(grid.folds);
  for (std::size_t f = 0; f < folds; ++f)
    for (std::size_t l = 0; l < L; ++l) {
      const auto held = static_cast<std::size_t>(
          std::count(labels[l].begin(), labels[l].end(), static_cast<int>(f)));
      if (data.studies[l].n() - held < 2)
        throw DataError("fold " + std::to_string(f + 1) + " leaves study " +
                        std::to_string(l + 1) + " with fewer than 2 training rows");
    }

  struct Split {
    MultiStudyData train;
    MultiStudyData test;
  };
  std::vector<Split> splits(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    for (std::size_t l = 0; l < L; ++l) {
      std::vector<int> tr, te;
      for (std::size_t r = 0; r < data.studies[l].n(); ++r)
        (labels[l][r] == static_cast<int>(f) ? te : tr).push_back(static_cast<int>(r));
      const auto& s = data.studies[l];
      splits[f].train.studies.push_back({take_rows(s.x, tr), take_rows(s.y, tr), s.id});
      splits[f].test.studies.push_back({take_rows(s.x, te), take_rows(s.y, te), s.id});
    }
  }

  const std::size_t n1 = grid.mu1_values.size();
  const std::size_t n2 = grid.mu2_values.size();
  std::vector<double> item_score(folds * n1 * n2, 0.0);
  parallel_for(
      item_score.size(),
      [&](std::size_t item) {
        const std::size_t f = item / (n1 * n2);
        const std::size_t i = (item / n2) % n1;
        const std::size_t j = item % n2;
        IsplsConfig cfg = base;
        cfg.penalty = spec_template;
        cfg.penalty.mu1 = grid.mu1_values[i];
        cfg.penalty.mu2 = grid.mu2_values[j];
        double score;
        try {
          const FitResult fit = fit_ispls(splits[f].train, cfg);
          double total = 0.0;
          for (std::size_t l = 0; l < L; ++l)
            total += mspe(splits[f].test.studies[l].x, splits[f].test.studies[l].y,
                          fit.beta[l]);
          score = total / static_cast<double>(L);
        } catch (const NumericError&) {
          score = std::numeric_limits<double>::infinity();
        }
        item_score[item] = score;
      },
      workers);

  CvResult res;
  res.per_fold.assign(folds, MatrixXd::Zero(static_cast<Eigen::Index>(n1),
                                            static_cast<Eigen::Index>(n2)));
  res.scores = MatrixXd::Zero(static_cast<Eigen::Index>(n1), static_cast<Eigen::Index>(n2));
  for (std::size_t f = 0; f < folds; ++f)
    for (std::size_t i = 0; i < n1; ++i)
      for (std::size_t j = 0; j < n2; ++j) {
        const double v = item_score[f * n1 * n2 + i * n2 + j];
        res.per_fold[f](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        res.scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
            v / static_cast<double>(folds);
      }

  bool first = true;
  double best = 0.0;
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j) {
      const double v = res.scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (first || v <= best) {
        first = false;
        best = v;
        res.best_i = i;
        res.best_j = j;
      }
    }
  res.best_mu1 = grid.mu1_values[res.best_i];
  res.best_mu2 = grid.mu2_values[res.best_j];
  return res;
}

TuningGrid default_grid(const MultiStudyData& data) {
  const auto zs = build_cross_products(data);
  double m = 0.0;
  for (const auto& z : zs) {
    if (z.z.norm() == 0.0) continue;
    const VectorXd w0 = first_direction(z.z);
    const VectorXd g = z.z * (z.z.transpose() * w0);
    m = std::max(m, g.cwiseAbs().maxCoeff());
  }
  if (m <= 0.0) throw NumericError("no signal: every study has an all-zero X'Y");
  TuningGrid grid;
  grid.mu1_values.reserve(10);
  for (int k = 0; k < 10; ++k)
    grid.mu1_values.push_back(m * std::pow(10.0, -3.0 * static_cast<double>(9 - k) / 9.0));
  grid.mu2_values = {0.0, 0.01, 0.1, 1.0, 10.0};
  return grid;
}

double spls_cv_eta(const MatrixXd& x, const MatrixXd& y, const std::vector<double>& etas,
                   int folds, std::uint64_t seed) {
  if (etas.empty()) throw DataError("eta grid must be nonempty");
  if (!std::is_sorted(etas.begin(), etas.end()))
    throw DataError("eta grid values must be ascending");
  MultiStudyData d;
  d.studies.push_back({x, y, "study"});
  const auto labels = assign_folds(d, folds, seed);
  const auto nf = static_cast<std::size_t>(folds);
  for (std::size_t f = 0; f < nf; ++f) {
    const auto held = static_cast<std::size_t>(
        std::count(labels[0].begin(), labels[0].end(), static_cast<int>(f)));
    if (d.studies[0].n() - held < 2)
      throw DataError("fold " + std::to_string(f + 1) + " leaves fewer than 2 training rows");
  }

  std::vector<double> score(etas.size(), 0.0);
  for (std::size_t f = 0; f < nf; ++f) {
    std::vector<int> tr, te;
    for (std::size_t r = 0; r < d.studies[0].n(); ++r)
      (labels[0][r] == static_cast<int>(f) ? te : tr).push_back(static_cast<int>(r));
    const MatrixXd xtr = take_rows(x, tr), ytr = take_rows(y, tr);
    const MatrixXd xte = take_rows(x, te), yte = take_rows(y, te);
    for (std::size_t e = 0; e < etas.size(); ++e) {
      SplsConfig cfg;
      cfg.eta = etas[e];
      double v;
      try {
        const FitResult fit = fit_spls(xtr, ytr, cfg);
        v = mspe(xte, yte, fit.beta[0]);
      } catch (const NumericError&) {
        v = std::numeric_limits<double>::infinity();
      }
      score[e] += v / static_cast<double>(nf);
    }
  }

  std::size_t best = 0;
  for (std::size_t e = 1; e < etas.size(); ++e)
    if (score[e] <= score[best]) best = e;
  return etas[best];
}

}  // namespace ispls
