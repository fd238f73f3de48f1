#pragma once

#include <cstdint>
#include <vector>

#include "ispls/ispls.hpp"
#include "ispls/types.hpp"

namespace ispls {

struct TuningGrid {
  std::vector<double> mu1_values;  // ascending
  std::vector<double> mu2_values;  // ascending
  int folds = 5;
  std::uint64_t seed = 0;
};

struct CvResult {
  MatrixXd scores;                // mu1 index x mu2 index, mean held-out MSPE
  std::vector<MatrixXd> per_fold;  // raw per-fold scores, same shape
  std::size_t best_i = 0;         // row into mu1_values
  std::size_t best_j = 0;         // column into mu2_values
  double best_mu1 = 0.0;
  double best_mu2 = 0.0;
};

// Per-study fold labels: each study's rows are shuffled with a generator
// derived from (seed, study index) and dealt round-robin over `folds`, so
// every study contributes rows to every fold.
std::vector<std::vector<int>> assign_folds(const MultiStudyData& data, int folds,
                                           std::uint64_t seed);

// Exhaustive grid CV for fit_ispls. Scores are held-out MSPE averaged over
// studies with equal weights, then over folds. Ties prefer larger mu1, then
// larger mu2. b is re-resolved per mu1 through the unset-b default.
CvResult cross_validate(const MultiStudyData& data, const PenaltySpec& spec_template,
                        const TuningGrid& grid, const IsplsConfig& base = {},
                        int workers = 0);

// mu1: 10 log-spaced values on [0.001*M, M] with M = max_{l,j} |(ZZ'w0)_j| at
// the PLS initialization; mu2: {0, 0.01, 0.1, 1, 10}.
TuningGrid default_grid(const MultiStudyData& data);

// Single-study SPLS tuning: picks eta from `etas` by k-fold held-out MSPE
// (ties toward larger eta). Used by the meta/pooled baselines.
double spls_cv_eta(const MatrixXd& x, const MatrixXd& y, const std::vector<double>& etas,
                   int folds, std::uint64_t seed);

}  // namespace ispls
