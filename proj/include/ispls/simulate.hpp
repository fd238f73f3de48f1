#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ispls/types.hpp"

namespace ispls {

enum class Scenario { S1, S2, S3, S4 };

std::string scenario_name(Scenario s);

// Simulation design: L studies, AR(1) predictors, rank-1 coefficient matrix
// beta_i = 1.2^(i-1) * beta_1 per study, Gaussian noise.
struct ScenarioSpec {
  Scenario scenario = Scenario::S1;
  std::size_t n_studies = 4;
  std::size_t p = 100;
  std::size_t q = 5;
  std::size_t n_per_study = 120;
  double rho = 0.2;
  std::size_t n_signal = 10;
  double noise_sd = 1.0;
  std::uint64_t seed = 0;

  void validate() const;  // throws DataError
};

struct GroundTruth {
  MatrixXd beta1;                          // L x p, first coefficient column
  std::vector<std::vector<bool>> support;  // L x p

  // Full p x q coefficient matrix for one study: column i = 1.2^(i-1) beta1.
  MatrixXd beta_matrix(std::size_t study, std::size_t q) const;
};

// Factor F with F F' equal to the AR(1) correlation matrix rho^|j-k|,
// via the closed-form Cholesky (column 0: rho^j; column k>0: rho^(j-k) *
// sqrt(1-rho^2) for j >= k).
MatrixXd ar1_factor(std::size_t p, double rho);

// Support and magnitudes per scenario:
//  S1 shared support (positions 0..n_signal-1), one shared magnitude draw
//  S2 shared support, independent magnitude draws per study
//  S3 n_signal/2 shared positions plus study-specific positions carved
//     disjointly from the remainder; independent magnitudes
//  S4 each study draws n_signal positions uniformly without replacement
GroundTruth gen_truth(const ScenarioSpec& spec);

// One draw of all studies from a fixed truth; `tag` (e.g. seed_tag::kTrainData
// or kTestData) separates independent draws under the same spec seed.
MultiStudyData gen_data(const ScenarioSpec& spec, const GroundTruth& truth,
                        std::uint64_t tag);

std::pair<MultiStudyData, GroundTruth> gen_scenario(const ScenarioSpec& spec);

}  // namespace ispls
