#include "ispls/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ispls/rng.hpp"

namespace ispls {

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::S1: return "S1";
    case Scenario::S2: return "S2";
    case Scenario::S3: return "S3";
    case Scenario::S4: return "S4";
  }
  return "S?";
}

void ScenarioSpec::validate() const {
  if (n_studies == 0 || p == 0 || q == 0 || n_per_study == 0)
    throw DataError("scenario counts must be positive");
  if (n_per_study < 2) throw DataError("n per study must be >= 2");
  if (n_signal == 0 || n_signal > p) throw DataError("n_signal must be in [1, p]");
  if (!(rho >= 0.0 && rho < 1.0)) throw DataError("rho must be in [0, 1)");
  if (noise_sd <= 0.0) throw DataError("noise_sd must be > 0");
  if (scenario == Scenario::S3) {
    const std::size_t shared = n_signal / 2;
    const std::size_t specific = n_signal - shared;
    if (p < shared + specific * n_studies)
      throw DataError("scenario S3 needs p >= " +
                      std::to_string(shared + specific * n_studies));
  }
}

MatrixXd GroundTruth::beta_matrix(std::size_t study, std::size_t q) const {
  const Eigen::Index p = beta1.cols();
  MatrixXd b(p, static_cast<Eigen::Index>(q));
  for (std::size_t i = 0; i < q; ++i)
    b.col(static_cast<Eigen::Index>(i)) =
        std::pow(1.2, static_cast<double>(i)) *
        beta1.row(static_cast<Eigen::Index>(study)).transpose();
  return b;
}

MatrixXd ar1_factor(std::size_t p, double rho) {
  if (!(rho >= 0.0 && rho < 1.0)) throw DataError("rho must be in [0, 1)");
  const auto pi = static_cast<Eigen::Index>(p);
  MatrixXd f = MatrixXd::Zero(pi, pi);
  const double s = std::sqrt(1.0 - rho * rho);
  for (Eigen::Index j = 0; j < pi; ++j) {
    f(j, 0) = std::pow(rho, static_cast<double>(j));
    for (Eigen::Index k = 1; k <= j; ++k)
      f(j, k) = std::pow(rho, static_cast<double>(j - k)) * s;
  }
  return f;
}

namespace {

// n_draw values on [0.5, 4] with random signs, in a fixed draw order.
std::vector<double> draw_magnitudes(std::mt19937_64& rng, std::size_t n_draw) {
  std::uniform_real_distribution<double> mag(0.5, 4.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> out(n_draw);
  for (std::size_t i = 0; i < n_draw; ++i) {
    const double m = mag(rng);
    out[i] = (unit(rng) < 0.5 ? -1.0 : 1.0) * m;
  }
  return out;
}

}  // namespace

GroundTruth gen_truth(const ScenarioSpec& spec) {
  spec.validate();
  const std::size_t L = spec.n_studies;
  auto rng = make_rng(derive_seed(spec.seed, {seed_tag::kTruth}));

  std::vector<std::vector<std::size_t>> positions(L);
  switch (spec.scenario) {
    case Scenario::S1:
    case Scenario::S2: {
      std::vector<std::size_t> shared(spec.n_signal);
      std::iota(shared.begin(), shared.end(), 0);
      for (std::size_t l = 0; l < L; ++l) positions[l] = shared;
      break;
    }
    case Scenario::S3: {
      const std::size_t n_shared = spec.n_signal / 2;
      const std::size_t n_specific = spec.n_signal - n_shared;
      std::vector<std::size_t> pool(spec.p - n_shared);
      std::iota(pool.begin(), pool.end(), n_shared);
      std::shuffle(pool.begin(), pool.end(), rng);
      for (std::size_t l = 0; l < L; ++l) {
        for (std::size_t j = 0; j < n_shared; ++j) positions[l].push_back(j);
        for (std::size_t k = 0; k < n_specific; ++k)
          positions[l].push_back(pool[l * n_specific + k]);
      }
      break;
    }
    case Scenario::S4: {
      for (std::size_t l = 0; l < L; ++l) {
        std::vector<std::size_t> all(spec.p);
        std::iota(all.begin(), all.end(), 0);
        std::shuffle(all.begin(), all.end(), rng);
        positions[l].assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(spec.n_signal));
        std::sort(positions[l].begin(), positions[l].end());
      }
      break;
    }
  }

  GroundTruth truth;
  truth.beta1 = MatrixXd::Zero(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(spec.p));
  truth.support.assign(L, std::vector<bool>(spec.p, false));

  std::vector<double> shared_mags;
  if (spec.scenario == Scenario::S1) shared_mags = draw_magnitudes(rng, spec.n_signal);
  for (std::size_t l = 0; l < L; ++l) {
    const std::vector<double> mags =
        spec.scenario == Scenario::S1 ? shared_mags : draw_magnitudes(rng, spec.n_signal);
    for (std::size_t k = 0; k < spec.n_signal; ++k) {
      const std::size_t j = positions[l][k];
      truth.support[l][j] = true;
      truth.beta1(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(j)) = mags[k];
    }
  }
  return truth;
}

MultiStudyData gen_data(const ScenarioSpec& spec, const GroundTruth& truth,
                        std::uint64_t tag) {
  spec.validate();
  if (truth.beta1.rows() != static_cast<Eigen::Index>(spec.n_studies) ||
      truth.beta1.cols() != static_cast<Eigen::Index>(spec.p))
    throw DataError("truth dimensions disagree with the scenario spec");

  const MatrixXd f = ar1_factor(spec.p, spec.rho);
  const auto n = static_cast<Eigen::Index>(spec.n_per_study);
  const auto p = static_cast<Eigen::Index>(spec.p);
  const auto q = static_cast<Eigen::Index>(spec.q);

  MultiStudyData data;
  for (std::size_t l = 0; l < spec.n_studies; ++l) {
    auto rng = make_rng(derive_seed(spec.seed, {tag, l}));
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixXd g(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < p; ++j) g(i, j) = normal(rng);
    MatrixXd x = g * f.transpose();
    const MatrixXd beta = truth.beta_matrix(l, spec.q);
    MatrixXd y = x * beta;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < q; ++j) y(i, j) += spec.noise_sd * normal(rng);
    data.studies.push_back({std::move(x), std::move(y), "study" + std::to_string(l + 1)});
  }
  return data;
}

std::pair<MultiStudyData, GroundTruth> gen_scenario(const ScenarioSpec& spec) {
  GroundTruth truth = gen_truth(spec);
  MultiStudyData data = gen_data(spec, truth, seed_tag::kTrainData);
  return {std::move(data), std::move(truth)};
}

}  // namespace ispls
