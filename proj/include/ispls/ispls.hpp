#pragma once

#include <functional>
#include <vector>

#include "ispls/types.hpp"

namespace ispls {

struct CStepOptions {
  int inner_max_iter = 50;
  double inner_tol = 1e-6;
  int sweep_max = 100;
};

struct CStepResult {
  std::vector<Eigen::VectorXd> c;
  int sweeps = 0;
  bool converged = false;
};

struct IsplsConfig {
  PenaltySpec penalty;
  int outer_max_iter = 100;
  double outer_tol = 1e-4;
  CStepOptions c_step;
  bool refit_on_selected = false;
};

using IterObserver = std::function<void(const DirectionState&)>;

// One pass over all variable groups with every reference quantity (thresholds,
// contrast attractions, curvatures) frozen at c_ref. grad[l] = Z_l Z_l' w_l
// scaled by the caller; weights carry mu2 * n_l^2. Inactive studies keep c = 0
// and are excluded from contrast sums and group norms used for S.
std::vector<Eigen::VectorXd> c_step_sweep(
    const std::vector<Eigen::VectorXd>& grad,
    const std::vector<Eigen::VectorXd>& c_ref, const PenaltySpec& spec,
    const ContrastWeights& weights, const std::vector<bool>& active);

// Value of the frozen-at-c_ref majorizing surrogate that c_step_sweep
// minimizes groupwise: quadratic fit terms, penalty-1 linearized at c_ref,
// penalty-2 with curvatures and partner values frozen at c_ref.
double c_surrogate_value(const std::vector<Eigen::VectorXd>& grad,
                         const std::vector<Eigen::VectorXd>& c,
                         const std::vector<Eigen::VectorXd>& c_ref,
                         const PenaltySpec& spec,
                         const ContrastWeights& weights,
                         const std::vector<bool>& active);

// Full c-step: repeated frozen sweeps until the total update norm drops below
// inner_tol, with per-group freezing (a group stops once its own update is
// below inner_tol, stagnates relatively, or hits inner_max_iter).
CStepResult c_step(const std::vector<Eigen::VectorXd>& grad,
                   const std::vector<Eigen::VectorXd>& c_prev,
                   const PenaltySpec& spec, const ContrastWeights& weights,
                   const std::vector<bool>& active,
                   const CStepOptions& opts = {});

CStepResult c_step_homo_mag(const std::vector<Eigen::VectorXd>& grad,
                            const std::vector<Eigen::VectorXd>& c_prev,
                            const PenaltySpec& spec,
                            const ContrastWeights& weights,
                            const std::vector<bool>& active,
                            const CStepOptions& opts = {});
CStepResult c_step_homo_sign(const std::vector<Eigen::VectorXd>& grad,
                             const std::vector<Eigen::VectorXd>& c_prev,
                             const PenaltySpec& spec,
                             const ContrastWeights& weights,
                             const std::vector<bool>& active,
                             const CStepOptions& opts = {});
CStepResult c_step_hetero_mag(const std::vector<Eigen::VectorXd>& grad,
                              const std::vector<Eigen::VectorXd>& c_prev,
                              const PenaltySpec& spec,
                              const ContrastWeights& weights,
                              const std::vector<bool>& active,
                              const CStepOptions& opts = {});
CStepResult c_step_hetero_sign(const std::vector<Eigen::VectorXd>& grad,
                               const std::vector<Eigen::VectorXd>& c_prev,
                               const PenaltySpec& spec,
                               const ContrastWeights& weights,
                               const std::vector<bool>& active,
                               const CStepOptions& opts = {});

// Penalized joint criterion: per-study PLS fit terms on the 1/n_l^2 scale
// plus the composite sparsity penalty and the pairwise contrast penalty.
// The c-quadratic is anchored so the fit part reduces to the w-term alone
// at c = w; shifting a diagnostic by a w-only constant changes no argmin.
double objective_value(const std::vector<CrossProduct>& z,
                       const std::vector<Eigen::VectorXd>& w,
                       const std::vector<Eigen::VectorXd>& c,
                       const PenaltySpec& spec, const ContrastWeights& weights);

// Joint first-direction fit across studies: per-study w-steps alternated with
// the joint penalized c-step until sum_l ||c_new - c_old|| < outer_tol.
FitResult fit_ispls(const MultiStudyData& data, const IsplsConfig& config,
                    const IterObserver& observer = {});

}  // namespace ispls
