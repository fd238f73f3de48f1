#pragma once

#include <optional>

#include "ispls/types.hpp"

namespace ispls {

// Single-study sparse PLS (first direction, lasso-style c-step).
// The sparsity threshold lives on the scale of (ZZ'w)_j entries: either the
// absolute lambda1, or eta * max_j |(ZZ'w)_j| recomputed each c-step when eta
// is set (eta takes precedence).
struct SplsConfig {
  double kappa = 0.5;
  double lambda1 = 0.0;
  std::optional<double> eta;  // in [0, 1)
  int max_iter = 200;
  double tol = 1e-4;  // on ||c_new - c_old||_2
};

// w-step: argmin_w ||Z'w - kappa'*Z'c||^2 subject to w'w = 1 with
// kappa' = (1-kappa)/(1-2*kappa). For kappa = 0.5 this is the limiting case
// w = ZZ'c/||ZZ'c||; otherwise w = kappa'*(ZZ' + lambda*I)^-1 ZZ'c with
// lambda* chosen by bisection so that ||w|| = 1 (falls back to the normalized
// limiting case when no nonnegative lambda* exists).
// Throws NumericError when ZZ'c = 0 (orthogonal surrogate).
VectorXd spls_w_step(const MatrixXd& z, const VectorXd& c, double kappa);

// The lambda2 = infinity surrogate objective the alternation descends:
// 0.5*||c||^2 - w'ZZ'c + lambda1*||c||_1.
double spls_objective(const MatrixXd& z, const VectorXd& w, const VectorXd& c,
                      double lambda1);

// Alternates w-step and coordinate-wise soft-threshold c-step until
// ||c_new - c_old|| < tol or max_iter. Final direction is c/||c||; an all-zero
// c returns an empty selection with converged = true and fully_penalized set.
FitResult fit_spls(const MatrixXd& x, const MatrixXd& y, const SplsConfig& cfg);

}  // namespace ispls
