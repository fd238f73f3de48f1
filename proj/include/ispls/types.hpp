#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ispls {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Input/usage problems: bad dimensions, malformed files, invalid parameters.
// The CLI maps these to exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failures the caller cannot fix by editing inputs (exit code 3).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One study: X is n x p (rows = observations), Y is n x q.
struct StudyData {
  MatrixXd x;
  MatrixXd y;
  std::string id;

  std::size_t n() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t p() const { return static_cast<std::size_t>(x.cols()); }
  std::size_t q() const { return static_cast<std::size_t>(y.cols()); }
};

// L studies sharing p predictors and q responses; n may differ per study.
struct MultiStudyData {
  std::vector<StudyData> studies;

  std::size_t n_studies() const { return studies.size(); }
  std::size_t p() const { return studies.empty() ? 0 : studies.front().p(); }
  std::size_t q() const { return studies.empty() ? 0 : studies.front().q(); }

  // Throws DataError unless every study has matching p/q, n >= 2 and p, q >= 1.
  void validate() const;
};

// Per-study cross-product Z = X'Y (p x q) plus the sample count it came from.
struct CrossProduct {
  MatrixXd z;
  std::size_t n = 0;
};

enum class Model { Homogeneity, Heterogeneity };
enum class Contrast { Magnitude, Sign };

// Penalty configuration for the integrative fit.
//  mu1  sparsity level (MCP lambda), on the scale of (ZZ'w) entries
//  mu2  contrast strength across studies
//  a    MCP concavity for the variable-level penalty (> 1)
//  b    outer MCP concavity for the composite penalty; when unset it resolves
//       to L*a*mu1^2/2, which makes the outer penalty saturate exactly when
//       every study's component saturates
//  tau2 smoothing constant of the sign contrast
//  kappa w-step balance in (0, 0.5]; 0.5 is the closed-form limiting case
struct PenaltySpec {
  Model model = Model::Homogeneity;
  Contrast contrast = Contrast::Magnitude;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double a = 6.0;
  std::optional<double> b;
  double tau2 = 0.5;
  double kappa = 0.5;
  // Use the literal printed denominator (1 + mu2*(L-1))/(c^2 + tau2) in the
  // sign-contrast updates instead of the re-derived 1 + mu2*(L-1)/(c^2 + tau2).
  bool printed_sign_denominator = false;

  double resolve_b(std::size_t n_datasets) const;
  void validate(std::size_t n_datasets) const;  // throws DataError
};

// Per-study contrast weights mu2* = mu2 * n_l^2 (the c-step works on the
// n_l^2-rescaled subproblem, where the fit quadratic has unit curvature).
struct ContrastWeights {
  std::vector<double> mu2_star;

  static ContrastWeights from(double mu2, const std::vector<std::size_t>& n_per_study);
};

// Alternating-solver state: per-study direction iterates.
struct DirectionState {
  std::vector<VectorXd> w;
  std::vector<VectorXd> c;
  int iteration = 0;
};

// Output of a fit. For single-study fits the vectors have length 1.
struct FitResult {
  std::vector<VectorXd> directions;          // unit vectors (zero if the study died)
  std::vector<std::vector<bool>> selected;   // L x p, true iff |direction_j| > 0
  std::vector<MatrixXd> beta;                // per study, p x q
  std::vector<double> objective_trace;
  bool converged = false;
  bool fully_penalized = false;
  int iterations = 0;
};

}  // namespace ispls
