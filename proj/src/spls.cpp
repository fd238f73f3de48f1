#include "ispls/spls.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "ispls/penalty.hpp"
#include "ispls/pls.hpp"

namespace ispls {

namespace {

// sum_i sigma_i^4 <u_i,c>^2 / (sigma_i^2 + lambda)^2; strictly decreasing in
// lambda wherever some sigma_i > 0 contributes. ||w(lambda)||^2 = kappa'^2 * phi.
double norm_profile(const VectorXd& d2, const VectorXd& uc, double lambda) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < d2.size(); ++i) {
    if (d2(i) <= 0.0) continue;
    const double r = d2(i) / (d2(i) + lambda);
    s += r * r * uc(i) * uc(i);
  }
  return s;
}

}  // namespace

VectorXd spls_w_step(const MatrixXd& z, const VectorXd& c, double kappa) {
  if (z.rows() != c.size()) throw DataError("surrogate length does not match Z rows");
  if (!(kappa > 0.0 && kappa <= 0.5)) throw DataError("kappa must be in (0, 0.5]");
  const VectorXd g = z * (z.transpose() * c);
  const double gn = g.norm();
  if (gn == 0.0) throw NumericError("orthogonal surrogate: ZZ'c = 0");
  if (kappa == 0.5) return g / gn;

  const double kp = (1.0 - kappa) / (1.0 - 2.0 * kappa);
  const double target = 1.0 / (kp * kp);
  Eigen::JacobiSVD<MatrixXd> svd(z, Eigen::ComputeThinU);
  const VectorXd d2 = svd.singularValues().array().square();
  const VectorXd uc = svd.matrixU().transpose() * c;

  // ||w(0)||^2 = kappa'^2 * phi(0); if even lambda = 0 cannot reach norm 1,
  // use the normalized limiting direction.
  if (norm_profile(d2, uc, 0.0) <= target) return g / gn;

  double lo = 0.0, hi = std::max(1.0, d2.maxCoeff());
  while (norm_profile(d2, uc, hi) > target) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (norm_profile(d2, uc, mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-14 * (1.0 + hi)) break;
  }
  const double lambda = 0.5 * (lo + hi);

  VectorXd w = VectorXd::Zero(z.rows());
  for (Eigen::Index i = 0; i < d2.size(); ++i) {
    if (d2(i) <= 0.0) continue;
    w += svd.matrixU().col(i) * (kp * d2(i) * uc(i) / (d2(i) + lambda));
  }
  return w;
}

double spls_objective(const MatrixXd& z, const VectorXd& w, const VectorXd& c,
                      double lambda1) {
  const VectorXd ztc = z.transpose() * c;
  const VectorXd ztw = z.transpose() * w;
  return 0.5 * c.squaredNorm() - ztw.dot(ztc) + lambda1 * c.lpNorm<1>();
}

FitResult fit_spls(const MatrixXd& x, const MatrixXd& y, const SplsConfig& cfg) {
  if (x.rows() != y.rows()) throw DataError("X and Y row counts differ");
  if (!(cfg.kappa > 0.0 && cfg.kappa <= 0.5)) throw DataError("kappa must be in (0, 0.5]");
  if (cfg.eta && !(*cfg.eta >= 0.0 && *cfg.eta < 1.0))
    throw DataError("eta must be in [0, 1)");
  if (cfg.lambda1 < 0.0) throw DataError("lambda1 must be >= 0");

  const MatrixXd z = x.transpose() * y;
  const Eigen::Index p = x.cols();
  FitResult res;
  VectorXd c = first_direction(z);  // throws NumericError on zero Z
  VectorXd w = c;

  for (int t = 1; t <= cfg.max_iter; ++t) {
    res.iterations = t;
    w = spls_w_step(z, c, cfg.kappa);
    const VectorXd g = z * (z.transpose() * w);
    const double thresh = cfg.eta ? *cfg.eta * g.cwiseAbs().maxCoeff() : cfg.lambda1;
    VectorXd c_new(p);
    for (Eigen::Index j = 0; j < p; ++j) c_new(j) = soft_threshold(g(j), thresh);
    const double delta = (c_new - c).norm();
    c = c_new;
    res.objective_trace.push_back(spls_objective(z, w, c, thresh));
    if (c.norm() == 0.0) {
      res.fully_penalized = true;
      res.converged = true;
      break;
    }
    if (delta < cfg.tol) {
      res.converged = true;
      break;
    }
  }

  const double cn = c.norm();
  VectorXd direction = cn > 0.0 ? VectorXd(c / cn) : VectorXd(VectorXd::Zero(p));
  std::vector<bool> sel(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) sel[static_cast<std::size_t>(j)] = c(j) != 0.0;
  MatrixXd beta = MatrixXd::Zero(p, y.cols());
  if (cn > 0.0) beta = latent_regress(x, y, direction).beta;
  res.directions.push_back(std::move(direction));
  res.selected.push_back(std::move(sel));
  res.beta.push_back(std::move(beta));
  return res;
}

}  // namespace ispls
