#include "ispls/pls.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace ispls {

VectorXd first_direction(const MatrixXd& z) {
  if (z.rows() == 0 || z.cols() == 0) throw DataError("empty cross-product");
  if (z.norm() == 0.0) throw NumericError("no signal: cross-product is all zero");
  Eigen::JacobiSVD<MatrixXd> svd(z, Eigen::ComputeThinU);
  VectorXd w = svd.matrixU().col(0);
  Eigen::Index top = 0;
  w.cwiseAbs().maxCoeff(&top);
  if (w(top) < 0.0) w = -w;
  return w;
}

LatentModel latent_regress(const MatrixXd& x, const MatrixXd& y, const VectorXd& w) {
  if (x.cols() != w.size()) throw DataError("direction length does not match X columns");
  if (x.rows() != y.rows()) throw DataError("X and Y row counts differ");
  const VectorXd t = x * w;
  const double tt = t.squaredNorm();
  if (!(tt > 0.0) || !std::isfinite(tt))
    throw NumericError("degenerate latent score: t't is zero");
  LatentModel m;
  m.direction = w;
  m.loadings = (y.transpose() * t) / tt;
  m.beta = w * m.loadings.transpose();
  return m;
}

MatrixXd predict(const LatentModel& model, const MatrixXd& x_new) {
  if (x_new.cols() != model.beta.rows())
    throw DataError("prediction matrix has " + std::to_string(x_new.cols()) +
                    " columns, model expects " + std::to_string(model.beta.rows()));
  return x_new * model.beta;
}

}  // namespace ispls
