#pragma once

#include "ispls/types.hpp"

namespace ispls {

// First PLS direction: leading left singular vector of Z = X'Y, i.e. the
// maximizer of w'ZZ'w over the unit sphere. Sign convention: the entry of
// largest absolute value (first such index on ties) is positive.
// Throws NumericError when Z is all zero.
VectorXd first_direction(const MatrixXd& z);

struct LatentModel {
  VectorXd direction;   // p
  VectorXd loadings;    // q, regression of Y on the latent score t = Xw
  MatrixXd beta;        // p x q rank-one coefficient matrix
};

// Single-component regression through the latent score t = X*w:
// loadings = Y't / t't, beta = w * loadings'.
// Throws NumericError when t't is numerically zero.
LatentModel latent_regress(const MatrixXd& x, const MatrixXd& y, const VectorXd& w);

// X_new * beta; checks column count.
MatrixXd predict(const LatentModel& model, const MatrixXd& x_new);

}  // namespace ispls
