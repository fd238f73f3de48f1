#include "ispls/model.hpp"

#include <cmath>

namespace ispls {

void MultiStudyData::validate() const {
  if (studies.empty()) throw DataError("no studies");
  const std::size_t p0 = studies.front().p();
  const std::size_t q0 = studies.front().q();
  if (p0 == 0 || q0 == 0) throw DataError("study 1: X and Y need at least one column");
  for (std::size_t l = 0; l < studies.size(); ++l) {
    const auto& s = studies[l];
    const std::string tag = "study " + std::to_string(l + 1);
    if (s.x.rows() != s.y.rows())
      throw DataError(tag + ": X has " + std::to_string(s.x.rows()) + " rows but Y has " +
                      std::to_string(s.y.rows()));
    if (s.n() < 2) throw DataError(tag + ": needs at least 2 observations");
    if (s.p() != p0)
      throw DataError(tag + ": X has " + std::to_string(s.p()) + " columns, expected " +
                      std::to_string(p0));
    if (s.q() != q0)
      throw DataError(tag + ": Y has " + std::to_string(s.q()) + " columns, expected " +
                      std::to_string(q0));
  }
}

double PenaltySpec::resolve_b(std::size_t n_datasets) const {
  if (b) return *b;
  return 0.5 * static_cast<double>(n_datasets) * a * mu1 * mu1;
}

void PenaltySpec::validate(std::size_t n_datasets) const {
  if (mu1 < 0.0) throw DataError("mu1 must be >= 0");
  if (mu2 < 0.0) throw DataError("mu2 must be >= 0");
  if (a <= 1.0) throw DataError("a must be > 1");
  if (tau2 <= 0.0) throw DataError("tau2 must be > 0");
  if (!(kappa > 0.0 && kappa <= 0.5)) throw DataError("kappa must be in (0, 0.5]");
  if (model == Model::Heterogeneity && mu1 > 0.0 && resolve_b(n_datasets) <= 0.0)
    throw DataError("b must be > 0");
  if (b && *b <= 0.0) throw DataError("b must be > 0");
}

ContrastWeights ContrastWeights::from(double mu2,
                                      const std::vector<std::size_t>& n_per_study) {
  ContrastWeights w;
  w.mu2_star.reserve(n_per_study.size());
  for (std::size_t n : n_per_study)
    w.mu2_star.push_back(mu2 * static_cast<double>(n) * static_cast<double>(n));
  return w;
}

std::vector<CrossProduct> build_cross_products(const MultiStudyData& data) {
  data.validate();
  std::vector<CrossProduct> out;
  out.reserve(data.n_studies());
  for (const auto& s : data.studies)
    out.push_back(CrossProduct{s.x.transpose() * s.y, s.n()});
  return out;
}

StandardizeResult standardize(const MultiStudyData& data, bool center, bool scale) {
  data.validate();
  StandardizeResult res;
  res.data = data;
  for (std::size_t l = 0; l < res.data.studies.size(); ++l) {
    auto& s = res.data.studies[l];
    const double n = static_cast<double>(s.n());
    if (center) {
      s.x.rowwise() -= s.x.colwise().mean();
      s.y.rowwise() -= s.y.colwise().mean();
    }
    if (scale) {
      for (Eigen::Index j = 0; j < s.x.cols(); ++j) {
        // Sample sd about the current column mean (not assumed zero).
        const double mean = s.x.col(j).mean();
        const double ss = (s.x.col(j).array() - mean).square().sum();
        const double sd = std::sqrt(ss / (n - 1.0));
        if (sd > 0.0) {
          s.x.col(j) /= sd;
        } else {
          res.warnings.push_back({l, static_cast<std::size_t>(j)});
        }
      }
    }
  }
  return res;
}

}  // namespace ispls
