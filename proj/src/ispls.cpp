#include "ispls/ispls.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "ispls/model.hpp"
#include "ispls/penalty.hpp"
#include "ispls/pls.hpp"
#include "ispls/spls.hpp"

namespace ispls {

namespace {

struct GroupScratch {
  std::vector<double> s;      // frozen linear terms per study
  std::vector<double> d;      // frozen quadratic curvatures per study
  std::vector<double> x;      // solution buffer
  std::vector<double> ref_j;  // previous group values, all studies
  std::vector<std::size_t> idx;  // active study indices
};

// Exact minimizer of sum_l 0.5*d[l]*x^2 - s[l]*x + nu*||x||_2 (d > 0, nu >= 0).
// With equal curvatures this is the closed-form group soft threshold; with
// distinct curvatures the solution lies on x_l = s_l/(d_l + nu/r) where the
// radius r solves sum_l s_l^2/(d_l + nu/r)^2 = r^2 (unique root by bisection).
void group_threshold_min(const std::vector<double>& s, const std::vector<double>& d,
                         double nu, std::vector<double>& x) {
  const std::size_t m = s.size();
  x.assign(m, 0.0);
  double sn2 = 0.0;
  for (double v : s) sn2 += v * v;
  const double sn = std::sqrt(sn2);
  if (sn <= nu || sn == 0.0) return;
  if (nu <= 0.0) {
    for (std::size_t l = 0; l < m; ++l) x[l] = s[l] / d[l];
    return;
  }
  double dmin = d[0], dmax = d[0];
  for (double v : d) {
    dmin = std::min(dmin, v);
    dmax = std::max(dmax, v);
  }
  if (dmax - dmin <= 1e-12 * dmax) {
    const double t = (sn - nu) / (dmax * sn);
    for (std::size_t l = 0; l < m; ++l) x[l] = t * s[l];
    return;
  }
  double hi = 0.0;
  for (std::size_t l = 0; l < m; ++l) hi += (s[l] / d[l]) * (s[l] / d[l]);
  hi = std::sqrt(hi);
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double r = 0.5 * (lo + hi);
    double h2 = 0.0;
    for (std::size_t l = 0; l < m; ++l) {
      const double t = s[l] / (d[l] + nu / r);
      h2 += t * t;
    }
    if (h2 > r * r) {
      lo = r;
    } else {
      hi = r;
    }
  }
  const double r = 0.5 * (lo + hi);
  for (std::size_t l = 0; l < m; ++l) x[l] = s[l] / (d[l] + nu / r);
}

// Update one variable group j with every reference quantity frozen at ref.
void update_group(Eigen::Index j, const std::vector<Eigen::VectorXd>& grad,
                  const std::vector<Eigen::VectorXd>& ref, const PenaltySpec& spec,
                  const std::vector<double>& mu2s, const std::vector<bool>& active,
                  double b_res, GroupScratch& sc, std::vector<Eigen::VectorXd>& out) {
  const std::size_t L = ref.size();
  sc.idx.clear();
  sc.ref_j.assign(L, 0.0);
  for (std::size_t l = 0; l < L; ++l) {
    sc.ref_j[l] = ref[l](j);
    if (active[l]) sc.idx.push_back(l);
  }
  const std::size_t m = sc.idx.size();
  if (m == 0) return;
  const double pairs = static_cast<double>(m - 1);
  const McpParams inner{spec.mu1, spec.a};

  sc.s.assign(m, 0.0);
  sc.d.assign(m, 0.0);
  if (spec.contrast == Contrast::Magnitude) {
    double ref_sum = 0.0;
    for (std::size_t k = 0; k < m; ++k) ref_sum += sc.ref_j[sc.idx[k]];
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t l = sc.idx[k];
      sc.s[k] = grad[l](j) + mu2s[l] * (ref_sum - sc.ref_j[l]);
      sc.d[k] = 1.0 + mu2s[l] * pairs;
    }
  } else {
    double sgn_sum = 0.0;
    for (std::size_t k = 0; k < m; ++k)
      sgn_sum += smooth_sign(sc.ref_j[sc.idx[k]], spec.tau2);
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t l = sc.idx[k];
      const double sq = sc.ref_j[l] * sc.ref_j[l] + spec.tau2;
      sc.s[k] = grad[l](j) +
                mu2s[l] / std::sqrt(sq) * (sgn_sum - smooth_sign(sc.ref_j[l], spec.tau2));
      sc.d[k] = spec.printed_sign_denominator ? (1.0 + mu2s[l] * pairs) / sq
                                              : 1.0 + mu2s[l] * pairs / sq;
    }
  }

  if (spec.model == Model::Homogeneity) {
    const double nu = mcp_slope(group_norm(sc.ref_j), inner);
    if (spec.contrast == Contrast::Sign && spec.printed_sign_denominator) {
      // Literal printed update shape: common threshold, per-study denominator.
      double sn2 = 0.0;
      for (double v : sc.s) sn2 += v * v;
      const double sn = std::sqrt(sn2);
      const double fac = std::max(0.0, sn - nu);
      sc.x.assign(m, 0.0);
      if (sn > 0.0 && fac > 0.0)
        for (std::size_t k = 0; k < m; ++k) sc.x[k] = fac * sc.s[k] / (sc.d[k] * sn);
    } else {
      group_threshold_min(sc.s, sc.d, nu, sc.x);
    }
    for (std::size_t k = 0; k < m; ++k) out[sc.idx[k]](j) = sc.x[k];
  } else {
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t l = sc.idx[k];
      const double alpha = composite_weight_slope(sc.ref_j, l, spec.mu1, spec.a, b_res);
      out[l](j) = soft_threshold(sc.s[k], alpha) / sc.d[k];
    }
  }
}

void check_dims(const std::vector<Eigen::VectorXd>& grad,
                const std::vector<Eigen::VectorXd>& c, const std::vector<double>& mu2s,
                const std::vector<bool>& active) {
  const std::size_t L = c.size();
  if (L == 0) throw DataError("c-step: no studies");
  if (grad.size() != L || mu2s.size() != L || active.size() != L)
    throw DataError("c-step: per-study argument lengths disagree");
  const Eigen::Index p = c.front().size();
  for (std::size_t l = 0; l < L; ++l)
    if (c[l].size() != p || grad[l].size() != p)
      throw DataError("c-step: vector lengths disagree across studies");
}

}  // namespace

std::vector<Eigen::VectorXd> c_step_sweep(const std::vector<Eigen::VectorXd>& grad,
                                          const std::vector<Eigen::VectorXd>& c_ref,
                                          const PenaltySpec& spec,
                                          const ContrastWeights& weights,
                                          const std::vector<bool>& active) {
  check_dims(grad, c_ref, weights.mu2_star, active);
  spec.validate(c_ref.size());
  const double b_res = spec.resolve_b(c_ref.size());
  std::vector<Eigen::VectorXd> out = c_ref;
  GroupScratch sc;
  for (Eigen::Index j = 0; j < c_ref.front().size(); ++j)
    update_group(j, grad, c_ref, spec, weights.mu2_star, active, b_res, sc, out);
  return out;
}

double c_surrogate_value(const std::vector<Eigen::VectorXd>& grad,
                         const std::vector<Eigen::VectorXd>& c,
                         const std::vector<Eigen::VectorXd>& c_ref,
                         const PenaltySpec& spec, const ContrastWeights& weights,
                         const std::vector<bool>& active) {
  check_dims(grad, c, weights.mu2_star, active);
  check_dims(grad, c_ref, weights.mu2_star, active);
  const std::size_t L = c.size();
  const double b_res = spec.resolve_b(L);
  const McpParams inner{spec.mu1, spec.a};
  std::vector<double> ref_j(L, 0.0);
  double total = 0.0;
  for (Eigen::Index j = 0; j < c.front().size(); ++j) {
    for (std::size_t l = 0; l < L; ++l) ref_j[l] = c_ref[l](j);
    double group2 = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
      if (!active[l]) continue;
      const double cj = c[l](j);
      group2 += cj * cj;
      total += 0.5 * cj * cj - grad[l](j) * cj;
      for (std::size_t l2 = 0; l2 < L; ++l2) {
        if (l2 == l || !active[l2]) continue;
        double diff;
        if (spec.contrast == Contrast::Magnitude) {
          diff = cj - ref_j[l2];
        } else {
          diff = cj / std::sqrt(ref_j[l] * ref_j[l] + spec.tau2) -
                 smooth_sign(ref_j[l2], spec.tau2);
        }
        total += 0.5 * weights.mu2_star[l] * diff * diff;
      }
    }
    if (spec.model == Model::Homogeneity) {
      total += mcp_slope(group_norm(ref_j), inner) * std::sqrt(group2);
    } else {
      for (std::size_t l = 0; l < L; ++l) {
        if (!active[l]) continue;
        total += composite_weight_slope(ref_j, l, spec.mu1, spec.a, b_res) *
                 std::abs(c[l](j));
      }
    }
  }
  return total;
}

CStepResult c_step(const std::vector<Eigen::VectorXd>& grad,
                   const std::vector<Eigen::VectorXd>& c_prev, const PenaltySpec& spec,
                   const ContrastWeights& weights, const std::vector<bool>& active,
                   const CStepOptions& opts) {
  check_dims(grad, c_prev, weights.mu2_star, active);
  spec.validate(c_prev.size());
  if (opts.inner_max_iter < 1 || opts.sweep_max < 1)
    throw DataError("iteration caps must be >= 1");
  if (opts.inner_tol <= 0.0) throw DataError("inner_tol must be > 0");

  const std::size_t L = c_prev.size();
  const Eigen::Index p = c_prev.front().size();
  const double b_res = spec.resolve_b(L);

  CStepResult res;
  res.c = c_prev;
  // 0 = free, 1 = frozen at its own fixed point, 2 = frozen by the update cap
  std::vector<char> frozen(static_cast<std::size_t>(p), 0);
  std::vector<int> count(static_cast<std::size_t>(p), 0);
  GroupScratch sc;

  for (int sweep = 1; sweep <= opts.sweep_max; ++sweep) {
    const std::vector<Eigen::VectorXd> ref = res.c;
    double total2 = 0.0;
    bool any_free = false;
    for (Eigen::Index j = 0; j < p; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      if (frozen[ju]) continue;
      any_free = true;
      update_group(j, grad, ref, spec, weights.mu2_star, active, b_res, sc, res.c);
      double chg2 = 0.0, ref2 = 0.0;
      for (std::size_t l = 0; l < L; ++l) {
        const double dv = res.c[l](j) - ref[l](j);
        chg2 += dv * dv;
        ref2 += ref[l](j) * ref[l](j);
      }
      total2 += chg2;
      ++count[ju];
      if (chg2 <= opts.inner_tol * opts.inner_tol || chg2 <= 1e-24 * ref2) {
        frozen[ju] = 1;
      } else if (count[ju] >= opts.inner_max_iter) {
        frozen[ju] = 2;
      }
    }
    res.sweeps = sweep;
    if (!any_free) {
      res.converged =
          std::find(frozen.begin(), frozen.end(), char(2)) == frozen.end();
      break;
    }
    if (std::sqrt(total2) < opts.inner_tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

CStepResult c_step_homo_mag(const std::vector<Eigen::VectorXd>& grad,
                            const std::vector<Eigen::VectorXd>& c_prev,
                            const PenaltySpec& spec, const ContrastWeights& weights,
                            const std::vector<bool>& active, const CStepOptions& opts) {
  PenaltySpec s = spec;
  s.model = Model::Homogeneity;
  s.contrast = Contrast::Magnitude;
  return c_step(grad, c_prev, s, weights, active, opts);
}

CStepResult c_step_homo_sign(const std::vector<Eigen::VectorXd>& grad,
                             const std::vector<Eigen::VectorXd>& c_prev,
                             const PenaltySpec& spec, const ContrastWeights& weights,
                             const std::vector<bool>& active, const CStepOptions& opts) {
  PenaltySpec s = spec;
  s.model = Model::Homogeneity;
  s.contrast = Contrast::Sign;
  return c_step(grad, c_prev, s, weights, active, opts);
}

CStepResult c_step_hetero_mag(const std::vector<Eigen::VectorXd>& grad,
                              const std::vector<Eigen::VectorXd>& c_prev,
                              const PenaltySpec& spec, const ContrastWeights& weights,
                              const std::vector<bool>& active, const CStepOptions& opts) {
  PenaltySpec s = spec;
  s.model = Model::Heterogeneity;
  s.contrast = Contrast::Magnitude;
  return c_step(grad, c_prev, s, weights, active, opts);
}

CStepResult c_step_hetero_sign(const std::vector<Eigen::VectorXd>& grad,
                               const std::vector<Eigen::VectorXd>& c_prev,
                               const PenaltySpec& spec, const ContrastWeights& weights,
                               const std::vector<bool>& active, const CStepOptions& opts) {
  PenaltySpec s = spec;
  s.model = Model::Heterogeneity;
  s.contrast = Contrast::Sign;
  return c_step(grad, c_prev, s, weights, active, opts);
}

double objective_value(const std::vector<CrossProduct>& z,
                       const std::vector<Eigen::VectorXd>& w,
                       const std::vector<Eigen::VectorXd>& c, const PenaltySpec& spec,
                       const ContrastWeights& weights) {
  const std::size_t L = z.size();
  if (w.size() != L || c.size() != L || L == 0 || weights.mu2_star.size() != L)
    throw DataError("objective: per-study argument lengths disagree");
  spec.validate(L);
  const Eigen::Index p = c.front().size();
  const McpParams inner{spec.mu1, spec.a};
  const double b_res = spec.resolve_b(L);

  double fit = 0.0;
  const std::vector<double>& mu2s = weights.mu2_star;
  for (std::size_t l = 0; l < L; ++l) {
    const double n2 = static_cast<double>(z[l].n) * static_cast<double>(z[l].n);
    const Eigen::VectorXd ztw = z[l].z.transpose() * w[l];
    const Eigen::VectorXd ztc = z[l].z.transpose() * c[l];
    fit += -spec.kappa * ztw.squaredNorm() / (2.0 * n2);
    fit += 0.5 * c[l].squaredNorm() - ztw.dot(ztc) / n2;
    fit += ztw.squaredNorm() / n2 - 0.5 * w[l].squaredNorm();
  }

  double pen1 = 0.0, pen2 = 0.0;
  std::vector<double> cj(L, 0.0);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (std::size_t l = 0; l < L; ++l) cj[l] = c[l](j);
    if (spec.model == Model::Homogeneity) {
      pen1 += mcp(group_norm(cj), inner);
    } else {
      double total = 0.0;
      for (double v : cj) total += mcp(v, inner);
      pen1 += mcp(total, McpParams{1.0, b_res});
    }
    for (std::size_t l = 0; l < L; ++l)
      for (std::size_t l2 = 0; l2 < L; ++l2) {
        if (l2 == l) continue;
        const double diff = spec.contrast == Contrast::Magnitude
                                ? cj[l] - cj[l2]
                                : smooth_sign(cj[l], spec.tau2) -
                                      smooth_sign(cj[l2], spec.tau2);
        pen2 += 0.5 * mu2s[l] * diff * diff;
      }
  }
  return fit + pen1 + pen2;
}

FitResult fit_ispls(const MultiStudyData& data, const IsplsConfig& config,
                    const IterObserver& observer) {
  data.validate();
  const std::size_t L = data.n_studies();
  if (L < 2) throw DataError("integrative fit needs at least 2 studies");
  config.penalty.validate(L);
  if (config.outer_max_iter < 1) throw DataError("outer_max_iter must be >= 1");
  if (config.outer_tol <= 0.0) throw DataError("outer_tol must be > 0");

  const auto zs = build_cross_products(data);
  std::vector<std::size_t> ns(L, 0);
  for (std::size_t l = 0; l < L; ++l) ns[l] = zs[l].n;
  const ContrastWeights weights = ContrastWeights::from(config.penalty.mu2, ns);

  const Eigen::Index p = static_cast<Eigen::Index>(data.p());
  std::vector<bool> active(L, false);
  std::vector<Eigen::VectorXd> w(L), c(L), grad(L);
  std::size_t live = 0;
  for (std::size_t l = 0; l < L; ++l) {
    grad[l] = Eigen::VectorXd::Zero(p);
    if (zs[l].z.norm() > 0.0) {
      active[l] = true;
      w[l] = first_direction(zs[l].z);
      c[l] = w[l];
      ++live;
    } else {
      w[l] = Eigen::VectorXd::Zero(p);
      c[l] = Eigen::VectorXd::Zero(p);
    }
  }
  if (live == 0) throw NumericError("no signal: every study has an all-zero X'Y");

  FitResult res;
  int iterations = config.outer_max_iter;
  for (int iter = 1; iter <= config.outer_max_iter; ++iter) {
    for (std::size_t l = 0; l < L; ++l) {
      if (active[l] && c[l].norm() > 0.0)
        w[l] = spls_w_step(zs[l].z, c[l], config.penalty.kappa);
      grad[l] = active[l] ? (zs[l].z * (zs[l].z.transpose() * w[l])).eval()
                          : Eigen::VectorXd::Zero(p);
    }
    CStepResult step = c_step(grad, c, config.penalty, weights, active, config.c_step);
    double delta = 0.0, base = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
      delta += (step.c[l] - c[l]).norm();
      base += c[l].norm();
    }
    c = std::move(step.c);
    res.objective_trace.push_back(objective_value(zs, w, c, config.penalty, weights));
    if (observer) observer(DirectionState{w, c, iter});
    if (delta < config.outer_tol || delta < 1e-12 * (1.0 + base)) {
      res.converged = true;
      iterations = iter;
      break;
    }
  }
  res.iterations = iterations;

  res.directions.resize(L);
  res.selected.assign(L, std::vector<bool>(static_cast<std::size_t>(p), false));
  res.beta.resize(L);
  bool any = false;
  for (std::size_t l = 0; l < L; ++l) {
    const auto& study = data.studies[l];
    const double nrm = c[l].norm();
    if (nrm == 0.0) {
      res.directions[l] = Eigen::VectorXd::Zero(p);
      res.beta[l] = Eigen::MatrixXd::Zero(p, static_cast<Eigen::Index>(data.q()));
      continue;
    }
    any = true;
    Eigen::VectorXd dir = c[l] / nrm;
    for (Eigen::Index j = 0; j < p; ++j)
      res.selected[l][static_cast<std::size_t>(j)] = c[l](j) != 0.0;
    if (config.refit_on_selected) {
      std::vector<Eigen::Index> cols;
      for (Eigen::Index j = 0; j < p; ++j)
        if (c[l](j) != 0.0) cols.push_back(j);
      Eigen::MatrixXd xs(study.x.rows(), static_cast<Eigen::Index>(cols.size()));
      for (std::size_t k = 0; k < cols.size(); ++k) xs.col(static_cast<Eigen::Index>(k)) = study.x.col(cols[k]);
      const Eigen::MatrixXd zsub = xs.transpose() * study.y;
      if (zsub.norm() > 0.0) {
        const Eigen::VectorXd wsub = first_direction(zsub);
        dir = Eigen::VectorXd::Zero(p);
        for (std::size_t k = 0; k < cols.size(); ++k)
          dir(cols[k]) = wsub(static_cast<Eigen::Index>(k));
      }
    }
    res.directions[l] = dir;
    res.beta[l] = latent_regress(study.x, study.y, dir).beta;
  }
  res.fully_penalized = !any;
  return res;
}

}  // namespace ispls
