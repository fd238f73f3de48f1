#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace ispls {

struct McpParams {
  double lambda = 0.0;
  double gamma = 6.0;
};

inline double sign_of(double t) { return (t > 0.0) - (t < 0.0); }

// MCP: rho(t) = lambda*|t| - t^2/(2*gamma) for |t| <= lambda*gamma,
// saturating at lambda^2*gamma/2. lambda = 0 disables the penalty.
inline double mcp(double t, const McpParams& p) {
  if (p.lambda <= 0.0) return 0.0;
  const double at = std::abs(t);
  const double cut = p.lambda * p.gamma;
  if (at >= cut) return 0.5 * p.lambda * p.lambda * p.gamma;
  return p.lambda * at - 0.5 * at * at / p.gamma;
}

// Odd derivative, zero at t = 0 and beyond the saturation point.
inline double mcp_deriv(double t, const McpParams& p) {
  if (p.lambda <= 0.0) return 0.0;
  return p.lambda * std::max(0.0, 1.0 - std::abs(t) / (p.lambda * p.gamma)) * sign_of(t);
}

// One-sided slope on t >= 0: equals mcp_deriv for t > 0 but keeps the value
// lambda at t = 0 (right-derivative). Thresholds built from the previous
// iterate must use this form; with the odd derivative a zeroed coordinate
// would lose its threshold entirely and get resurrected every sweep.
inline double mcp_slope(double t, const McpParams& p) {
  if (p.lambda <= 0.0) return 0.0;
  return p.lambda * std::max(0.0, 1.0 - t / (p.lambda * p.gamma));
}

inline double group_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Composite (two-level) MCP weight for coordinate l of group c_j:
//   alpha_jl = rho'(sum_k rho(|c_jk|; mu1, a); 1, b) * rho'(|c_jl|; mu1, a)
// evaluated with the odd derivative (zero at exact zeros).
inline double composite_weight(const std::vector<double>& c_j_prev, std::size_t l,
                               double mu1, double a, double b) {
  if (mu1 <= 0.0) return 0.0;
  const McpParams inner{mu1, a};
  double total = 0.0;
  for (double x : c_j_prev) total += mcp(x, inner);
  return mcp_deriv(total, McpParams{1.0, b}) * mcp_deriv(std::abs(c_j_prev[l]), inner);
}

// Solver-facing variant of composite_weight using one-sided slopes.
inline double composite_weight_slope(const std::vector<double>& c_j_prev, std::size_t l,
                                     double mu1, double a, double b) {
  if (mu1 <= 0.0) return 0.0;
  const McpParams inner{mu1, a};
  double total = 0.0;
  for (double x : c_j_prev) total += mcp(x, inner);
  return mcp_slope(total, McpParams{1.0, b}) * mcp_slope(std::abs(c_j_prev[l]), inner);
}

// Smoothed sign c/sqrt(c^2 + tau2); approaches sign(c) as tau2 -> 0.
inline double smooth_sign(double c, double tau2) {
  return c / std::sqrt(c * c + tau2);
}

inline double soft_threshold(double s, double alpha) {
  return sign_of(s) * std::max(0.0, std::abs(s) - alpha);
}

}  // namespace ispls
