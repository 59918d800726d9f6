#pragma once

// Quadrature kernels: panelled tanh-sinh for integrands with logarithmic
// endpoint singularities, Gauss-Legendre and probabilists' Gauss-Hermite
// rules (Golub-Welsch), and a grid-based total variation.
//
// Integrands on a panel [lo, hi] receive a PanelPoint carrying s together
// with the exact distances s - lo and hi - s. Near a singular endpoint these
// distances are far below the spacing of doubles around s, so an integrand
// such as log|s - s0| must be written in terms of them.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <sstream>
#include <vector>

#include "ewclt/errors.hpp"

namespace ewclt {

struct QuadratureConfig {
  int panels_per_gap = 2;
  double abs_tolerance = 1e-10;
  int max_levels = 9;        // step h = 2^-level, level 0 has h = 1
  double t_max = 4.5;        // tanh-sinh truncation in the t variable
};

struct PanelPoint {
  double s = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double dlo = 0.0; // s - lo
  double dhi = 0.0; // hi - s
};

template <std::size_t K> struct QuadratureResult {
  std::array<double, K> value{};
  double error = 0.0;
  int levels = 0;
  bool converged = false;
};

struct ScalarQuadrature {
  double value = 0.0;
  double error = 0.0;
};

namespace detail {

template <std::size_t K>
void axpy(std::array<double, K> &acc, double w, const std::array<double, K> &v) {
  for (std::size_t i = 0; i < K; ++i) {
    acc[i] += w * v[i];
  }
}

} // namespace detail

// Tanh-sinh on [lo, hi] for a vector-valued integrand returning
// std::array<double, K>. Levels halve the step and reuse earlier nodes; the
// error estimate is the max-component change between the last two levels.
template <std::size_t K, class F>
QuadratureResult<K> tanh_sinh(F &&h, double lo, double hi, double tolerance,
                              const QuadratureConfig &cfg = {}) {
  QuadratureResult<K> out;
  const double half = 0.5 * (hi - lo);
  if (half <= 0.0) {
    out.converged = true;
    return out;
  }
  const double c = 0.5 * std::numbers::pi;
  auto node = [&](double t, std::array<double, K> &acc) {
    const double u = c * std::sinh(t);
    const double e = std::exp(-2.0 * std::fabs(u));
    // distances to the near and far endpoint, in units of the half width
    const double near = 2.0 * e / (1.0 + e);
    const double far = 2.0 / (1.0 + e);
    const double ch = std::cosh(u);
    const double w = half * c * std::cosh(t) / (ch * ch);
    if (!(w > 0.0) || near == 0.0) {
      return;
    }
    PanelPoint p;
    p.lo = lo;
    p.hi = hi;
    if (t >= 0.0) {
      p.dhi = half * near;
      p.dlo = half * far;
      p.s = hi - p.dhi;
    } else {
      p.dlo = half * near;
      p.dhi = half * far;
      p.s = lo + p.dlo;
    }
    detail::axpy(acc, w, h(p));
  };

  // level 0: all integer t in [-t_max, t_max]
  std::array<double, K> sum{};
  node(0.0, sum);
  for (int j = 1; j <= static_cast<int>(cfg.t_max); ++j) {
    node(static_cast<double>(j), sum);
    node(-static_cast<double>(j), sum);
  }
  std::array<double, K> estimate = sum;
  double step = 1.0;
  for (int level = 1; level <= cfg.max_levels; ++level) {
    step *= 0.5;
    std::array<double, K> fresh{};
    for (double t = step; t <= cfg.t_max; t += 2.0 * step) {
      node(t, fresh);
      node(-t, fresh);
    }
    for (std::size_t i = 0; i < K; ++i) {
      sum[i] += fresh[i];
    }
    std::array<double, K> next;
    double change = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
      next[i] = sum[i] * step;
      change = std::max(change, std::fabs(next[i] - estimate[i]));
    }
    estimate = next;
    out.levels = level;
    out.error = change;
    if (level >= 3 && change <= tolerance) {
      out.converged = true;
      break;
    }
  }
  out.value = estimate;
  return out;
}

// Panel boundaries: {0, 1} plus the given breakpoints, each gap split into
// panels_per_gap equal pieces.
inline std::vector<double> panel_edges(std::vector<double> breakpoints,
                                       int panels_per_gap) {
  breakpoints.push_back(0.0);
  breakpoints.push_back(1.0);
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()),
                    breakpoints.end());
  std::vector<double> edges;
  const int pieces = std::max(1, panels_per_gap);
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const double a = breakpoints[i];
    const double b = breakpoints[i + 1];
    for (int j = 0; j < pieces; ++j) {
      edges.push_back(a + (b - a) * j / pieces);
    }
  }
  edges.push_back(1.0);
  return edges;
}

// Integral over [0, 1] of a vector-valued integrand with singularities (or
// kinks) allowed only at the breakpoints. Throws quadrature_error naming the
// first panel that fails to converge.
template <std::size_t K, class F>
QuadratureResult<K> integrate_panels(F &&h, const std::vector<double> &breakpoints,
                                     const QuadratureConfig &cfg = {}) {
  if (!(cfg.abs_tolerance > 0.0)) {
    throw invalid_argument("quadrature tolerance must be positive");
  }
  const auto edges = panel_edges(breakpoints, cfg.panels_per_gap);
  const std::size_t panels = edges.size() - 1;
  const double per_panel = cfg.abs_tolerance / static_cast<double>(panels);
  std::vector<std::array<double, K>> parts(panels);
  QuadratureResult<K> total;
  total.converged = true;
  for (std::size_t i = 0; i < panels; ++i) {
    auto r = tanh_sinh<K>(h, edges[i], edges[i + 1], per_panel, cfg);
    if (!r.converged) {
      std::ostringstream msg;
      msg << "quadrature did not converge on panel [" << edges[i] << ", "
          << edges[i + 1] << "], last change " << r.error
          << "; an undeclared singularity is likely";
      throw quadrature_error(msg.str());
    }
    parts[i] = r.value;
    total.error += r.error;
    total.levels = std::max(total.levels, r.levels);
  }
  // pairwise reduction keeps the summation order fixed
  while (parts.size() > 1) {
    std::vector<std::array<double, K>> next;
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2) {
      std::array<double, K> s{};
      for (std::size_t k = 0; k < K; ++k) {
        s[k] = parts[i][k] + parts[i + 1][k];
      }
      next.push_back(s);
    }
    if (parts.size() % 2 == 1) {
      next.push_back(parts.back());
    }
    parts = std::move(next);
  }
  total.value = parts.front();
  return total;
}

// Scalar integral over [0, 1] with logarithmic singularities at the given
// points (sorted, in [0, 1)).
inline ScalarQuadrature
log_singular_integral(const std::function<double(const PanelPoint &)> &h,
                      const std::vector<double> &zeros,
                      const QuadratureConfig &cfg = {}) {
  auto r = integrate_panels<1>(
      [&](const PanelPoint &p) { return std::array<double, 1>{h(p)}; }, zeros,
      cfg);
  return {r.value[0], r.error};
}

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

inline GaussRule golub_welsch(const Eigen::VectorXd &diag,
                              const Eigen::VectorXd &offdiag, double mu0) {
  const auto n = diag.size();
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    jacobi(i, i) = diag(i);
    if (i + 1 < n) {
      jacobi(i, i + 1) = offdiag(i);
      jacobi(i + 1, i) = offdiag(i);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  GaussRule rule;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = solver.eigenvectors()(0, i);
    rule.nodes.push_back(solver.eigenvalues()(i));
    rule.weights.push_back(mu0 * v * v);
  }
  return rule;
}

} // namespace detail

// Gauss-Legendre on [-1, 1].
inline GaussRule gauss_legendre(int order) {
  if (order < 1) {
    throw invalid_argument("quadrature order must be >= 1");
  }
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
  Eigen::VectorXd off(std::max(order - 1, 0));
  for (int k = 1; k < order; ++k) {
    off(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  }
  return detail::golub_welsch(diag, off, 2.0);
}

// Gauss-Hermite for the standard normal density: sum w_i g(x_i) ~ E g(Z).
inline GaussRule gauss_hermite_normal(int order) {
  if (order < 1) {
    throw invalid_argument("quadrature order must be >= 1");
  }
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
  Eigen::VectorXd off(std::max(order - 1, 0));
  for (int k = 1; k < order; ++k) {
    off(k - 1) = std::sqrt(static_cast<double>(k));
  }
  return detail::golub_welsch(diag, off, 1.0);
}

// An interval [center - delta, center + delta] (taken mod 1 when the caller
// works on the circle) removed from a variation computation.
struct Exclusion {
  double center = 0.0;
  double delta = 0.0;
};

// Total variation of g on [lo, hi] minus the excluded neighbourhoods. Each
// remaining interval is further split at the jump points; the one-sided
// limits at a jump are sampled at distance jump_probe and the jump size is
// added. The grid is doubled until the estimate stabilises.
inline double total_variation(const std::function<double(double)> &g, double lo,
                              double hi,
                              const std::vector<Exclusion> &exclusions = {},
                              const std::vector<double> &jumps = {},
                              double jump_probe = 1e-12) {
  if (!(hi > lo)) {
    return 0.0;
  }
  // remaining intervals
  std::vector<std::pair<double, double>> pieces{{lo, hi}};
  for (const auto &ex : exclusions) {
    std::vector<std::pair<double, double>> next;
    const double a = ex.center - ex.delta;
    const double b = ex.center + ex.delta;
    for (const auto &[l, h] : pieces) {
      if (b <= l || a >= h) {
        next.emplace_back(l, h);
        continue;
      }
      if (a > l) {
        next.emplace_back(l, a);
      }
      if (b < h) {
        next.emplace_back(b, h);
      }
    }
    pieces = std::move(next);
  }
  double jump_total = 0.0;
  std::vector<std::pair<double, double>> smooth;
  for (const auto &[l, h] : pieces) {
    std::vector<double> cuts{l};
    for (const double j : jumps) {
      if (j > l && j < h) {
        cuts.push_back(j);
        jump_total += std::fabs(g(j + jump_probe) - g(j - jump_probe));
      }
    }
    cuts.push_back(h);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const bool left_jump = i > 0;
      const bool right_jump = i + 2 < cuts.size();
      smooth.emplace_back(cuts[i] + (left_jump ? jump_probe : 0.0),
                          cuts[i + 1] - (right_jump ? jump_probe : 0.0));
    }
  }
  auto grid_variation = [&](int points) {
    double v = 0.0;
    for (const auto &[l, h] : smooth) {
      double prev = g(l);
      for (int i = 1; i <= points; ++i) {
        const double x = i == points ? h : l + (h - l) * i / points;
        const double cur = g(x);
        v += std::fabs(cur - prev);
        prev = cur;
      }
    }
    return v;
  };
  int points = 1 << 10;
  double v = grid_variation(points);
  for (int round = 0; round < 8; ++round) {
    points *= 2;
    const double refined = grid_variation(points);
    const double change = std::fabs(refined - v);
    v = refined;
    if (change <= 1e-12 * std::max(1.0, v)) {
      break;
    }
  }
  return v + jump_total;
}

} // namespace ewclt
