#pragma once

// Smooth test functions, the bivariate Stein identity and the kernel moments
// of the Poisson Stein coupling.
//
// For a bivariate normal N with covariance Sigma,
//   Ug(x) = int_0^1 (E g(sqrt(t) x + sqrt(1-t) N) - E g(N)) / (2t) dt
// solves <x, grad Ug(x)> - <Hess Ug(x), Sigma>_HS = g(x) - E g(N) at every
// x. The t-integral is computed with t = sin^2(phi), which turns it into
//   int_0^{pi/2} cot(phi) (E g(sin(phi) x + cos(phi) N) - E g(N)) dphi
// with a smooth integrand, by Gauss-Legendre in phi; the inner expectation is
// a tensor Gauss-Hermite rule. Derivatives of Ug are central differences.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "ewclt/errors.hpp"
#include "ewclt/quadrature.hpp"
#include "ewclt/statistic.hpp"
#include "ewclt/wasserstein.hpp"

namespace ewclt {

using Vec2 = Eigen::Vector2d;

// A test function with sup |grad g| <= 1 and sup ||Hess g||_op <= 1; the
// certificate string records why.
struct Probe {
  std::string name;
  std::function<double(const Vec2 &)> g;
  std::string certificate;
};

inline std::vector<Probe> certified_probes() {
  std::vector<Probe> p;
  p.push_back({"u_a", [](const Vec2 &u) { return u(0); },
               "grad = (1, 0), Hess = 0"});
  p.push_back({"u_b", [](const Vec2 &u) { return u(1); },
               "grad = (0, 1), Hess = 0"});
  p.push_back({"mean_ab", [](const Vec2 &u) { return 0.5 * (u(0) + u(1)); },
               "|grad| = 1/sqrt 2, Hess = 0"});
  p.push_back({"soft_abs_a",
               [](const Vec2 &u) { return std::sqrt(1.0 + u(0) * u(0)) - 1.0; },
               "g' = u/sqrt(1+u^2) in (-1, 1), g'' = (1+u^2)^(-3/2) in (0, 1]"});
  p.push_back({"soft_abs_b",
               [](const Vec2 &u) { return std::sqrt(1.0 + u(1) * u(1)) - 1.0; },
               "as soft_abs_a in the second coordinate"});
  p.push_back({"bump", [](const Vec2 &u) { return std::exp(-0.5 * u.squaredNorm()); },
               "|grad| = r e^{-r^2/2} <= e^{-1/2}; Hess = (u u^T - I) e^{-r^2/2} "
               "has eigenvalues -e^{-r^2/2} and (r^2-1) e^{-r^2/2}, both in [-1, 2e^{-3/2}]"});
  p.push_back({"bump_shifted",
               [](const Vec2 &u) {
                 const Vec2 d(u(0) - 1.0, u(1));
                 return std::exp(-0.5 * d.squaredNorm());
               },
               "translate of bump"});
  p.push_back({"sin_cos", [](const Vec2 &u) { return std::sin(u(0)) * std::cos(u(1)); },
               "|grad|^2 = cos^2 a cos^2 b + sin^2 a sin^2 b <= 1; Hess eigenvalues "
               "-sin(a + b), -sin(a - b)"});
  return p;
}

// Square root S of a symmetric nonnegative-definite Sigma (S S^T = Sigma).
inline Eigen::Matrix2d covariance_root(const Eigen::Matrix2d &sigma) {
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + sigma.cwiseAbs().maxCoeff())) {
    throw invalid_argument("covariance matrix must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(sigma);
  Eigen::Vector2d ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  for (int i = 0; i < 2; ++i) {
    if (ev(i) < -1e-12 * scale) {
      throw invalid_argument("covariance matrix must be nonnegative-definite");
    }
    ev(i) = std::max(ev(i), 0.0);
  }
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
}

// Tensor Gauss-Hermite rule for N(0, Sigma).
struct GaussianRule {
  std::vector<Vec2> nodes;
  std::vector<double> weights;

  GaussianRule(const Eigen::Matrix2d &sigma, int order) {
    const auto h = gauss_hermite_normal(order);
    const Eigen::Matrix2d root = covariance_root(sigma);
    for (int i = 0; i < order; ++i) {
      for (int j = 0; j < order; ++j) {
        nodes.push_back(root * Vec2(h.nodes[i], h.nodes[j]));
        weights.push_back(h.weights[i] * h.weights[j]);
      }
    }
  }

  // E g(shift + scale N)
  double expect(const std::function<double(const Vec2 &)> &g, const Vec2 &shift = Vec2::Zero(),
                double scale = 1.0) const {
    double sum = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      sum += weights[k] * g(shift + scale * nodes[k]);
    }
    return sum;
  }
};

inline constexpr int expectation_hermite_order = 40;

inline double gaussian_expectation(const std::function<double(const Vec2 &)> &g,
                                   const Eigen::Matrix2d &sigma,
                                   int order = expectation_hermite_order) {
  return GaussianRule(sigma, order).expect(g);
}

struct ProbeResult {
  std::string name;
  double empirical = 0.0;   // mean g(samples)
  double gaussian = 0.0;    // E g(N_Sigma)
  double difference = 0.0;  // |empirical - gaussian|
  double standard_error = 0.0;
};

struct ProbeReport {
  double value = 0.0; // max difference, a lower bound on d_wW
  std::vector<ProbeResult> probes;
};

inline ProbeReport weak_wasserstein_probe(const std::vector<StatisticSample> &samples,
                                          const Eigen::Matrix2d &sigma,
                                          const std::vector<Probe> &probes) {
  if (samples.size() < 2) {
    throw invalid_argument("weak_wasserstein_probe needs at least two samples");
  }
  const GaussianRule rule(sigma, expectation_hermite_order);
  ProbeReport rep;
  const double n = static_cast<double>(samples.size());
  for (const auto &probe : probes) {
    double sum = 0.0, sq = 0.0;
    for (const auto &s : samples) {
      const double v = probe.g(Vec2(s.re, s.im));
      sum += v;
      sq += v * v;
    }
    ProbeResult r;
    r.name = probe.name;
    r.empirical = sum / n;
    r.gaussian = rule.expect(probe.g);
    r.difference = std::fabs(r.empirical - r.gaussian);
    r.standard_error = std::sqrt(std::max(0.0, sq / n - r.empirical * r.empirical) / (n - 1.0));
    rep.value = std::max(rep.value, r.difference);
    rep.probes.push_back(r);
  }
  return rep;
}

struct SteinConfig {
  int phi_order = 16;       // Gauss-Legendre points in phi
  int hermite_order = 10;   // per axis, inner expectation
  double fd_step = 1e-4;
  // resolution check on a subsample
  int phi_order_fine = 24;
  int hermite_order_fine = 14;
  std::size_t check_points = 100;
};

class SteinSolution {
public:
  SteinSolution(std::function<double(const Vec2 &)> g, const Eigen::Matrix2d &sigma,
                int phi_order, int hermite_order)
      : g_(std::move(g)), rule_(sigma, hermite_order) {
    mean_ = GaussianRule(sigma, expectation_hermite_order).expect(g_);
    // subtracting the same rule's E g(N) keeps the integrand O(sin phi) at 0
    inner_mean_ = rule_.expect(g_);
    const auto gl = gauss_legendre(phi_order);
    const double half = 0.25 * std::numbers::pi;
    for (int i = 0; i < phi_order; ++i) {
      const double phi = half * (gl.nodes[i] + 1.0);
      sin_.push_back(std::sin(phi));
      cos_.push_back(std::cos(phi));
      weight_.push_back(half * gl.weights[i] * std::cos(phi) / std::sin(phi));
    }
  }

  double mean() const { return mean_; }

  double operator()(const Vec2 &x) const {
    double total = 0.0;
    for (std::size_t i = 0; i < sin_.size(); ++i) {
      total += weight_[i] * (rule_.expect(g_, sin_[i] * x, cos_[i]) - inner_mean_);
    }
    return total;
  }

  // <x, grad Ug(x)> - <Hess Ug(x), Sigma>_HS by central differences
  double stein_operator(const Vec2 &x, const Eigen::Matrix2d &sigma, double h) const {
    const Vec2 ea(h, 0.0), eb(0.0, h);
    const double u0 = (*this)(x);
    const double ua_p = (*this)(x + ea), ua_m = (*this)(x - ea);
    const double ub_p = (*this)(x + eb), ub_m = (*this)(x - eb);
    const double upp = (*this)(x + ea + eb), upm = (*this)(x + ea - eb);
    const double ump = (*this)(x - ea + eb), umm = (*this)(x - ea - eb);
    const double ga = (ua_p - ua_m) / (2.0 * h);
    const double gb = (ub_p - ub_m) / (2.0 * h);
    const double haa = (ua_p - 2.0 * u0 + ua_m) / (h * h);
    const double hbb = (ub_p - 2.0 * u0 + ub_m) / (h * h);
    const double hab = (upp - upm - ump + umm) / (4.0 * h * h);
    return x(0) * ga + x(1) * gb -
           (haa * sigma(0, 0) + 2.0 * hab * sigma(0, 1) + hbb * sigma(1, 1));
  }

private:
  std::function<double(const Vec2 &)> g_;
  GaussianRule rule_;
  double mean_ = 0.0;
  double inner_mean_ = 0.0;
  std::vector<double> sin_, cos_, weight_;
};

struct SteinResidual {
  double lhs = 0.0;               // mean g(X) - E g(N)
  double rhs = 0.0;               // mean of the Stein operator applied to Ug
  double standard_error = 0.0;    // of the operator mean
  double quadrature_error = 0.0;  // max change under finer quadrature
  double fd_error = 0.0;          // max change under doubled step
  double combined_error = 0.0;
  bool agrees = false;            // |lhs - rhs| <= 3 combined_error
};

inline bool sigma_positive_definite(const Eigen::Matrix2d &sigma, double tol = 1e-10) {
  const double tr = sigma.trace();
  return sigma(0, 0) > 0.0 && sigma(1, 1) > 0.0 && sigma.determinant() > tol * tr * tr;
}

inline SteinResidual stein_identity_residual(const std::function<double(const Vec2 &)> &g,
                                             const Eigen::Matrix2d &sigma,
                                             const std::vector<StatisticSample> &samples,
                                             const SteinConfig &cfg = {}) {
  if (!sigma_positive_definite(sigma)) {
    throw invalid_argument(
        "Stein identity needs a positive-definite covariance; reduce a singular "
        "one to the one-dimensional case");
  }
  if (samples.size() < 2) {
    throw invalid_argument("stein_identity_residual needs at least two samples");
  }
  const SteinSolution ug(g, sigma, cfg.phi_order, cfg.hermite_order);
  const double n = static_cast<double>(samples.size());
  double g_sum = 0.0, d_sum = 0.0, d_sq = 0.0;
  std::vector<double> d_values(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Vec2 x(samples[i].re, samples[i].im);
    g_sum += g(x);
    const double d = ug.stein_operator(x, sigma, cfg.fd_step);
    d_values[i] = d;
    d_sum += d;
    d_sq += d * d;
  }
  SteinResidual r;
  r.lhs = g_sum / n - ug.mean();
  r.rhs = d_sum / n;
  r.standard_error = std::sqrt(std::max(0.0, d_sq / n - r.rhs * r.rhs) / (n - 1.0));

  // numerical error estimates on an evenly spaced subsample
  const SteinSolution fine(g, sigma, cfg.phi_order_fine, cfg.hermite_order_fine);
  const std::size_t points = std::min(cfg.check_points, samples.size());
  const std::size_t stride = samples.size() / points;
  for (std::size_t k = 0; k < points; ++k) {
    const std::size_t i = k * stride;
    const Vec2 x(samples[i].re, samples[i].im);
    const double coarse = d_values[i];
    r.quadrature_error = std::max(
        r.quadrature_error,
        std::fabs(fine.stein_operator(x, sigma, cfg.fd_step) - coarse));
    r.fd_error = std::max(r.fd_error,
                          std::fabs(ug.stein_operator(x, sigma, 2.0 * cfg.fd_step) - coarse));
  }
  r.combined_error = r.standard_error + r.quadrature_error + r.fd_error;
  r.agrees = std::fabs(r.lhs - r.rhs) <= 3.0 * r.combined_error;
  return r;
}

struct KmMoments {
  double int_K = 0.0;  // int_0^inf K_m(t) dt
  double int_tK = 0.0; // int_0^inf t K_m(t) dt
};

// K_m(t) = E[(Y - lambda) 1{0 <= t <= Y}] with Y ~ Poisson(lambda),
// lambda = theta/m. Integrating the indicator gives
//   int K = E[(Y - lambda) Y],  int t K = E[(Y - lambda) Y^2 / 2],
// both summed over the Poisson law.
inline KmMoments km_moments(std::uint64_t m, double theta) {
  if (m < 1 || !(theta > 0.0)) {
    throw invalid_argument("km_moments needs m >= 1 and theta > 0");
  }
  const double lambda = theta / static_cast<double>(m);
  KmMoments out;
  poisson_series(lambda, [&](std::uint64_t k, double p) {
    const double y = static_cast<double>(k);
    out.int_K += p * (y - lambda) * y;
    out.int_tK += p * (y - lambda) * y * y * 0.5;
  });
  return out;
}

} // namespace ewclt
