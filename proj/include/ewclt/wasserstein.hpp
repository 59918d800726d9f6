#pragma once

// One-dimensional Wasserstein distances, the Stein-method bound for sums of
// independent centered Poisson terms, and the O(log^-1/2 n) rate trend.

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "ewclt/errors.hpp"
#include "ewclt/rng.hpp"

namespace ewclt {

// Standard normal quantile.
inline double normal_quantile(double p) {
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

// d_W between the empirical law of the samples and N(mean, sd^2) by the
// quantile coupling: (1/N) sum_k |x_(k) - mean - sd Phi^-1((k - 1/2)/N)|.
inline double wasserstein_1d(std::vector<double> samples, double mean, double sd) {
  if (samples.empty()) {
    throw invalid_argument("wasserstein_1d needs samples");
  }
  if (!(sd >= 0.0)) {
    throw invalid_argument("target standard deviation must be nonnegative");
  }
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double q = sd == 0.0 ? 0.0 : sd * normal_quantile((k + 0.5) / n);
    sum += std::fabs(samples[k] - mean - q);
  }
  return sum / n;
}

// d_W between two empirical laws: the integral of |F_x - F_y|.
inline double wasserstein_1d(std::vector<double> x, std::vector<double> y) {
  if (x.empty() || y.empty()) {
    throw invalid_argument("wasserstein_1d needs samples");
  }
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double prev = std::min(x.front(), y.front());
  double total = 0.0;
  while (i < x.size() || j < y.size()) {
    double next;
    if (j == y.size() || (i < x.size() && x[i] <= y[j])) {
      next = x[i];
    } else {
      next = y[j];
    }
    const double fx = static_cast<double>(i) / nx;
    const double fy = static_cast<double>(j) / ny;
    total += std::fabs(fx - fy) * (next - prev);
    prev = next;
    while (i < x.size() && x[i] == next) {
      ++i;
    }
    while (j < y.size() && y[j] == next) {
      ++j;
    }
  }
  return total;
}

inline constexpr double poisson_tail_cutoff = 1e-18;

// Calls visit(k, P(Y = k)) for Y ~ Poisson(lambda), k = 0, 1, ..., stopping
// once k > lambda + 1 and p k^3 is below the cutoff, so sums of moments up to
// the third are converged as well as the mass.
template <class Visit> void poisson_series(double lambda, Visit &&visit) {
  if (!(lambda >= 0.0)) {
    throw invalid_argument("Poisson mean must be nonnegative");
  }
  if (lambda > 700.0) {
    throw invalid_argument("Poisson series supports means up to 700");
  }
  double p = std::exp(-lambda);
  for (std::uint64_t k = 0;; ++k) {
    visit(k, p);
    const double kd = static_cast<double>(k) + 1.0;
    if (kd > lambda + 2.0 && p * kd * kd * kd < poisson_tail_cutoff) {
      break;
    }
    p *= lambda / kd;
  }
}

// E|Y - lambda|^3 for Y ~ Poisson(lambda).
inline double poisson_abs_third_central_moment(double lambda) {
  double sum = 0.0;
  poisson_series(lambda, [&](std::uint64_t k, double p) {
    const double d = std::fabs(static_cast<double>(k) - lambda);
    sum += p * d * d * d;
  });
  return sum;
}

struct WassersteinReport {
  std::uint64_t n = 0;
  std::uint64_t samples = 0;
  double d_w_re = 0.0;
  double d_w_im = 0.0;
  double variance = 0.0;            // V = theta sum a_m^2/m / log n
  double third_moment_sum = 0.0;    // sum_m E|xi_m|^3, series
  double third_moment_sum_mc = 0.0; // same, Monte Carlo
  double stein_bound = 0.0;         // 3 V^{3/2} sum E|xi_m|^3
  double stein_bound_standardized = 0.0; // 3 sum E|xi_m|^3 / V
  double trend_coefficient = 0.0;   // d_w_re sqrt(log n)
};

// xi_m = a_m (Y_m - theta/m)/sqrt(log n) with independent Y_m ~
// Poisson(theta/m); compares sum xi_m against N(0, V) and evaluates both
// forms of the Stein bound.
inline WassersteinReport stein_bound_check(const std::vector<double> &a, double theta,
                                           std::uint64_t n, std::uint64_t samples,
                                           const RngStream &stream) {
  if (!(theta > 0.0)) {
    throw invalid_argument("theta must be positive");
  }
  if (n < 2 || a.size() < n) {
    throw invalid_argument("stein_bound_check needs n >= 2 and a_1..a_n");
  }
  if (samples < 2) {
    throw invalid_argument("stein_bound_check needs at least two samples");
  }
  for (std::uint64_t m = 0; m < n; ++m) {
    if (!std::isfinite(a[m])) {
      throw infinite_value_error("a_m is not finite", static_cast<long long>(m + 1));
    }
  }
  const double log_n = std::log(static_cast<double>(n));
  const double root = std::sqrt(log_n);
  WassersteinReport rep;
  rep.n = n;
  rep.samples = samples;
  double harmonic = 0.0, centre = 0.0, var = 0.0, third = 0.0;
  // sum over all m of |a_m|^3 lambda_m^3, the value of |Y - lambda|^3 at Y = 0
  double zero_cubes = 0.0;
  for (std::uint64_t m = 1; m <= n; ++m) {
    const double lambda = theta / static_cast<double>(m);
    const double am = a[m - 1];
    harmonic += 1.0 / static_cast<double>(m);
    centre += am * lambda;
    var += am * am * lambda;
    const double a3 = std::fabs(am * am * am);
    third += a3 * poisson_abs_third_central_moment(lambda);
    zero_cubes += a3 * lambda * lambda * lambda;
  }
  rep.variance = var / log_n;
  const double scale3 = log_n * root;
  rep.third_moment_sum = third / scale3;
  rep.stein_bound = 3.0 * std::pow(rep.variance, 1.5) * rep.third_moment_sum;
  rep.stein_bound_standardized =
      rep.variance > 0.0 ? 3.0 * rep.third_moment_sum / rep.variance : 0.0;

  std::vector<double> draws(samples);
  double mc_third = 0.0;
  std::vector<std::uint64_t> marks;
  for (std::uint64_t s = 0; s < samples; ++s) {
    RngStream rng = stream.substream(s);
    const std::uint64_t total = sample_poisson(theta * harmonic, rng);
    marks.clear();
    for (std::uint64_t j = 0; j < total; ++j) {
      marks.push_back(sample_harmonic_index(n, rng));
    }
    std::sort(marks.begin(), marks.end());
    double sum = 0.0;
    double cubes = zero_cubes;
    for (std::size_t j = 0; j < marks.size();) {
      const std::uint64_t m = marks[j];
      std::size_t k = j;
      while (k < marks.size() && marks[k] == m) {
        ++k;
      }
      const double y = static_cast<double>(k - j);
      const double lambda = theta / static_cast<double>(m);
      const double am = a[m - 1];
      sum += am * y;
      const double a3 = std::fabs(am * am * am);
      const double d = y - lambda;
      cubes += a3 * (std::fabs(d * d * d) - lambda * lambda * lambda);
      j = k;
    }
    draws[s] = (sum - centre) / root;
    mc_third += cubes;
  }
  rep.third_moment_sum_mc = mc_third / static_cast<double>(samples) / scale3;
  rep.d_w_re = wasserstein_1d(draws, 0.0, std::sqrt(rep.variance));
  rep.trend_coefficient = rep.d_w_re * root;
  return rep;
}

struct TrendFit {
  std::vector<double> log_n;
  std::vector<double> coefficients; // d_W sqrt(log n)
  double ratio = 0.0;               // max / min of the coefficients
  double slope = 0.0;               // d log(coefficient) / d log(log n)
  bool bounded = false;
  bool non_exploding = false;
  bool passes = false;
};

inline constexpr double trend_max_ratio = 3.0;
inline constexpr double trend_max_slope = 0.5;

// d_W = O(log^-1/2 n) means d_W sqrt(log n) stays bounded. Bounded: max/min
// of the coefficients at most 3. Non-exploding: a log-log fit of the
// coefficient against log n has slope at most 1/2 (a missing centering makes
// the coefficient grow like log n, slope 1).
inline TrendFit rate_trend(const std::vector<std::uint64_t> &n_grid,
                           const std::vector<double> &d_w) {
  if (n_grid.size() != d_w.size() || n_grid.size() < 3) {
    throw invalid_argument("rate_trend needs at least three grid points");
  }
  TrendFit fit;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    const double ln = std::log(static_cast<double>(n_grid[i]));
    const double c = d_w[i] * std::sqrt(ln);
    fit.log_n.push_back(ln);
    fit.coefficients.push_back(c);
    lx.push_back(std::log(ln));
    ly.push_back(std::log(std::max(c, 1e-300)));
  }
  const auto [lo, hi] = std::minmax_element(fit.coefficients.begin(), fit.coefficients.end());
  fit.ratio = *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(lx.size());
  my /= static_cast<double>(ly.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.bounded = fit.ratio <= trend_max_ratio;
  fit.non_exploding = fit.slope <= trend_max_slope;
  fit.passes = fit.bounded && fit.non_exploding;
  return fit;
}

inline TrendFit rate_trend(const std::vector<WassersteinReport> &reports) {
  std::vector<std::uint64_t> ns;
  std::vector<double> dw;
  for (const auto &r : reports) {
    ns.push_back(r.n);
    dw.push_back(r.d_w_re);
  }
  return rate_trend(ns, dw);
}

} // namespace ewclt
