#pragma once

// Experiment driver and the exact characteristic function of the Poisson
// surrogate.

#include <cmath>
#include <complex>
#include <cstdint>
#include <ostream>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ewclt/circle_function.hpp"
#include "ewclt/mahler.hpp"
#include "ewclt/statistic.hpp"
#include "ewclt/wasserstein.hpp"

namespace ewclt {

inline std::vector<MomentReport> run_experiment(const ExperimentConfig &cfg,
                                                unsigned threads = 1) {
  cfg.validate();
  const LimitParameters limit = covariance_parameters(cfg.f, cfg.theta, cfg.x, cfg.quadrature);
  std::vector<MomentReport> reports;
  for (const auto n : cfg.n_grid) {
    const StatisticContext ctx(cfg, limit, n);
    const SampleBatch batch = draw_batch(ctx, cfg.seed, cfg.samples_per_n, threads);
    MomentReport rep;
    rep.n = n;
    rep.samples = batch.samples.size();
    rep.rejected = batch.rejected.size();
    rep.rejected_draws = batch.rejected;
    rep.target_sigma = limit.sigma;
    sample_moments(batch.samples, rep.mean, rep.cov);
    if (!batch.samples.empty()) {
      std::vector<double> re, im;
      for (const auto &s : batch.samples) {
        re.push_back(s.re);
        im.push_back(s.im);
      }
      rep.d_w_re = wasserstein_1d(re, 0.0, std::sqrt(limit.sigma(0, 0)));
      rep.d_w_im = wasserstein_1d(im, 0.0, std::sqrt(limit.sigma(1, 1)));
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

struct CharFnGrid {
  std::uint64_t n = 0;
  std::vector<std::pair<double, double>> points;
  std::vector<complex> values_exact;
  std::vector<complex> values_limit;

  double gap(std::size_t i) const { return std::abs(values_exact[i] - values_limit[i]); }
};

namespace detail {

// e^{iu} - 1 - iu without cancellation for small u
inline complex expm1_i_minus_iu(double u) {
  const double s = std::sin(0.5 * u);
  const double re = -2.0 * s * s;
  double im;
  if (std::fabs(u) < 0.1) {
    // sin u - u = -u^3/3! + u^5/5! - ...
    const double u2 = u * u;
    double term = -u * u2 / 6.0;
    im = term;
    for (int k = 2; k < 8; ++k) {
      term *= -u2 / static_cast<double>((2 * k) * (2 * k + 1));
      im += term;
    }
  } else {
    im = std::sin(u) - u;
  }
  return {re, im};
}

} // namespace detail

// chi(t_a, t_b) = E exp(i (t_a Re S + t_b Im S)) for the centered surrogate
// S = sum_m c_m (Y_m - theta/m)/sqrt(log n), which is
//   exp(theta sum_m (e^{i u_m} - 1 - i u_m)/m), u_m = (t_a a_m + t_b b_m)/sqrt(log n),
// next to the Gaussian limit exp(-theta (V_a t_a^2/2 + V_b t_b^2/2 + E_ab t_a t_b)).
inline CharFnGrid exact_char_fn(const LogTable &table, double theta,
                                const LimitParameters &limit,
                                const std::vector<std::pair<double, double>> &grid) {
  const std::uint64_t n = table.n();
  if (n < 2) {
    throw invalid_argument("exact_char_fn needs n >= 2");
  }
  if (table.infinite_count() > 0) {
    throw infinite_value_error("log f(x^m) is infinite",
                               static_cast<long long>(table.first_infinite()));
  }
  const double root = std::sqrt(std::log(static_cast<double>(n)));
  CharFnGrid out;
  out.n = n;
  out.points = grid;
  for (const auto &[ta, tb] : grid) {
    complex exponent = 0.0;
    for (std::uint64_t m = 1; m <= n; ++m) {
      const complex c = table[m];
      const double u = (ta * c.real() + tb * c.imag()) / root;
      exponent += detail::expm1_i_minus_iu(u) / static_cast<double>(m);
    }
    out.values_exact.push_back(std::exp(theta * exponent));
    const double q = limit.V_a * ta * ta / 2.0 + limit.V_b * tb * tb / 2.0 +
                     limit.E_ab * ta * tb;
    out.values_limit.push_back(std::exp(-theta * q));
  }
  return out;
}

inline CharFnGrid exact_char_fn(const CircleFunction &f, const EvaluationPoint &x,
                                double theta, std::uint64_t n,
                                const std::vector<std::pair<double, double>> &grid,
                                const QuadratureConfig &cfg = {}) {
  const LimitParameters limit = covariance_parameters(f, theta, x, cfg);
  return exact_char_fn(LogTable(f, x, n), theta, limit, grid);
}

// {-1, 0, 1}^2
inline std::vector<std::pair<double, double>> default_char_fn_grid() {
  std::vector<std::pair<double, double>> g;
  for (const double a : {-1.0, 0.0, 1.0}) {
    for (const double b : {-1.0, 0.0, 1.0}) {
      g.emplace_back(a, b);
    }
  }
  return g;
}

inline nlohmann::json matrix_json(const Eigen::Matrix2d &m) {
  return {{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}};
}

inline nlohmann::json to_json(const MomentReport &r) {
  nlohmann::json rejected = nlohmann::json::array();
  for (const auto &d : r.rejected_draws) {
    rejected.push_back({{"draw", d.index}, {"m", d.m}});
  }
  return {{"n", r.n},
          {"samples", r.samples},
          {"mean", {r.mean.real(), r.mean.imag()}},
          {"cov", matrix_json(r.cov)},
          {"target_sigma", matrix_json(r.target_sigma)},
          {"rejected", r.rejected},
          {"rejected_draws", rejected},
          {"d_w_re", r.d_w_re},
          {"d_w_im", r.d_w_im}};
}

inline nlohmann::json to_json(const CharFnGrid &g) {
  nlohmann::json pts = nlohmann::json::array();
  for (std::size_t i = 0; i < g.points.size(); ++i) {
    pts.push_back({{"t", {g.points[i].first, g.points[i].second}},
                   {"exact", {g.values_exact[i].real(), g.values_exact[i].imag()}},
                   {"limit", {g.values_limit[i].real(), g.values_limit[i].imag()}},
                   {"gap", g.gap(i)}});
  }
  return {{"n", g.n}, {"points", pts}};
}

inline nlohmann::json to_json(const WassersteinReport &r) {
  return {{"n", r.n},
          {"samples", r.samples},
          {"d_w_re", r.d_w_re},
          {"d_w_im", r.d_w_im},
          {"variance", r.variance},
          {"third_moment_sum", r.third_moment_sum},
          {"third_moment_sum_mc", r.third_moment_sum_mc},
          {"stein_bound", r.stein_bound},
          {"stein_bound_standardized", r.stein_bound_standardized},
          {"trend_coefficient", r.trend_coefficient}};
}

inline nlohmann::json to_json(const TrendFit &t) {
  return {{"log_n", t.log_n},       {"coefficients", t.coefficients},
          {"ratio", t.ratio},       {"slope", t.slope},
          {"bounded", t.bounded},   {"non_exploding", t.non_exploding},
          {"passes", t.passes}};
}

inline void write_moment_csv(std::ostream &os, const std::vector<MomentReport> &reports) {
  os << "n,mean_re,mean_im,cov_aa,cov_ab,cov_bb,target_aa,target_ab,target_bb,"
        "d_w_re,d_w_im,rejected\n";
  os.precision(17);
  for (const auto &r : reports) {
    os << r.n << ',' << r.mean.real() << ',' << r.mean.imag() << ',' << r.cov(0, 0)
       << ',' << r.cov(0, 1) << ',' << r.cov(1, 1) << ',' << r.target_sigma(0, 0)
       << ',' << r.target_sigma(0, 1) << ',' << r.target_sigma(1, 1) << ','
       << r.d_w_re << ',' << r.d_w_im << ',' << r.rejected << '\n';
  }
}

} // namespace ewclt
