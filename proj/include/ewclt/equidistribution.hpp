#pragma once

// Fractional-part sequences {m t}, discrepancies, Diophantine type
// diagnostics, Koksma-type inequalities and the logarithmic partial sums used
// for the centering constants.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ewclt/errors.hpp"
#include "ewclt/evaluation_point.hpp"
#include "ewclt/quadrature.hpp"

namespace ewclt {

struct FracSequence {
  EvaluationPoint t = EvaluationPoint::rational(0, 1);
  std::vector<double> values; // values[m - 1] = {m t}
  // Bound on |fixed-point {m t} - true {m t}| over the sequence. Rounding the
  // 128-bit value to double adds at most 2^-53 on top.
  double precision_bound = 0.0;

  std::size_t size() const { return values.size(); }
};

inline FracSequence frac_parts(const EvaluationPoint &t, std::uint64_t n) {
  FracSequence seq;
  seq.t = t;
  seq.values.reserve(n);
  if (t.is_rational()) {
    const auto r = t.as_rational();
    const auto q = static_cast<std::uint64_t>(r.q);
    const auto p = static_cast<std::uint64_t>(r.p);
    std::uint64_t residue = 0;
    for (std::uint64_t m = 1; m <= n; ++m) {
      residue = static_cast<std::uint64_t>((static_cast<uint128>(residue) + p) % q);
      seq.values.push_back(static_cast<double>(residue) / static_cast<double>(q));
    }
    return seq;
  }
  const uint128 step = t.fixed();
  uint128 acc = 0;
  for (std::uint64_t m = 1; m <= n; ++m) {
    acc += step;
    seq.values.push_back(fixed_to_double(acc));
  }
  seq.precision_bound = static_cast<double>(n) * t.as_irrational().error_bound;
  return seq;
}

struct DiscrepancyReport {
  std::uint64_t n = 0;
  double d_star = 0.0;
  double d_n = 0.0;
  bool sorted = false; // input already in nondecreasing order
};

// D*_n by the closed formula over the sorted points and D_n by
// 1/n + max(i/n - x_(i)) - min(i/n - x_(i)).
inline DiscrepancyReport star_discrepancy(const std::vector<double> &values) {
  DiscrepancyReport rep;
  rep.n = values.size();
  if (values.empty()) {
    throw invalid_argument("discrepancy of an empty sequence");
  }
  rep.sorted = std::is_sorted(values.begin(), values.end());
  std::vector<double> x = values;
  if (!rep.sorted) {
    std::stable_sort(x.begin(), x.end());
  }
  const double n = static_cast<double>(x.size());
  double d_star = 0.0;
  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double upper = static_cast<double>(i + 1) / n;
    const double lower = static_cast<double>(i) / n;
    d_star = std::max({d_star, std::fabs(x[i] - upper), std::fabs(x[i] - lower)});
    hi = std::max(hi, upper - x[i]);
    lo = std::min(lo, upper - x[i]);
  }
  rep.d_star = d_star;
  rep.d_n = 1.0 / n + hi - lo;
  return rep;
}

inline DiscrepancyReport star_discrepancy(const FracSequence &seq) {
  return star_discrepancy(seq.values);
}

struct FiniteTypeReport {
  double gamma = 0.0;
  double K = 0.0;
  std::uint64_t max_m = 0;
  std::vector<std::uint64_t> violations; // first max_listed offenders
  std::uint64_t violation_count = 0;
  std::int64_t grid_q = 0; // 0 when the grid mode was not requested
  std::vector<std::uint64_t> grid_violations;
  std::uint64_t grid_violation_count = 0;
  double eta_estimate = std::numeric_limits<double>::quiet_NaN();

  bool holds() const { return violation_count == 0; }
};

inline constexpr std::size_t max_listed_violations = 64;

// Type estimate from the continued fraction: for consecutive convergent
// denominators q_k, q_{k+1} one has ||q_k t|| ~ 1/q_{k+1}, so the certificate
// needs gamma >= log q_{k+1} / log q_k. Uses the deepest available pair.
inline double eta_estimate(const EvaluationPoint &t) {
  if (t.is_rational()) {
    throw invalid_argument("type is undefined for rational t");
  }
  const auto &dens = t.as_irrational().convergent_denominators;
  for (std::size_t i = dens.size(); i >= 2; --i) {
    const double q0 = static_cast<double>(dens[i - 2]);
    const double q1 = static_cast<double>(dens[i - 1]);
    if (q0 > 1.0) {
      return std::log(q1) / std::log(q0);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// Brute-force check of ||{m t}|| > K / m^gamma for 1 <= m <= max_m; with
// grid_q > 0 also checks that {m t} keeps distance > K / m^gamma from the
// nearest point p / grid_q.
inline FiniteTypeReport finite_type_scan(const EvaluationPoint &t, double gamma,
                                         double K, std::uint64_t max_m,
                                         std::int64_t grid_q = 0) {
  if (t.is_rational()) {
    throw invalid_argument("finite-type scan needs irrational t");
  }
  if (max_m < 1 || !(gamma > 0.0) || !(K > 0.0)) {
    throw invalid_argument("finite-type scan needs max_m >= 1 and K, gamma > 0");
  }
  if (grid_q < 0) {
    throw invalid_argument("grid denominator must be positive");
  }
  FiniteTypeReport rep;
  rep.gamma = gamma;
  rep.K = K;
  rep.max_m = max_m;
  rep.grid_q = grid_q;
  const uint128 step = t.fixed();
  uint128 acc = 0;
  const double q = static_cast<double>(grid_q);
  for (std::uint64_t m = 1; m <= max_m; ++m) {
    acc += step;
    const double frac = fixed_to_double(acc);
    const double bound = K / std::pow(static_cast<double>(m), gamma);
    const double dist = std::min(frac, 1.0 - frac);
    if (!(dist > bound)) {
      if (rep.violations.size() < max_listed_violations) {
        rep.violations.push_back(m);
      }
      ++rep.violation_count;
    }
    if (grid_q > 0) {
      const double scaled = frac * q;
      const double grid_dist = std::fabs(scaled - std::round(scaled)) / q;
      if (!(grid_dist > bound)) {
        if (rep.grid_violations.size() < max_listed_violations) {
          rep.grid_violations.push_back(m);
        }
        ++rep.grid_violation_count;
      }
    }
  }
  rep.eta_estimate = t.as_irrational().from_decimal ? std::numeric_limits<double>::quiet_NaN()
                                                    : eta_estimate(t);
  return rep;
}

struct KoksmaResult {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

inline constexpr double koksma_slack = 1e-12;

// |mean h(t_m) - integral| <= V D*_n
inline KoksmaResult koksma_check(const std::function<double(double)> &h,
                                 double variation, const std::vector<double> &seq,
                                 double integral) {
  if (seq.empty()) {
    throw invalid_argument("koksma_check needs a nonempty sequence");
  }
  double sum = 0.0;
  for (const double v : seq) {
    sum += h(v);
  }
  KoksmaResult r;
  r.lhs = std::fabs(sum / static_cast<double>(seq.size()) - integral);
  r.rhs = variation * star_discrepancy(seq).d_star;
  r.holds = r.lhs <= r.rhs + koksma_slack;
  return r;
}

inline KoksmaResult koksma_check(const std::function<double(double)> &h,
                                 double variation, const FracSequence &seq,
                                 double integral) {
  return koksma_check(h, variation, seq.values, integral);
}

struct ExcludedKoksmaReport {
  double lhs = 0.0;
  double mean = 0.0;
  double integral = 0.0;        // over I = union of [s_k + delta, s_{k+1} - delta]
  double integral_error = 0.0;
  double d_star = 0.0;
  double variation = 0.0;       // total variation of h on I
  double discrepancy_term = 0.0;
  double boundary_term = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

// Koksma with excluded neighbourhoods: singular points s_1 < ... < s_d in
// (0, 1) plus s_0 = 0 and s_{d+1} = 1 are cut out with radius delta, and
//   |mean h(t_m) - int_I h| <= D*_n V_I(h) + delta sum_k (|h(s_k + delta)| +
//   |h(s_{k+1} - delta)|).
inline ExcludedKoksmaReport
koksma_excluded_check(const std::function<double(double)> &h,
                      const FracSequence &seq, std::vector<double> singular,
                      double delta, const QuadratureConfig &cfg = {}) {
  if (!(delta >= 0.0)) {
    throw invalid_argument("delta must be nonnegative");
  }
  if (seq.values.empty()) {
    throw invalid_argument("koksma_excluded_check needs a nonempty sequence");
  }
  std::vector<double> s{0.0};
  for (const double v : singular) {
    if (v > 0.0 && v < 1.0) {
      s.push_back(v);
    }
  }
  s.push_back(1.0);
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    if (!(s[k + 1] - s[k] > 2.0 * delta)) {
      throw invalid_argument("singular points closer than 2 delta");
    }
  }
  for (std::size_t i = 0; i < seq.values.size(); ++i) {
    const double v = seq.values[i];
    for (const double sk : s) {
      if (std::fabs(v - sk) <= delta) {
        throw precondition_violation(
            "sequence value at m = " + std::to_string(i + 1) +
                " lies within delta of a singular point",
            static_cast<long long>(i + 1));
      }
    }
  }
  ExcludedKoksmaReport rep;
  double sum = 0.0;
  for (const double v : seq.values) {
    sum += h(v);
  }
  rep.mean = sum / static_cast<double>(seq.values.size());
  std::vector<Exclusion> exclusions;
  for (const double sk : s) {
    exclusions.push_back({sk, delta});
  }
  rep.variation = total_variation(h, 0.0, 1.0, exclusions);
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    const double a = s[k] + delta;
    const double b = s[k + 1] - delta;
    const auto r = tanh_sinh<1>(
        [&](const PanelPoint &p) { return std::array<double, 1>{h(p.s)}; }, a,
        b, cfg.abs_tolerance, cfg);
    rep.integral += r.value[0];
    rep.integral_error += r.error;
    rep.boundary_term += delta * (std::fabs(h(a)) + std::fabs(h(b)));
  }
  rep.d_star = star_discrepancy(seq).d_star;
  rep.lhs = std::fabs(rep.mean - rep.integral);
  rep.discrepancy_term = rep.d_star * rep.variation;
  rep.rhs = rep.discrepancy_term + rep.boundary_term;
  rep.holds = rep.lhs <= rep.rhs + koksma_slack + rep.integral_error;
  return rep;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> residuals;
};

inline LinearFit least_squares(const std::vector<double> &x,
                               const std::vector<double> &y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw invalid_argument("least squares needs at least two points");
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    fit.residuals.push_back(y[i] - (fit.intercept + fit.slope * x[i]));
  }
  return fit;
}

struct DecayFit {
  std::vector<std::uint64_t> n_grid;
  std::vector<double> d_star;
  LinearFit fit; // log D*_n against log n
};

inline DecayFit discrepancy_decay_fit(const EvaluationPoint &t,
                                      std::vector<std::uint64_t> n_grid) {
  if (t.is_rational()) {
    throw invalid_argument("decay fit needs irrational t");
  }
  if (n_grid.size() < 2) {
    throw invalid_argument("decay fit needs at least two grid points");
  }
  std::sort(n_grid.begin(), n_grid.end());
  DecayFit out;
  out.n_grid = n_grid;
  const auto seq = frac_parts(t, n_grid.back());
  std::vector<double> lx, ly;
  for (const auto n : n_grid) {
    std::vector<double> prefix(seq.values.begin(),
                               seq.values.begin() + static_cast<std::ptrdiff_t>(n));
    const double d = star_discrepancy(prefix).d_star;
    out.d_star.push_back(d);
    lx.push_back(std::log(static_cast<double>(n)));
    ly.push_back(std::log(d));
  }
  out.fit = least_squares(lx, ly);
  return out;
}

struct LogWeightedSum {
  double sum = 0.0;      // sum_{m <= n} a_m / m
  double half_sum = 0.0; // sum_{n/2 < m <= n} a_m / m
  double E_fit = 0.0;
  double K_fit = 0.0;
  std::vector<std::uint64_t> grid;
  std::vector<double> residuals;
};

inline constexpr int log_sum_grid_points = 6;

// Partial sums of a_m / m and a least-squares fit of E log n + K over the
// dyadic grid n, n/2, ..., n/32.
inline LogWeightedSum log_weighted_sum(const std::function<double(std::uint64_t)> &a,
                                       std::uint64_t n) {
  if (n < 2) {
    throw invalid_argument("log_weighted_sum needs n >= 2");
  }
  LogWeightedSum out;
  for (int j = log_sum_grid_points - 1; j >= 0; --j) {
    const std::uint64_t g = n >> j;
    if (g >= 1 && (out.grid.empty() || g > out.grid.back())) {
      out.grid.push_back(g);
    }
  }
  std::vector<double> lx, ly;
  std::size_t next = 0;
  double sum = 0.0;
  for (std::uint64_t m = 1; m <= n; ++m) {
    const double term = a(m) / static_cast<double>(m);
    sum += term;
    if (2 * m > n) {
      out.half_sum += term;
    }
    if (next < out.grid.size() && m == out.grid[next]) {
      lx.push_back(std::log(static_cast<double>(m)));
      ly.push_back(sum);
      ++next;
    }
  }
  out.sum = sum;
  if (lx.size() >= 2) {
    const auto fit = least_squares(lx, ly);
    out.E_fit = fit.slope;
    out.K_fit = fit.intercept;
    out.residuals = fit.residuals;
  }
  return out;
}

// sum a_m b_m = A_n b_n - sum_{m < n} A_m (b_{m+1} - b_m), A_m = a_1 + ... + a_m
inline double abel_sum(const std::vector<double> &a, const std::vector<double> &b,
                       std::size_t n) {
  if (a.size() < n || b.size() < n) {
    throw invalid_argument("abel_sum: sequences shorter than n");
  }
  if (n == 0) {
    return 0.0;
  }
  double partial = 0.0;
  double correction = 0.0;
  for (std::size_t m = 0; m + 1 < n; ++m) {
    partial += a[m];
    correction += partial * (b[m + 1] - b[m]);
  }
  partial += a[n - 1];
  return partial * b[n - 1] - correction;
}

inline nlohmann::json to_json(const DiscrepancyReport &r) {
  return {{"n", r.n}, {"d_star", r.d_star}, {"d_n", r.d_n}, {"sorted", r.sorted}};
}

inline nlohmann::json to_json(const FiniteTypeReport &r) {
  nlohmann::json j{{"gamma", r.gamma},
                   {"K", r.K},
                   {"max_m", r.max_m},
                   {"violations", r.violations},
                   {"violation_count", r.violation_count},
                   {"holds", r.holds()}};
  j["eta_estimate"] = std::isnan(r.eta_estimate) ? nlohmann::json(nullptr)
                                                 : nlohmann::json(r.eta_estimate);
  if (r.grid_q > 0) {
    j["grid_q"] = r.grid_q;
    j["grid_violations"] = r.grid_violations;
    j["grid_violation_count"] = r.grid_violation_count;
  }
  return j;
}

inline nlohmann::json to_json(const DecayFit &f) {
  return {{"n_grid", f.n_grid},
          {"d_star", f.d_star},
          {"slope", f.fit.slope},
          {"intercept", f.fit.intercept},
          {"residuals", f.fit.residuals}};
}

inline void write_csv(std::ostream &os, const FracSequence &seq) {
  os << "m,value\n";
  os.precision(17);
  for (std::size_t i = 0; i < seq.values.size(); ++i) {
    os << (i + 1) << ',' << seq.values[i] << '\n';
  }
}

} // namespace ewclt
