#pragma once

// Centering constant m(f) and limiting covariance parameters.
//
// For x not a root of unity the constants are circle integrals of
// a(s) = log|f| and b(s) = arg f. The integrals are split at the zeros of f
// (logarithmic singularities of a, jumps of b by pi times the multiplicity)
// and at the points where f crosses the negative real axis (jumps of b by
// 2 pi), so every panel is smooth apart from integrable endpoint behaviour.
// For x of order q they are plain averages over the q points x^m.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ewclt/circle_function.hpp"
#include "ewclt/errors.hpp"
#include "ewclt/evaluation_point.hpp"
#include "ewclt/quadrature.hpp"

namespace ewclt {

inline constexpr int jump_scan_points = 1 << 14;
inline constexpr double jump_bisection_tolerance = 1e-13;

// Points in (0, 1) where f(e^{2 pi i s}) crosses the negative real axis,
// i.e. where the principal argument jumps by 2 pi.
inline std::vector<double> find_arg_jumps(const CircleFunction &f) {
  const auto zeros = f.zero_positions();
  auto near_zero = [&](double s) {
    for (const double z : zeros) {
      const double d = std::fabs(detail::wrap_half(s - z));
      if (d < 1e-9) {
        return true;
      }
    }
    return false;
  };
  auto im = [&](double s) { return f.eval(s).imag(); };
  std::vector<double> jumps;
  const int n = jump_scan_points;
  double prev_s = 0.0;
  double prev_v = im(0.0);
  for (int i = 1; i <= n; ++i) {
    const double s = static_cast<double>(i) / n;
    const double v = im(s);
    if (v == 0.0) {
      continue;
    }
    if (prev_v != 0.0 && (v > 0.0) != (prev_v > 0.0)) {
      double a = prev_s;
      double b = s;
      const bool a_positive = prev_v > 0.0;
      while (b - a > jump_bisection_tolerance) {
        const double mid = 0.5 * (a + b);
        const double vm = im(mid);
        if (vm == 0.0) {
          a = b = mid;
          break;
        }
        if ((vm > 0.0) == a_positive) {
          a = mid;
        } else {
          b = mid;
        }
      }
      const double root = 0.5 * (a + b);
      if (root > 0.0 && root < 1.0 && !near_zero(root) &&
          f.eval(root).real() < 0.0) {
        jumps.push_back(root);
      }
    }
    prev_s = s;
    prev_v = v;
  }
  return jumps;
}

// Evaluates log f at a panel point, passing exact offsets to any declared zero
// sitting on a panel edge.
inline LogValue log_at_panel(const CircleFunction &f, const PanelPoint &p,
                             std::vector<double> &offsets) {
  const auto &zeros = f.zeros();
  offsets.resize(zeros.size());
  for (std::size_t k = 0; k < zeros.size(); ++k) {
    const double sk = zeros[k].position();
    if (sk == p.lo) {
      offsets[k] = p.dlo;
    } else if (sk == p.hi || (sk == 0.0 && p.hi == 1.0)) {
      offsets[k] = -p.dhi;
    } else {
      offsets[k] = p.s - sk;
    }
  }
  return f.log_at(p.s, offsets);
}

struct MahlerValue {
  complex value;
  bool infinite = false;
  std::uint64_t first_zero_m = 0; // rational case: first m with f(x^m) = 0
  double error = 0.0;
};

// (1/q) sum_{m=1..q} log f(x^m), x = e^{2 pi i p/q}.
inline MahlerValue m_rational(const CircleFunction &f, std::int64_t p,
                              std::int64_t q) {
  if (q <= 0) {
    throw invalid_argument("order q must be positive");
  }
  if (std::gcd(p, q) != 1 && !(p == 0 && q == 1)) {
    throw invalid_argument("m_rational needs gcd(p, q) = 1");
  }
  const auto x = EvaluationPoint::rational(p, q);
  const LogTable table(f, x, static_cast<std::uint64_t>(q));
  MahlerValue out;
  if (table.infinite_count() > 0) {
    out.infinite = true;
    out.first_zero_m = table.first_infinite();
    out.value = {std::numeric_limits<double>::infinity(), 0.0};
    return out;
  }
  complex sum = 0.0;
  for (std::int64_t m = 1; m <= q; ++m) {
    sum += table[static_cast<std::uint64_t>(m)];
  }
  out.value = sum / static_cast<double>(q);
  return out;
}

inline void require_valid(const CircleFunction &f) {
  const auto rep = f.validate();
  if (!rep.valid) {
    throw hypothesis_violation(rep.message);
  }
}

inline std::vector<double> singular_points(const CircleFunction &f) {
  auto points = f.zero_positions();
  const auto jumps = find_arg_jumps(f);
  points.insert(points.end(), jumps.begin(), jumps.end());
  std::sort(points.begin(), points.end());
  return points;
}

// integral over [0, 1] of log f(e^{2 pi i s})
inline MahlerValue m_irrational(const CircleFunction &f,
                                const QuadratureConfig &cfg = {}) {
  require_valid(f);
  std::vector<double> offsets;
  auto r = integrate_panels<2>(
      [&](const PanelPoint &p) {
        const LogValue lv = log_at_panel(f, p, offsets);
        return std::array<double, 2>{lv.re, lv.im};
      },
      singular_points(f), cfg);
  MahlerValue out;
  out.value = {r.value[0], r.value[1]};
  out.error = r.error;
  return out;
}

struct LimitParameters {
  complex m_f;
  double V_a = 0.0;
  double V_b = 0.0;
  double E_ab = 0.0;
  double theta = 1.0;
  Eigen::Matrix2d sigma = Eigen::Matrix2d::Zero();
  double covariance_scalar = 0.0;
  double quadrature_error = 0.0;
  bool rational = false;
  std::int64_t order = 0; // q for rational x

  double gram_determinant() const { return V_a * V_b - E_ab * E_ab; }
};

inline Eigen::Matrix2d make_sigma(double theta, double va, double vb, double eab) {
  Eigen::Matrix2d s;
  s << theta * va, theta * eab, theta * eab, theta * vb;
  return s;
}

inline LimitParameters covariance_parameters(const CircleFunction &f, double theta,
                                             const EvaluationPoint &x,
                                             const QuadratureConfig &cfg = {}) {
  if (!(theta > 0.0)) {
    throw invalid_argument("theta must be positive");
  }
  require_valid(f);
  LimitParameters lp;
  lp.theta = theta;
  if (x.is_rational()) {
    const auto r = x.as_rational();
    lp.rational = true;
    lp.order = r.q;
    const LogTable table(f, x, static_cast<std::uint64_t>(r.q));
    if (table.infinite_count() > 0) {
      throw infinite_value_error(
          "f(x^m) = 0 at m = " + std::to_string(table.first_infinite()) +
              " for x of order " + std::to_string(r.q),
          static_cast<long long>(table.first_infinite()));
    }
    complex mean = 0.0;
    double aa = 0.0, bb = 0.0, ab = 0.0, im_sq = 0.0;
    for (std::int64_t m = 1; m <= r.q; ++m) {
      const complex c = table[static_cast<std::uint64_t>(m)];
      mean += c;
      aa += c.real() * c.real();
      bb += c.imag() * c.imag();
      ab += c.real() * c.imag();
      im_sq += (c * c).imag();
    }
    const double q = static_cast<double>(r.q);
    lp.m_f = mean / q;
    lp.V_a = aa / q;
    lp.V_b = bb / q;
    lp.E_ab = ab / q;
    lp.covariance_scalar = 0.5 * theta * im_sq / q;
  } else {
    const auto points = singular_points(f);
    std::vector<double> offsets;
    auto r = integrate_panels<5>(
        [&](const PanelPoint &p) {
          const LogValue lv = log_at_panel(f, p, offsets);
          return std::array<double, 5>{lv.re, lv.im, lv.re * lv.re,
                                       lv.im * lv.im, lv.re * lv.im};
        },
        points, cfg);
    lp.m_f = {r.value[0], r.value[1]};
    lp.V_a = r.value[2];
    lp.V_b = r.value[3];
    lp.E_ab = r.value[4];
    // separate pass in complex arithmetic: Im of the integral of log^2 f
    auto rs = integrate_panels<1>(
        [&](const PanelPoint &p) {
          const complex w = log_at_panel(f, p, offsets).value();
          return std::array<double, 1>{(w * w).imag()};
        },
        points, cfg);
    lp.covariance_scalar = 0.5 * theta * rs.value[0];
    lp.quadrature_error = r.error + rs.error;
  }
  lp.sigma = make_sigma(theta, lp.V_a, lp.V_b, lp.E_ab);
  return lp;
}

struct SingularityVerdict {
  bool singular = false;
  double gram_determinant = 0.0;
};

inline constexpr double default_singularity_tolerance = 1e-10;

// Sigma is singular iff a and b are linearly dependent in L^2, i.e. the Gram
// determinant V_a V_b - E_ab^2 vanishes. The threshold is relative to
// (V_a + V_b)^2, which stays meaningful when one of the variances is itself
// zero up to roundoff.
inline SingularityVerdict sigma_singularity_test(const LimitParameters &lp,
                                                 double tol = default_singularity_tolerance) {
  SingularityVerdict v;
  v.gram_determinant = lp.gram_determinant();
  const double scale = lp.V_a + lp.V_b;
  v.singular = v.gram_determinant <= tol * scale * scale;
  return v;
}

inline SingularityVerdict sigma_singularity_test(const CircleFunction &f,
                                                 const EvaluationPoint &x,
                                                 double tol = default_singularity_tolerance) {
  return sigma_singularity_test(covariance_parameters(f, 1.0, x), tol);
}

inline nlohmann::json to_json(const LimitParameters &lp) {
  nlohmann::json j;
  j["m_f"] = {lp.m_f.real(), lp.m_f.imag()};
  j["V_a"] = lp.V_a;
  j["V_b"] = lp.V_b;
  j["E_ab"] = lp.E_ab;
  j["theta"] = lp.theta;
  j["sigma"] = {{lp.sigma(0, 0), lp.sigma(0, 1)}, {lp.sigma(1, 0), lp.sigma(1, 1)}};
  j["covariance_scalar"] = lp.covariance_scalar;
  j["quadrature_error"] = lp.quadrature_error;
  return j;
}

inline LimitParameters limit_parameters_from_json(const nlohmann::json &j) {
  LimitParameters lp;
  lp.m_f = {j.at("m_f").at(0).get<double>(), j.at("m_f").at(1).get<double>()};
  lp.V_a = j.at("V_a").get<double>();
  lp.V_b = j.at("V_b").get<double>();
  lp.E_ab = j.at("E_ab").get<double>();
  lp.theta = j.at("theta").get<double>();
  lp.sigma = make_sigma(lp.theta, lp.V_a, lp.V_b, lp.E_ab);
  lp.covariance_scalar = j.at("covariance_scalar").get<double>();
  lp.quadrature_error = j.value("quadrature_error", 0.0);
  return lp;
}

} // namespace ewclt
