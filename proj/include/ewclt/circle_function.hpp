#pragma once

// Real-analytic functions on the unit circle represented as Laurent
// polynomials f(z) = z^offset * sum_k coeffs[k] z^k, together with the zeros
// on the circle that the caller declares (all at roots of unity).
//
// Declared zeros are divided out once at construction, so near a zero the
// value is evaluated as cofactor(z) * prod (z - zeta_k)^mult_k with
// z - zeta = 2i sin(pi d) exp(i pi (2 s_k + d)), d = s - s_k. This keeps
// log|f| accurate at distances far below double resolution of s, which the
// singular quadratures rely on.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ewclt/errors.hpp"
#include "ewclt/evaluation_point.hpp"
#include "ewclt/ewens.hpp"

namespace ewclt {

using complex = std::complex<double>;

inline constexpr double default_zero_tolerance = 1e-9;

// zero at exp(2 pi i p / q) with the given multiplicity
struct DeclaredZero {
  std::int64_t p = 0;
  std::int64_t q = 1;
  int multiplicity = 1;

  double position() const {
    return static_cast<double>(p) / static_cast<double>(q);
  }
};

// log f at a point: real part log|f|, imaginary part in (-pi, pi] with the
// negative real axis mapped to +pi. f = 0 is represented, not thrown.
struct LogValue {
  double re = 0.0;
  double im = 0.0;
  bool infinite = false;

  complex value() const { return {re, im}; }

  static LogValue infinity() {
    return {-std::numeric_limits<double>::infinity(), 0.0, true};
  }
};

struct ABDecomposition {
  double a = 0.0; // log modulus
  double b = 0.0; // argument
};

namespace detail {

// Principal argument with the tie at the negative real axis sent to +pi.
inline double branch_arg(complex w) {
  const double phi = std::atan2(w.imag(), w.real());
  return phi == -std::numbers::pi ? std::numbers::pi : phi;
}

inline complex unit_phase(double turns) {
  const double frac = turns - std::floor(turns);
  const double angle = 2.0 * std::numbers::pi * frac;
  return {std::cos(angle), std::sin(angle)};
}

// wrap to [-1/2, 1/2)
inline double wrap_half(double d) { return d - std::floor(d + 0.5); }

inline complex horner(std::span<const complex> coeffs, complex z) {
  complex acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
    acc = acc * z + *it;
  }
  return acc;
}

} // namespace detail

struct ZeroValidation {
  DeclaredZero zero;
  bool confirmed = false;
  std::string message;
};

struct ValidationReport {
  bool valid = false;
  std::vector<ZeroValidation> declared;
  std::vector<double> undeclared_zeros; // positions s in [0, 1)
  std::int64_t common_denominator = 1;
  std::string message;
};

class CircleFunction {
public:
  CircleFunction() : CircleFunction(std::vector<complex>{1.0}) {}

  explicit CircleFunction(std::vector<complex> coeffs,
                          std::vector<DeclaredZero> zeros = {},
                          std::string label = "f", int offset = 0,
                          double zero_tolerance = default_zero_tolerance)
      : coeffs_(std::move(coeffs)), zeros_(std::move(zeros)),
        label_(std::move(label)), offset_(offset),
        zero_tolerance_(zero_tolerance) {
    while (coeffs_.size() > 1 && coeffs_.back() == complex(0.0)) {
      coeffs_.pop_back();
    }
    if (coeffs_.empty() ||
        std::all_of(coeffs_.begin(), coeffs_.end(),
                    [](complex c) { return c == complex(0.0); })) {
      throw invalid_argument("circle function must not be identically zero");
    }
    for (auto &z : zeros_) {
      if (z.q <= 0 || z.multiplicity <= 0) {
        throw invalid_argument("declared zero needs q >= 1 and multiplicity >= 1");
      }
      z.p %= z.q;
      if (z.p < 0) {
        z.p += z.q;
      }
      const std::int64_t g = std::gcd(z.p, z.q);
      z.p /= g;
      z.q /= g;
    }
    std::sort(zeros_.begin(), zeros_.end(),
              [](const DeclaredZero &l, const DeclaredZero &r) {
                return l.position() < r.position();
              });
    factorize();
  }

  // Convenience constructors for the common examples.
  static CircleFunction constant(complex c, std::string label = "const") {
    return CircleFunction({c}, {}, std::move(label));
  }
  // 1 - z, the characteristic-polynomial case.
  static CircleFunction one_minus_z() {
    return CircleFunction({1.0, -1.0}, {{0, 1, 1}}, "1-z");
  }

  const std::vector<complex> &coeffs() const { return coeffs_; }
  const std::vector<DeclaredZero> &zeros() const { return zeros_; }
  const std::string &label() const { return label_; }
  int offset() const { return offset_; }
  double zero_tolerance() const { return zero_tolerance_; }
  bool factorization_valid() const { return factor_ok_; }

  // f(exp(2 pi i s)) by Horner on the stored coefficients.
  complex eval(double s) const {
    const complex z = detail::unit_phase(s);
    complex v = detail::horner(coeffs_, z);
    if (offset_ != 0) {
      v *= detail::unit_phase(s * offset_);
    }
    return v;
  }

  // log f at s. offsets, if given, holds s - s_k for every declared zero k
  // (any representative; only its value mod 1 near 0 matters) and lets the
  // caller pass distances finer than the resolution of s. An exact zero is
  // reported as infinite.
  LogValue log_at(double s, std::span<const double> offsets = {}) const {
    if (!factor_ok_) {
      const complex v = eval(s);
      if (std::abs(v) == 0.0) {
        return LogValue::infinity();
      }
      return {std::log(std::abs(v)), detail::branch_arg(v), false};
    }
    const complex z = detail::unit_phase(s);
    const complex g = detail::horner(cofactor_, z);
    const double g_abs = std::abs(g);
    if (g_abs == 0.0) {
      return LogValue::infinity();
    }
    double log_mod = std::log(g_abs);
    complex phase = g / g_abs;
    if (offset_ != 0) {
      phase *= detail::unit_phase(s * offset_);
    }
    for (std::size_t k = 0; k < zeros_.size(); ++k) {
      const double sk = zeros_[k].position();
      const double d = detail::wrap_half(offsets.empty() ? s - sk : offsets[k]);
      const double sin_term = std::sin(std::numbers::pi * d);
      if (sin_term == 0.0) {
        return LogValue::infinity();
      }
      const int mult = zeros_[k].multiplicity;
      log_mod += mult * std::log(2.0 * std::fabs(sin_term));
      // i * sign(sin) * exp(i pi (2 s_k + d))
      complex factor =
          detail::unit_phase(sk + 0.5 * d) * complex(0.0, sin_term > 0 ? 1.0 : -1.0);
      for (int j = 0; j < mult; ++j) {
        phase *= factor;
      }
      phase /= std::abs(phase);
    }
    return {log_mod, detail::branch_arg(phase), false};
  }

  // Imaginary part of f, sign-accurate near the declared zeros.
  complex value_direction(double s) const {
    const LogValue lv = log_at(s);
    if (lv.infinite) {
      return 0.0;
    }
    return std::polar(1.0, lv.im);
  }

  // Common denominator of the declared zero positions.
  std::int64_t zero_denominator() const {
    std::int64_t q = 1;
    for (const auto &z : zeros_) {
      q = std::lcm(q, z.q);
    }
    return q;
  }

  // Positions of the declared zeros in [0, 1), sorted.
  std::vector<double> zero_positions() const {
    std::vector<double> out;
    for (const auto &z : zeros_) {
      out.push_back(z.position());
    }
    return out;
  }

  ValidationReport validate(double root_tolerance = 1e-7) const {
    ValidationReport rep;
    rep.common_denominator = zero_denominator();
    rep.declared = declared_checks_;
    bool all_confirmed = std::all_of(
        declared_checks_.begin(), declared_checks_.end(),
        [](const ZeroValidation &z) { return z.confirmed; });
    if (all_confirmed) {
      for (const complex r : roots(cofactor_)) {
        if (std::fabs(std::abs(r) - 1.0) < root_tolerance) {
          double s = std::arg(r) / (2.0 * std::numbers::pi);
          s -= std::floor(s);
          if (s >= 1.0) {
            s = 0.0;
          }
          rep.undeclared_zeros.push_back(s);
        }
      }
      std::sort(rep.undeclared_zeros.begin(), rep.undeclared_zeros.end());
    }
    rep.valid = all_confirmed && rep.undeclared_zeros.empty();
    if (!all_confirmed) {
      rep.message = "a declared zero is not a zero of the stated multiplicity";
    } else if (!rep.undeclared_zeros.empty()) {
      rep.message = "undeclared zero on the unit circle at s = " +
                    std::to_string(rep.undeclared_zeros.front());
    } else {
      rep.message = "ok";
    }
    return rep;
  }

  // Roots of a polynomial given by ascending coefficients.
  static std::vector<complex> roots(std::vector<complex> c) {
    while (c.size() > 1 && std::abs(c.back()) == 0.0) {
      c.pop_back();
    }
    const std::size_t degree = c.size() - 1;
    std::vector<complex> out;
    if (degree == 0) {
      return out;
    }
    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(degree, degree);
    for (std::size_t i = 1; i < degree; ++i) {
      companion(i, i - 1) = 1.0;
    }
    for (std::size_t i = 0; i < degree; ++i) {
      companion(i, degree - 1) = -c[i] / c[degree];
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
      out.push_back(solver.eigenvalues()(i));
    }
    return out;
  }

private:
  void factorize() {
    cofactor_ = coeffs_;
    factor_ok_ = true;
    declared_checks_.clear();
    double scale = 1.0;
    for (const auto c : coeffs_) {
      scale = std::max(scale, std::abs(c));
    }
    const double tol = zero_tolerance_ * scale;
    for (const auto &z : zeros_) {
      ZeroValidation check{z, true, "ok"};
      const complex zeta = detail::unit_phase(z.position());
      for (int j = 0; j < z.multiplicity; ++j) {
        complex rem;
        auto quotient = deflate(cofactor_, zeta, rem);
        if (std::abs(rem) > tol) {
          check.confirmed = false;
          check.message = j == 0 ? "f does not vanish at the declared zero"
                                 : "declared multiplicity too high";
          break;
        }
        cofactor_ = std::move(quotient);
      }
      if (check.confirmed &&
          std::abs(detail::horner(cofactor_, zeta)) <= tol) {
        check.confirmed = false;
        check.message = "declared multiplicity too low";
      }
      factor_ok_ = factor_ok_ && check.confirmed;
      declared_checks_.push_back(check);
    }
    if (!factor_ok_) {
      cofactor_ = coeffs_;
    }
  }

  // p(z) = (z - zeta) q(z) + rem
  static std::vector<complex> deflate(const std::vector<complex> &p,
                                      complex zeta, complex &rem) {
    const std::size_t d = p.size() - 1;
    if (d == 0) {
      rem = p[0];
      return {complex(0.0)};
    }
    std::vector<complex> q(d);
    complex b = p[d];
    q[d - 1] = b;
    for (std::size_t k = d - 1; k >= 1; --k) {
      b = p[k] + zeta * b;
      q[k - 1] = b;
    }
    rem = p[0] + zeta * b;
    return q;
  }

  std::vector<complex> coeffs_;
  std::vector<DeclaredZero> zeros_;
  std::string label_;
  int offset_ = 0;
  double zero_tolerance_ = default_zero_tolerance;
  std::vector<complex> cofactor_;
  bool factor_ok_ = false;
  std::vector<ZeroValidation> declared_checks_;
};

inline complex eval_f(const CircleFunction &f, double s) { return f.eval(s); }

inline ValidationReport validate_zeros(const CircleFunction &f) {
  return f.validate();
}

// log f(exp(2 pi i s)); values within the zero tolerance count as zero.
inline LogValue log_f(const CircleFunction &f, double s) {
  if (std::abs(f.eval(s)) < f.zero_tolerance()) {
    return LogValue::infinity();
  }
  return f.log_at(s);
}

inline ABDecomposition ab_decomposition(const CircleFunction &f, double s) {
  const LogValue lv = log_f(f, s);
  if (lv.infinite) {
    throw infinite_value_error("f vanishes at s = " + std::to_string(s));
  }
  return {lv.re, lv.im};
}

// c_m = log f(x^m) for m = 1..n, built once per (f, x, n).
class LogTable {
public:
  LogTable(const CircleFunction &f, const EvaluationPoint &x, std::uint64_t n)
      : n_(n), values_(n), infinite_(n, false) {
    const auto &zeros = f.zeros();
    std::vector<double> offsets(zeros.size());
    if (x.is_rational()) {
      const auto r = x.as_rational();
      const auto q = static_cast<std::uint64_t>(r.q);
      const std::uint64_t period = std::min<std::uint64_t>(q, n);
      for (std::uint64_t m = 1; m <= period; ++m) {
        const auto residue = static_cast<std::uint64_t>(
            (static_cast<uint128>(m) * static_cast<std::uint64_t>(r.p)) % q);
        bool hit = false;
        for (std::size_t k = 0; k < zeros.size(); ++k) {
          // residue / q == p_k / q_k exactly?
          if (static_cast<uint128>(residue) * static_cast<uint128>(zeros[k].q) ==
              static_cast<uint128>(zeros[k].p) * q) {
            hit = true;
          }
          offsets[k] = static_cast<double>(residue) / static_cast<double>(q) -
                       zeros[k].position();
        }
        const double s = static_cast<double>(residue) / static_cast<double>(q);
        const LogValue lv = hit ? LogValue::infinity() : f.log_at(s, offsets);
        values_[m - 1] = lv.value();
        infinite_[m - 1] = lv.infinite;
      }
      for (std::uint64_t m = period + 1; m <= n; ++m) {
        values_[m - 1] = values_[(m - 1) % period];
        infinite_[m - 1] = infinite_[(m - 1) % period];
      }
    } else {
      const uint128 step = x.fixed();
      std::vector<uint128> zero_fixed;
      for (const auto &z : zeros) {
        zero_fixed.push_back(fraction_to_fixed(static_cast<uint128>(z.p),
                                               static_cast<uint128>(z.q)));
      }
      uint128 acc = 0;
      for (std::uint64_t m = 1; m <= n; ++m) {
        acc += step; // wraps mod 2^128, i.e. mod 1
        for (std::size_t k = 0; k < zeros.size(); ++k) {
          const auto diff = static_cast<__int128>(acc - zero_fixed[k]);
          offsets[k] = std::ldexp(static_cast<double>(diff), -128);
        }
        const LogValue lv = f.log_at(fixed_to_double(acc), offsets);
        values_[m - 1] = lv.value();
        infinite_[m - 1] = lv.infinite;
      }
    }
    for (std::uint64_t m = 1; m <= n; ++m) {
      if (infinite_[m - 1]) {
        ++infinite_count_;
        if (first_infinite_ == 0) {
          first_infinite_ = m;
        }
      }
    }
  }

  std::uint64_t n() const { return n_; }
  complex operator[](std::uint64_t m) const { return values_[m - 1]; }
  bool infinite(std::uint64_t m) const { return infinite_[m - 1]; }
  std::uint64_t infinite_count() const { return infinite_count_; }
  // smallest m with f(x^m) = 0, or 0
  std::uint64_t first_infinite() const { return first_infinite_; }
  const std::vector<complex> &values() const { return values_; }

private:
  std::uint64_t n_;
  std::vector<complex> values_;
  std::vector<bool> infinite_;
  std::uint64_t infinite_count_ = 0;
  std::uint64_t first_infinite_ = 0;
};

// w^n(f) = sum_m C_m log f(x^m), with the table covering m = 1..n.
inline complex wn(const LogTable &table, const CycleCounts &counts) {
  if (counts.n() > table.n()) {
    throw invalid_argument("log table shorter than n");
  }
  complex sum = 0.0;
  for (std::uint64_t m = 1; m <= counts.n(); ++m) {
    const std::uint64_t c = counts[m];
    if (c == 0) {
      continue;
    }
    if (table.infinite(m)) {
      throw infinite_value_error("f(x^m) = 0 at m = " + std::to_string(m),
                                 static_cast<long long>(m));
    }
    sum += static_cast<double>(c) * table[m];
  }
  return sum;
}

inline complex wn(const CircleFunction &f, const EvaluationPoint &x,
                  const CycleCounts &counts) {
  return wn(LogTable(f, x, counts.n()), counts);
}

struct CharPolyResult {
  complex product;
  std::optional<complex> determinant;
};

inline constexpr std::uint64_t max_determinant_n = 10;

// Permutation in one-line notation with the given cycle type, cycles laid out
// on consecutive indices.
inline std::vector<std::size_t> canonical_permutation(const CycleCounts &counts) {
  std::vector<std::size_t> perm(counts.n());
  std::size_t start = 0;
  for (std::uint64_t m = 1; m <= counts.n(); ++m) {
    for (std::uint64_t c = 0; c < counts[m]; ++c) {
      for (std::size_t j = 0; j < m; ++j) {
        perm[start + j] = start + (j + 1) % m;
      }
      start += m;
    }
  }
  return perm;
}

// Z_n(x) = prod (1 - x^m)^{C_m}; for n <= 10 also det(I - x P_sigma).
inline CharPolyResult char_poly_direct(const CycleCounts &counts, complex x) {
  CharPolyResult out;
  out.product = 1.0;
  for (std::uint64_t m = 1; m <= counts.n(); ++m) {
    const std::uint64_t c = counts[m];
    if (c == 0) {
      continue;
    }
    const complex factor = 1.0 - std::pow(x, static_cast<int>(m));
    for (std::uint64_t j = 0; j < c; ++j) {
      out.product *= factor;
    }
  }
  if (counts.n() <= max_determinant_n) {
    const auto perm = canonical_permutation(counts);
    const auto n = static_cast<Eigen::Index>(counts.n());
    Eigen::MatrixXcd mat = Eigen::MatrixXcd::Identity(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      mat(static_cast<Eigen::Index>(perm[j]), j) -= x;
    }
    out.determinant = mat.partialPivLu().determinant();
  }
  return out;
}

} // namespace ewclt
