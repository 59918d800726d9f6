#pragma once

// Points x = exp(2 pi i t) on the unit circle.
//
// Rational t = p/q is kept as an exact reduced fraction. Irrational t is given
// by continued-fraction coefficients t = [0; a_1, a_2, ...] and stored as a
// 128-bit binary fixed-point number derived from the deepest convergent whose
// denominator fits in 63 bits, so |t_fixed - t| < 1/q_k^2 + 2^-128.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ewclt/errors.hpp"

namespace ewclt {

using uint128 = unsigned __int128;

inline double fixed_to_double(uint128 v) {
  // top 64 bits carry all the precision a double can hold
  const auto hi = static_cast<std::uint64_t>(v >> 64);
  const auto lo = static_cast<std::uint64_t>(v);
  return std::ldexp(static_cast<double>(hi), -64) +
         std::ldexp(static_cast<double>(lo), -128);
}

// floor(num * 2^128 / den) for 0 <= num < den < 2^126.
inline uint128 fraction_to_fixed(uint128 num, uint128 den) {
  uint128 rem = num;
  uint128 out = 0;
  for (int bit = 0; bit < 128; ++bit) {
    rem <<= 1;
    out <<= 1;
    if (rem >= den) {
      rem -= den;
      out |= 1;
    }
  }
  return out;
}

inline uint128 double_to_fixed(double t) {
  double frac = t - std::floor(t);
  uint128 out = 0;
  // 53 significant bits at most; peel them off 32 at a time
  for (int word = 0; word < 4; ++word) {
    frac = std::ldexp(frac, 32);
    const double digit = std::floor(frac);
    frac -= digit;
    out = (out << 32) | static_cast<std::uint32_t>(digit);
  }
  return out;
}

struct RationalPoint {
  std::int64_t p = 0;
  std::int64_t q = 1;
};

struct IrrationalPoint {
  std::string label;
  std::vector<std::uint64_t> cf;   // a_1, a_2, ... of t = [0; a_1, a_2, ...]
  uint128 fixed = 0;               // fractional part of t, 128-bit
  double value = 0.0;
  double error_bound = 0.0;        // |fixed - t| (as a real in [0,1))
  bool from_decimal = false;       // type unknowable; no CLT use
  std::vector<uint128> convergent_denominators;
};

class EvaluationPoint {
public:
  static EvaluationPoint rational(std::int64_t p, std::int64_t q) {
    if (q <= 0) {
      throw invalid_argument("rational evaluation point needs q >= 1");
    }
    p %= q;
    if (p < 0) {
      p += q;
    }
    const std::int64_t g = std::gcd(p, q);
    EvaluationPoint out;
    out.point_ = RationalPoint{p / g, q / g};
    return out;
  }

  // t = [0; a_1, a_2, ...]; all a_k >= 1.
  static EvaluationPoint continued_fraction(std::vector<std::uint64_t> cf,
                                            std::string label = "cf") {
    if (cf.empty()) {
      throw invalid_argument("continued fraction needs at least one term");
    }
    for (const auto a : cf) {
      if (a == 0) {
        throw invalid_argument("continued fraction terms must be >= 1");
      }
    }
    // Convergents h_k / k_k with h_{-1}=1, h_{-2}=0, k_{-1}=0, k_{-2}=1 and
    // a_0 = 0.
    uint128 h_prev = 1, h = 0;
    uint128 k_prev = 0, k = 1;
    std::vector<uint128> dens{1};
    constexpr uint128 limit = uint128{1} << 63;
    std::size_t used = 0;
    for (const auto a : cf) {
      const uint128 h_next = uint128{a} * h + h_prev;
      const uint128 k_next = uint128{a} * k + k_prev;
      if (k_next >= limit) {
        break;
      }
      h_prev = h;
      h = h_next;
      k_prev = k;
      k = k_next;
      dens.push_back(k);
      ++used;
    }
    if (used == 0) {
      throw invalid_argument("first continued fraction term too large");
    }
    IrrationalPoint ir;
    ir.label = std::move(label);
    ir.cf = std::move(cf);
    ir.fixed = fraction_to_fixed(h, k);
    ir.value = fixed_to_double(ir.fixed);
    const double kd = static_cast<double>(k);
    // Truncated expansions are exact rationals only if nothing was dropped;
    // treat every expansion as the irrational it approximates.
    ir.error_bound = 1.0 / (kd * kd) + 0x1.0p-128;
    ir.convergent_denominators = std::move(dens);
    EvaluationPoint out;
    out.point_ = std::move(ir);
    return out;
  }

  static EvaluationPoint golden() {
    return continued_fraction(std::vector<std::uint64_t>(120, 1), "golden");
  }

  // sqrt(2) - 1
  static EvaluationPoint sqrt2() {
    return continued_fraction(std::vector<std::uint64_t>(80, 2), "sqrt2");
  }

  // e - 2 = [0; 1, 2, 1, 1, 4, 1, 1, 6, ...]
  static EvaluationPoint e_frac() {
    std::vector<std::uint64_t> cf{1};
    for (std::uint64_t k = 1; cf.size() < 90; ++k) {
      cf.push_back(2 * k);
      cf.push_back(1);
      cf.push_back(1);
    }
    return continued_fraction(std::move(cf), "e-frac");
  }

  // Arbitrary decimal; allowed for discrepancy work only.
  static EvaluationPoint decimal(double t) {
    IrrationalPoint ir;
    ir.label = "decimal";
    ir.fixed = double_to_fixed(t);
    ir.value = fixed_to_double(ir.fixed);
    ir.error_bound = 0x1.0p-53;
    ir.from_decimal = true;
    EvaluationPoint out;
    out.point_ = std::move(ir);
    return out;
  }

  static std::optional<EvaluationPoint> named(const std::string &name) {
    if (name == "golden") {
      return golden();
    }
    if (name == "sqrt2") {
      return sqrt2();
    }
    if (name == "e-frac") {
      return e_frac();
    }
    return std::nullopt;
  }

  bool is_rational() const {
    return std::holds_alternative<RationalPoint>(point_);
  }
  const RationalPoint &as_rational() const {
    return std::get<RationalPoint>(point_);
  }
  const IrrationalPoint &as_irrational() const {
    return std::get<IrrationalPoint>(point_);
  }

  // t in [0, 1)
  double value() const {
    if (is_rational()) {
      const auto &r = as_rational();
      return static_cast<double>(r.p) / static_cast<double>(r.q);
    }
    return as_irrational().value;
  }

  // 128-bit fixed-point t (rationals rounded down).
  uint128 fixed() const {
    if (is_rational()) {
      const auto &r = as_rational();
      return fraction_to_fixed(static_cast<uint128>(r.p),
                               static_cast<uint128>(r.q));
    }
    return as_irrational().fixed;
  }

  std::string describe() const {
    if (is_rational()) {
      const auto &r = as_rational();
      return "rational " + std::to_string(r.p) + "/" + std::to_string(r.q);
    }
    return as_irrational().label;
  }

private:
  std::variant<RationalPoint, IrrationalPoint> point_;
};

// Parses "golden", "sqrt2", "e-frac", "p/q", "rational p/q", "rational:p/q",
// "cf:a1,a2,..." and (only if allow_decimal) "decimal:0.123" or a bare number.
inline EvaluationPoint parse_evaluation_point(std::string text,
                                              bool allow_decimal = false) {
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  text = trim(text);
  if (auto named = EvaluationPoint::named(text)) {
    return *named;
  }
  auto strip_prefix = [&](const std::string &prefix) {
    if (text.rfind(prefix, 0) == 0) {
      text = trim(text.substr(prefix.size()));
      return true;
    }
    return false;
  };
  if (strip_prefix("cf:")) {
    std::vector<std::uint64_t> cf;
    std::size_t pos = 0;
    while (pos < text.size()) {
      const auto comma = text.find(',', pos);
      const std::string tok =
          trim(text.substr(pos, comma == std::string::npos ? std::string::npos
                                                           : comma - pos));
      try {
        std::size_t used = 0;
        cf.push_back(std::stoull(tok, &used));
        if (used != tok.size()) {
          throw std::invalid_argument(tok);
        }
      } catch (const std::exception &) {
        throw invalid_argument("bad continued fraction term '" + tok + "'");
      }
      if (comma == std::string::npos) {
        break;
      }
      pos = comma + 1;
    }
    return EvaluationPoint::continued_fraction(std::move(cf));
  }
  const bool explicit_decimal = strip_prefix("decimal:");
  if (!explicit_decimal) {
    if (!strip_prefix("rational:")) {
      strip_prefix("rational");
    }
  }
  const auto slash = text.find('/');
  if (!explicit_decimal && slash != std::string::npos) {
    try {
      std::size_t u1 = 0, u2 = 0;
      const std::string a = trim(text.substr(0, slash));
      const std::string b = trim(text.substr(slash + 1));
      const long long p = std::stoll(a, &u1);
      const long long q = std::stoll(b, &u2);
      if (u1 != a.size() || u2 != b.size()) {
        throw std::invalid_argument(text);
      }
      return EvaluationPoint::rational(p, q);
    } catch (const ewclt::invalid_argument &) {
      throw;
    } catch (const std::exception &) {
      throw invalid_argument("bad rational evaluation point '" + text + "'");
    }
  }
  if (allow_decimal) {
    try {
      std::size_t used = 0;
      const double t = std::stod(text, &used);
      if (used == text.size()) {
        return EvaluationPoint::decimal(t);
      }
    } catch (const std::exception &) {
    }
  }
  throw invalid_argument("unrecognised evaluation point '" + text + "'");
}

} // namespace ewclt
