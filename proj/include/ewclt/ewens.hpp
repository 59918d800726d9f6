#pragma once

// Cycle counts of Ewens-distributed permutations.
//
// Sampling goes through the Feller coupling: a bit word 1 xi_2 xi_3 ... with
// independent xi_m ~ Bernoulli(theta / (theta + m - 1)). The cycle counts of
// a permutation of size n are the spacing lengths of the word 1 xi_2 .. xi_n 1,
// and the limiting independent Poisson counts Y_m are the spacing lengths of
// the (here: horizon-truncated) infinite word. Both are read off the same
// bits, which is what makes E|C_m - Y_m| measurable.

#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "ewclt/errors.hpp"
#include "ewclt/rng.hpp"

namespace ewclt {

struct EwensParams {
  double theta = 1.0;

  explicit EwensParams(double theta_ = 1.0) : theta(theta_) {
    if (!(theta > 0.0) || !std::isfinite(theta)) {
      throw invalid_argument("Ewens parameter theta must be positive, got " +
                             std::to_string(theta));
    }
  }
};

// (C_1, ..., C_n) with sum m C_m = n. Stored 0-based: counts[m - 1] = C_m.
class CycleCounts {
public:
  CycleCounts() = default;

  // Validates the size identity.
  explicit CycleCounts(std::vector<std::uint64_t> counts)
      : counts_(std::move(counts)) {
    if (counts_.empty()) {
      throw invalid_argument("cycle counts need n >= 1");
    }
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      total += (i + 1) * counts_[i];
    }
    if (total != counts_.size()) {
      throw invalid_argument("cycle counts violate sum m*C_m = n (sum is " +
                             std::to_string(total) + ", n is " +
                             std::to_string(counts_.size()) + ")");
    }
  }

  std::uint64_t n() const { return counts_.size(); }

  // C_m for m >= 1; zero beyond n.
  std::uint64_t operator[](std::uint64_t m) const {
    return (m >= 1 && m <= counts_.size()) ? counts_[m - 1] : 0;
  }

  const std::vector<std::uint64_t> &raw() const { return counts_; }

  std::uint64_t total_cycles() const {
    return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
  }

  bool operator==(const CycleCounts &) const = default;

private:
  std::vector<std::uint64_t> counts_;
};

// Packed Feller bits, positions 1..horizon. Position 1 is always set.
class FellerSequence {
public:
  FellerSequence(std::uint64_t horizon, double theta)
      : horizon_(horizon), theta_(theta), words_((horizon + 63) / 64, 0) {
    if (horizon == 0) {
      throw invalid_argument("Feller horizon must be at least 1");
    }
    set(1, true);
  }

  std::uint64_t horizon() const { return horizon_; }
  double theta() const { return theta_; }

  bool operator[](std::uint64_t m) const {
    const std::uint64_t i = m - 1;
    return (words_[i >> 6] >> (i & 63)) & 1U;
  }

  void set(std::uint64_t m, bool value) {
    const std::uint64_t i = m - 1;
    const std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (value) {
      words_[i >> 6] |= mask;
    } else {
      words_[i >> 6] &= ~mask;
    }
  }

  // Next set position strictly after m, or 0 if none up to the horizon.
  std::uint64_t next_one(std::uint64_t m) const {
    std::uint64_t i = m; // 0-based index of position m + 1
    if (i >= horizon_) {
      return 0;
    }
    std::size_t w = i >> 6;
    std::uint64_t word = words_[w] & (~std::uint64_t{0} << (i & 63));
    for (;;) {
      if (word != 0) {
        const std::uint64_t pos = (w << 6) + std::countr_zero(word);
        return pos < horizon_ ? pos + 1 : 0;
      }
      if (++w >= words_.size()) {
        return 0;
      }
      word = words_[w];
    }
  }

  // From explicit bits; bits[0] is position 1 and must be set.
  static FellerSequence from_bits(const std::vector<bool> &bits,
                                  double theta = 1.0) {
    if (bits.empty() || !bits[0]) {
      throw invalid_argument("Feller word must start with a 1");
    }
    FellerSequence seq(bits.size(), theta);
    for (std::size_t i = 0; i < bits.size(); ++i) {
      seq.set(i + 1, bits[i]);
    }
    return seq;
  }

private:
  std::uint64_t horizon_;
  double theta_;
  std::vector<std::uint64_t> words_;
};

struct PoissonCounts {
  std::vector<std::uint64_t> y; // y[m - 1] = Y_m
  bool truncated = false;

  std::uint64_t operator[](std::uint64_t m) const {
    return (m >= 1 && m <= y.size()) ? y[m - 1] : 0;
  }
};

inline FellerSequence sample_feller_bits(std::uint64_t horizon,
                                         const EwensParams &params,
                                         RngStream &stream) {
  FellerSequence seq(horizon, params.theta);
  const double theta = params.theta;
  for (std::uint64_t m = 2; m <= horizon; ++m) {
    if (stream.uniform() * (theta + static_cast<double>(m - 1)) < theta) {
      seq.set(m, true);
    }
  }
  return seq;
}

// Calls visit(m) once per m-spacing of the word 1 xi_2 ... xi_n 1.
template <typename Visitor>
void for_each_cycle(const FellerSequence &seq, std::uint64_t n,
                    Visitor &&visit) {
  if (n > seq.horizon()) {
    throw invalid_argument("n = " + std::to_string(n) +
                           " exceeds the Feller horizon " +
                           std::to_string(seq.horizon()));
  }
  std::uint64_t last = 1;
  for (;;) {
    std::uint64_t next = seq.next_one(last);
    if (next == 0 || next > n) {
      next = n + 1;
    }
    visit(next - last);
    if (next == n + 1) {
      return;
    }
    last = next;
  }
}

inline CycleCounts cycle_counts_from_bits(const FellerSequence &seq,
                                          std::uint64_t n) {
  if (n == 0) {
    throw invalid_argument("n must be positive");
  }
  std::vector<std::uint64_t> counts(n, 0);
  for_each_cycle(seq, n, [&](std::uint64_t m) { ++counts[m - 1]; });
  return CycleCounts(std::move(counts));
}

inline PoissonCounts coupled_poisson_counts(const FellerSequence &seq,
                                            std::uint64_t m_max) {
  PoissonCounts out;
  out.y.assign(m_max, 0);
  std::uint64_t last = 1;
  for (;;) {
    const std::uint64_t next = seq.next_one(last);
    if (next == 0) {
      break;
    }
    const std::uint64_t m = next - last;
    if (m <= m_max) {
      ++out.y[m - 1];
    }
    last = next;
  }
  out.truncated = last != seq.horizon();
  return out;
}

namespace detail {

// log binom(theta + k - 1, k) = lgamma(theta + k) - lgamma(k + 1) - lgamma(theta)
inline double log_rising_binom(double theta, double k) {
  return std::lgamma(theta + k) - std::lgamma(k + 1.0) - std::lgamma(theta);
}

} // namespace detail

inline double ewens_log_pmf(const CycleCounts &counts,
                            const EwensParams &params) {
  const double theta = params.theta;
  const double n = static_cast<double>(counts.n());
  double log_p = -detail::log_rising_binom(theta, n);
  for (std::uint64_t m = 1; m <= counts.n(); ++m) {
    const std::uint64_t c = counts[m];
    if (c == 0) {
      continue;
    }
    const double cd = static_cast<double>(c);
    log_p += cd * std::log(theta / static_cast<double>(m)) -
             std::lgamma(cd + 1.0);
  }
  return log_p;
}

inline double expected_cycle_count(std::uint64_t m, std::uint64_t n,
                                   const EwensParams &params) {
  if (m == 0 || n == 0) {
    throw invalid_argument("expected_cycle_count needs m, n >= 1");
  }
  if (m > n) {
    return 0.0;
  }
  const double theta = params.theta;
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  // binom(theta+n-m-1, n-m) / binom(theta+n-1, n); the lgamma(theta) terms
  // cancel.
  const double log_ratio = std::lgamma(theta + nd - md) -
                           std::lgamma(nd - md + 1.0) -
                           std::lgamma(theta + nd) + std::lgamma(nd + 1.0);
  return theta / md * std::exp(log_ratio);
}

struct CycleType {
  CycleCounts counts;
  double pmf = 0.0;
  std::uint64_t permutation_count = 0;
};

inline constexpr std::uint64_t max_enumeration_n = 12;

// All cycle types of S_n with their Ewens probability and class size.
inline std::vector<CycleType> enumerate_cycle_types(std::uint64_t n,
                                                    const EwensParams &params) {
  if (n == 0 || n > max_enumeration_n) {
    throw invalid_argument("enumerate_cycle_types supports 1 <= n <= " +
                           std::to_string(max_enumeration_n) + ", got " +
                           std::to_string(n));
  }
  std::uint64_t n_factorial = 1;
  for (std::uint64_t k = 2; k <= n; ++k) {
    n_factorial *= k;
  }

  std::vector<CycleType> out;
  std::vector<std::uint64_t> counts(n, 0);
  // Partitions by decreasing largest part.
  std::function<void(std::uint64_t, std::uint64_t)> recurse =
      [&](std::uint64_t remaining, std::uint64_t max_part) {
        if (remaining == 0) {
          std::uint64_t denom = 1;
          for (std::uint64_t m = 1; m <= n; ++m) {
            for (std::uint64_t j = 1; j <= counts[m - 1]; ++j) {
              denom *= m * j;
            }
          }
          CycleCounts cc(counts);
          const double pmf = std::exp(ewens_log_pmf(cc, params));
          out.push_back({std::move(cc), pmf, n_factorial / denom});
          return;
        }
        for (std::uint64_t part = std::min(max_part, remaining); part >= 1;
             --part) {
          ++counts[part - 1];
          recurse(remaining - part, part);
          --counts[part - 1];
        }
      };
  recurse(n, n);
  return out;
}

// Cycle type of a permutation in one-line notation (0-based images).
inline CycleCounts cycle_type_of(const std::vector<std::size_t> &perm) {
  const std::size_t n = perm.size();
  std::vector<std::uint64_t> counts(n, 0);
  std::vector<bool> seen(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (seen[i]) {
      continue;
    }
    std::uint64_t len = 0;
    for (std::size_t j = i; !seen[j]; j = perm[j]) {
      if (j >= n) {
        throw invalid_argument("not a permutation");
      }
      seen[j] = true;
      ++len;
    }
    ++counts[len - 1];
  }
  return CycleCounts(std::move(counts));
}

struct CouplingGap {
  std::uint64_t m = 0;
  double mean_gap = 0.0;
  double standard_error = 0.0;
  double bound = 0.0;
  // The small-theta bound degrades as m -> n; only m <= n/2 is asserted.
  bool bound_applicable = true;
  std::uint64_t truncated_draws = 0;
};

// Bound on E|C_m^(n) - Y_m| under the Feller coupling.
inline double coupling_bound(std::uint64_t n, std::uint64_t m,
                             const EwensParams &params) {
  const double theta = params.theta;
  const double nd = static_cast<double>(n);
  if (theta >= 1.0) {
    return theta * (theta + 1.0) / (theta + nd);
  }
  return theta * (theta + 1.0) / (theta + nd - static_cast<double>(m));
}

inline constexpr std::uint64_t default_horizon_factor = 10;

// Empirical E|C_m - Y_m| for several m from the same coupled draws.
inline std::vector<CouplingGap>
coupling_gap_estimates(std::uint64_t n, const std::vector<std::uint64_t> &ms,
                       const EwensParams &params, std::uint64_t samples,
                       const RngStream &stream,
                       std::uint64_t horizon_factor = default_horizon_factor) {
  if (samples == 0) {
    throw invalid_argument("coupling_gap_estimate needs samples >= 1");
  }
  std::uint64_t m_max = 0;
  for (const auto m : ms) {
    if (m == 0 || m > n) {
      throw invalid_argument("coupling gap needs 1 <= m <= n");
    }
    m_max = std::max(m_max, m);
  }
  const std::uint64_t horizon = std::max<std::uint64_t>(n * horizon_factor, n);
  std::vector<double> sum(ms.size(), 0.0), sum_sq(ms.size(), 0.0);
  std::uint64_t truncated = 0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    RngStream rng = stream.substream(s);
    const FellerSequence seq = sample_feller_bits(horizon, params, rng);
    const CycleCounts c = cycle_counts_from_bits(seq, n);
    const PoissonCounts y = coupled_poisson_counts(seq, m_max);
    truncated += y.truncated ? 1 : 0;
    for (std::size_t k = 0; k < ms.size(); ++k) {
      const double gap = std::fabs(static_cast<double>(c[ms[k]]) -
                                   static_cast<double>(y[ms[k]]));
      sum[k] += gap;
      sum_sq[k] += gap * gap;
    }
  }
  std::vector<CouplingGap> out;
  const double ns = static_cast<double>(samples);
  for (std::size_t k = 0; k < ms.size(); ++k) {
    CouplingGap g;
    g.m = ms[k];
    g.mean_gap = sum[k] / ns;
    const double var =
        samples > 1 ? std::max(0.0, (sum_sq[k] - ns * g.mean_gap * g.mean_gap) /
                                        (ns - 1.0))
                    : 0.0;
    g.standard_error = std::sqrt(var / ns);
    g.bound = coupling_bound(n, ms[k], params);
    g.bound_applicable = params.theta >= 1.0 || 2 * ms[k] <= n;
    g.truncated_draws = truncated;
    out.push_back(g);
  }
  return out;
}

inline CouplingGap coupling_gap_estimate(std::uint64_t n, std::uint64_t m,
                                         const EwensParams &params,
                                         std::uint64_t samples,
                                         const RngStream &stream) {
  return coupling_gap_estimates(n, {m}, params, samples, stream).front();
}

} // namespace ewclt
