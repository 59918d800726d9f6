#pragma once

// Monte Carlo for the normalized statistic
//   w^n(f)/sqrt(log n) - theta sqrt(log n) m(f)
// with cycle counts from the Feller coupling or, in the surrogate mode, with
// independent Y_m ~ Poisson(theta/m) in place of C_m.
//
// Every draw i at size n uses its own stream RngStream(seed, n).substream(i),
// so results do not depend on how draws are spread over threads.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "ewclt/circle_function.hpp"
#include "ewclt/errors.hpp"
#include "ewclt/evaluation_point.hpp"
#include "ewclt/ewens.hpp"
#include "ewclt/mahler.hpp"
#include "ewclt/rng.hpp"

namespace ewclt {

enum class SamplingMode { feller, poisson_surrogate };

inline std::string to_string(SamplingMode m) {
  return m == SamplingMode::feller ? "feller" : "poisson-surrogate";
}

inline SamplingMode parse_sampling_mode(const std::string &s) {
  if (s == "feller") {
    return SamplingMode::feller;
  }
  if (s == "poisson-surrogate" || s == "poisson") {
    return SamplingMode::poisson_surrogate;
  }
  throw invalid_argument("unknown sampling mode '" + s + "'");
}

inline constexpr std::uint64_t min_samples_per_n = 100;

struct ExperimentConfig {
  CircleFunction f;
  EvaluationPoint x = EvaluationPoint::golden();
  double theta = 1.0;
  std::vector<std::uint64_t> n_grid;
  std::uint64_t samples_per_n = 1000;
  std::uint64_t seed = 0;
  SamplingMode mode = SamplingMode::feller;
  // subtract theta sqrt(log n) m(f); off only for negative controls
  bool center = true;
  QuadratureConfig quadrature;

  void validate() const {
    if (!(theta > 0.0)) {
      throw invalid_argument("theta must be positive");
    }
    if (samples_per_n < min_samples_per_n) {
      throw invalid_argument("samples per n must be at least " +
                             std::to_string(min_samples_per_n));
    }
    if (n_grid.empty()) {
      throw invalid_argument("n grid is empty");
    }
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
      if (n_grid[i] < 2) {
        throw invalid_argument("n must be at least 2 (log n > 0)");
      }
      if (i > 0 && n_grid[i] <= n_grid[i - 1]) {
        throw invalid_argument("n grid must be strictly increasing");
      }
    }
    if (!x.is_rational() && x.as_irrational().from_decimal) {
      throw invalid_argument(
          "a decimal evaluation point has no known type; use a named "
          "irrational or a continued fraction");
    }
  }
};

struct StatisticSample {
  double re = 0.0;
  double im = 0.0;
};

// Everything a draw at fixed n needs, built once.
class StatisticContext {
public:
  StatisticContext(const ExperimentConfig &cfg, const LimitParameters &limit,
                   std::uint64_t n)
      : cfg_(&cfg), n_(n), table_(cfg.f, cfg.x, n), log_n_(std::log(static_cast<double>(n))),
        sqrt_log_n_(std::sqrt(log_n_)) {
    if (cfg.center) {
      shift_ = cfg.theta * sqrt_log_n_ * limit.m_f;
    }
    for (std::uint64_t m = 1; m <= n; ++m) {
      harmonic_ += 1.0 / static_cast<double>(m);
    }
  }

  std::uint64_t n() const { return n_; }
  const LogTable &table() const { return table_; }
  double log_n() const { return log_n_; }
  double harmonic() const { return harmonic_; }

  // Returns false (and sets m_hit) if the draw needs log f at a zero.
  bool draw(RngStream &rng, StatisticSample &out, std::uint64_t &m_hit) const {
    complex w = 0.0;
    bool ok = true;
    if (cfg_->mode == SamplingMode::feller) {
      const auto bits = sample_feller_bits(n_, EwensParams(cfg_->theta), rng);
      for_each_cycle(bits, n_, [&](std::uint64_t m) {
        if (table_.infinite(m)) {
          ok = false;
          m_hit = m;
        } else {
          w += table_[m];
        }
      });
    } else {
      // Points of a Poisson process with intensity theta/m on {1..n}: the
      // total is Poisson(theta H_n), each point lands on m with prob. ~ 1/m.
      const std::uint64_t total = sample_poisson(cfg_->theta * harmonic_, rng);
      for (std::uint64_t j = 0; j < total; ++j) {
        const std::uint64_t m = sample_harmonic_index(n_, rng);
        if (table_.infinite(m)) {
          ok = false;
          m_hit = m;
        } else {
          w += table_[m];
        }
      }
    }
    if (!ok) {
      return false;
    }
    const complex s = w / sqrt_log_n_ - shift_;
    out = {s.real(), s.imag()};
    return true;
  }

  // Exact mean of the surrogate statistic: theta sum c_m/m / sqrt(log n) - shift.
  complex surrogate_mean() const {
    complex sum = 0.0;
    for (std::uint64_t m = 1; m <= n_; ++m) {
      if (table_.infinite(m)) {
        throw infinite_value_error("surrogate mean needs finite log f(x^m)",
                                   static_cast<long long>(m));
      }
      sum += table_[m] / static_cast<double>(m);
    }
    return cfg_->theta * sum / sqrt_log_n_ - shift_;
  }

private:
  const ExperimentConfig *cfg_;
  std::uint64_t n_;
  LogTable table_;
  double log_n_;
  double sqrt_log_n_;
  double harmonic_ = 0.0;
  complex shift_ = 0.0;
};

inline RngStream draw_stream(std::uint64_t seed, std::uint64_t n,
                             std::uint64_t index) {
  return RngStream(seed, n).substream(index);
}

// One draw of the statistic; throws infinite_value_error on a zero hit.
inline StatisticSample normalized_statistic(const ExperimentConfig &cfg,
                                            const LimitParameters &limit,
                                            std::uint64_t n, RngStream &stream) {
  const StatisticContext ctx(cfg, limit, n);
  StatisticSample s;
  std::uint64_t m_hit = 0;
  if (!ctx.draw(stream, s, m_hit)) {
    throw infinite_value_error("draw hits a zero of f at m = " + std::to_string(m_hit),
                               static_cast<long long>(m_hit));
  }
  return s;
}

struct RejectedDraw {
  std::uint64_t index = 0;
  std::uint64_t m = 0;
};

struct SampleBatch {
  std::uint64_t n = 0;
  std::vector<StatisticSample> samples; // accepted draws in index order
  std::vector<RejectedDraw> rejected;
};

inline unsigned default_thread_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

inline SampleBatch draw_batch(const StatisticContext &ctx, std::uint64_t seed,
                              std::uint64_t count, unsigned threads) {
  threads = std::max(1u, threads);
  std::vector<StatisticSample> all(count);
  std::vector<std::uint64_t> hit(count, 0);
  auto work = [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t i = begin; i < end; ++i) {
      RngStream rng = draw_stream(seed, ctx.n(), i);
      std::uint64_t m_hit = 0;
      if (!ctx.draw(rng, all[i], m_hit)) {
        hit[i] = m_hit;
      }
    }
  };
  if (threads == 1 || count < 2 * threads) {
    work(0, count);
  } else {
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (count + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::uint64_t b = std::min<std::uint64_t>(count, t * chunk);
      const std::uint64_t e = std::min<std::uint64_t>(count, b + chunk);
      pool.emplace_back(work, b, e);
    }
    for (auto &th : pool) {
      th.join();
    }
  }
  SampleBatch batch;
  batch.n = ctx.n();
  for (std::uint64_t i = 0; i < count; ++i) {
    if (hit[i] != 0) {
      batch.rejected.push_back({i, hit[i]});
    } else {
      batch.samples.push_back(all[i]);
    }
  }
  return batch;
}

struct MomentReport {
  std::uint64_t n = 0;
  std::uint64_t samples = 0;
  complex mean;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d target_sigma = Eigen::Matrix2d::Zero();
  std::uint64_t rejected = 0;
  std::vector<RejectedDraw> rejected_draws;
  double d_w_re = 0.0; // against N(0, target_sigma(0,0))
  double d_w_im = 0.0; // against N(0, target_sigma(1,1))
};

// Mean and (unbiased) covariance with a fixed pairwise summation tree.
inline void sample_moments(const std::vector<StatisticSample> &xs, complex &mean,
                           Eigen::Matrix2d &cov) {
  mean = 0.0;
  cov.setZero();
  if (xs.empty()) {
    return;
  }
  struct Acc {
    double n = 0, sa = 0, sb = 0, saa = 0, sab = 0, sbb = 0;
  };
  // shift by the first sample to keep the sums well conditioned
  const double a0 = xs.front().re;
  const double b0 = xs.front().im;
  std::vector<Acc> level;
  level.reserve(xs.size());
  for (const auto &s : xs) {
    const double a = s.re - a0;
    const double b = s.im - b0;
    level.push_back({1.0, a, b, a * a, a * b, b * b});
  }
  while (level.size() > 1) {
    std::vector<Acc> next;
    next.reserve(level.size() / 2 + 1);
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
      const Acc &l = level[i];
      const Acc &r = level[i + 1];
      next.push_back({l.n + r.n, l.sa + r.sa, l.sb + r.sb, l.saa + r.saa,
                      l.sab + r.sab, l.sbb + r.sbb});
    }
    if (level.size() % 2 == 1) {
      next.push_back(level.back());
    }
    level = std::move(next);
  }
  const Acc &t = level.front();
  const double ma = t.sa / t.n;
  const double mb = t.sb / t.n;
  mean = {ma + a0, mb + b0};
  if (t.n > 1) {
    const double d = t.n - 1.0;
    cov(0, 0) = (t.saa - t.n * ma * ma) / d;
    cov(0, 1) = cov(1, 0) = (t.sab - t.n * ma * mb) / d;
    cov(1, 1) = (t.sbb - t.n * mb * mb) / d;
  }
}

} // namespace ewclt
