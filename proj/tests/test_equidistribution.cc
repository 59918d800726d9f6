#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ewclt/equidistribution.hpp"
#include "ewclt/mahler.hpp"
#include "ewclt/rng.hpp"

using namespace ewclt;

namespace {

constexpr double pi = std::numbers::pi;

// sup over beta of |#{x < beta}/n - beta| and |#{x <= beta}/n - beta|,
// checked at every sample point and at 1
double brute_star(const std::vector<double> &xs) {
  const double n = static_cast<double>(xs.size());
  double best = 0.0;
  std::vector<double> betas = xs;
  betas.push_back(1.0);
  for (const double b : betas) {
    double lt = 0, le = 0;
    for (const double x : xs) {
      lt += x < b ? 1 : 0;
      le += x <= b ? 1 : 0;
    }
    best = std::max({best, std::fabs(lt / n - b), std::fabs(le / n - b)});
  }
  return best;
}

// sup over intervals [a, b) with endpoints among the points, 0 and 1
double brute_extreme(const std::vector<double> &xs) {
  const double n = static_cast<double>(xs.size());
  std::vector<double> ends = xs;
  ends.push_back(0.0);
  ends.push_back(1.0);
  double best = 0.0;
  for (const double a : ends) {
    for (const double b : ends) {
      if (b < a) {
        continue;
      }
      // closed, open and half-open versions
      double cc = 0, oo = 0;
      for (const double x : xs) {
        cc += (x >= a && x <= b) ? 1 : 0;
        oo += (x > a && x < b) ? 1 : 0;
      }
      best = std::max({best, std::fabs(cc / n - (b - a)), std::fabs(oo / n - (b - a))});
    }
  }
  return best;
}

} // namespace

TEST(FracParts, Examples) {
  const auto half = frac_parts(EvaluationPoint::rational(1, 2), 4);
  EXPECT_EQ(half.values, (std::vector<double>{0.5, 0.0, 0.5, 0.0}));
  const auto third = frac_parts(EvaluationPoint::rational(1, 3), 3);
  EXPECT_EQ(third.values[0], 1.0 / 3.0);
  EXPECT_EQ(third.values[1], 2.0 / 3.0);
  EXPECT_EQ(third.values[2], 0.0);
  const auto g = frac_parts(EvaluationPoint::golden(), 2);
  EXPECT_NEAR(g.values[0], 0.6180339887498949, 1e-15);
  EXPECT_NEAR(g.values[1], 0.2360679774997898, 1e-15);
}

TEST(FracParts, FixedPointMatchesLongDouble) {
  const auto x = EvaluationPoint::sqrt2();
  const auto seq = frac_parts(x, 100000);
  EXPECT_LT(seq.precision_bound, 1e-20);
  for (const std::uint64_t m : {1ull, 1000ull, 99999ull}) {
    const long double t = std::sqrt(2.0L) - 1.0L;
    const long double v = std::fmod(static_cast<long double>(m) * t, 1.0L);
    EXPECT_NEAR(seq.values[m - 1], static_cast<double>(v), 1e-12);
  }
}

TEST(StarDiscrepancy, Examples) {
  EXPECT_DOUBLE_EQ(star_discrepancy(std::vector<double>{0.5}).d_star, 0.5);
  for (const int n : {1, 7, 50}) {
    std::vector<double> mid;
    for (int m = 1; m <= n; ++m) {
      mid.push_back((2.0 * m - 1.0) / (2.0 * n));
    }
    EXPECT_NEAR(star_discrepancy(mid).d_star, 0.5 / n, 1e-15);
  }
  EXPECT_DOUBLE_EQ(star_discrepancy(std::vector<double>{0.0, 0.5}).d_star, 0.5);
}

TEST(StarDiscrepancy, MatchesBruteForce) {
  RngStream rng(5, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.next() % 50;
    std::vector<double> xs(n);
    for (auto &x : xs) {
      // include ties and grid points sometimes
      x = trial % 3 == 0 ? std::floor(rng.uniform() * 8.0) / 8.0 : rng.uniform();
    }
    const auto rep = star_discrepancy(xs);
    EXPECT_EQ(rep.d_star, brute_star(xs)) << trial;
    EXPECT_NEAR(rep.d_n, brute_extreme(xs), 1e-12) << trial;
    EXPECT_LE(rep.d_star, rep.d_n + 1e-15);
    EXPECT_LE(rep.d_n, 2.0 * rep.d_star + 1e-15);
    EXPECT_GT(rep.d_star, 0.0);
    EXPECT_LE(rep.d_star, 1.0);
  }
}

TEST(StarDiscrepancy, RationalPeriodicSet) {
  // n a multiple of q: the q-point set {0, 1/q, ...} has D* = 1/q
  for (const std::int64_t q : {3, 7, 10}) {
    const auto t = EvaluationPoint::rational(1, q);
    for (const std::uint64_t k : {1ull, 5ull, 20ull}) {
      const auto rep = star_discrepancy(frac_parts(t, k * q));
      EXPECT_NEAR(rep.d_star, 1.0 / q, 1e-15);
    }
    for (std::uint64_t n = 1; n <= 200; ++n) {
      EXPECT_GE(star_discrepancy(frac_parts(t, n)).d_n, 0.5 / q - 1e-15);
    }
  }
}

TEST(StarDiscrepancy, GoldenTendsToZero) {
  double prev = 1.0;
  for (const std::uint64_t n : {10ull, 100ull, 1000ull, 10000ull}) {
    const double d = star_discrepancy(frac_parts(EvaluationPoint::golden(), n)).d_n;
    EXPECT_LT(d, prev);
    prev = d;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(FiniteType, Examples) {
  const auto golden = finite_type_scan(EvaluationPoint::golden(), 1.01, 0.2, 1000000);
  EXPECT_TRUE(golden.holds());
  EXPECT_NEAR(eta_estimate(EvaluationPoint::golden()), 1.0, 0.05);
  EXPECT_THROW(finite_type_scan(EvaluationPoint::rational(1, 3), 1.1, 0.1, 10), invalid_argument);
  // huge partial quotients: violations appear and keep appearing
  const auto liouville = EvaluationPoint::continued_fraction({1, 10, 1000, 1000000, 1, 1});
  for (const double gamma : {1.1, 1.5}) {
    const auto r = finite_type_scan(liouville, gamma, 0.2, 2000000);
    EXPECT_FALSE(r.holds()) << gamma;
  }
  const auto small = finite_type_scan(liouville, 1.5, 0.2, 5);
  const auto large = finite_type_scan(liouville, 1.5, 0.2, 2000000);
  EXPECT_GT(large.violation_count, small.violation_count);
}

TEST(FiniteType, GridMode) {
  const auto r = finite_type_scan(EvaluationPoint::golden(), 1.01, 0.2, 1000, 7);
  EXPECT_EQ(r.grid_q, 7);
  // grid distance is at most 1/14, below K/m^gamma for small m
  EXPECT_GT(r.grid_violation_count, 0u);
}

TEST(Koksma, Examples) {
  std::vector<double> mid;
  for (int m = 1; m <= 100; ++m) {
    mid.push_back((2.0 * m - 1.0) / 200.0);
  }
  const auto identity = [](double s) { return s; };
  const auto r0 = koksma_check(identity, 1.0, mid, 0.5);
  EXPECT_NEAR(r0.lhs, 0.0, 1e-15);
  EXPECT_TRUE(r0.holds);
  EXPECT_TRUE(koksma_check(identity, 1.0, frac_parts(EvaluationPoint::golden(), 10000), 0.5).holds);
  const auto step = [](double s) { return 0.5 * (1.0 + std::tanh(20.0 * (s - 0.4))); };
  const double integral = 0.5 + (std::log(std::cosh(12.0)) - std::log(std::cosh(8.0))) / 40.0;
  const double var = step(1.0) - step(0.0);
  for (const std::uint64_t n : {3ull, 10ull, 301ull}) {
    EXPECT_TRUE(koksma_check(step, var, frac_parts(EvaluationPoint::rational(1, 3), n), integral)
                    .holds);
  }
}

TEST(Koksma, HoldsOnRandomPairs) {
  RngStream rng(8, 0);
  const std::vector<EvaluationPoint> ts{EvaluationPoint::golden(), EvaluationPoint::sqrt2(),
                                        EvaluationPoint::e_frac(),
                                        EvaluationPoint::rational(3, 11)};
  for (int trial = 0; trial < 60; ++trial) {
    const double k = 1.0 + 5.0 * rng.uniform();
    const auto h = [k](double s) { return std::sin(2 * pi * k * s); };
    const double integral = (1.0 - std::cos(2 * pi * k)) / (2 * pi * k);
    const double var = total_variation(h, 0.0, 1.0);
    const auto &t = ts[trial % ts.size()];
    const std::uint64_t n = 10 + rng.next() % 3000;
    EXPECT_TRUE(koksma_check(h, var, frac_parts(t, n), integral).holds) << trial;
  }
}

TEST(KoksmaExcluded, LogModulusGolden) {
  const auto h = [](double s) { return std::log(2.0 * std::sin(pi * s)); };
  const std::uint64_t n = 10000;
  const double delta = 0.2 / std::pow(static_cast<double>(n), 1.01);
  const auto rep = koksma_excluded_check(h, frac_parts(EvaluationPoint::golden(), n), {}, delta);
  EXPECT_TRUE(rep.holds) << rep.lhs << " > " << rep.rhs;
}

TEST(KoksmaExcluded, SmoothLimitMatchesKoksma) {
  const auto h = [](double s) { return s * s; };
  const auto seq = frac_parts(EvaluationPoint::sqrt2(), 500);
  const auto plain = koksma_check(h, 1.0, seq, 1.0 / 3.0);
  const auto excl = koksma_excluded_check(h, seq, {}, 0.0);
  EXPECT_NEAR(excl.boundary_term, 0.0, 1e-15);
  EXPECT_NEAR(excl.lhs, plain.lhs, 1e-12);
  EXPECT_NEAR(excl.rhs, plain.rhs, 1e-9);
}

TEST(KoksmaExcluded, PeriodicHitNamesM) {
  const auto h = [](double s) { return std::log(s); };
  try {
    koksma_excluded_check(h, frac_parts(EvaluationPoint::rational(1, 2), 10), {}, 0.01);
    FAIL() << "expected a precondition violation";
  } catch (const precondition_violation &e) {
    EXPECT_EQ(e.index(), 2);
  }
}

TEST(DecayFit, Examples) {
  const std::vector<std::uint64_t> grid{100, 1000, 10000, 100000};
  const auto g = discrepancy_decay_fit(EvaluationPoint::golden(), grid);
  EXPECT_GE(g.fit.slope, -1.05);
  EXPECT_LE(g.fit.slope, -0.85);
  const auto s = discrepancy_decay_fit(EvaluationPoint::sqrt2(), grid);
  EXPECT_GE(s.fit.slope, -1.05);
  EXPECT_LE(s.fit.slope, -0.80);
  EXPECT_THROW(discrepancy_decay_fit(EvaluationPoint::rational(1, 5), grid), invalid_argument);
}

TEST(LogWeightedSum, Examples) {
  const auto ones = log_weighted_sum([](std::uint64_t) { return 1.0; }, 1000000);
  double h = 0.0;
  for (std::uint64_t m = 1; m <= 1000000; ++m) {
    h += 1.0 / static_cast<double>(m);
  }
  EXPECT_NEAR(ones.sum, h, 1e-12);
  EXPECT_NEAR(ones.E_fit, 1.0, 1e-4);
  EXPECT_NEAR(ones.K_fit, 0.5772156649015329, 1e-4);
  EXPECT_NEAR(ones.half_sum, std::log(2.0), 1e-5);
  const auto alt = log_weighted_sum(
      [](std::uint64_t m) { return m % 2 == 0 ? 1.0 : -1.0; }, 1000000);
  EXPECT_NEAR(alt.E_fit, 0.0, 1e-3);
  EXPECT_NEAR(alt.sum, -std::log(2.0), 1e-5);
}

TEST(AbelSum, Examples) {
  EXPECT_EQ(abel_sum({1, 1, 1}, {1, 1, 1}, 3), 3.0);
  EXPECT_NEAR(abel_sum({1, 2, 3, 4}, {2.5, 2.5, 2.5, 2.5}, 4), 25.0, 1e-15);
  RngStream rng(4, 0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(1000), b(1000);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
      b[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
    }
    double direct = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      direct += a[i] * b[i];
    }
    const double abel = abel_sum(a, b, a.size());
    EXPECT_NEAR(abel, direct, 1e-12 * std::max(1.0, std::fabs(direct)));
  }
}
