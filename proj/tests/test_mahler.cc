#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>

#include "ewclt/mahler.hpp"
#include "ewclt/quadrature.hpp"

using namespace ewclt;

namespace {

constexpr double pi = std::numbers::pi;
const double va_one_minus_z = pi * pi / 12.0;

CircleFunction two_minus_z() { return CircleFunction({2.0, -1.0}, {}, "2-z"); }

// distance from a node to a panel edge z, exact near the edge
double distance_to(const PanelPoint &p, double z) {
  if (p.lo == z) {
    return p.dlo;
  }
  if (p.hi == z) {
    return p.dhi;
  }
  return std::fabs(p.s - z);
}

} // namespace

TEST(Quadrature, LogSingularIntegrals) {
  QuadratureConfig cfg;
  const auto one = log_singular_integral([](const PanelPoint &) { return 1.0; }, {}, cfg);
  EXPECT_NEAR(one.value, 1.0, 1e-14);
  // int_0^1 ln|s - 1/2| ds = -1 - ln 2
  const auto lg = log_singular_integral(
      [](const PanelPoint &p) { return std::log(distance_to(p, 0.5)); },
      {0.5}, cfg);
  EXPECT_NEAR(lg.value, -1.0 - std::log(2.0), 1e-10);
  // int ln^2|2 sin pi s| = pi^2/12, zero at 0
  const auto l2 = log_singular_integral(
      [](const PanelPoint &p) {
        const double v =
            std::log(2.0 * std::sin(pi * std::min(distance_to(p, 0.0), distance_to(p, 1.0))));
        return v * v;
      },
      {}, cfg);
  EXPECT_NEAR(l2.value, va_one_minus_z, 1e-10);
}

TEST(Quadrature, GaussRules) {
  const auto gl = gauss_legendre(10);
  double sum = 0.0, x8 = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    sum += gl.weights[i];
    x8 += gl.weights[i] * std::pow(gl.nodes[i], 8);
  }
  EXPECT_NEAR(sum, 2.0, 1e-14);
  EXPECT_NEAR(x8, 2.0 / 9.0, 1e-14);
  const auto gh = gauss_hermite_normal(12);
  double m0 = 0.0, m2 = 0.0, m4 = 0.0;
  for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
    m0 += gh.weights[i];
    m2 += gh.weights[i] * gh.nodes[i] * gh.nodes[i];
    m4 += gh.weights[i] * std::pow(gh.nodes[i], 4);
  }
  EXPECT_NEAR(m0, 1.0, 1e-13);
  EXPECT_NEAR(m2, 1.0, 1e-13);
  EXPECT_NEAR(m4, 3.0, 1e-12);
}

TEST(TotalVariation, Examples) {
  EXPECT_NEAR(total_variation([](double s) { return s; }, 0.0, 1.0), 1.0, 1e-12);
  EXPECT_NEAR(total_variation([](double) { return 4.2; }, 0.0, 1.0), 0.0, 1e-15);
  // b(s) for 1 - z on [0.1, 0.9]: pi (s - 1/2), continuous at 1/2
  const auto f = CircleFunction::one_minus_z();
  const double v = total_variation([&](double s) { return ab_decomposition(f, s).b; }, 0.1, 0.9);
  EXPECT_NEAR(v, 0.8 * pi, 1e-9);
  // a jump of size 1 at 0.3 plus slope variation 1
  const double step = total_variation([](double s) { return s + (s > 0.3 ? 1.0 : 0.0); }, 0.0,
                                      1.0, {}, {0.3});
  EXPECT_NEAR(step, 2.0, 1e-9);
}

TEST(MRational, Examples) {
  const auto two = CircleFunction::constant(2.0);
  for (const auto &[p, q] : std::vector<std::pair<int, int>>{{0, 1}, {1, 3}, {3, 7}}) {
    EXPECT_NEAR(m_rational(two, p, q).value.real(), std::log(2.0), 1e-15);
  }
  const auto f = CircleFunction::one_minus_z();
  const auto half = m_rational(f, 1, 2);
  EXPECT_TRUE(half.infinite);
  EXPECT_EQ(half.first_zero_m, 2u);
  const auto third = m_rational(f, 1, 3);
  EXPECT_TRUE(third.infinite);
  EXPECT_EQ(third.first_zero_m, 3u);
  const auto g = m_rational(two_minus_z(), 1, 3);
  EXPECT_FALSE(g.infinite);
  EXPECT_NEAR(g.value.real(), std::log(7.0) / 3.0, 1e-15);
  EXPECT_NEAR(g.value.imag(), 0.0, 1e-15);
  EXPECT_THROW(m_rational(f, 2, 4), invalid_argument);
}

TEST(MIrrational, Examples) {
  EXPECT_NEAR(std::abs(m_irrational(CircleFunction::constant(2.0)).value - std::log(2.0)), 0.0,
              1e-14);
  const auto z = m_irrational(CircleFunction::one_minus_z());
  EXPECT_NEAR(std::abs(z.value), 0.0, 1e-8);
  const auto g = m_irrational(two_minus_z()).value;
  EXPECT_NEAR(g.real(), std::log(2.0), 1e-12);
  EXPECT_NEAR(std::abs(g - m_rational(two_minus_z(), 1, 100000).value), 0.0, 1e-8);
  EXPECT_THROW(m_irrational(CircleFunction({1.0, -1.0})), hypothesis_violation);
}

TEST(MIrrational, RiemannSumsAgree) {
  // zero-free with a branch jump: -2 + z/2 (values cross the negative axis)
  const CircleFunction f({-2.0, 0.5}, {}, "-2+z/2");
  const complex exact = m_irrational(f).value;
  // even q keeps the jump at 1/2 on a cell boundary
  for (const std::int64_t q : {100, 1000, 10000}) {
    complex sum = 0.0;
    for (std::int64_t k = 0; k < q; ++k) {
      sum += log_f(f, (static_cast<double>(k) + 0.5) / static_cast<double>(q)).value();
    }
    EXPECT_LT(std::abs(sum / static_cast<double>(q) - exact), 1e-10) << q;
  }
}

TEST(ArgJumps, FoundWhereFCrossesNegativeAxis) {
  const CircleFunction f({-2.0, 0.5}, {}, "-2+z/2");
  const auto jumps = find_arg_jumps(f);
  ASSERT_EQ(jumps.size(), 1u);
  EXPECT_NEAR(jumps[0], 0.5, 1e-12);
  EXPECT_TRUE(find_arg_jumps(CircleFunction::one_minus_z()).empty());
}

TEST(CovarianceParameters, OneMinusZGolden) {
  const auto lp =
      covariance_parameters(CircleFunction::one_minus_z(), 1.0, EvaluationPoint::golden());
  EXPECT_NEAR(lp.V_a, va_one_minus_z, 1e-8);
  EXPECT_NEAR(lp.V_b, va_one_minus_z, 1e-8);
  EXPECT_NEAR(lp.E_ab, 0.0, 1e-10);
  EXPECT_NEAR(std::abs(lp.m_f), 0.0, 1e-8);
}

TEST(CovarianceParameters, ConstantFunction) {
  const auto c = CircleFunction::constant(std::polar(2.0, pi / 4));
  const auto lp = covariance_parameters(c, 1.0, EvaluationPoint::sqrt2());
  EXPECT_NEAR(lp.covariance_scalar, std::log(2.0) * pi / 4, 1e-12);
  EXPECT_NEAR(lp.V_a, std::log(2.0) * std::log(2.0), 1e-12);
  EXPECT_NEAR(lp.V_b, pi * pi / 16, 1e-12);
}

TEST(CovarianceParameters, ThetaScalesSigma) {
  const auto f = two_minus_z();
  const auto l1 = covariance_parameters(f, 1.0, EvaluationPoint::golden());
  const auto l2 = covariance_parameters(f, 2.0, EvaluationPoint::golden());
  EXPECT_NEAR((l2.sigma - 2.0 * l1.sigma).norm(), 0.0, 1e-14);
}

TEST(CovarianceParameters, CovarianceScalarIsThetaEab) {
  const std::vector<CircleFunction> fs{
      two_minus_z(), CircleFunction({-2.0, 0.5}),
      CircleFunction({complex(1.0, 0.5), complex(0.0, 0.3), complex(0.2, 0.0)}),
      CircleFunction({1.0, -1.0, -1.0, 1.0}, {{0, 1, 2}, {1, 2, 1}})};
  for (const auto &f : fs) {
    for (const double theta : {0.5, 1.7}) {
      const auto lp = covariance_parameters(f, theta, EvaluationPoint::e_frac());
      EXPECT_NEAR(lp.covariance_scalar, theta * lp.E_ab, 1e-9) << f.label();
      // Gram inequality
      EXPECT_GE(lp.V_a * lp.V_b - lp.E_ab * lp.E_ab, -1e-12);
    }
  }
}

TEST(CovarianceParameters, RationalAgreesWithIrrational) {
  // zero-free and smooth: the rational averages are already exact to rounding
  const auto f = CircleFunction({complex(2.0, 0.5), complex(-1.0, 0.2)}, {}, "g");
  const auto lim = covariance_parameters(f, 1.0, EvaluationPoint::golden());
  for (const std::int64_t q : {1000, 10000, 100000}) {
    const auto lq = covariance_parameters(f, 1.0, EvaluationPoint::rational(1, q));
    const double err = std::abs(lq.m_f - lim.m_f) + std::fabs(lq.V_a - lim.V_a) +
                       std::fabs(lq.V_b - lim.V_b) + std::fabs(lq.E_ab - lim.E_ab);
    EXPECT_LT(err, 1e-10) << q;
  }
}

TEST(CovarianceParameters, RationalZeroHitThrows) {
  EXPECT_THROW(covariance_parameters(CircleFunction::one_minus_z(), 1.0,
                                     EvaluationPoint::rational(1, 2)),
               infinite_value_error);
  EXPECT_THROW(
      covariance_parameters(CircleFunction({1.0, -1.0}), 1.0, EvaluationPoint::golden()),
      hypothesis_violation);
}

TEST(CovarianceParameters, DoubleZeroWithRootOfUnity) {
  const CircleFunction f({1.0, -1.0, -1.0, 1.0}, {{0, 1, 2}, {1, 2, 1}});
  const auto lp = covariance_parameters(f, 1.0, EvaluationPoint::golden());
  // a = 2 ln|2 sin pi s| + ln|2 cos pi s|; midpoint-rule oracle
  double va = 0.0;
  const int q = 2000000;
  for (int k = 0; k < q; ++k) {
    const double s = (k + 0.5) / q;
    const double a = 2.0 * std::log(2.0 * std::sin(pi * s)) + std::log(std::fabs(2.0 * std::cos(pi * s)));
    va += a * a;
  }
  va /= q;
  EXPECT_NEAR(lp.V_a, va, 1e-4);
  EXPECT_NEAR(std::abs(lp.m_f), 0.0, 1e-8);
}

TEST(SingularityTest, Examples) {
  const auto golden = EvaluationPoint::golden();
  EXPECT_FALSE(sigma_singularity_test(CircleFunction::one_minus_z(), golden).singular);
  const CircleFunction trig({1.0, 3.0, 1.0}, {}, "3+z+1/z", -1);
  const auto v = sigma_singularity_test(trig, golden);
  EXPECT_TRUE(v.singular);
  EXPECT_TRUE(sigma_singularity_test(CircleFunction::constant(2.0), golden).singular);
  // b = pi/4 constant, a = ln 2 constant: proportional, singular
  EXPECT_TRUE(
      sigma_singularity_test(CircleFunction::constant(std::polar(2.0, pi / 4)), golden).singular);
}

TEST(LimitParameters, JsonRoundTrip) {
  const auto lp = covariance_parameters(two_minus_z(), 1.5, EvaluationPoint::golden());
  const auto back = limit_parameters_from_json(nlohmann::json::parse(to_json(lp).dump()));
  EXPECT_EQ(back.V_a, lp.V_a);
  EXPECT_EQ(back.E_ab, lp.E_ab);
  EXPECT_EQ(back.m_f, lp.m_f);
  EXPECT_EQ(back.sigma, lp.sigma);
}
