#include <gtest/gtest.h>

#include <cmath>

#include "semiweyl/asymptotics.hpp"

using namespace semiweyl;

namespace {

std::vector<std::size_t> rounded(const std::vector<double>& a, double c, double q) {
  std::vector<std::size_t> n;
  for (double x : a) n.push_back(static_cast<std::size_t>(std::lround(c * std::pow(x, q))));
  return n;
}

}  // namespace

TEST(AlphaGrid, GeometricEndpointsAndSpacing) {
  const auto a = geometric_alphas(10.0, 1000.0, 5);
  ASSERT_EQ(a.size(), 5u);
  EXPECT_EQ(a.front(), 10.0);
  EXPECT_EQ(a.back(), 1000.0);
  for (std::size_t i = 1; i < a.size(); ++i) EXPECT_NEAR(a[i] / a[i - 1], std::sqrt(10.0), 1e-12);
  EXPECT_EQ(points_per_decade(100.0, 2000.0, 16), 22);
  EXPECT_THROW(geometric_alphas(0.0, 10.0, 5), ConfigError);
  EXPECT_THROW(geometric_alphas(1.0, 10.0, 3), ConfigError);
}

TEST(Limits, LinearSeries) {
  const auto a = geometric_alphas(100.0, 10000.0, 30);
  const auto e = estimate_limits(a, rounded(a, 0.37, 1.0));
  EXPECT_EQ(e.points, 9u);
  EXPECT_NEAR(e.upper, 0.37, 0.5 / 2000.0);
  EXPECT_NEAR(e.lower, 0.37, 0.5 / 2000.0);
}

TEST(Limits, QuadraticSeriesWithExponentTwo) {
  const auto a = geometric_alphas(10.0, 1000.0, 20);
  const auto e = estimate_limits(a, rounded(a, 0.05, 2.0), 2.0);
  EXPECT_NEAR(e.upper, 0.05, 1e-4);
  EXPECT_NEAR(e.lower, 0.05, 1e-4);
  const auto linear = estimate_limits(a, rounded(a, 0.05, 2.0), 1.0);
  EXPECT_GT(linear.lower, 1.0);
}

TEST(Limits, OscillationSeparatesUpperAndLower) {
  const auto a = geometric_alphas(1.0, 1000.0, 40);
  std::vector<std::size_t> n;
  for (std::size_t i = 0; i < a.size(); ++i) n.push_back(static_cast<std::size_t>(std::lround((i % 2 ? 2.0 : 1.0) * a[i])));
  const auto e = estimate_limits(a, n);
  EXPECT_NEAR(e.upper, 2.0, 0.01);
  EXPECT_NEAR(e.lower, 1.0, 0.01);
}

TEST(Limits, DriftWindowsAreDisjoint) {
  std::vector<double> a;
  std::vector<std::size_t> n;
  for (int i = 1; i <= 10; ++i) {
    a.push_back(i);
    n.push_back(static_cast<std::size_t>(i * i));
  }
  // windows of three: {2,3,4}, {5,6,7}, {8,9,10}
  const auto w = drift_windows(a, n, 1.0, 0.3, 3);
  ASSERT_EQ(w.size(), 3u);
  EXPECT_DOUBLE_EQ(w[0].lower, 2.0);
  EXPECT_DOUBLE_EQ(w[0].upper, 4.0);
  EXPECT_DOUBLE_EQ(w[1].lower, 5.0);
  EXPECT_DOUBLE_EQ(w[2].upper, 10.0);
  EXPECT_THROW(drift_windows(a, n, 1.0, 0.3, 5), ConfigError);
}

TEST(SweepTest, ZeroPotential) {
  const auto spec = PotentialSpec::radial(RadialProfile::constant(0.0));
  const SweepResult s = sweep(spec, 1.0, 100.0, 5);
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(s.n2d[i], 0u);
    EXPECT_EQ(s.n_tilde[i], 0u);
    EXPECT_EQ(s.n_m[i], 0u);
  }
  EXPECT_EQ(s.weyl, 0.0);
  const EstimReport e = check_estim(s);
  EXPECT_TRUE(e.vacuous);
  EXPECT_FALSE(e.empirical_C.has_value());
  const As2Report r = check_as2(s);
  EXPECT_EQ(r.upper_discrepancy, 0.0);
  EXPECT_FALSE(r.margin_discrepancy.has_value());
}

TEST(SweepTest, DiskSandwichAndMonotone) {
  const auto spec = PotentialSpec::radial(RadialProfile::disk(1.0, 1.0));
  const SweepResult s = sweep(spec, 5.0, 200.0, 12);
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_TRUE(s.n2d[i] == s.n_tilde[i] || s.n2d[i] == s.n_tilde[i] + 1) << "alpha=" << s.alphas[i];
    EXPECT_LE(s.n_m[i], s.n_tilde[i]);
    EXPECT_TRUE(s.converged[i]);
    if (i > 0) {
      EXPECT_GE(s.n2d[i], s.n2d[i - 1]);
      EXPECT_GE(s.n_tilde[i], s.n_tilde[i - 1]);
      EXPECT_GE(s.n_m[i], s.n_m[i - 1]);
    }
  }
  EXPECT_NEAR(s.weyl, 0.25, 1e-9);
}

TEST(SweepTest, Homogeneity) {
  // N(alpha, 2V) = N(2 alpha, V)
  const auto v = PotentialSpec::radial(RadialProfile::gaussian(1.0, 1.0));
  const auto v2 = PotentialSpec::radial(RadialProfile::gaussian(2.0, 1.0));
  const SweepResult a = sweep(v2, std::vector<double>{10.0, 25.0, 60.0});
  const SweepResult b = sweep(v, std::vector<double>{20.0, 50.0, 120.0});
  EXPECT_EQ(a.n2d, b.n2d);
  EXPECT_EQ(a.n_tilde, b.n_tilde);
  EXPECT_EQ(a.n_m, b.n_m);
}

TEST(SweepTest, ThreadsDoNotChangeResults) {
  const auto spec = PotentialSpec::radial(RadialProfile::disk(1.0, 1.0));
  SweepOptions opt;
  opt.threads = 3;
  const SweepResult a = sweep(spec, 5.0, 80.0, 7);
  const SweepResult b = sweep(spec, 5.0, 80.0, 7, opt);
  EXPECT_EQ(a.n2d, b.n2d);
  EXPECT_EQ(a.n_m, b.n_m);
  EXPECT_EQ(a.converged, b.converged);
}

TEST(SweepTest, RejectsBadAlphaGrid) {
  const auto spec = PotentialSpec::radial(RadialProfile::disk(1.0, 1.0));
  EXPECT_THROW(sweep(spec, std::vector<double>{5.0, 3.0}), ConfigError);
  EXPECT_THROW(sweep(spec, std::vector<double>{}), ConfigError);
}

TEST(SweepTest, OneDimensionalSweepHasNo2D) {
  const auto spec = PotentialSpec::radial(RadialProfile::disk(1.0, 1.0));
  const SweepResult s = sweep_1d(spec, 1.0, 30.0, 6);
  EXPECT_FALSE(s.has_2d());
  EXPECT_THROW(check_as2(s), ConfigError);
  EXPECT_THROW(check_estim(s), ConfigError);
}

TEST(Checks, HypothesisViolationWhenBoundVanishes) {
  SweepResult s;
  s.alphas = {1.0, 2.0, 4.0, 8.0};
  s.n2d = {0, 1, 3, 5};
  s.n_tilde = s.n2d;
  s.n_m = {0, 0, 1, 1};
  s.converged.assign(4, true);
  s.bound_B = 0.0;
  const EstimReport e = check_estim(s);
  EXPECT_TRUE(e.hypothesis_violation);
  EXPECT_FALSE(e.vacuous);
}

TEST(Checks, EmpiricalConstantIgnoresUnconvergedPoints) {
  SweepResult s;
  s.alphas = {10.0, 20.0, 40.0, 80.0, 160.0};
  s.n2d = {3, 6, 100, 21, 41};
  s.n_tilde = s.n2d;
  s.n_m = {1, 1, 2, 2, 3};
  s.converged = {true, true, false, true, true};
  s.bound_B = 0.5;
  const EstimReport e = check_estim(s);
  ASSERT_TRUE(e.empirical_C.has_value());
  EXPECT_NEAR(*e.empirical_C, 0.5, 1e-12);  // (21 - 1) / (80 * 0.5) = (41 - 1) / (160 * 0.5)
  EXPECT_EQ(e.decade_points, 3u);
  EXPECT_NEAR(e.variation, 0.0, 1e-12);
}

TEST(Checks, PropAddOnCompactSupport) {
  const auto spec = PotentialSpec::radial(RadialProfile::disk(1.0, 1.0));
  const auto G = effective_potential(spec);
  const SweepResult s = sweep_1d(spec, 10.0, 1000.0, 12);
  const PropAddReport q2 = check_prop_add(G, 2.0, s);
  EXPECT_TRUE(std::isfinite(q2.quasinorm_q));
  EXPECT_LT(q2.one_d.upper, 1e-3);
  EXPECT_LT(q2.one_d.upper, q2.one_d_q1.upper);
  EXPECT_FALSE(q2.super_semiclassical);
  EXPECT_LT(q2.growth_exponent, 1.0);
  EXPECT_THROW(check_prop_add(G, 1.0, s), ConfigError);
}

TEST(Checks, As2OnDisk) {
  const auto spec = PotentialSpec::radial(RadialProfile::disk(1.0, 1.0));
  const SweepResult s = sweep(spec, 50.0, 500.0, 10);
  const As2Report r = check_as2(s);
  EXPECT_NEAR(r.weyl, 0.25, 1e-9);
  EXPECT_LE(r.two_d.lower, r.two_d.upper);
  EXPECT_DOUBLE_EQ(r.margin_lower, r.two_d.lower - r.weyl);
}
