#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "tentkit/quadrature.hpp"

using namespace tentkit;

TEST(PowerMean, ConstantSamples) {
  const std::vector<double> s(5, 3.25), w{1, 2, 3, 4, 5};
  for (double rho : {0.25, 1.0, 2.0, 7.0, infinity}) EXPECT_NEAR(power_mean(s, w, rho), 3.25, 1e-14);
}

TEST(PowerMean, HandArithmetic) {
  const std::vector<double> s{0, 2}, w{1, 1};
  EXPECT_NEAR(power_mean(s, w, 2.0), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(power_mean(s, w, 1.0), 1.0, 1e-15);
  EXPECT_EQ(power_mean(s, w, infinity), 2.0);
}

TEST(PowerMean, MonotoneInRho) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.0, 5.0), W(0.1, 3.0);
  const std::vector<double> rhos{0.1, 0.5, 1, 1.5, 2, 4, 10, infinity};
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    std::vector<double> s(n), w(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = U(rng), w[i] = W(rng);
    double prev = 0;
    for (double rho : rhos) {
      // Direct evaluation oracle.
      double num = 0, den = 0, mx = 0;
      for (std::size_t i = 0; i < n; ++i) num += w[i] * std::pow(s[i], rho), den += w[i], mx = std::max(mx, s[i]);
      const double direct = is_inf(rho) ? mx : std::pow(num / den, 1 / rho);
      const double v = power_mean(s, w, rho);
      EXPECT_NEAR(v, direct, 1e-12 * std::max(1.0, direct));
      EXPECT_GE(v, prev * (1 - 1e-12));
      prev = v;
    }
  }
}

TEST(PowerMean, RejectsBadInput) {
  const std::vector<double> s{1}, w{0};
  EXPECT_THROW(power_mean(s, w, 1), parameter_error);
  EXPECT_THROW(power_mean(std::vector<double>{}, std::vector<double>{}, 1), empty_domain_error);
  EXPECT_THROW(power_mean(s, std::vector<double>{1}, 0), parameter_error);
}

TEST(WhitneyAverage, ConstantField) {
  const Domain dom(1, 1.0, 64, 1.0 / 64, 1.0 / 4, 4);
  const auto f = HalfSpaceField::from_function(dom, [](double, std::span<const double>) { return 1.0; });
  for (double rho : {0.5, 1.0, 2.0, infinity})
    for (double t : {1.0 / 32, 0.1, 0.25})
      EXPECT_NEAR(whitney_average(f, {5}, t, rho, AverageSpec::whitney(), 0.0), 1.0, 1e-13);
}

TEST(WhitneyAverage, WeightCancelsLinearScale) {
  const Domain dom(2, 1.0, 16, 1.0 / 16, 1.0 / 2, 3);
  const auto f = HalfSpaceField::from_function(dom, [](double s, std::span<const double>) { return s; });
  for (double rho : {1.0, 3.0, infinity})
    EXPECT_NEAR(whitney_average(f, {3, 9}, 0.2, rho, AverageSpec(0.25, 1.5, 2.0), 1.0), 1.0, 1e-13);
}

TEST(WhitneyAverage, HalfBallIndicatorMatchesCellCount) {
  const Domain dom(1, 1.0, 256, 1.0 / 64, 1.0 / 4, 4);
  const int x0 = 100;
  const double h = dom.h();
  const auto f = HalfSpaceField::from_function(dom, [&](double, std::span<const double> y) {
    return y[0] < x0 * h - 1e-12 ? 1.0 : 0.0;
  });
  const double t = 0.125;
  // Cell-count oracle: cells with |y - x| < t, split by the side of x.
  int left = 0, total = 0;
  for (int i = -dom.n_space(); i <= dom.n_space(); ++i)
    if (std::abs(i * h) < t) {
      ++total;
      if (i < 0) ++left;
    }
  const double v = whitney_average(f, {x0}, t, 1.0, AverageSpec::whitney(), 0.0);
  EXPECT_NEAR(v, static_cast<double>(left) / total, 1e-13);
  EXPECT_NEAR(v, 0.5, 1.0 / total);
}

TEST(WhitneyAverage, WindowOffGridThrows) {
  const Domain dom(1, 1.0, 64, 1.0 / 64, 1.0 / 4, 4);
  const HalfSpaceField f(dom);
  EXPECT_THROW(whitney_average(f, {0}, 4.0, 1.0, AverageSpec::whitney(), 0.0), empty_domain_error);
}

TEST(LpNormSpatial, UnitConstantAndHomogeneity) {
  const std::vector<double> one(64, 1.0);
  for (double p : {0.5, 1.0, 3.0, infinity}) EXPECT_NEAR(lp_norm_spatial(one, 1.0 / 64, p), 1.0, 1e-14);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> U(0, 1);
  std::vector<double> g(50), g3(50);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = U(rng), g3[i] = 3.5 * g[i];
  for (double p : {0.5, 2.0, infinity})
    EXPECT_NEAR(lp_norm_spatial(g3, 0.02, p), 3.5 * lp_norm_spatial(g, 0.02, p), 1e-13);
  EXPECT_EQ(lp_norm_spatial(g, 0.02, infinity), *std::max_element(g.begin(), g.end()));
}

TEST(DecreasingRearrangement, SortsAndPreservesIntegral) {
  const std::vector<double> g{3, 1, 2};
  const auto s = decreasing_rearrangement(g, 0.5);
  EXPECT_EQ(s.values, (std::vector<double>{3, 2, 1}));
  EXPECT_EQ(s(0.25), 3.0);
  EXPECT_EQ(s(0.75), 2.0);
  EXPECT_EQ(s(1.25), 1.0);
  EXPECT_EQ(s(2.0), 0.0);

  const std::vector<double> c(7, 2.0);
  const auto sc = decreasing_rearrangement(c, 1.0);
  for (double u : {0.1, 3.0, 6.9}) EXPECT_EQ(sc(u), 2.0);

  std::mt19937 rng(5);
  std::exponential_distribution<double> E(1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(1 + rng() % 40);
    for (auto& x : v) x = E(rng);
    const double cell = 0.125;
    const double direct = std::accumulate(v.begin(), v.end(), 0.0) * cell;
    const auto r = decreasing_rearrangement(v, cell);
    EXPECT_NEAR(r.integral_power(r.measure(), 1.0), direct, 1e-12 * direct);
    EXPECT_TRUE(std::is_sorted(r.values.rbegin(), r.values.rend()));
  }
  EXPECT_THROW(decreasing_rearrangement(std::vector<double>{-1.0}, 1.0), parameter_error);
}
