#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "tentkit/tent_norms.hpp"

using namespace tentkit;

namespace {

constexpr double pi = std::numbers::pi;

HalfSpaceField random_field(const Domain& dom, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  std::vector<double> v(dom.size());
  for (auto& x : v) x = N(rng);
  return HalfSpaceField(dom, std::move(v));
}

// u(s, y) = s ξ e^{-s²ξ²} cos(ξ y), ξ = 2πν; ∫_0^1 u² dy = (sξ)² e^{-2s²ξ²} / 2.
HalfSpaceField moment_mode(const Domain& dom, int nu) {
  const double xi = 2 * pi * nu;
  return HalfSpaceField::from_function(dom, [&](double s, std::span<const double> y) {
    return s * xi * std::exp(-s * s * xi * xi) * std::cos(xi * y[0]);
  });
}

// ∫_{a}^{b} (sξ)² e^{-2s²ξ²} / 2 ds/s = (e^{-2a²ξ²} − e^{-2b²ξ²}) / 8.
double moment_mode_energy(double a, double b, int nu) {
  const double xi = 2 * pi * nu;
  return (std::exp(-2 * a * a * xi * xi) - std::exp(-2 * b * b * xi * xi)) / 8;
}

double direct_energy(const HalfSpaceField& f) {
  const Domain& dom = f.domain();
  double acc = 0;
  for (double v : f.values()) acc += v * v;
  return acc * dom.cell_volume() * dom.log_step();
}

}  // namespace

TEST(TentNorm, ZeroField) {
  const Domain dom(1, 1.0, 64, 1.0 / 64, 1.0 / 4, 4);
  const HalfSpaceField f(dom);
  for (const auto& e : {ExponentTuple(2, 2, 2, 0), ExponentTuple(0.5, 1, infinity, 1), ExponentTuple(infinity, 2, 1, 0)}) {
    EXPECT_EQ(tent_norm(f, e).value, 0.0);
    EXPECT_EQ(z_norm(f, e).value, 0.0);
    EXPECT_EQ(change_of_angle_norm(f, e, 2.0).value, 0.0);
  }
  EXPECT_EQ(beyond_infinity_norm(f, 2, 0, 1).value, 0.0);
  EXPECT_EQ(jn_norm(f, ExponentTuple(infinity, 2, 2, 0), 1.0).value, 0.0);
}

TEST(TentNorm, BoxExampleIsSqrtLn2) {
  // d = 1, torus side 4, f = 1 on s ∈ [1, 2], y ∈ [0, 1].
  for (auto [n, m] : {std::pair{128, 4}, std::pair{256, 8}}) {
    const Domain dom(1, 4.0, n, 0.25, 4.0, m);
    const auto f = HalfSpaceField::from_function(dom, [](double s, std::span<const double> y) {
      return (s > 1 + 1e-12 && s <= 2 + 1e-12 && y[0] < 1 - 1e-12) ? 1.0 : 0.0;
    });
    const double v = tent_norm(f, ExponentTuple(2, 2, 2, 0)).value;
    EXPECT_NEAR(v, std::sqrt(std::log(2.0)), 0.02 * std::sqrt(std::log(2.0))) << "n=" << n;
    EXPECT_NEAR(v * v, direct_energy(f), 1e-12);
  }
}

TEST(TentNorm, FubiniIdentityAgainstClosedForm) {
  for (int nu : {1, 2, 3}) {
    double prev_err = infinity;
    for (auto [n, m] : {std::pair{128, 4}, std::pair{256, 8}}) {
      const Domain dom(1, 1.0, n, 1.0 / 64, 1.0 / 4, m);
      const auto f = moment_mode(dom, nu);
      const double v = tent_norm(f, ExponentTuple(2, 2, 2, 0)).value;
      const double exact = std::sqrt(moment_mode_energy(dom.s_min(), dom.s_max(), nu));
      const double err = std::abs(v / exact - 1);
      EXPECT_LT(err, 0.02) << "nu=" << nu << " n=" << n;
      EXPECT_LE(err, prev_err) << "nu=" << nu << " n=" << n;
      prev_err = err;
      // The discrete identity itself is exact.
      EXPECT_NEAR(v * v, direct_energy(f), 1e-12 * v * v);
    }
  }
}

TEST(TentNorm, FubiniIdentityIsExactOnRandomFields) {
  for (int d : {1, 2}) {
    const Domain dom(d, 1.0, d == 1 ? 64 : 16, 1.0 / 16, 1.0 / 2, 3);
    const auto f = random_field(dom, 40 + d);
    const double v = tent_norm(f, ExponentTuple(2, 2, 2, 0)).value;
    EXPECT_NEAR(v * v, direct_energy(f), 1e-11 * v * v) << "d=" << d;
  }
}

TEST(TentNorm, DilationIdentity) {
  // g(s, y) = f(2s, 2y): ‖g‖ = 2^{β − d/p} ‖f‖ when no ball wraps around the torus.
  auto F = [](double s, double y) {
    if (y < 0.25 || y >= 0.5) return 0.0;
    const double b = std::sin(4 * pi * (y - 0.25));
    return 8 * s * b * b;
  };
  const Domain da(1, 1.0, 64, 1.0 / 64, 1.0 / 8, 4);
  const Domain db(1, 1.0, 128, 1.0 / 128, 1.0 / 16, 4);
  const auto f = HalfSpaceField::from_function(da, [&](double s, std::span<const double> y) { return F(s, y[0]); });
  const auto g = HalfSpaceField::from_function(db, [&](double s, std::span<const double> y) { return F(2 * s, 2 * y[0]); });
  for (const auto& e : {ExponentTuple(2, 2, 2, 0), ExponentTuple(1, 2, 2, 0.5), ExponentTuple(3, 1, 0.5, -0.5)}) {
    const double expected = std::exp2(e.beta - 1.0 / e.p) * tent_norm(f, e).value;
    EXPECT_NEAR(tent_norm(g, e).value, expected, 1e-10 * expected) << e.str();
  }
}

TEST(ZNorm, EqualsTentNormOnDiagonal) {
  const Domain dom(1, 1.0, 64, 1.0 / 32, 1.0 / 4, 4);
  const auto f = random_field(dom, 9);
  for (double p : {0.5, 1.0, 2.0, 3.0}) {
    const ExponentTuple e(p, p, p, 0.25);
    const double t = tent_norm(f, e).value, z = z_norm(f, e).value;
    EXPECT_NEAR(z, t, 1e-9 * t) << "p=" << p;
  }
}

TEST(ZNorm, Homogeneity) {
  const Domain dom(2, 1.0, 16, 1.0 / 16, 1.0 / 4, 2);
  const auto f = random_field(dom, 2);
  std::vector<double> v = f.values();
  for (auto& x : v) x *= -2.5;
  const HalfSpaceField g(dom, v);
  for (const auto& e : {ExponentTuple(2, 1, 2, 0), ExponentTuple(0.5, infinity, 1, 1)}) {
    EXPECT_NEAR(z_norm(g, e).value, 2.5 * z_norm(f, e).value, 1e-12 * z_norm(g, e).value);
    EXPECT_NEAR(tent_norm(g, e).value, 2.5 * tent_norm(f, e).value, 1e-12 * tent_norm(g, e).value);
  }
}

TEST(BeyondInfinity, ConstantFieldSupremum) {
  const Domain dom(1, 1.0, 64, 1.0 / 64, 1.0 / 4, 4);
  const auto f = HalfSpaceField::from_function(dom, [](double, std::span<const double>) { return 1.0; });
  EXPECT_NEAR(beyond_infinity_norm(f, infinity, 0.0, 0.0).value, 1.0, 1e-14);
}

TEST(BeyondInfinity, WithinBandOfZNorm) {
  const Domain dom(1, 1.0, 128, 1.0 / 64, 1.0 / 4, 4);
  for (int nu : {1, 3, 6}) {
    const auto f = moment_mode(dom, nu);
    for (double q : {1.0, 2.0, infinity})
      for (double a : {0.5, 1.0}) {
        const double lhs = beyond_infinity_norm(f, q, 0.0, a).value;
        const double rhs = z_norm(f, ExponentTuple(infinity, infinity, q, a)).value;
        EXPECT_GT(lhs / rhs, 1.0 / 8);
        EXPECT_LT(lhs / rhs, 8.0);
      }
  }
}

TEST(ChangeOfAngle, UnitApertureIsTentNorm) {
  const Domain dom(1, 1.0, 64, 1.0 / 64, 1.0 / 8, 4);
  const auto f = random_field(dom, 5);
  for (const auto& e : {ExponentTuple(2, 2, 2, 0), ExponentTuple(0.5, 1, infinity, 0), ExponentTuple(infinity, 2, 1, 0.5)})
    EXPECT_EQ(change_of_angle_norm(f, e, 1.0).value, tent_norm(f, e).value);
  EXPECT_THROW(change_of_angle_norm(f, ExponentTuple(2, 2, 2, 0), 8.0), geometry_error);
  EXPECT_THROW(change_of_angle_norm(f, ExponentTuple(2, 2, 2, 0), 0.5), parameter_error);
}

TEST(ChangeOfAngle, GrowthSlopeWithinBound) {
  const Domain dom(1, 1.0, 128, 1.0 / 256, 1.0 / 16, 4);
  const auto f = moment_mode(dom, 2);
  for (const auto& e : {ExponentTuple(1, 2, 1, 0), ExponentTuple(2, 2, 2, 0), ExponentTuple(infinity, 2, 1, 0)}) {
    const std::vector<double> lam{2, 4, 8};
    std::vector<double> lx, ly;
    for (double l : lam) lx.push_back(std::log(l)), ly.push_back(std::log(change_of_angle_norm(f, e, l).value));
    const double mx = (lx[0] + lx[1] + lx[2]) / 3, my = (ly[0] + ly[1] + ly[2]) / 3;
    double sxy = 0, sxx = 0;
    for (int i = 0; i < 3; ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
    EXPECT_LE(sxy / sxx, 1.0 / e.min_pqr() + 0.1) << e.str();
  }
}

TEST(JohnNirenberg, AlphaEqualQIsTentNorm) {
  const Domain dom(1, 1.0, 64, 1.0 / 64, 1.0 / 4, 4);
  const auto f = random_field(dom, 17);
  for (double q : {1.0, 2.0, 3.0}) {
    const ExponentTuple e(infinity, q, 2, 0.5);
    EXPECT_NEAR(jn_norm(f, e, q).value, tent_norm(f, e).value, 1e-12 * tent_norm(f, e).value);
  }
  EXPECT_THROW(jn_norm(f, ExponentTuple(2, 2, 2, 0), 1.0), parameter_error);
}

TEST(JohnNirenberg, CrossAlphaBand) {
  const Domain dom(1, 1.0, 128, 1.0 / 64, 1.0 / 4, 4);
  for (int nu : {1, 4}) {
    const auto f = moment_mode(dom, nu);
    const ExponentTuple e(infinity, 2, 2, 0);
    const double t = tent_norm(f, e).value;
    for (double a : {0.5, 1.0, 2.0}) {
      const double r = jn_norm(f, e, a).value / t;
      EXPECT_GT(r, 1.0 / 8);
      EXPECT_LT(r, 8.0);
    }
  }
}

TEST(WhitneySpec, NonDefaultWindowsStayComparable) {
  const Domain dom(1, 1.0, 128, 1.0 / 64, 1.0 / 4, 4);
  const auto f = moment_mode(dom, 3);
  const ExponentTuple e(2, 2, 2, 0);
  const auto base = tent_norm(f, e);
  const auto alt = tent_norm(f, e, AverageSpec(0.25, 1, 2));
  EXPECT_EQ(alt.variant, NormVariant::whitney);
  EXPECT_GT(alt.value / base.value, 1.0 / 8);
  EXPECT_LT(alt.value / base.value, 8.0);
  EXPECT_NE(base.truncation().find("t in"), std::string::npos);
}
