#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "tentkit/dyadic.hpp"

using namespace tentkit;

namespace {

Domain dyadic_domain(int d = 1) { return d == 1 ? Domain(1, 1.0, 64, 1.0 / 64, 1.0 / 4, 4) : Domain(2, 1.0, 16, 1.0 / 16, 1.0 / 2, 2); }

LocalMeanField random_lm(const Domain& dom, double r, unsigned seed, double density = 0.6) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0, 1);
  LocalMeanField lm(dom, r, dom.generation_min(), dom.generation_max());
  for (int k = lm.k_min(); k <= lm.k_max(); ++k)
    for (auto& v : lm.level(k)) v = U(rng) < density ? U(rng) * 2 : 0.0;
  return lm;
}

// Brute-force c-median: smallest sample value t with #{g > t} < c N.
double median_oracle(const std::vector<double>& g, double c) {
  double best = infinity;
  for (double t : g) {
    std::size_t above = 0;
    for (double v : g) above += v > t;
    if (static_cast<double>(above) < c * static_cast<double>(g.size())) best = std::min(best, t);
  }
  return best;
}

}  // namespace

TEST(LocalMeans, ZeroField) {
  const Domain dom = dyadic_domain();
  const auto lm = local_means(HalfSpaceField(dom), 2.0);
  for (int k = lm.k_min(); k <= lm.k_max(); ++k)
    for (double v : lm.level(k)) EXPECT_EQ(v, 0.0);
}

TEST(LocalMeans, IndicatorOfWhitneyBoxHasUnitMass) {
  const Domain dom = dyadic_domain();
  // The lowest generation's box sits partly below s_min.
  for (int k = dom.generation_min() + 1; k <= dom.generation_max(); ++k) {
    const double len = std::ldexp(1.0, k);
    const double lo = len * 1;  // cube offset 1
    const auto f = HalfSpaceField::from_function(dom, [&](double s, std::span<const double> y) {
      const bool in_s = s > len / 2 * (1 + 1e-12) && s <= len * (1 + 1e-12);
      const bool in_y = y[0] >= lo - 1e-12 && y[0] < lo + len - 1e-12;
      return in_s && in_y ? 1.0 : 0.0;
    });
    if (len * 2 > dom.side()) continue;
    const auto lm = local_means(f, 1.0);
    // ∬_{Q̄} dy ds/s² = ℓ (2/ℓ − 1/ℓ) = 1.
    EXPECT_NEAR(lm.get(DyadicCube{k, {1}}), 1.0, 1e-12) << "k=" << k;
  }
}

TEST(LocalMeans, Homogeneity) {
  const Domain dom = dyadic_domain(2);
  std::mt19937 rng(1);
  std::normal_distribution<double> N;
  std::vector<double> v(dom.size()), w(dom.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = N(rng), w[i] = v[i] / 2;
  for (double r : {0.5, 2.0, infinity}) {
    const auto a = local_means(HalfSpaceField(dom, v), r);
    const auto b = local_means(HalfSpaceField(dom, w), r);
    for (int k = a.k_min(); k <= a.k_max(); ++k)
      for (std::size_t i = 0; i < a.level(k).size(); ++i) EXPECT_NEAR(b.level(k)[i], a.level(k)[i] / 2, 1e-13);
  }
}

TEST(DyadicTentNorm, SingleCube) {
  for (int d : {1, 2}) {
    const Domain dom = dyadic_domain(d);
    for (const auto& e : {ExponentTuple(2, 2, 2, 0), ExponentTuple(0.5, 1, 2, 0.75), ExponentTuple(3, infinity, 2, -1),
                          ExponentTuple(infinity, 2, 2, 0.5)}) {
      LocalMeanField lm(dom, 2.0, dom.generation_min(), dom.generation_max());
      const DyadicCube q{dom.generation_min() + 1, std::vector<int>(static_cast<std::size_t>(d), 1)};
      lm.set(q, 1.0);
      const double vol = q.volume();
      const double expected = (is_inf(e.p) ? 1.0 : std::pow(vol, 1 / e.p)) * std::pow(vol, -e.beta / d);
      EXPECT_NEAR(dyadic_tent_norm(lm, e).value, expected, 1e-12 * expected) << e.str() << " d=" << d;
    }
  }
}

TEST(DyadicTentNorm, ZeroAndExponentMismatch) {
  const Domain dom = dyadic_domain();
  LocalMeanField lm(dom, 2.0, dom.generation_min(), dom.generation_max());
  EXPECT_EQ(dyadic_tent_norm(lm, ExponentTuple(1, 1, 2, 0)).value, 0.0);
  EXPECT_EQ(dyadic_tent_norm(lm, ExponentTuple(infinity, 1, 2, 0)).value, 0.0);
  EXPECT_THROW(dyadic_tent_norm(lm, ExponentTuple(1, 1, 1, 0)), parameter_error);
}

TEST(DyadicTentNorm, RequiresDyadicGrid) {
  const Domain dom(1, 1.0, 48, 1.0 / 64, 1.0 / 4, 4);
  EXPECT_THROW(local_means(HalfSpaceField(dom), 2.0), parameter_error);
}

TEST(DyadicSubsetNorm, FullSubsetsReproduceNorm) {
  const Domain dom = dyadic_domain(2);
  const auto lm = random_lm(dom, 2.0, 3);
  // E_Q = Q needs ε < 1 since |E_Q| > ε|Q| is strict.
  SubsetFamily full(0.999, dom.h(), 2), half(0.5, dom.h(), 2);
  for (int k = lm.k_min(); k <= lm.k_max(); ++k)
    for (std::size_t i = 0; i < lm.cube_count(k); ++i) {
      const auto q = lm.cube(k, i);
      const std::size_t n = full.cells(q);
      std::vector<bool> most(n, false);
      for (std::size_t c = 0; c <= n / 2; ++c) most[c] = true;
      full.insert(q, std::vector<bool>(n, true));
      half.insert(q, most);
    }
  for (const auto& e : {ExponentTuple(2, 2, 2, 0), ExponentTuple(0.5, 1, 2, 1), ExponentTuple(infinity, 2, 2, 0),
                        ExponentTuple(infinity, infinity, 2, 0.5)}) {
    const double D = dyadic_tent_norm(lm, e).value;
    EXPECT_NEAR(dyadic_subset_norm(lm, e, full).value, D, 1e-12 * D) << e.str();
    EXPECT_LE(dyadic_subset_norm(lm, e, half).value, D * (1 + 1e-12)) << e.str();
  }
}

TEST(DyadicSubsetNorm, MissingSubsetIsCoverageError) {
  const Domain dom = dyadic_domain();
  const auto lm = random_lm(dom, 2.0, 4, 1.0);
  SubsetFamily empty(0.5, dom.h(), 1);
  EXPECT_THROW(dyadic_subset_norm(lm, ExponentTuple(2, 2, 2, 0), empty), coverage_error);
}

TEST(LocalSquareFunction, BasicCases) {
  const Domain dom = dyadic_domain();
  const ExponentTuple e(2, 2, 2, 0.5);
  LocalMeanField lm(dom, 2.0, dom.generation_min(), dom.generation_max());
  const DyadicCube p{dom.generation_max(), {1}};
  for (double v : local_square_function(lm, e, p)) EXPECT_EQ(v, 0.0);
  lm.set(p, 1.0);
  for (double v : local_square_function(lm, e, p)) EXPECT_NEAR(v, std::pow(p.volume(), -e.beta), 1e-13);
}

TEST(LocalSquareFunction, MonotoneUnderAddingCubes) {
  const Domain dom = dyadic_domain();
  std::mt19937 rng(21);
  for (const auto& e : {ExponentTuple(2, 2, 2, 0), ExponentTuple(1, infinity, 2, 0.5), ExponentTuple(1, 0.5, 2, -0.5)}) {
    auto lm = random_lm(dom, 2.0, 8, 0.4);
    const DyadicCube p{dom.generation_max(), {2}};
    auto prev = local_square_function(lm, e, p);
    for (int step = 0; step < 30; ++step) {
      const int k = lm.k_min() + static_cast<int>(rng() % static_cast<unsigned>(lm.k_max() - lm.k_min() + 1));
      const std::size_t i = rng() % lm.cube_count(k);
      lm.level(k)[i] += 0.5;
      const auto cur = local_square_function(lm, e, p);
      for (std::size_t x = 0; x < cur.size(); ++x) EXPECT_GE(cur[x], prev[x] * (1 - 1e-14));
      prev = cur;
    }
  }
}

TEST(CMedian, HandCasesAndBruteForce) {
  EXPECT_EQ(c_median(std::vector<double>(6, 2.5), 0.3), 2.5);
  const std::vector<double> g{0, 0, 0, 1};
  EXPECT_EQ(c_median(g, 0.25), 1.0);
  EXPECT_EQ(c_median(g, 0.5), 0.0);
  EXPECT_EQ(median_oracle(g, 0.25), 1.0);
  EXPECT_EQ(median_oracle(g, 0.5), 0.0);
  std::mt19937 rng(13);
  std::uniform_int_distribution<int> V(0, 5);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> a(1 + rng() % 16);
    for (auto& x : a) x = V(rng);
    for (double c : {0.1, 0.25, 0.5, 0.8}) {
      EXPECT_EQ(c_median(a, c), median_oracle(a, c));
      std::vector<double> b = a;
      for (auto& x : b) x += V(rng);
      EXPECT_GE(c_median(b, c), c_median(a, c));
    }
  }
  EXPECT_THROW(c_median(g, 1.0), parameter_error);
}

TEST(MedianField, ZeroAndSingleCubeSupport) {
  const Domain dom = dyadic_domain();
  const ExponentTuple e(2, 2, 2, 0);
  LocalMeanField lm(dom, 2.0, dom.generation_min(), dom.generation_max());
  for (double v : median_field(lm, e, 0.25)) EXPECT_EQ(v, 0.0);
  const DyadicCube q{dom.generation_min() + 2, {3}};
  lm.set(q, 1.0);
  const auto m = median_field(lm, e, 0.25);
  // Enumeration oracle: only dyadic P ⊇ Q see a nonzero G_P.
  std::vector<double> oracle(dom.n_points(), 0.0);
  for (int k = q.k; k <= lm.k_max(); ++k) {
    DyadicCube p = q;
    while (p.k < k) p = p.parent();
    const auto G = local_square_function(lm, e, p);
    const double med = median_oracle(G, 0.25);
    const int cells = lm.cells_per_axis(k);
    for (int c = 0; c < cells; ++c) {
      const std::size_t x = static_cast<std::size_t>(p.offset[0] * cells + c);
      oracle[x] = std::max(oracle[x], med);
    }
  }
  for (std::size_t x = 0; x < m.size(); ++x) {
    EXPECT_EQ(m[x], oracle[x]) << x;
    // Support stays inside the top ancestor of Q.
    const int top = lm.cells_per_axis(lm.k_max());
    DyadicCube a = q;
    while (a.k < lm.k_max()) a = a.parent();
    if (static_cast<int>(x) / top != a.offset[0]) {
      EXPECT_EQ(m[x], 0.0);
    }
  }
  EXPECT_GT(*std::max_element(m.begin(), m.end()), 0.0);
}

TEST(SequenceNorm, SingleCubeAndZero) {
  CubeSequence s;
  EXPECT_EQ(sequence_norm(s, 2, 2, 0), 0.0);
  const DyadicCube q{-2, {1}};
  s.set(q, std::sqrt(q.volume()));
  for (double p : {0.5, 1.0, 2.0, 4.0}) EXPECT_NEAR(sequence_norm(s, p, 2, 0), std::pow(q.volume(), 1 / p), 1e-14);
}

TEST(SequenceNorm, MatchesDyadicTentNormTermByTerm) {
  for (int d : {1, 2}) {
    const Domain dom = dyadic_domain(d);
    const auto lm = random_lm(dom, 2.0, 30 + d);
    const auto s = sequence_from_local_means(lm);
    for (const auto& e : {ExponentTuple(2, 2, 2, 0), ExponentTuple(0.5, 1, 2, 1), ExponentTuple(3, infinity, 2, -0.5),
                          ExponentTuple(infinity, 2, 2, 0.25), ExponentTuple(infinity, infinity, 2, 0)}) {
      const double D = dyadic_tent_norm(lm, e).value;
      EXPECT_NEAR(sequence_norm(s, e.p, e.q, e.beta), D, 1e-12 * D) << e.str() << " d=" << d;
    }
  }
}

TEST(JnDyadicNorm, AlphaEqualQIsDyadicNorm) {
  const Domain dom = dyadic_domain(2);
  const auto lm = random_lm(dom, 2.0, 77);
  for (double q : {0.5, 1.0, 2.0}) {
    const ExponentTuple e(infinity, q, 2, 0.3);
    const double D = dyadic_tent_norm(lm, e).value;
    EXPECT_NEAR(jn_dyadic_norm(lm, e, q).value, D, 1e-12 * D);
  }
  LocalMeanField zero(dom, 2.0, dom.generation_min(), dom.generation_max());
  EXPECT_EQ(jn_dyadic_norm(zero, ExponentTuple(infinity, 2, 2, 0), 1.0).value, 0.0);
}

TEST(JnDyadicNorm, CrossAlphaBand) {
  const Domain dom = dyadic_domain();
  const auto lm = random_lm(dom, 2.0, 5);
  const ExponentTuple e(infinity, 2, 2, 0);
  const double D = dyadic_tent_norm(lm, e).value;
  double prev = 0;
  for (double a : {0.5, 1.0, 2.0, 4.0}) {
    const double v = jn_dyadic_norm(lm, e, a).value;
    EXPECT_GT(v / D, 1.0 / 8);
    EXPECT_LT(v / D, 8.0);
    EXPECT_GE(v, prev * (1 - 1e-12));  // power means grow with α
    prev = v;
  }
}
