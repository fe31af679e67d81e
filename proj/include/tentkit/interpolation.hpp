#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tentkit/core.hpp"
#include "tentkit/dyadic.hpp"
#include "tentkit/quadrature.hpp"

namespace tentkit {

// Holmstedt form (∫_0^{t^{p0}} g*(u)^{p0} du)^{1/p0}, equivalent to K(t, g; L^{p0}, L^∞).
inline double k_functional_lp(std::span<const double> g, double cell, double p0, double t) {
  if (!(p0 > 0) || !std::isfinite(p0)) throw parameter_error("p0 must be positive and finite");
  if (!(t > 0)) throw parameter_error("t must be positive");
  const auto star = decreasing_rearrangement(g, cell);
  return std::pow(star.integral_power(std::pow(t, p0), p0), 1.0 / p0);
}

// ‖(g − λ)_+‖_{L^{p0}}.
inline double e_functional_lp(std::span<const double> g, double cell, double p0, double lambda) {
  if (!(p0 > 0) || !std::isfinite(p0)) throw parameter_error("p0 must be positive and finite");
  detail::Accumulator acc;
  for (double v : g) {
    if (!(v >= 0)) throw parameter_error("K/E functionals need a nonnegative function");
    if (v > lambda) acc.add(std::pow(v - lambda, p0));
  }
  return std::pow(std::max(acc.value(), 0.0) * cell, 1.0 / p0);
}

struct KValue {
  double value = 0.0;
  double lambda = 0.0;  // truncation level of the witnessing split
  double norm0 = 0.0;   // ‖(g − λ)_+‖_{p0}
  double norm1 = 0.0;   // ‖min(g, λ)‖_∞
};

// inf over truncations g = (g − λ)_+ + min(g, λ) of ‖·‖_{p0} + t‖·‖_∞.
inline KValue k_functional_lp_truncation(std::span<const double> g, double cell, double p0, double t) {
  if (!(t > 0)) throw parameter_error("t must be positive");
  std::vector<double> bp{0.0};
  for (double v : g) bp.push_back(v);
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  auto F = [&](double lam) { return e_functional_lp(g, cell, p0, lam) + t * lam; };
  std::size_t best = 0;
  double fbest = F(bp[0]);
  for (std::size_t i = 1; i < bp.size(); ++i) {
    double v = F(bp[i]);
    if (v < fbest) {
      fbest = v;
      best = i;
    }
  }
  double lam = bp[best];
  for (int side = -1; side <= 1; side += 2) {
    const long nb = static_cast<long>(best) + side;
    if (nb < 0 || nb >= static_cast<long>(bp.size())) continue;
    double a = std::min(bp[best], bp[static_cast<std::size_t>(nb)]);
    double b = std::max(bp[best], bp[static_cast<std::size_t>(nb)]);
    const double phi = (std::sqrt(5.0) - 1) / 2;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = F(c), fd = F(d);
    for (int it = 0; it < 100 && b - a > 1e-15 * std::max(1.0, b); ++it) {
      if (fc < fd) {
        b = d, d = c, fd = fc, c = b - phi * (b - a), fc = F(c);
      } else {
        a = c, c = d, fc = fd, d = a + phi * (b - a), fd = F(d);
      }
    }
    const double m = (a + b) / 2;
    if (F(m) < fbest) fbest = F(m), lam = m;
  }
  return {fbest, lam, e_functional_lp(g, cell, p0, lam), lam};
}

// K_∞(t) = inf_λ max(E(λ), tλ), at the crossing E(λ) = tλ.
inline KValue k_inf_functional_lp(std::span<const double> g, double cell, double p0, double t) {
  if (!(t > 0)) throw parameter_error("t must be positive");
  double hi = 0;
  for (double v : g) hi = std::max(hi, v);
  double lo = 0;
  for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(hi, 1e-300); ++it) {
    const double mid = (lo + hi) / 2;
    if (e_functional_lp(g, cell, p0, mid) > t * mid)
      lo = mid;
    else
      hi = mid;
  }
  const double e = e_functional_lp(g, cell, p0, hi);
  return {std::max(e, t * hi), hi, e, hi};
}

struct CoupleSpec {
  enum class Kind { lp_pair, tent_pair, q_endpoint_pair };

  Kind kind = Kind::lp_pair;
  ExponentTuple e0;
  ExponentTuple e1;
  std::string strategy;

  static CoupleSpec lp_pair(double p0) {
    CoupleSpec c;
    c.kind = Kind::lp_pair;
    c.e0 = ExponentTuple(p0, infinity, infinity, 0.0);
    c.e1 = ExponentTuple(infinity, infinity, infinity, 0.0);
    c.strategy = "truncation";
    return c;
  }

  // (T^{p0,q,r}_β, T^{∞,q,r}_β), split along the median field.
  static CoupleSpec tent_pair(const ExponentTuple& e0, const ExponentTuple& e1) {
    CoupleSpec c;
    c.kind = Kind::tent_pair;
    c.e0 = e0;
    c.e1 = e1;
    c.strategy = "median_split";
    c.validate();
    return c;
  }

  // (T^{p,q0,r}_{β0}, T^{p,q1,r}_{β1}), split by generation.
  static CoupleSpec q_endpoint_pair(const ExponentTuple& e0, const ExponentTuple& e1) {
    CoupleSpec c;
    c.kind = Kind::q_endpoint_pair;
    c.e0 = e0;
    c.e1 = e1;
    c.strategy = "generation_cut";
    c.validate();
    return c;
  }

  void validate() const {
    e0.validate();
    e1.validate();
    if (kind == Kind::tent_pair) {
      if (e0.q != e1.q || e0.r != e1.r || e0.beta != e1.beta)
        throw parameter_error("tent couple members must share q, r, beta");
      if (is_inf(e0.p) || !is_inf(e1.p)) throw parameter_error("tent couple needs p0 < inf and p1 = inf");
    } else if (kind == Kind::q_endpoint_pair) {
      if (e0.p != e1.p || e0.r != e1.r) throw parameter_error("q-endpoint couple members must share p and r");
      if (e0.beta == e1.beta) throw parameter_error("q-endpoint couple needs beta0 != beta1");
    }
  }
};

// Upper bound on K(t) with the witnessing split.
struct KBound {
  double value = 0.0;
  double threshold = 0.0;
  double norm0 = 0.0;
  double norm1 = 0.0;
  bool upper_bound = true;
};

struct SplitCandidate {
  double threshold = 0.0;
  double norm0 = 0.0;
  double norm1 = 0.0;
};

namespace detail {

inline std::vector<double> threshold_levels(std::vector<double> v, std::size_t cap) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  if (v.size() <= cap) return v;
  std::vector<double> out;
  for (std::size_t i = 0; i < cap; ++i) out.push_back(v[i * (v.size() - 1) / (cap - 1)]);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

// For each threshold λ over the median field m: A+ = {Q : |Q ∩ {m > λ}| > |Q|/2},
// f0 = Σ_{A+} 1_{Q̄} f, f1 = f − f0, measured in the dyadic norms of the couple.
inline std::vector<SplitCandidate> tent_split_candidates(const LocalMeanField& lm, const CoupleSpec& couple,
                                                         double c = 0.25, std::size_t max_levels = 512) {
  couple.validate();
  std::vector<SplitCandidate> out;
  if (couple.kind == CoupleSpec::Kind::tent_pair) {
    const auto m = median_field(lm, couple.e0, c);
    auto levels = detail::threshold_levels(m, max_levels);
    levels.insert(levels.begin(), -1.0);
    std::vector<std::vector<std::size_t>> maps;
    for (int k = lm.k_min(); k <= lm.k_max(); ++k) maps.push_back(lm.cell_to_cube(k));
    for (double thr : levels) {
      std::vector<std::vector<char>> plus;
      for (int k = lm.k_min(); k <= lm.k_max(); ++k) {
        const auto& map = maps[static_cast<std::size_t>(k - lm.k_min())];
        std::vector<std::size_t> cnt(lm.cube_count(k), 0);
        for (std::size_t x = 0; x < map.size(); ++x)
          if (m[x] > thr) ++cnt[map[x]];
        const std::size_t cells = detail::ipow(static_cast<std::size_t>(lm.cells_per_axis(k)), lm.d());
        std::vector<char> p(cnt.size());
        for (std::size_t i = 0; i < cnt.size(); ++i) p[i] = 2 * cnt[i] > cells;
        plus.push_back(std::move(p));
      }
      auto in_plus = [&](int k, std::size_t i) { return plus[static_cast<std::size_t>(k - lm.k_min())][i] != 0; };
      const auto f0 = lm.masked(in_plus);
      const auto f1 = lm.masked([&](int k, std::size_t i) { return !in_plus(k, i); });
      out.push_back({thr, dyadic_tent_norm(f0, couple.e0).value, dyadic_tent_norm(f1, couple.e1).value});
    }
  } else if (couple.kind == CoupleSpec::Kind::q_endpoint_pair) {
    for (int cut = lm.k_min(); cut <= lm.k_max() + 1; ++cut) {
      const auto small = lm.masked([&](int k, std::size_t) { return k < cut; });
      const auto large = lm.masked([&](int k, std::size_t) { return k >= cut; });
      out.push_back({static_cast<double>(cut), dyadic_tent_norm(small, couple.e0).value,
                     dyadic_tent_norm(large, couple.e1).value});
      out.push_back({-static_cast<double>(cut), dyadic_tent_norm(large, couple.e0).value,
                     dyadic_tent_norm(small, couple.e1).value});
    }
  } else {
    throw parameter_error("tent K-functional needs a tent or q-endpoint couple");
  }
  return out;
}

inline KBound k_functional_tent(const std::vector<SplitCandidate>& cands, double t) {
  if (!(t > 0)) throw parameter_error("t must be positive");
  if (cands.empty()) throw empty_domain_error("no split candidates");
  KBound best;
  best.value = infinity;
  for (const auto& s : cands) {
    const double v = s.norm0 + t * s.norm1;
    if (v < best.value) best = {v, s.threshold, s.norm0, s.norm1, true};
  }
  return best;
}

inline KBound k_functional_tent(const LocalMeanField& lm, const CoupleSpec& couple, double t) {
  return k_functional_tent(tent_split_candidates(lm, couple), t);
}

template <class Scalar>
KBound k_functional_tent(const BasicHalfSpaceField<Scalar>& f, const CoupleSpec& couple, double t) {
  return k_functional_tent(local_means(f, couple.e0.r), couple, t);
}

// (Σ t^{−θq} K(t)^q Δlog t)^{1/q} with trapezoid weights in log t; sup form for q = ∞.
inline double real_interpolation_norm(std::vector<std::pair<double, double>> tk, double theta, double q) {
  if (!(theta > 0 && theta < 1)) throw parameter_error("theta must lie in (0, 1)");
  require_exponent(q, "q");
  if (tk.empty()) throw empty_domain_error("empty t-grid");
  std::sort(tk.begin(), tk.end());
  if (is_inf(q)) {
    double m = 0;
    for (auto [t, k] : tk) m = std::max(m, std::pow(t, -theta) * k);
    return m;
  }
  if (tk.size() < 2) throw empty_domain_error("t-grid needs at least two points");
  detail::Accumulator acc;
  for (std::size_t i = 0; i < tk.size(); ++i) {
    const double lo = std::log(tk[i == 0 ? 0 : i - 1].first);
    const double hi = std::log(tk[i + 1 == tk.size() ? i : i + 1].first);
    const double w = (hi - lo) / 2;
    const auto [t, k] = tk[i];
    acc.add(w * std::pow(std::pow(t, -theta) * k, q));
  }
  return std::pow(std::max(acc.value(), 0.0), 1.0 / q);
}

// Geometric grid, per_decade points per factor 10, covering [t_lo, t_hi].
inline std::vector<double> geometric_t_grid(double t_lo, double t_hi, int per_decade = 16) {
  if (!(t_lo > 0 && t_hi > t_lo) || per_decade < 1) throw parameter_error("bad t-grid range");
  const int n = static_cast<int>(std::ceil(std::log10(t_hi / t_lo) * per_decade - 1e-9));
  std::vector<double> out;
  for (int i = 0; i <= n; ++i) out.push_back(t_lo * std::pow(10.0, static_cast<double>(i) / per_decade));
  return out;
}

// Centered at ‖f‖₀/‖f‖₁, `decades` on either side.
inline std::vector<double> auto_t_grid(double norm0, double norm1, double decades, int per_decade = 16) {
  if (!(norm0 > 0 && norm1 > 0)) throw empty_domain_error("auto t-grid needs nonzero couple norms");
  const double c = norm0 / norm1;
  return geometric_t_grid(c * std::pow(10.0, -decades), c * std::pow(10.0, decades), per_decade);
}

}  // namespace tentkit
