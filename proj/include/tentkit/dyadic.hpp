#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <vector>

#include "tentkit/core.hpp"
#include "tentkit/quadrature.hpp"
#include "tentkit/tent_norms.hpp"

namespace tentkit {

// a_Q = ‖f‖_{L^r(Q̄, dy ds/s^{d+1})} for the torus cubes of generations k_min..k_max.
class LocalMeanField {
 public:
  LocalMeanField(Domain dom, double r, int k_min, int k_max) : dom_(std::move(dom)), r_(r), k_min_(k_min), k_max_(k_max) {
    require_exponent(r, "r");
    if (!dom_.dyadic()) throw parameter_error("dyadic operations need power-of-two side, n_space, s_min, s_max");
    if (k_min > k_max || k_min < dom_.generation_min() || k_max > dom_.generation_max())
      throw range_error("generation range outside the grid");
    for (int k = k_min; k <= k_max; ++k) levels_.emplace_back(cube_count(k), 0.0);
  }

  const Domain& domain() const { return dom_; }
  double r() const { return r_; }
  int k_min() const { return k_min_; }
  int k_max() const { return k_max_; }
  int d() const { return dom_.d(); }

  int cubes_per_axis(int k) const { return 1 << (dom_.log2_side() - k); }
  int cells_per_axis(int k) const { return 1 << (k - dom_.log2_h()); }
  std::size_t cube_count(int k) const { return detail::ipow(static_cast<std::size_t>(cubes_per_axis(k)), dom_.d()); }

  std::vector<double>& level(int k) { return levels_.at(static_cast<std::size_t>(k - k_min_)); }
  const std::vector<double>& level(int k) const { return levels_.at(static_cast<std::size_t>(k - k_min_)); }

  std::size_t index(const DyadicCube& q) const {
    if (q.k < k_min_ || q.k > k_max_ || q.d() != dom_.d()) throw range_error("cube outside the truncation range");
    const int n = cubes_per_axis(q.k);
    std::size_t f = 0;
    for (int o : q.offset) {
      if (o < 0 || o >= n) throw range_error("cube outside the torus");
      f = f * n + static_cast<std::size_t>(o);
    }
    return f;
  }
  DyadicCube cube(int k, std::size_t idx) const {
    const int n = cubes_per_axis(k);
    DyadicCube q{k, std::vector<int>(dom_.d())};
    for (int a = dom_.d() - 1; a >= 0; --a) {
      q.offset[a] = static_cast<int>(idx % n);
      idx /= n;
    }
    return q;
  }

  double get(const DyadicCube& q) const { return level(q.k)[index(q)]; }
  void set(const DyadicCube& q, double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw parameter_error("local means must be finite and >= 0");
    level(q.k)[index(q)] = v;
  }

  // Cube index at generation k of every grid cell.
  std::vector<std::size_t> cell_to_cube(int k) const {
    const int c = cells_per_axis(k);
    const int n = cubes_per_axis(k);
    std::vector<std::size_t> out(dom_.n_points());
    std::vector<int> x(dom_.d());
    for (std::size_t f = 0; f < out.size(); ++f) {
      dom_.unflat(f, x);
      std::size_t idx = 0;
      for (int a = 0; a < dom_.d(); ++a) idx = idx * n + static_cast<std::size_t>(x[a] / c);
      out[f] = idx;
    }
    return out;
  }

  // Row-major index of a cell inside its generation-k cube.
  std::size_t local_cell_index(std::size_t cell, int k) const {
    const int c = cells_per_axis(k);
    std::vector<int> x = dom_.unflat(cell);
    std::size_t idx = 0;
    for (int a = 0; a < dom_.d(); ++a) idx = idx * c + static_cast<std::size_t>(x[a] % c);
    return idx;
  }

  LocalMeanField masked(const std::function<bool(int, std::size_t)>& keep) const {
    LocalMeanField out = *this;
    for (int k = k_min_; k <= k_max_; ++k) {
      auto& lv = out.level(k);
      for (std::size_t i = 0; i < lv.size(); ++i)
        if (!keep(k, i)) lv[i] = 0.0;
    }
    return out;
  }

 private:
  Domain dom_;
  double r_;
  int k_min_;
  int k_max_;
  std::vector<std::vector<double>> levels_;
};

template <class Scalar>
LocalMeanField local_means(const BasicHalfSpaceField<Scalar>& f, double r, int k_min, int k_max) {
  const Domain& dom = f.domain();
  LocalMeanField lm(dom, r, k_min, k_max);
  const std::size_t np = dom.n_points();
  const double cell = dom.cell_volume();
  for (int k = k_min; k <= k_max; ++k) {
    const auto c2q = lm.cell_to_cube(k);
    auto& lv = lm.level(k);
    const int top = dom.scale_index_of(k);
    for (int j = std::max(top - dom.m_scale() + 1, 0); j <= std::min(top, dom.n_scales() - 1); ++j) {
      const double w = dom.cell_whitney(j) * cell;
      for (std::size_t x = 0; x < np; ++x) {
        const double v = magnitude(f.at_flat(j, x));
        if (is_inf(r))
          lv[c2q[x]] = std::max(lv[c2q[x]], v);
        else
          lv[c2q[x]] += w * std::pow(v, r);
      }
    }
    if (!is_inf(r))
      for (auto& v : lv) v = std::pow(v, 1.0 / r);
  }
  return lm;
}

template <class Scalar>
LocalMeanField local_means(const BasicHalfSpaceField<Scalar>& f, double r) {
  return local_means(f, r, f.domain().generation_min(), f.domain().generation_max());
}

namespace detail {

inline void check_lm_exponents(const LocalMeanField& lm, const ExponentTuple& e) {
  e.validate();
  if (e.r != lm.r()) throw parameter_error("exponent r differs from the local means' r");
}

// Per generation, per cell: |Q|^{-βq/d} a_Q^q (q < ∞) or |Q|^{-β/d} a_Q (q = ∞).
inline std::vector<std::vector<double>> cell_terms(const LocalMeanField& lm, double q, double beta) {
  std::vector<std::vector<double>> out;
  for (int k = lm.k_min(); k <= lm.k_max(); ++k) {
    const auto c2q = lm.cell_to_cube(k);
    const auto& lv = lm.level(k);
    const double w = std::exp2(-k * beta);
    std::vector<double> t(c2q.size());
    for (std::size_t x = 0; x < t.size(); ++x) t[x] = is_inf(q) ? w * lv[c2q[x]] : std::pow(w * lv[c2q[x]], q);
    out.push_back(std::move(t));
  }
  return out;
}

// Cumulative terms over generations k_min..k: sums, or maxima when q = ∞.
inline std::vector<std::vector<double>> cumulative_terms(const LocalMeanField& lm, double q, double beta) {
  auto t = cell_terms(lm, q, beta);
  for (std::size_t g = 1; g < t.size(); ++g)
    for (std::size_t x = 0; x < t[g].size(); ++x) t[g][x] = is_inf(q) ? std::max(t[g][x], t[g - 1][x]) : t[g][x] + t[g - 1][x];
  return t;
}

inline std::size_t parent_index(const LocalMeanField& lm, int k, std::size_t idx) {
  DyadicCube q = lm.cube(k, idx);
  for (auto& o : q.offset) o /= 2;
  q.k = k + 1;
  return lm.index(q);
}

inline NormResult dyadic_result(double v, const LocalMeanField& lm, const ExponentTuple& e, NormVariant var,
                                double param = 0) {
  NormResult res;
  res.value = v;
  res.exponents = e;
  res.variant = var;
  res.parameter = param;
  res.domain = lm.domain();
  res.k_min = lm.k_min();
  res.k_max = lm.k_max();
  return res;
}

// in_set(k, idx, cell) selects E_Q; measure(k, idx) is |E_Q|, used for p = ∞.
inline double dyadic_norm_impl(const LocalMeanField& lm, const ExponentTuple& e,
                               const std::function<bool(int, std::size_t, std::size_t)>& in_set,
                               const std::function<double(int, std::size_t)>& measure) {
  const Domain& dom = lm.domain();
  const std::size_t np = dom.n_points();
  if (!is_inf(e.p)) {
    std::vector<double> G(np, 0.0);
    for (int k = lm.k_min(); k <= lm.k_max(); ++k) {
      const auto c2q = lm.cell_to_cube(k);
      const auto& lv = lm.level(k);
      const double w = std::exp2(-k * e.beta);
      for (std::size_t x = 0; x < np; ++x) {
        if (lv[c2q[x]] == 0.0 || !in_set(k, c2q[x], x)) continue;
        const double v = w * lv[c2q[x]];
        G[x] = is_inf(e.q) ? std::max(G[x], v) : G[x] + std::pow(v, e.q);
      }
    }
    if (!is_inf(e.q))
      for (auto& v : G) v = std::pow(v, 1.0 / e.q);
    return lp_norm_spatial(G, dom.cell_volume(), e.p);
  }
  if (is_inf(e.q)) {
    double m = 0;
    for (int k = lm.k_min(); k <= lm.k_max(); ++k)
      for (std::size_t i = 0; i < lm.level(k).size(); ++i)
        if (lm.level(k)[i] > 0 && measure(k, i) > 0) m = std::max(m, std::exp2(-k * e.beta) * lm.level(k)[i]);
    return m;
  }
  double best = 0;
  std::vector<double> below;
  for (int k = lm.k_min(); k <= lm.k_max(); ++k) {
    const auto& lv = lm.level(k);
    std::vector<double> S(lv.size(), 0.0);
    for (std::size_t i = 0; i < lv.size(); ++i)
      if (lv[i] > 0) S[i] = measure(k, i) * std::pow(std::exp2(-k * e.beta) * lv[i], e.q);
    if (k > lm.k_min())
      for (std::size_t i = 0; i < below.size(); ++i) S[parent_index(lm, k - 1, i)] += below[i];
    const double vol = std::ldexp(1.0, k * dom.d());
    for (double s : S) best = std::max(best, s / vol);
    below = std::move(S);
  }
  return std::pow(best, 1.0 / e.q);
}

}  // namespace detail

inline NormResult dyadic_tent_norm(const LocalMeanField& lm, const ExponentTuple& e) {
  detail::check_lm_exponents(lm, e);
  const int d = lm.d();
  double v = detail::dyadic_norm_impl(
      lm, e, [](int, std::size_t, std::size_t) { return true; },
      [d](int k, std::size_t) { return std::ldexp(1.0, k * d); });
  return detail::dyadic_result(v, lm, e, NormVariant::dyadic);
}

inline NormResult dyadic_subset_norm(const LocalMeanField& lm, const ExponentTuple& e, const SubsetFamily& fam) {
  detail::check_lm_exponents(lm, e);
  const double cell = lm.domain().cell_volume();
  std::vector<std::vector<const std::vector<bool>*>> masks;
  for (int k = lm.k_min(); k <= lm.k_max(); ++k) {
    const auto& lv = lm.level(k);
    std::vector<const std::vector<bool>*> mk(lv.size(), nullptr);
    for (std::size_t i = 0; i < lv.size(); ++i) {
      mk[i] = fam.find(lm.cube(k, i));
      if (lv[i] > 0 && mk[i] == nullptr) throw coverage_error("no subset for a supported cube");
    }
    masks.push_back(std::move(mk));
  }
  const int k0 = lm.k_min();
  double v = detail::dyadic_norm_impl(
      lm, e,
      [&](int k, std::size_t idx, std::size_t cell_idx) {
        const auto* m = masks[static_cast<std::size_t>(k - k0)][idx];
        return m != nullptr && (*m)[lm.local_cell_index(cell_idx, k)];
      },
      [&](int k, std::size_t idx) {
        const auto* m = masks[static_cast<std::size_t>(k - k0)][idx];
        return m == nullptr ? 0.0 : cell * static_cast<double>(std::count(m->begin(), m->end(), true));
      });
  return detail::dyadic_result(v, lm, e, NormVariant::dyadic_subset);
}

// G_P on the cells of P, row-major inside P.
inline std::vector<double> local_square_function(const LocalMeanField& lm, const ExponentTuple& e,
                                                 const DyadicCube& p) {
  detail::check_lm_exponents(lm, e);
  const std::size_t pidx = lm.index(p);
  const auto cum = detail::cumulative_terms(lm, e.q, e.beta);
  const auto& S = cum[static_cast<std::size_t>(p.k - lm.k_min())];
  const auto c2p = lm.cell_to_cube(p.k);
  std::vector<double> out(detail::ipow(static_cast<std::size_t>(lm.cells_per_axis(p.k)), lm.d()));
  for (std::size_t x = 0; x < c2p.size(); ++x)
    if (c2p[x] == pidx) out[lm.local_cell_index(x, p.k)] = is_inf(e.q) ? S[x] : std::pow(S[x], 1.0 / e.q);
  return out;
}

// inf{t : #{g > t} < c N}, attained at a sample value.
inline double c_median(std::span<const double> g, double c) {
  if (!(c > 0.0 && c < 1.0)) throw parameter_error("c must lie in (0, 1)");
  if (g.empty()) throw empty_domain_error("median of an empty grid function");
  std::vector<double> v(g.begin(), g.end());
  std::sort(v.begin(), v.end());
  const double limit = c * static_cast<double>(v.size());
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    if (static_cast<double>(v.size() - j) < limit) return v[i];
    i = j;
  }
  return v.back();
}

// m(x) = max over dyadic P ∋ x of the c-median of G_P.
inline std::vector<double> median_field(const LocalMeanField& lm, const ExponentTuple& e, double c) {
  detail::check_lm_exponents(lm, e);
  if (!(c > 0.0 && c < 1.0)) throw parameter_error("c must lie in (0, 1)");
  const auto cum = detail::cumulative_terms(lm, e.q, e.beta);
  const std::size_t np = lm.domain().n_points();
  std::vector<double> m(np, 0.0);
  for (int k = lm.k_min(); k <= lm.k_max(); ++k) {
    const auto& S = cum[static_cast<std::size_t>(k - lm.k_min())];
    const auto c2p = lm.cell_to_cube(k);
    std::vector<std::vector<double>> buckets(lm.cube_count(k));
    for (std::size_t x = 0; x < np; ++x) buckets[c2p[x]].push_back(is_inf(e.q) ? S[x] : std::pow(S[x], 1.0 / e.q));
    std::vector<double> med(buckets.size());
    for (std::size_t i = 0; i < buckets.size(); ++i) med[i] = c_median(buckets[i], c);
    for (std::size_t x = 0; x < np; ++x) m[x] = std::max(m[x], med[c2p[x]]);
  }
  return m;
}

inline NormResult jn_dyadic_norm(const LocalMeanField& lm, const ExponentTuple& e, double alpha) {
  detail::check_lm_exponents(lm, e);
  if (!is_inf(e.p)) throw parameter_error("jn_dyadic_norm needs p = inf");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw parameter_error("alpha must be positive and finite");
  const auto cum = detail::cumulative_terms(lm, e.q, e.beta);
  const std::size_t np = lm.domain().n_points();
  const double ex = is_inf(e.q) ? alpha : alpha / e.q;
  double best = 0;
  for (int k = lm.k_min(); k <= lm.k_max(); ++k) {
    const auto& S = cum[static_cast<std::size_t>(k - lm.k_min())];
    const auto c2p = lm.cell_to_cube(k);
    std::vector<double> sum(lm.cube_count(k), 0.0);
    for (std::size_t x = 0; x < np; ++x) sum[c2p[x]] += ex == 1.0 ? S[x] : std::pow(S[x], ex);
    const double cells = static_cast<double>(detail::ipow(static_cast<std::size_t>(lm.cells_per_axis(k)), lm.d()));
    for (double s : sum) best = std::max(best, s / cells);
  }
  return detail::dyadic_result(std::pow(best, 1.0 / alpha), lm, e, NormVariant::dyadic_jn, alpha);
}

// s_Q = |Q|^{1/2} a_Q.
inline CubeSequence sequence_from_local_means(const LocalMeanField& lm) {
  CubeSequence s;
  for (int k = lm.k_min(); k <= lm.k_max(); ++k) {
    const auto& lv = lm.level(k);
    const double half = std::sqrt(std::ldexp(1.0, k * lm.d()));
    for (std::size_t i = 0; i < lv.size(); ++i)
      if (lv[i] > 0) s.set(lm.cube(k, i), half * lv[i]);
  }
  return s;
}

// ‖(Σ_Q (|Q|^{-β/d} s_Q 1̃_Q)^q)^{1/q}‖_{L^p(R^d)}, and the sup over P form for p = ∞.
inline double sequence_norm(const CubeSequence& s, double p, double q, double beta) {
  require_exponent(p, "p");
  require_exponent(q, "q");
  if (s.empty()) return 0.0;
  const int d = s.entries().begin()->first.d();
  std::map<DyadicCube, double> c;
  int kmax = std::numeric_limits<int>::min();
  for (const auto& [cube, v] : s.entries()) {
    if (v == 0.0) continue;
    const double base = std::pow(cube.volume(), -beta / d - 0.5) * v;
    c[cube] = is_inf(q) ? base : std::pow(base, q);
    kmax = std::max(kmax, cube.k);
  }
  if (c.empty()) return 0.0;
  auto combine = [&](double acc, double v) { return is_inf(q) ? std::max(acc, v) : acc + v; };
  auto value_of = [&](const DyadicCube& cube) {
    auto it = c.find(cube);
    return it == c.end() ? 0.0 : it->second;
  };

  if (is_inf(p)) {
    if (is_inf(q)) {
      double m = 0;
      for (const auto& [cube, v] : c) m = std::max(m, v);
      return m;
    }
    std::map<DyadicCube, double> sums;
    for (const auto& [cube, v] : c) {
      DyadicCube a = cube;
      while (true) {
        sums[a] += cube.volume() * v;
        if (a.k >= kmax) break;
        a = a.parent();
      }
    }
    double best = 0;
    for (const auto& [cube, v] : sums) best = std::max(best, v / cube.volume());
    return std::pow(best, 1.0 / q);
  }

  std::set<DyadicCube> inner;
  for (const auto& [cube, v] : c) {
    DyadicCube a = cube;
    while (a.k < kmax) {
      a = a.parent();
      if (!inner.insert(a).second) break;
    }
  }
  std::function<double(const DyadicCube&, double)> eval = [&](const DyadicCube& cube, double acc) -> double {
    if (!inner.count(cube)) {
      const double g = is_inf(q) ? std::pow(acc, p) : std::pow(acc, p / q);
      return cube.volume() * g;
    }
    double total = 0;
    for (const auto& ch : cube_children(cube)) total += eval(ch, combine(acc, value_of(ch)));
    return total;
  };
  double total = 0;
  for (const auto& [cube, v] : c) {
    bool root = true;
    DyadicCube a = cube;
    while (a.k < kmax) {
      a = a.parent();
      if (c.count(a)) {
        root = false;
        break;
      }
    }
    if (root) total += eval(cube, v);
  }
  return std::pow(total, 1.0 / p);
}

}  // namespace tentkit
