#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <functional>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "tentkit/core.hpp"

namespace tentkit {

// C^∞ step: 1 on [0,1], 0 on [2,∞).
inline double smooth_step(double u) {
  if (u <= 1.0) return 1.0;
  if (u >= 2.0) return 0.0;
  const double a = std::exp(-1.0 / (2.0 - u));
  const double b = std::exp(-1.0 / (u - 1.0));
  return a / (a + b);
}

// φ_0(z) = ψ(z) − ψ(2z), supported in [1/2, 2].
inline double lp_bump(double z) { return smooth_step(z) - smooth_step(2.0 * z); }

struct KernelSpec {
  enum class Kind { gauss_weierstrass, lp_block, custom };
  static constexpr int all_moments = 1 << 20;

  Kind kind = Kind::gauss_weierstrass;
  int order = 0;     // N for gauss_weierstrass
  int moments = -1;  // R: vanishing moments of order ≤ R
  std::vector<double> table;  // custom multiplier on a uniform grid over [0, table_max]
  double table_max = 0.0;

  static KernelSpec heat() { return gauss_weierstrass(0); }
  static KernelSpec gauss_weierstrass(int n) {
    if (n < 0) throw parameter_error("Gauss-Weierstrass order must be >= 0");
    KernelSpec k;
    k.kind = Kind::gauss_weierstrass;
    k.order = n;
    k.moments = n - 1;
    return k;
  }
  static KernelSpec lp_block() {
    KernelSpec k;
    k.kind = Kind::lp_block;
    k.moments = all_moments;
    return k;
  }
  static KernelSpec custom(std::vector<double> table, double table_max, int moments) {
    KernelSpec k;
    k.kind = Kind::custom;
    k.table = std::move(table);
    k.table_max = table_max;
    k.moments = moments;
    k.validate();
    return k;
  }

  void validate() const {
    if (moments < -1) throw parameter_error("moment order must be >= -1");
    if (kind == Kind::custom) {
      if (table.size() < 2 || !(table_max > 0)) throw parameter_error("custom multiplier needs a table");
      for (double v : table)
        if (!std::isfinite(v)) throw parameter_error("custom multiplier must be finite");
    }
  }

  // Fourier multiplier at |tξ| = z.
  double multiplier(double z) const {
    switch (kind) {
      case Kind::gauss_weierstrass:
        return (order == 0 ? 1.0 : std::pow(z, order)) * std::exp(-z * z);
      case Kind::lp_block:
        return lp_bump(z);
      case Kind::custom: {
        if (z >= table_max) return 0.0;
        const double u = z / table_max * static_cast<double>(table.size() - 1);
        const auto i = static_cast<std::size_t>(u);
        const double w = u - static_cast<double>(i);
        return i + 1 < table.size() ? (1 - w) * table[i] + w * table[i + 1] : table.back();
      }
    }
    return 0.0;
  }

  std::string describe() const {
    switch (kind) {
      case Kind::gauss_weierstrass:
        return "gauss_weierstrass(N=" + std::to_string(order) + ")";
      case Kind::lp_block:
        return "lp_block(phi0 = psi(|xi|) - psi(2|xi|), psi exp-ratio step on [1,2])";
      case Kind::custom:
        return "custom(" + std::to_string(table.size()) + " samples on [0," + format_exponent(table_max) + "])";
    }
    return "?";
  }
};

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// In-place unnormalized DFT on the d-dimensional grid; sign = FFTW_FORWARD or FFTW_BACKWARD.
inline void fft_inplace(const Domain& dom, std::vector<std::complex<double>>& data, int sign) {
  std::vector<int> dims(static_cast<std::size_t>(dom.d()), dom.n_space());
  auto* buf = fftw_alloc_complex(data.size());
  if (buf == nullptr) throw std::bad_alloc();
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft(dom.d(), dims.data(), buf, buf, sign, FFTW_ESTIMATE);
  }
  auto* view = reinterpret_cast<std::complex<double>*>(buf);
  std::copy(data.begin(), data.end(), view);
  fftw_execute(plan);
  std::copy(view, view + data.size(), data.begin());
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
}

// |ξ| (angular) per flat index.
inline std::vector<double> frequency_magnitudes(const Domain& dom) {
  std::vector<double> out(dom.n_points());
  std::vector<int> idx(dom.d());
  const int n = dom.n_space();
  const double unit = 2.0 * std::numbers::pi / dom.side();
  for (std::size_t f = 0; f < out.size(); ++f) {
    dom.unflat(f, idx);
    double s = 0;
    for (int i : idx) {
      const int nu = i < n - n / 2 ? i : i - n;
      s += static_cast<double>(nu) * nu;
    }
    out[f] = unit * std::sqrt(s);
  }
  return out;
}

template <class Scalar>
std::vector<std::complex<double>> spectrum(const BasicBoundaryField<Scalar>& f) {
  std::vector<std::complex<double>> F(f.values().begin(), f.values().end());
  fft_inplace(f.domain(), F, FFTW_FORWARD);
  return F;
}

template <class Scalar>
std::vector<Scalar> apply_multiplier(const Domain& dom, const std::vector<std::complex<double>>& F,
                                     const std::vector<double>& xi, const std::function<double(double)>& m) {
  std::vector<std::complex<double>> G(F.size());
  for (std::size_t i = 0; i < F.size(); ++i) G[i] = F[i] * m(xi[i]);
  fft_inplace(dom, G, FFTW_BACKWARD);
  const double inv = 1.0 / static_cast<double>(G.size());
  std::vector<Scalar> out(G.size());
  for (std::size_t i = 0; i < G.size(); ++i) {
    if constexpr (std::is_arithmetic_v<Scalar>)
      out[i] = G[i].real() * inv;
    else
      out[i] = G[i] * inv;
  }
  return out;
}

}  // namespace detail

using detail::spectrum;

// (Φ_t ∗ f) at a single scale.
template <class Scalar>
BasicBoundaryField<Scalar> convolve(const BasicBoundaryField<Scalar>& f, const KernelSpec& k, double t) {
  k.validate();
  const Domain& dom = f.domain();
  const auto F = detail::spectrum(f);
  const auto xi = detail::frequency_magnitudes(dom);
  return BasicBoundaryField<Scalar>(dom, detail::apply_multiplier<Scalar>(dom, F, xi, [&](double z) {
                                      return k.multiplier(t * z);
                                    }));
}

// Samples of (Φ_s ∗ f)(y) on the grid of `dom`, computed spectrally.
template <class Scalar>
BasicHalfSpaceField<Scalar> extend(const BasicBoundaryField<Scalar>& f, const KernelSpec& k, const Domain& dom) {
  k.validate();
  if (!dom.same_space(f.domain())) throw parameter_error("boundary data and domain differ in the spatial grid");
  const auto F = detail::spectrum(f);
  const auto xi = detail::frequency_magnitudes(dom);
  std::vector<Scalar> values;
  values.reserve(dom.size());
  for (int j = 0; j < dom.n_scales(); ++j) {
    const double s = dom.scale(j);
    auto slice = detail::apply_multiplier<Scalar>(dom, F, xi, [&](double z) { return k.multiplier(s * z); });
    values.insert(values.end(), slice.begin(), slice.end());
  }
  return BasicHalfSpaceField<Scalar>(dom, std::move(values), f.label());
}

// Members g_k for k = k_lo, k_lo + 1, ...
template <class Scalar>
struct BlockFamily {
  Domain domain;
  int k_lo = 0;
  std::vector<BasicBoundaryField<Scalar>> blocks;
  bool mean_nonzero = false;

  int k_hi() const { return k_lo + static_cast<int>(blocks.size()) - 1; }
  const BasicBoundaryField<Scalar>& block(int k) const { return blocks.at(static_cast<std::size_t>(k - k_lo)); }
};

// Smallest block range whose multipliers sum to 1 on every nonzero grid frequency.
inline std::pair<int, int> covering_block_range(const Domain& dom) {
  const double unit = 2.0 * std::numbers::pi / dom.side();
  const double xmax = unit * (dom.n_space() / 2) * std::sqrt(static_cast<double>(dom.d()));
  return {static_cast<int>(std::floor(std::log2(unit))), static_cast<int>(std::ceil(std::log2(xmax)))};
}

template <class Scalar>
BlockFamily<Scalar> lp_block_transform(const BasicBoundaryField<Scalar>& f, int k_lo, int k_hi) {
  if (k_lo > k_hi) throw parameter_error("empty block range");
  const Domain& dom = f.domain();
  const auto F = detail::spectrum(f);
  const auto xi = detail::frequency_magnitudes(dom);
  BlockFamily<Scalar> fam{dom, k_lo, {}, false};
  double scale = 0;
  for (const auto& v : f.values()) scale = std::max(scale, magnitude(v));
  fam.mean_nonzero = std::abs(F[0]) / static_cast<double>(F.size()) > 1e-12 * std::max(scale, 1e-300);
  for (int k = k_lo; k <= k_hi; ++k) {
    const double t = std::exp2(-k);
    fam.blocks.emplace_back(dom, detail::apply_multiplier<Scalar>(dom, F, xi, [&](double z) { return lp_bump(t * z); }));
  }
  return fam;
}

template <class Scalar>
BlockFamily<Scalar> lp_block_transform(const BasicBoundaryField<Scalar>& f) {
  auto [lo, hi] = covering_block_range(f.domain());
  return lp_block_transform(f, lo, hi);
}

namespace detail {

inline void require_dyadic_torus(const Domain& dom) {
  if (!is_power_of_two(dom.side()) || !is_power_of_two(static_cast<double>(dom.n_space())))
    throw parameter_error("dyadic cubes need power-of-two side and n_space");
}

// Index of the generation-j cube of every cell.
inline std::vector<std::size_t> torus_cube_map(const Domain& dom, int j, std::size_t& count) {
  const int cells = 1 << (j - dom.log2_h());
  const int per_axis = dom.n_space() / cells;
  count = ipow(static_cast<std::size_t>(per_axis), dom.d());
  std::vector<std::size_t> out(dom.n_points());
  std::vector<int> x(dom.d());
  for (std::size_t f = 0; f < out.size(); ++f) {
    dom.unflat(f, x);
    std::size_t idx = 0;
    for (int a = 0; a < dom.d(); ++a) idx = idx * per_axis + static_cast<std::size_t>(x[a] / cells);
    out[f] = idx;
  }
  return out;
}

}  // namespace detail

// sup_Q (⨍_Q Σ_{k ≥ −log2 ℓ(Q)} 2^{kβq} |Φ_k ∗ f|^q)^{1/q} over dyadic cubes of the torus.
template <class Scalar>
double f_endpoint_norm(const BlockFamily<Scalar>& blocks, double q, double beta) {
  require_exponent(q, "q");
  if (is_inf(q)) throw parameter_error("the endpoint norm is defined for q < inf");
  const Domain& dom = blocks.domain;
  detail::require_dyadic_torus(dom);
  double best = 0;
  for (int j = dom.log2_h(); j <= dom.log2_side(); ++j) {
    std::size_t count = 0;
    const auto map = detail::torus_cube_map(dom, j, count);
    std::vector<double> sums(count, 0.0);
    for (int k = std::max(-j, blocks.k_lo); k <= blocks.k_hi(); ++k) {
      const double w = std::exp2(k * beta * q);
      const auto& b = blocks.block(k).values();
      for (std::size_t x = 0; x < b.size(); ++x) sums[map[x]] += w * std::pow(magnitude(b[x]), q);
    }
    const double cells = static_cast<double>(dom.n_points() / count);
    for (double s : sums) best = std::max(best, s / cells);
  }
  return std::pow(best, 1.0 / q);
}

// sup_Q (⨍_Q (Σ_{k ≥ −log2 ℓ(Q)} |g_k|^q)^{α/q})^{1/α}.
template <class Scalar>
double x_norm(const BlockFamily<Scalar>& g, double q, double alpha) {
  require_exponent(q, "q");
  if (!(alpha > 0) || !std::isfinite(alpha)) throw parameter_error("alpha must be positive and finite");
  const Domain& dom = g.domain;
  detail::require_dyadic_torus(dom);
  const std::size_t np = dom.n_points();
  // tail[i][x] = Σ_{k ≥ k_lo + i} |g_k(x)|^q
  const std::size_t K = g.blocks.size();
  std::vector<std::vector<double>> tail(K + 1, std::vector<double>(np, 0.0));
  for (std::size_t i = K; i-- > 0;) {
    const auto& b = g.blocks[i].values();
    for (std::size_t x = 0; x < np; ++x) {
      const double v = magnitude(b[x]);
      tail[i][x] = is_inf(q) ? std::max(tail[i + 1][x], v) : tail[i + 1][x] + std::pow(v, q);
    }
  }
  const double e = is_inf(q) ? alpha : alpha / q;
  double best = 0;
  for (int j = dom.log2_h(); j <= dom.log2_side(); ++j) {
    const int first = std::max(-j, g.k_lo);
    if (first > g.k_hi()) continue;
    const auto& S = tail[static_cast<std::size_t>(first - g.k_lo)];
    std::size_t count = 0;
    const auto map = detail::torus_cube_map(dom, j, count);
    std::vector<double> sums(count, 0.0);
    for (std::size_t x = 0; x < np; ++x) sums[map[x]] += std::pow(S[x], e);
    const double cells = static_cast<double>(np / count);
    for (double s : sums) best = std::max(best, s / cells);
  }
  return std::pow(best, 1.0 / alpha);
}

// sup_y |(Φ_t ∗ f)(x + y)| / (1 + |y|/t)^a over minimum-image offsets y.
template <class Scalar>
BoundaryField peetre_maximal(const BasicBoundaryField<Scalar>& f, const KernelSpec& k, double t, double a) {
  if (!(a > 0)) throw parameter_error("a must be positive");
  if (!(t > 0)) throw parameter_error("t must be positive");
  const Domain& dom = f.domain();
  const auto u = convolve(f, k, t);
  const std::size_t np = dom.n_points();
  const int n = dom.n_space();
  std::vector<double> mag(np);
  for (std::size_t i = 0; i < np; ++i) mag[i] = magnitude(u.values()[i]);
  // weight per offset, offsets indexed like grid points
  std::vector<double> weight(np);
  std::vector<int> o(dom.d());
  for (std::size_t f2 = 0; f2 < np; ++f2) {
    dom.unflat(f2, o);
    double r2 = 0;
    for (int& v : o) {
      if (v >= n - n / 2) v -= n;
      r2 += (v * dom.h()) * (v * dom.h());
    }
    weight[f2] = std::pow(1.0 + std::sqrt(r2) / t, -a);
  }
  std::vector<double> out(np, 0.0);
  std::vector<int> x(dom.d()), y(dom.d()), z(dom.d());
  for (std::size_t fx = 0; fx < np; ++fx) {
    dom.unflat(fx, x);
    double m = 0;
    for (std::size_t fo = 0; fo < np; ++fo) {
      dom.unflat(fo, y);
      for (int i = 0; i < dom.d(); ++i) z[i] = detail::wrap(x[i] + y[i], n);
      m = std::max(m, mag[dom.flat(z)] * weight[fo]);
    }
    out[fx] = m;
  }
  return BoundaryField(dom, std::move(out));
}

struct ConvolutionCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool degenerate = false;
};

// ‖(Σ_k 2^{−|k−l|δ} g_k)_l‖_{X^{q,α}} / ‖(g_l)_l‖_{X^{q,α}}; l runs until the tails fall below 2^{-40}.
template <class Scalar>
ConvolutionCheck convolution_inequality_check(const BlockFamily<Scalar>& g, double delta, double q, double alpha) {
  const Domain& dom = g.domain;
  if (!(alpha > 0) || !std::isfinite(alpha)) throw parameter_error("alpha must be positive and finite");
  if (!(delta > dom.d() / alpha)) throw hypothesis_error("convolution inequality needs delta > d/alpha");
  const std::size_t np = dom.n_points();
  const int ext = static_cast<int>(std::ceil(40.0 / delta));
  BlockFamily<double> G;
  G.domain = dom;
  G.k_lo = std::max(g.k_lo - ext, -dom.log2_side());
  const int l_hi = g.k_hi() + ext;
  for (int l = G.k_lo; l <= l_hi; ++l) {
    std::vector<double> v(np, 0.0);
    for (int k = g.k_lo; k <= g.k_hi(); ++k) {
      const double w = std::exp2(-std::abs(k - l) * delta);
      const auto& b = g.block(k).values();
      for (std::size_t x = 0; x < np; ++x) v[x] += w * magnitude(b[x]);
    }
    G.blocks.emplace_back(dom, std::move(v));
  }
  ConvolutionCheck out;
  out.rhs = x_norm(g, q, alpha);
  out.lhs = x_norm(G, q, alpha);
  if (!(out.rhs > 0)) {
    out.degenerate = true;
    out.ratio = std::numeric_limits<double>::quiet_NaN();
  } else {
    out.ratio = out.lhs / out.rhs;
  }
  return out;
}

}  // namespace tentkit
