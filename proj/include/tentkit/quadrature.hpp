#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "tentkit/core.hpp"

namespace tentkit {

// (Σ w_i s_i^ρ / Σ w_i)^{1/ρ}; max over samples for ρ = ∞.
inline double power_mean(std::span<const double> samples, std::span<const double> weights, double rho) {
  require_exponent(rho, "rho");
  if (samples.size() != weights.size()) throw parameter_error("samples and weights differ in length");
  if (samples.empty()) throw empty_domain_error("power mean of an empty sample");
  detail::Accumulator wsum, acc;
  double mx = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!(weights[i] > 0.0)) throw parameter_error("weights must be positive");
    if (!(samples[i] >= 0.0)) throw parameter_error("samples must be nonnegative");
    wsum.add(weights[i]);
    mx = std::max(mx, samples[i]);
    if (!is_inf(rho)) acc.add(weights[i] * std::pow(samples[i], rho));
  }
  if (is_inf(rho)) return mx;
  return std::pow(std::max(acc.value(), 0.0) / wsum.value(), 1.0 / rho);
}

// Window (a t, b t] in scale, ball radius c t.
struct AverageSpec {
  double a = 0.5;
  double b = 1.0;
  double c = 1.0;

  AverageSpec() = default;
  AverageSpec(double a_, double b_, double c_) : a(a_), b(b_), c(c_) { validate(); }

  static AverageSpec whitney() { return {}; }

  void validate() const {
    if (!(a > 0.0 && a < b && std::isfinite(b))) throw parameter_error("AverageSpec needs 0 < a < b");
    if (!(c > 0.0 && std::isfinite(c))) throw parameter_error("AverageSpec needs c > 0");
  }
  friend bool operator==(const AverageSpec&, const AverageSpec&) = default;
};

namespace detail {

// Offsets o = j - tau with a t < s_j <= b t.
struct Window {
  int lo;
  int hi;
};

inline Window window_offsets(const Domain& dom, double a, double b) {
  const double m = dom.m_scale();
  Window w{static_cast<int>(std::floor(m * std::log2(a) + 1e-9)) + 1,
           static_cast<int>(std::floor(m * std::log2(b) + 1e-9))};
  if (w.lo > w.hi) throw empty_domain_error("scale window contains no grid cell");
  return w;
}

// |s_j^{-beta} f(s_j, y)|, scale-major.
template <class Scalar>
std::vector<double> weighted_magnitudes(const BasicHalfSpaceField<Scalar>& f, double beta) {
  const Domain& dom = f.domain();
  std::vector<double> g(dom.size());
  const std::size_t n = dom.n_points();
  for (int j = 0; j < dom.n_scales(); ++j) {
    double w = std::pow(dom.scale(j), -beta);
    for (std::size_t x = 0; x < n; ++x) {
      std::size_t i = static_cast<std::size_t>(j) * n + x;
      g[i] = magnitude(f.values()[i]) * w;
    }
  }
  return g;
}

// Minimum-image Euclidean ball |y - x| < R by cell samples, as rows along the last axis.
struct BallRow {
  std::vector<int> lead;
  int half;
  bool full;
};

struct Ball {
  std::vector<BallRow> rows;
  std::size_t count = 0;
};

inline Ball make_ball(const Domain& dom, double radius) {
  const int d = dom.d();
  const int n = dom.n_space();
  const double h = dom.h();
  const int o_lo = -(n / 2);
  const int o_hi = n - 1 - n / 2;
  const double r2 = radius * radius;
  Ball ball;
  std::vector<int> lead(d - 1, o_lo);
  while (true) {
    double l2 = 0;
    for (int v : lead) l2 += (v * h) * (v * h);
    if (l2 < r2) {
      double rem = r2 - l2;
      int w = static_cast<int>(std::ceil(std::sqrt(rem) / h)) - 1;
      while (w > 0 && (w * h) * (w * h) >= rem) --w;
      while (((w + 1) * h) * ((w + 1) * h) < rem && w < n) ++w;
      bool full = 2 * w + 1 >= n;
      ball.rows.push_back({lead, full ? n : w, full});
      ball.count += full ? static_cast<std::size_t>(n) : static_cast<std::size_t>(2 * w + 1);
    }
    int a = d - 2;
    while (a >= 0 && ++lead[a] > o_hi) lead[a--] = o_lo;
    if (a < 0) break;
  }
  return ball;
}

// Reductions of a nonnegative grid function over the ball around every grid point.
class BallReducer {
 public:
  BallReducer(const Domain& dom, const Ball& ball) : dom_(dom), ball_(ball) {}

  std::vector<double> sum(std::span<const double> g) const {
    const int n = dom_.n_space();
    const std::size_t rows = dom_.n_points() / n;
    const std::size_t len = 3 * static_cast<std::size_t>(n) + 1;
    std::vector<double> pre(rows * len);
    std::vector<double> tot(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      double* p = &pre[r * len];
      const double* row = &g[r * n];
      p[0] = 0;
      for (std::size_t i = 0; i + 1 < len; ++i) p[i + 1] = p[i] + row[i % n];
      tot[r] = p[n];
    }
    std::vector<double> out(dom_.n_points());
    std::vector<int> x(dom_.d());
    for (std::size_t f = 0; f < dom_.n_points(); ++f) {
      dom_.unflat(f, x);
      const int xl = x.back();
      double s = 0;
      for (const auto& br : ball_.rows) {
        std::size_t r = row_of(x, br.lead);
        if (br.full) {
          s += tot[r];
        } else {
          const double* p = &pre[r * len];
          s += std::max(0.0, p[xl + br.half + n + 1] - p[xl - br.half + n]);
        }
      }
      out[f] = std::max(0.0, s);
    }
    return out;
  }

  std::vector<double> mean(std::span<const double> g) const {
    auto s = sum(g);
    for (auto& v : s) v /= static_cast<double>(ball_.count);
    return s;
  }

  std::vector<double> max(std::span<const double> g) const {
    const int n = dom_.n_space();
    const std::size_t rows = dom_.n_points() / n;
    const std::size_t len = 3 * static_cast<std::size_t>(n);
    int levels = 1;
    while ((std::size_t{1} << levels) <= len) ++levels;
    // table[(r * levels + l) * len + i] = max of row over [i, i + 2^l)
    std::vector<double> table(rows * levels * len, 0.0);
    std::vector<double> tot(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      double* t0 = &table[(r * levels) * len];
      for (std::size_t i = 0; i < len; ++i) t0[i] = g[r * n + i % n];
      tot[r] = *std::max_element(t0, t0 + n);
      for (int l = 1; l < levels; ++l) {
        const double* prev = &table[(r * levels + l - 1) * len];
        double* cur = &table[(r * levels + l) * len];
        const std::size_t step = std::size_t{1} << (l - 1);
        for (std::size_t i = 0; i + (std::size_t{1} << l) <= len; ++i) cur[i] = std::max(prev[i], prev[i + step]);
      }
    }
    std::vector<double> out(dom_.n_points());
    std::vector<int> x(dom_.d());
    for (std::size_t f = 0; f < dom_.n_points(); ++f) {
      dom_.unflat(f, x);
      const int xl = x.back();
      double m = 0;
      for (const auto& br : ball_.rows) {
        std::size_t r = row_of(x, br.lead);
        if (br.full) {
          m = std::max(m, tot[r]);
        } else {
          std::size_t lo = static_cast<std::size_t>(xl - br.half + n);
          std::size_t width = static_cast<std::size_t>(2 * br.half + 1);
          int l = std::bit_width(width) - 1;
          const double* t = &table[(r * levels + l) * len];
          m = std::max({m, t[lo], t[lo + width - (std::size_t{1} << l)]});
        }
      }
      out[f] = m;
    }
    return out;
  }

 private:
  std::size_t row_of(const std::vector<int>& x, const std::vector<int>& lead) const {
    const int n = dom_.n_space();
    std::size_t r = 0;
    for (std::size_t a = 0; a < lead.size(); ++a) r = r * n + detail::wrap(x[a] + lead[a], n);
    return r;
  }

  const Domain& dom_;
  const Ball& ball_;
};

}  // namespace detail

// Discrete power mean of |s^{-beta} f(s, y)| over cells with a t < s <= b t and
// |y - x| < c t, weighted by ds dy. Cells of the window above or below the scale
// grid carry zero but keep their weight.
template <class Scalar>
double whitney_average(const BasicHalfSpaceField<Scalar>& f, std::span<const int> x, double t, double rho,
                       const AverageSpec& spec, double beta) {
  require_exponent(rho, "rho");
  spec.validate();
  const Domain& dom = f.domain();
  if (!(t > 0)) throw parameter_error("t must be positive");
  const double lo = spec.a * t;
  const double hi = spec.b * t;
  const int m = dom.m_scale();
  int j_lo = static_cast<int>(std::floor(m * std::log2(lo / dom.s_min()) + 1e-9)) + 1;
  int j_hi = static_cast<int>(std::floor(m * std::log2(hi / dom.s_min()) + 1e-9));
  if (j_lo > j_hi || j_hi < 0 || j_lo >= dom.n_scales())
    throw empty_domain_error("averaging window misses the scale grid");
  const std::size_t cx = dom.flat(x);
  std::vector<int> xi = dom.unflat(cx);
  std::vector<int> yi(dom.d());
  const double h = dom.h();
  const int n = dom.n_space();
  const double r2 = (spec.c * t) * (spec.c * t);

  double wsum = 0;
  for (int j = j_lo; j <= j_hi; ++j) wsum += dom.cell_ds(j);
  detail::Accumulator acc;
  double mx = 0;
  std::size_t cells = 0;
  for (std::size_t y = 0; y < dom.n_points(); ++y) {
    dom.unflat(y, yi);
    double dist2 = 0;
    for (int a = 0; a < dom.d(); ++a) {
      int o = detail::wrap(yi[a] - xi[a], n);
      if (o >= n - n / 2) o -= n;
      dist2 += (o * h) * (o * h);
    }
    if (!(dist2 < r2)) continue;
    ++cells;
    for (int j = std::max(j_lo, 0); j <= std::min(j_hi, dom.n_scales() - 1); ++j) {
      double v = magnitude(f.at_flat(j, y)) * std::pow(dom.scale(j), -beta);
      if (is_inf(rho))
        mx = std::max(mx, v);
      else
        acc.add(dom.cell_ds(j) * std::pow(v, rho));
    }
  }
  if (is_inf(rho)) return mx;
  return std::pow(std::max(acc.value(), 0.0) / (wsum * static_cast<double>(cells)), 1.0 / rho);
}

template <class Scalar>
double whitney_average(const BasicHalfSpaceField<Scalar>& f, std::initializer_list<int> x, double t, double rho,
                       const AverageSpec& spec, double beta) {
  return whitney_average(f, std::span<const int>(x.begin(), x.size()), t, rho, spec, beta);
}

// (Σ_x g(x)^p cell)^{1/p}, max for p = ∞.
inline double lp_norm_spatial(std::span<const double> g, double cell, double p) {
  require_exponent(p, "p");
  if (is_inf(p)) {
    double m = 0;
    for (double v : g) m = std::max(m, std::abs(v));
    return m;
  }
  detail::Accumulator acc;
  for (double v : g) acc.add(std::pow(std::abs(v), p));
  return std::pow(std::max(acc.value(), 0.0) * cell, 1.0 / p);
}

template <class Scalar>
double lp_norm_spatial(const BasicBoundaryField<Scalar>& g, double p) {
  std::vector<double> a(g.values().size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = magnitude(g.values()[i]);
  return lp_norm_spatial(a, g.domain().cell_volume(), p);
}

// Nonincreasing step function on (0, cell * values.size()].
struct StepFunction {
  std::vector<double> values;
  double cell = 1.0;

  double measure() const { return cell * static_cast<double>(values.size()); }

  double operator()(double u) const {
    if (values.empty() || u <= 0) return values.empty() ? 0.0 : values.front();
    auto i = static_cast<std::size_t>(std::ceil(u / cell - 1e-12));
    if (i == 0) i = 1;
    if (i > values.size()) return 0.0;
    return values[i - 1];
  }

  // ∫_0^U g*(u)^p du.
  double integral_power(double upto, double p) const {
    detail::Accumulator acc;
    double left = upto;
    for (double v : values) {
      if (left <= 0) break;
      double w = std::min(cell, left);
      acc.add(w * std::pow(v, p));
      left -= w;
    }
    return acc.value();
  }

  double lp_norm(double p) const {
    if (is_inf(p)) return values.empty() ? 0.0 : values.front();
    return std::pow(integral_power(measure(), p), 1.0 / p);
  }
};

inline StepFunction decreasing_rearrangement(std::span<const double> g, double cell) {
  StepFunction s{std::vector<double>(g.begin(), g.end()), cell};
  for (double v : s.values)
    if (!(v >= 0.0)) throw parameter_error("rearrangement needs a nonnegative function");
  std::sort(s.values.begin(), s.values.end(), std::greater<>());
  return s;
}

}  // namespace tentkit
