#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <initializer_list>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace tentkit {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class range_error : public error {
 public:
  using error::error;
};
class empty_domain_error : public error {
 public:
  using error::error;
};
class parameter_error : public error {
 public:
  using error::error;
};
class geometry_error : public error {
 public:
  using error::error;
};
class coverage_error : public error {
 public:
  using error::error;
};
class hypothesis_error : public error {
 public:
  using error::error;
};
class format_error : public error {
 public:
  using error::error;
};

inline bool is_inf(double v) { return v == infinity; }

inline void require_exponent(double v, const char* name) {
  if (!(v > 0.0)) throw parameter_error(std::string(name) + " must be in (0, inf]");
}

inline std::string format_exponent(double v) {
  if (is_inf(v)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// (p, q, r, beta); p, q, r in (0, inf].
struct ExponentTuple {
  double p = 2.0;
  double q = 2.0;
  double r = 2.0;
  double beta = 0.0;

  ExponentTuple() = default;
  ExponentTuple(double p_, double q_, double r_, double beta_) : p(p_), q(q_), r(r_), beta(beta_) {
    validate();
  }

  void validate() const {
    require_exponent(p, "p");
    require_exponent(q, "q");
    require_exponent(r, "r");
    if (!std::isfinite(beta)) throw parameter_error("beta must be finite");
  }

  double min_pqr() const { return std::min({p, q, r}); }

  std::string str() const {
    return "(" + format_exponent(p) + "," + format_exponent(q) + "," + format_exponent(r) + "," +
           format_exponent(beta) + ")";
  }

  friend bool operator==(const ExponentTuple&, const ExponentTuple&) = default;
};

namespace detail {

inline bool is_integer(double v, double tol = 1e-9) { return std::abs(v - std::round(v)) <= tol; }

inline bool is_power_of_two(double v) { return v > 0 && is_integer(std::log2(v), 1e-12); }

inline int ilog2(double v) { return static_cast<int>(std::lround(std::log2(v))); }

inline std::size_t ipow(std::size_t base, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

inline int wrap(long i, int n) {
  long m = i % n;
  return static_cast<int>(m < 0 ? m + n : m);
}

// Neumaier compensated sum.
class Accumulator {
 public:
  void add(double v) {
    double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace detail

// Periodic spatial torus [0, side)^d with n_space samples per axis, times the
// geometric scale grid s_j = s_min 2^{j/m}, j = 0..n_scales-1. Scale cell j is
// (s_j 2^{-1/m}, s_j]; spatial cell i is [ih, (i+1)h) with its sample at ih.
class Domain {
 public:
  Domain() : Domain(1, 1.0, 1, 0.5, 1.0, 1) {}

  Domain(int d, double side, int n_space, double s_min, double s_max, int m_scale)
      : d_(d), side_(side), n_(n_space), s_min_(s_min), s_max_(s_max), m_(m_scale) {
    if (d < 1) throw parameter_error("d must be positive");
    if (!(side > 0) || !std::isfinite(side)) throw parameter_error("side must be positive");
    if (n_space < 1) throw parameter_error("n_space must be positive");
    if (m_scale < 1) throw parameter_error("m_scale must be positive");
    if (!(s_min > 0) || !(s_max > s_min) || !std::isfinite(s_max))
      throw parameter_error("need 0 < s_min < s_max");
    if (s_max > side * (1 + 1e-12)) throw parameter_error("s_max must not exceed side");
    double steps = std::log2(s_max / s_min) * m_scale;
    if (!detail::is_integer(steps)) throw parameter_error("log2(s_max/s_min)*m_scale must be an integer");
    n_scales_ = static_cast<int>(std::lround(steps)) + 1;
    points_ = detail::ipow(static_cast<std::size_t>(n_), d_);
  }

  int d() const { return d_; }
  double side() const { return side_; }
  int n_space() const { return n_; }
  double s_min() const { return s_min_; }
  double s_max() const { return s_max_; }
  int m_scale() const { return m_; }
  int n_scales() const { return n_scales_; }
  std::size_t n_points() const { return points_; }
  std::size_t size() const { return points_ * static_cast<std::size_t>(n_scales_); }

  double h() const { return side_ / n_; }
  double cell_volume() const { return std::pow(h(), d_); }
  double volume() const { return std::pow(side_, d_); }

  // Any integer j, including virtual indices outside [0, n_scales).
  double scale(int j) const { return s_min_ * std::exp2(static_cast<double>(j) / m_); }
  double log_step() const { return std::numbers::ln2 / m_; }
  double cell_ds(int j) const { return scale(j) * (1.0 - std::exp2(-1.0 / m_)); }
  double cell_ds_over_s() const { return log_step(); }
  double cell_whitney(int j) const {
    return std::pow(scale(j), -d_) * (std::exp2(static_cast<double>(d_) / m_) - 1.0) / d_;
  }

  bool dyadic() const {
    return detail::is_power_of_two(side_) && detail::is_power_of_two(static_cast<double>(n_)) &&
           detail::is_power_of_two(s_min_) && detail::is_power_of_two(s_max_);
  }
  int log2_side() const { return detail::ilog2(side_); }
  int log2_h() const { return detail::ilog2(h()); }
  // Usable dyadic generations: cubes made of whole cells whose Whitney boxes meet the grid.
  int generation_min() const { return std::max(detail::ilog2(s_min_), log2_h()); }
  int generation_max() const { return std::min(detail::ilog2(s_max_), log2_side()); }
  // Index j with s_j = 2^k (may be virtual).
  int scale_index_of(int k) const { return (k - detail::ilog2(s_min_)) * m_; }

  std::size_t flat(std::span<const int> x) const {
    if (static_cast<int>(x.size()) != d_) throw range_error("spatial index has wrong dimension");
    std::size_t f = 0;
    for (int a = 0; a < d_; ++a) {
      if (x[a] < 0 || x[a] >= n_) throw range_error("spatial index out of range");
      f = f * n_ + static_cast<std::size_t>(x[a]);
    }
    return f;
  }
  void unflat(std::size_t f, std::span<int> x) const {
    for (int a = d_ - 1; a >= 0; --a) {
      x[a] = static_cast<int>(f % n_);
      f /= n_;
    }
  }
  std::vector<int> unflat(std::size_t f) const {
    std::vector<int> x(d_);
    unflat(f, x);
    return x;
  }

  bool same_space(const Domain& o) const {
    return d_ == o.d_ && n_ == o.n_ && side_ == o.side_;
  }
  friend bool operator==(const Domain& a, const Domain& b) {
    return a.d_ == b.d_ && a.side_ == b.side_ && a.n_ == b.n_ && a.s_min_ == b.s_min_ &&
           a.s_max_ == b.s_max_ && a.m_ == b.m_;
  }

 private:
  int d_;
  double side_;
  int n_;
  double s_min_;
  double s_max_;
  int m_;
  int n_scales_ = 0;
  std::size_t points_ = 0;
};

template <class Scalar>
double magnitude(const Scalar& v) {
  return std::abs(v);
}

template <class Scalar>
bool finite_value(const Scalar& v) {
  if constexpr (std::is_arithmetic_v<Scalar>)
    return std::isfinite(v);
  else
    return std::isfinite(v.real()) && std::isfinite(v.imag());
}

// Samples F(s_j, y), scale-major, spatial row-major.
template <class Scalar>
class BasicHalfSpaceField {
 public:
  using value_type = Scalar;

  explicit BasicHalfSpaceField(Domain dom, std::string label = {})
      : dom_(std::move(dom)), values_(dom_.size(), Scalar{}), label_(std::move(label)) {}

  BasicHalfSpaceField(Domain dom, std::vector<Scalar> values, std::string label = {})
      : dom_(std::move(dom)), values_(std::move(values)), label_(std::move(label)) {
    if (values_.size() != dom_.size()) throw parameter_error("field shape does not match domain");
    for (const auto& v : values_)
      if (!finite_value(v)) throw parameter_error("field samples must be finite");
  }

  // fn(s, y) with y the spatial sample coordinates.
  template <class Fn>
  static BasicHalfSpaceField from_function(const Domain& dom, Fn&& fn, std::string label = {}) {
    std::vector<Scalar> v(dom.size());
    std::vector<int> idx(dom.d());
    std::vector<double> y(dom.d());
    for (int j = 0; j < dom.n_scales(); ++j) {
      double s = dom.scale(j);
      for (std::size_t x = 0; x < dom.n_points(); ++x) {
        dom.unflat(x, idx);
        for (int a = 0; a < dom.d(); ++a) y[a] = idx[a] * dom.h();
        v[static_cast<std::size_t>(j) * dom.n_points() + x] = fn(s, std::span<const double>(y));
      }
    }
    return BasicHalfSpaceField(dom, std::move(v), std::move(label));
  }

  const Domain& domain() const { return dom_; }
  const std::vector<Scalar>& values() const { return values_; }
  const std::string& label() const { return label_; }
  void set_label(std::string l) { label_ = std::move(l); }

  std::span<const Scalar> slice(int j) const {
    check_scale(j);
    return std::span<const Scalar>(values_).subspan(static_cast<std::size_t>(j) * dom_.n_points(),
                                                    dom_.n_points());
  }

  Scalar sample(int j, std::span<const int> x) const { return values_[offset(j, x)]; }
  Scalar sample(int j, std::initializer_list<int> x) const {
    return sample(j, std::span<const int>(x.begin(), x.size()));
  }

  void set(int j, std::span<const int> x, Scalar v) {
    if (!finite_value(v)) throw parameter_error("field samples must be finite");
    values_[offset(j, x)] = v;
  }
  void set(int j, std::initializer_list<int> x, Scalar v) {
    set(j, std::span<const int>(x.begin(), x.size()), v);
  }

  Scalar at_flat(int j, std::size_t x) const {
    return values_[static_cast<std::size_t>(j) * dom_.n_points() + x];
  }

 private:
  void check_scale(int j) const {
    if (j < 0 || j >= dom_.n_scales()) throw range_error("scale index out of range");
  }
  std::size_t offset(int j, std::span<const int> x) const {
    check_scale(j);
    return static_cast<std::size_t>(j) * dom_.n_points() + dom_.flat(x);
  }

  Domain dom_;
  std::vector<Scalar> values_;
  std::string label_;
};

using HalfSpaceField = BasicHalfSpaceField<double>;
using ComplexHalfSpaceField = BasicHalfSpaceField<std::complex<double>>;

template <class Scalar>
Scalar field_sample(const BasicHalfSpaceField<Scalar>& f, int j, std::span<const int> x) {
  return f.sample(j, x);
}

// A function on the torus; only the spatial part of the domain is used.
template <class Scalar>
class BasicBoundaryField {
 public:
  using value_type = Scalar;

  explicit BasicBoundaryField(Domain dom, std::string label = {})
      : dom_(std::move(dom)), values_(dom_.n_points(), Scalar{}), label_(std::move(label)) {}

  BasicBoundaryField(Domain dom, std::vector<Scalar> values, std::string label = {})
      : dom_(std::move(dom)), values_(std::move(values)), label_(std::move(label)) {
    if (values_.size() != dom_.n_points()) throw parameter_error("boundary shape does not match domain");
    for (const auto& v : values_)
      if (!finite_value(v)) throw parameter_error("boundary samples must be finite");
  }

  template <class Fn>
  static BasicBoundaryField from_function(const Domain& dom, Fn&& fn, std::string label = {}) {
    std::vector<Scalar> v(dom.n_points());
    std::vector<int> idx(dom.d());
    std::vector<double> y(dom.d());
    for (std::size_t x = 0; x < dom.n_points(); ++x) {
      dom.unflat(x, idx);
      for (int a = 0; a < dom.d(); ++a) y[a] = idx[a] * dom.h();
      v[x] = fn(std::span<const double>(y));
    }
    return BasicBoundaryField(dom, std::move(v), std::move(label));
  }

  const Domain& domain() const { return dom_; }
  const std::vector<Scalar>& values() const { return values_; }
  const std::string& label() const { return label_; }
  Scalar sample(std::span<const int> x) const { return values_[dom_.flat(x)]; }
  void set(std::span<const int> x, Scalar v) {
    if (!finite_value(v)) throw parameter_error("boundary samples must be finite");
    values_[dom_.flat(x)] = v;
  }

 private:
  Domain dom_;
  std::vector<Scalar> values_;
  std::string label_;
};

using BoundaryField = BasicBoundaryField<double>;
using ComplexBoundaryField = BasicBoundaryField<std::complex<double>>;

// Q = [2^k offset, 2^k (offset + 1))^d.
struct DyadicCube {
  int k = 0;
  std::vector<int> offset;

  int d() const { return static_cast<int>(offset.size()); }
  double length() const { return std::ldexp(1.0, k); }
  double volume() const { return std::ldexp(1.0, k * d()); }

  DyadicCube parent() const {
    DyadicCube p{k + 1, offset};
    for (auto& o : p.offset) o = (o >= 0) ? o / 2 : -((-o + 1) / 2);
    return p;
  }

  bool contains(const DyadicCube& q) const {
    if (q.k > k || q.d() != d()) return false;
    DyadicCube a = q;
    while (a.k < k) a = a.parent();
    return a.offset == offset;
  }

  friend auto operator<=>(const DyadicCube&, const DyadicCube&) = default;
  friend bool operator==(const DyadicCube&, const DyadicCube&) = default;
};

inline std::vector<DyadicCube> cube_children(const DyadicCube& q) {
  const int d = q.d();
  std::vector<DyadicCube> out;
  out.reserve(std::size_t{1} << d);
  for (unsigned bits = 0; bits < (1u << d); ++bits) {
    DyadicCube c{q.k - 1, q.offset};
    for (int a = 0; a < d; ++a) c.offset[a] = 2 * q.offset[a] + static_cast<int>((bits >> (d - 1 - a)) & 1u);
    out.push_back(std::move(c));
  }
  return out;
}

// Q̄ = (ℓ(Q)/2, ℓ(Q)] × Q.
struct WhitneyBox {
  DyadicCube cube;

  double scale_lo() const { return cube.length() / 2; }
  double scale_hi() const { return cube.length(); }
  double measure() const { return (scale_hi() - scale_lo()) * cube.volume(); }
};

inline std::vector<WhitneyBox> whitney_tiling(const DyadicCube& p, int k_min) {
  if (k_min > p.k) throw parameter_error("k_min exceeds the generation of the cube");
  std::vector<WhitneyBox> out;
  std::vector<DyadicCube> level{p};
  for (int k = p.k; k >= k_min; --k) {
    std::vector<DyadicCube> next;
    for (const auto& q : level) {
      out.push_back(WhitneyBox{q});
      if (k > k_min)
        for (auto& c : cube_children(q)) next.push_back(std::move(c));
    }
    level = std::move(next);
  }
  return out;
}

// Finitely supported nonnegative map on dyadic cubes.
class CubeSequence {
 public:
  CubeSequence() = default;

  void set(const DyadicCube& q, double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw parameter_error("sequence values must be finite and >= 0");
    if (!entries_.empty() && entries_.begin()->first.d() != q.d())
      throw parameter_error("mixed dimensions in cube sequence");
    entries_[q] = v;
  }
  double get(const DyadicCube& q) const {
    auto it = entries_.find(q);
    return it == entries_.end() ? 0.0 : it->second;
  }
  const std::map<DyadicCube, double>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<DyadicCube, double> entries_;
};

// E_Q ⊂ Q as masks over the cube's grid cells (row-major within Q), |E_Q| > eps |Q|.
class SubsetFamily {
 public:
  SubsetFamily(double epsilon, double h, int d) : eps_(epsilon), h_(h), d_(d) {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw parameter_error("epsilon must lie in (0, 1]");
    if (!detail::is_power_of_two(h)) throw parameter_error("subset families need a dyadic grid step");
  }

  std::size_t cells_per_axis(const DyadicCube& q) const {
    double c = q.length() / h_;
    if (c < 1.0 - 1e-12) throw parameter_error("cube is smaller than a grid cell");
    return static_cast<std::size_t>(std::llround(c));
  }
  std::size_t cells(const DyadicCube& q) const {
    return detail::ipow(cells_per_axis(q), d_);
  }

  void insert(const DyadicCube& q, std::vector<bool> mask) {
    if (q.d() != d_) throw parameter_error("cube dimension mismatch");
    std::size_t n = cells(q);
    if (mask.size() != n) throw parameter_error("mask size does not match the cube");
    std::size_t count = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
    if (!(static_cast<double>(count) > eps_ * static_cast<double>(n)))
      throw parameter_error("subset too small for epsilon");
    entries_[q] = std::move(mask);
  }

  const std::vector<bool>* find(const DyadicCube& q) const {
    auto it = entries_.find(q);
    return it == entries_.end() ? nullptr : &it->second;
  }
  double epsilon() const { return eps_; }
  const std::map<DyadicCube, std::vector<bool>>& entries() const { return entries_; }

 private:
  double eps_;
  double h_;
  int d_;
  std::map<DyadicCube, std::vector<bool>> entries_;
};

}  // namespace tentkit
