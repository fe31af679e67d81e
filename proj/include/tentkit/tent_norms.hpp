#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "tentkit/core.hpp"
#include "tentkit/quadrature.hpp"

namespace tentkit {

enum class NormVariant { tent, z, tent_inf_alpha, coa, jn, whitney, dyadic, dyadic_subset, dyadic_jn };

inline const char* variant_name(NormVariant v) {
  switch (v) {
    case NormVariant::tent: return "tent";
    case NormVariant::z: return "z";
    case NormVariant::tent_inf_alpha: return "tent_inf_alpha";
    case NormVariant::coa: return "coa";
    case NormVariant::jn: return "jn";
    case NormVariant::whitney: return "whitney";
    case NormVariant::dyadic: return "dyadic";
    case NormVariant::dyadic_subset: return "dyadic_subset";
    case NormVariant::dyadic_jn: return "dyadic_jn";
  }
  return "?";
}

struct NormResult {
  double value = 0.0;
  ExponentTuple exponents;
  NormVariant variant = NormVariant::tent;
  double parameter = 0.0;  // λ (coa) or α (jn, tent_inf_alpha, dyadic_jn)
  AverageSpec spec;
  Domain domain;
  double t_lo = 0.0;  // scale truncation of the t-integral
  double t_hi = 0.0;
  int k_min = 0;  // generation truncation of dyadic norms
  int k_max = 0;

  operator double() const { return value; }

  std::string truncation() const {
    char buf[96];
    if (variant == NormVariant::dyadic || variant == NormVariant::dyadic_subset || variant == NormVariant::dyadic_jn)
      std::snprintf(buf, sizeof buf, "k in [%d, %d]", k_min, k_max);
    else
      std::snprintf(buf, sizeof buf, "t in [%.6g, %.6g]", t_lo, t_hi);
    return buf;
  }
};

namespace detail {

// A_τ(x) for every t = s_min 2^{τ/m} whose window meets the grid.
struct Profile {
  int tau_lo = 0;
  int tau_hi = -1;
  std::vector<std::vector<double>> A;

  int count() const { return tau_hi - tau_lo + 1; }
  const std::vector<double>& at(int tau) const { return A[static_cast<std::size_t>(tau - tau_lo)]; }
};

// Inner Whitney averages. The ball radius is lambda·c·t; the normalization always
// uses the ball of radius c·t, so lambda > 1 gives the change-of-angle integrand.
inline Profile whitney_profile(const Domain& dom, std::span<const double> g, double r, const AverageSpec& spec,
                               double lambda = 1.0) {
  spec.validate();
  require_exponent(r, "r");
  const Window w = window_offsets(dom, spec.a, spec.b);
  const int ns = dom.n_scales();
  const std::size_t np = dom.n_points();
  Profile prof;
  prof.tau_lo = -w.hi;
  prof.tau_hi = ns - 1 - w.lo;
  prof.A.reserve(static_cast<std::size_t>(prof.count()));
  std::vector<double> W(np);
  for (int tau = prof.tau_lo; tau <= prof.tau_hi; ++tau) {
    const double t = dom.scale(tau);
    std::fill(W.begin(), W.end(), 0.0);
    double norm = 0;
    for (int o = w.lo; o <= w.hi; ++o) {
      const int j = tau + o;
      norm += dom.cell_ds(j);
      if (j < 0 || j >= ns) continue;
      const double* gj = &g[static_cast<std::size_t>(j) * np];
      if (is_inf(r)) {
        for (std::size_t x = 0; x < np; ++x) W[x] = std::max(W[x], gj[x]);
      } else {
        const double ds = dom.cell_ds(j);
        for (std::size_t x = 0; x < np; ++x) W[x] += ds * std::pow(gj[x], r);
      }
    }
    const Ball ball = make_ball(dom, lambda * spec.c * t);
    BallReducer red(dom, ball);
    std::vector<double> A;
    if (is_inf(r)) {
      A = red.max(W);
    } else {
      const double count = lambda == 1.0 ? static_cast<double>(ball.count)
                                          : static_cast<double>(make_ball(dom, spec.c * t).count);
      A = red.sum(W);
      for (auto& v : A) v = std::pow(v / (count * norm), 1.0 / r);
    }
    prof.A.push_back(std::move(A));
  }
  return prof;
}

// ‖(∫ A^q dt/t)^{1/q}‖_{L^p}, p < ∞.
inline double tent_reduce_finite_p(const Domain& dom, const Profile& prof, double p, double q) {
  const std::size_t np = dom.n_points();
  std::vector<double> G(np, 0.0);
  const double dlog = dom.log_step();
  for (const auto& A : prof.A)
    for (std::size_t x = 0; x < np; ++x)
      G[x] = is_inf(q) ? std::max(G[x], A[x]) : G[x] + dlog * std::pow(A[x], q);
  if (!is_inf(q))
    for (auto& v : G) v = std::pow(v, 1.0 / q);
  return lp_norm_spatial(G, dom.cell_volume(), p);
}

// sup_{τ,y} (⨍_{B(y,τ)} (∫_0^τ A^q dt/t)^{α/q} dx)^{1/α}.
inline double carleson_sup(const Domain& dom, const Profile& prof, double q, double alpha) {
  const std::size_t np = dom.n_points();
  const double dlog = dom.log_step();
  std::vector<double> S(np, 0.0), H(np);
  double best = 0;
  for (int tau = prof.tau_lo; tau <= prof.tau_hi; ++tau) {
    const auto& A = prof.at(tau);
    for (std::size_t x = 0; x < np; ++x) S[x] = is_inf(q) ? std::max(S[x], A[x]) : S[x] + dlog * std::pow(A[x], q);
    if (is_inf(alpha)) {
      for (double v : S) best = std::max(best, v);
      continue;
    }
    const double e = is_inf(q) ? alpha : alpha / q;
    for (std::size_t x = 0; x < np; ++x) H[x] = e == 1.0 ? S[x] : std::pow(S[x], e);
    const Ball ball = make_ball(dom, dom.scale(tau));
    for (double v : BallReducer(dom, ball).mean(H)) best = std::max(best, v);
  }
  if (is_inf(alpha)) return is_inf(q) ? best : std::pow(best, 1.0 / q);
  return std::pow(best, 1.0 / alpha);
}

inline NormResult make_result(double value, const ExponentTuple& e, NormVariant v, const Domain& dom,
                              const Profile& prof, const AverageSpec& spec = {}, double param = 0.0) {
  NormResult res;
  res.value = value;
  res.exponents = e;
  res.variant = v;
  res.parameter = param;
  res.spec = spec;
  res.domain = dom;
  res.t_lo = dom.scale(prof.tau_lo);
  res.t_hi = dom.scale(prof.tau_hi);
  return res;
}

}  // namespace detail

template <class Scalar>
NormResult tent_norm(const BasicHalfSpaceField<Scalar>& f, const ExponentTuple& e,
                     const AverageSpec& spec = AverageSpec::whitney()) {
  e.validate();
  const Domain& dom = f.domain();
  const auto g = detail::weighted_magnitudes(f, e.beta);
  const auto prof = detail::whitney_profile(dom, g, e.r, spec);
  const double v = is_inf(e.p) ? detail::carleson_sup(dom, prof, e.q, is_inf(e.q) ? infinity : e.q)
                               : detail::tent_reduce_finite_p(dom, prof, e.p, e.q);
  return detail::make_result(v, e, spec == AverageSpec::whitney() ? NormVariant::tent : NormVariant::whitney, dom,
                             prof, spec);
}

template <class Scalar>
NormResult z_norm(const BasicHalfSpaceField<Scalar>& f, const ExponentTuple& e,
                  const AverageSpec& spec = AverageSpec::whitney()) {
  e.validate();
  const Domain& dom = f.domain();
  const auto g = detail::weighted_magnitudes(f, e.beta);
  const auto prof = detail::whitney_profile(dom, g, e.r, spec);
  detail::Accumulator acc;
  double mx = 0;
  for (const auto& A : prof.A) {
    const double l = lp_norm_spatial(A, dom.cell_volume(), e.p);
    if (is_inf(e.q))
      mx = std::max(mx, l);
    else
      acc.add(dom.log_step() * std::pow(l, e.q));
  }
  const double v = is_inf(e.q) ? mx : std::pow(std::max(acc.value(), 0.0), 1.0 / e.q);
  return detail::make_result(v, e, NormVariant::z, dom, prof, spec);
}

// sup_{t,x} t^{-α} (∫_0^t ⨍_{B(x,t)} |s^{-β} f|^q dy ds/s)^{1/q}, t on the scale grid.
template <class Scalar>
NormResult beyond_infinity_norm(const BasicHalfSpaceField<Scalar>& f, double q, double beta, double alpha) {
  require_exponent(q, "q");
  if (!std::isfinite(alpha)) throw parameter_error("alpha must be finite");
  const Domain& dom = f.domain();
  const auto g = detail::weighted_magnitudes(f, beta);
  const std::size_t np = dom.n_points();
  std::vector<double> C(np, 0.0);
  double best = 0;
  for (int j = 0; j < dom.n_scales(); ++j) {
    const double* gj = &g[static_cast<std::size_t>(j) * np];
    for (std::size_t x = 0; x < np; ++x)
      C[x] = is_inf(q) ? std::max(C[x], gj[x]) : C[x] + dom.log_step() * std::pow(gj[x], q);
    const double t = dom.scale(j);
    const detail::Ball ball = detail::make_ball(dom, t);
    detail::BallReducer red(dom, ball);
    const auto M = is_inf(q) ? red.max(C) : red.mean(C);
    double m = 0;
    for (double v : M) m = std::max(m, v);
    best = std::max(best, std::pow(t, -alpha) * (is_inf(q) ? m : std::pow(m, 1.0 / q)));
  }
  NormResult res;
  res.value = best;
  res.exponents = ExponentTuple(infinity, q, q, beta);
  res.variant = NormVariant::tent_inf_alpha;
  res.parameter = alpha;
  res.domain = dom;
  res.t_lo = dom.s_min();
  res.t_hi = dom.s_max();
  return res;
}

// Inner integral over B(x, λt), normalized by the count of B(x, t).
template <class Scalar>
NormResult change_of_angle_norm(const BasicHalfSpaceField<Scalar>& f, const ExponentTuple& e, double lambda) {
  e.validate();
  if (!(lambda >= 1.0) || !std::isfinite(lambda)) throw parameter_error("lambda must be >= 1");
  const Domain& dom = f.domain();
  if (lambda * dom.s_max() > dom.side() / 2 * (1 + 1e-12))
    throw geometry_error("lambda * s_max exceeds half the torus period");
  const auto g = detail::weighted_magnitudes(f, e.beta);
  const auto prof = detail::whitney_profile(dom, g, e.r, AverageSpec::whitney(), lambda);
  const double v = is_inf(e.p) ? detail::carleson_sup(dom, prof, e.q, is_inf(e.q) ? infinity : e.q)
                               : detail::tent_reduce_finite_p(dom, prof, e.p, e.q);
  return detail::make_result(v, e, NormVariant::coa, dom, prof, AverageSpec::whitney(), lambda);
}

template <class Scalar>
NormResult jn_norm(const BasicHalfSpaceField<Scalar>& f, const ExponentTuple& e, double alpha) {
  e.validate();
  if (!is_inf(e.p)) throw parameter_error("jn_norm needs p = inf");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw parameter_error("alpha must be positive and finite");
  const Domain& dom = f.domain();
  const auto g = detail::weighted_magnitudes(f, e.beta);
  const auto prof = detail::whitney_profile(dom, g, e.r, AverageSpec::whitney());
  const double v = detail::carleson_sup(dom, prof, e.q, alpha);
  return detail::make_result(v, e, NormVariant::jn, dom, prof, AverageSpec::whitney(), alpha);
}

}  // namespace tentkit
