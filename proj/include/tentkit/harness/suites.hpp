#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "tentkit/tentkit.hpp"
#include "tentkit/harness/config.hpp"
#include "tentkit/harness/families.hpp"
#include "tentkit/harness/report.hpp"

namespace tentkit::harness {

namespace detail {

inline std::string grid_string(const Domain& dom) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "d=%d side=%g n=%d m=%d s=[%g,%g]", dom.d(), dom.side(), dom.n_space(),
                dom.m_scale(), dom.s_min(), dom.s_max());
  return buf;
}

inline std::string fmt(double v) { return format_exponent(v); }

// Runs fn(0..n-1) on up to `workers` threads; results are concatenated in index order.
inline std::vector<RatioReport> run_tasks(std::size_t n, unsigned workers,
                                          const std::function<std::vector<RatioReport>(std::size_t)>& fn) {
  std::vector<std::vector<RatioReport>> out(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned k = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  if (k == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < k; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<RatioReport> all;
  for (auto& v : out) all.insert(all.end(), std::make_move_iterator(v.begin()), std::make_move_iterator(v.end()));
  return all;
}

// Collects the records of one (resolution, member) task.
class Recorder {
 public:
  Recorder(std::string suite, const Domain& dom, int resolution, int member, std::string member_label)
      : suite_(std::move(suite)),
        grid_(grid_string(dom)),
        resolution_(resolution),
        member_(member),
        member_label_(std::move(member_label)) {}

  RatioReport& add(const std::string& experiment, const std::string& label, const std::string& exponents,
                   double lhs, double rhs, Check check, double lo, double hi, const std::string& truncation = {}) {
    RatioReport r;
    r.suite = suite_;
    r.experiment = experiment;
    r.label = label;
    r.member = member_;
    r.member_label = member_label_;
    r.resolution = resolution_;
    r.grid = grid_;
    r.exponents = exponents;
    r.truncation = truncation;
    r.lhs = lhs;
    r.rhs = rhs;
    r.check = check;
    r.lo = lo;
    r.hi = hi;
    r.evaluate();
    records_.push_back(std::move(r));
    return records_.back();
  }

  std::vector<RatioReport> take() { return std::move(records_); }

 private:
  std::string suite_;
  std::string grid_;
  int resolution_;
  int member_;
  std::string member_label_;
  std::vector<RatioReport> records_;
};

inline HalfSpaceField power_field(const HalfSpaceField& f, double M) {
  std::vector<double> v(f.values());
  for (auto& x : v) x = std::pow(std::abs(x), M);
  return HalfSpaceField(f.domain(), std::move(v), f.label());
}

inline HalfSpaceField scaled_field(const HalfSpaceField& f, double c) {
  std::vector<double> v(f.values());
  for (auto& x : v) x *= c;
  return HalfSpaceField(f.domain(), std::move(v), f.label());
}

inline HalfSpaceField sum_field(const HalfSpaceField& f, const HalfSpaceField& g) {
  std::vector<double> v(f.values());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += g.values()[i];
  return HalfSpaceField(f.domain(), std::move(v), f.label() + "+" + g.label());
}

inline double negated(double b) { return b == 0.0 ? 0.0 : -b; }

inline double conjugate(double p) {
  if (is_inf(p)) return 1.0;
  if (p <= 1.0) return infinity;
  return p / (p - 1.0);
}

// Σ_j Σ_x |f g| h^d ds/s over the grid.
inline double raw_pairing(const HalfSpaceField& f, const HalfSpaceField& g) {
  const Domain& dom = f.domain();
  tentkit::detail::Accumulator acc;
  for (std::size_t i = 0; i < f.values().size(); ++i) acc.add(std::abs(f.values()[i] * g.values()[i]));
  return acc.value() * dom.cell_volume() * dom.log_step();
}

// Least-squares slope of log y against log x.
inline double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a, sy += b, sxx += a * a, sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline SubsetFamily random_subsets(const LocalMeanField& lm, double eps, std::uint64_t seed) {
  const Domain& dom = lm.domain();
  SubsetFamily fam(eps, dom.h(), dom.d());
  for (int k = lm.k_min(); k <= lm.k_max(); ++k) {
    for (std::size_t i = 0; i < lm.cube_count(k); ++i) {
      const DyadicCube q = lm.cube(k, i);
      const std::size_t cells = fam.cells(q);
      const auto take = std::min(cells, static_cast<std::size_t>(std::floor(eps * static_cast<double>(cells))) + 1);
      Rng rng(seed ^ (static_cast<std::uint64_t>(k + 64) << 40) ^ (static_cast<std::uint64_t>(i) * 0x2545F4914F6CDD1DULL));
      std::vector<std::size_t> perm(cells);
      for (std::size_t c = 0; c < cells; ++c) perm[c] = c;
      std::vector<bool> mask(cells, false);
      for (std::size_t c = 0; c < take; ++c) {
        const std::size_t j = c + static_cast<std::size_t>(rng.integer(0, static_cast<int>(cells - c - 1)));
        std::swap(perm[c], perm[j]);
        mask[perm[c]] = true;
      }
      fam.insert(q, std::move(mask));
    }
  }
  return fam;
}

}  // namespace detail

// Constraint check for the weighted embeddings: p0 < p1, r1 ≤ r0, β0 − β1 = d/p0 − d/p1.
inline void validate_embedding(const ExponentTuple& e0, const ExponentTuple& e1, int d) {
  e0.validate();
  e1.validate();
  if (!(e0.p < e1.p)) throw parameter_error("embedding needs p0 < p1");
  if (!(e1.r <= e0.r)) throw parameter_error("embedding needs r1 <= r0");
  const double gap = d / e0.p - (is_inf(e1.p) ? 0.0 : d / e1.p);
  if (std::abs((e0.beta - e1.beta) - gap) > 1e-12 * std::max(1.0, std::abs(gap)))
    throw parameter_error("embedding needs beta0 - beta1 = d/p0 - d/p1 (got " + detail::fmt(e0.beta - e1.beta) +
                          ", need " + detail::fmt(gap) + ")");
}

// Nesting in (q, r): same p and beta, q0 ≤ q1, r1 ≤ r0.
inline void validate_nesting(const ExponentTuple& e0, const ExponentTuple& e1) {
  if (e0.p != e1.p || e0.beta != e1.beta) throw parameter_error("nesting needs equal p and beta");
  if (!(e0.q <= e1.q)) throw parameter_error("nesting needs q0 <= q1");
  if (!(e1.r <= e0.r)) throw parameter_error("nesting needs r1 <= r0");
}

// Gauss–Weierstrass kernels of order N have R = N − 1 vanishing moments; the characterization needs β < R + 1.
inline void validate_extension_hypothesis(const KernelSpec& k, double beta) {
  if (!(beta < k.moments + 1)) throw hypothesis_error("kernel with R = " + std::to_string(k.moments) +
                                                      " needs beta < R + 1, got beta = " + detail::fmt(beta));
}

inline std::vector<RatioReport> suite_equivalences(const Config& cfg) {
  const auto fam = make_family(cfg.family, all_kinds());
  const auto& B = cfg.bands;
  const int R = cfg.grid.resolutions();
  const std::size_t M = fam.members.size();
  auto recs = detail::run_tasks(R * M, worker_count(cfg), [&](std::size_t task) {
    const int res = static_cast<int>(task / M);
    const auto& mem = fam.members[task % M];
    const Domain dom = cfg.grid.at(res);
    const auto f = mem.half_space(dom);
    detail::Recorder rec("equivalences", dom, res, mem.index, mem.label());

    for (const auto& e : cfg.equivalence) {
      const auto T = tent_norm(f, e);
      const std::string es = e.str();
      for (double Mx : cfg.convexity) {
        const ExponentTuple eM(e.p / Mx, e.q / Mx, e.r / Mx, Mx * e.beta);
        const auto lhs = tent_norm(detail::power_field(f, Mx), eM);
        rec.add("convexity", "M=" + detail::fmt(Mx) + " " + es, es, lhs.value, std::pow(T.value, Mx),
                Check::identity, 0, B.identity_tol, lhs.truncation());
      }
      rec.add("homogeneity", es, es, tent_norm(detail::scaled_field(f, 3.0), e).value, 3.0 * T.value,
              Check::identity, 0, B.exact_tol, T.truncation());

      const auto lm = local_means(f, e.r);
      const auto D = dyadic_tent_norm(lm, e);
      rec.add("dyadic_vs_continuous", es, es, D.value, T.value, Check::band, B.equiv_lo, B.equiv_hi, D.truncation());
      rec.add("sequence_identity", es, es, sequence_norm(sequence_from_local_means(lm), e.p, e.q, e.beta), D.value,
              Check::identity, 0, B.exact_tol, D.truncation());

      if (!is_inf(e.p)) {
        const auto m = median_field(lm, e, 0.25);
        rec.add("median_vs_continuous", es, es, lp_norm_spatial(m, dom.cell_volume(), e.p), T.value, Check::band,
                B.equiv_lo, B.equiv_hi, D.truncation());
      } else {
        for (double a : cfg.jn_alphas) {
          const auto J = jn_norm(f, e, a);
          rec.add("jn_cross_alpha", "alpha=" + detail::fmt(a) + " " + es, es, J.value, T.value, Check::band,
                  B.equiv_lo, B.equiv_hi, J.truncation());
          const auto JD = jn_dyadic_norm(lm, e, a);
          rec.add("jn_cross_alpha_dyadic", "alpha=" + detail::fmt(a) + " " + es, es, JD.value, D.value, Check::band,
                  B.equiv_lo, B.equiv_hi, JD.truncation());
        }
      }
      for (const AverageSpec spec : {AverageSpec(0.25, 1, 2), AverageSpec(1, 2, 1)}) {
        const auto W = tent_norm(f, e, spec);
        rec.add("whitney_spec",
                "a=" + detail::fmt(spec.a) + " b=" + detail::fmt(spec.b) + " c=" + detail::fmt(spec.c) + " " + es, es,
                W.value, T.value, Check::band, B.equiv_lo, B.equiv_hi, W.truncation());
      }
    }

    for (double q : cfg.beyond_q)
      for (double a : cfg.beyond_alpha) {
        const auto lhs = beyond_infinity_norm(f, q, 0.0, a);
        const ExponentTuple ez(infinity, infinity, q, a);
        const auto rhs = z_norm(f, ez);
        rec.add("beyond_infinity", "q=" + detail::fmt(q) + " alpha=" + detail::fmt(a), ez.str(), lhs.value,
                rhs.value, Check::band, B.equiv_lo, B.equiv_hi, lhs.truncation());
      }

    // Growth in the aperture: slope of log ‖·‖_λ against log λ, stored as 2^slope vs 2^bound.
    const Domain cdom = cfg.coa_grid.at(res);
    const auto fc = mem.half_space(cdom);
    detail::Recorder crec("equivalences", cdom, res, mem.index, mem.label());
    for (const auto& e : cfg.change_of_angle) {
      std::vector<double> vals;
      for (double lam : cfg.lambdas) vals.push_back(change_of_angle_norm(fc, e, lam).value);
      const double bound = cdom.d() / e.min_pqr() + B.slope_slack;
      double slope = 0;
      if (std::all_of(vals.begin(), vals.end(), [](double v) { return v > 0; }))
        slope = detail::log_slope(cfg.lambdas, vals);
      else
        slope = std::numeric_limits<double>::quiet_NaN();
      crec.add("change_of_angle", e.str(), e.str(), std::exp2(slope), std::exp2(bound), Check::le, 0, 1.0,
               "lambda in {" + [&] {
                 std::string s;
                 for (double l : cfg.lambdas) s += (s.empty() ? "" : ",") + detail::fmt(l);
                 return s;
               }() + "}");
    }
    auto out = rec.take();
    auto more = crec.take();
    out.insert(out.end(), more.begin(), more.end());
    return out;
  });

  // The zero field has no ratio; its records are flagged degenerate.
  for (int res = 0; res < R; ++res) {
    const Domain dom = cfg.grid.at(res);
    const HalfSpaceField zero(dom, "zero");
    detail::Recorder rec("equivalences", dom, res, -1, "zero");
    for (const auto& e : cfg.equivalence)
      rec.add("dyadic_vs_continuous", e.str(), e.str(), dyadic_tent_norm(local_means(zero, e.r), e).value,
              tent_norm(zero, e).value, Check::band, B.equiv_lo, B.equiv_hi);
    auto v = rec.take();
    recs.insert(recs.end(), v.begin(), v.end());
  }
  return recs;
}

inline std::vector<RatioReport> suite_embeddings(const Config& cfg) {
  const int d = cfg.grid.d;
  for (const auto& [e0, e1] : cfg.hls) validate_embedding(e0, e1, d);
  for (const auto& [e0, e1] : cfg.nesting) validate_nesting(e0, e1);
  const auto fam = make_family(cfg.family, all_kinds());
  const auto& B = cfg.bands;
  const int R = cfg.grid.resolutions();
  const std::size_t M = fam.members.size();
  const double hi = 1.0 + B.exact_tol;
  auto recs = detail::run_tasks(R * M, worker_count(cfg), [&](std::size_t task) {
    const int res = static_cast<int>(task / M);
    const auto& mem = fam.members[task % M];
    const Domain dom = cfg.grid.at(res);
    const auto f = mem.half_space(dom);
    const auto g = fam.members[(task + 1) % M].half_space(dom);
    detail::Recorder rec("embeddings", dom, res, mem.index, mem.label());

    // Whitney-box mass of dy ds/s^{d+1}, (2^d − 1)/d; the L^r nesting of local means costs mass^{1/r1 − 1/r0}.
    const double mass = (std::exp2(d) - 1.0) / d;
    for (const auto& [e0, e1] : cfg.nesting) {
      const std::string label = e0.str() + "->" + e1.str();
      const auto lm0 = local_means(f, e0.r);
      const auto lm1 = local_means(f, e1.r);
      const double factor = std::pow(std::max(1.0, mass), (is_inf(e1.r) ? 0.0 : 1.0 / e1.r) - (is_inf(e0.r) ? 0.0 : 1.0 / e0.r));
      double lhs, rhs;
      if (is_inf(e0.p)) {
        lhs = jn_dyadic_norm(lm1, e1, 2.0).value;
        rhs = jn_dyadic_norm(lm0, e0, 2.0).value;
      } else {
        lhs = dyadic_tent_norm(lm1, e1).value;
        rhs = dyadic_tent_norm(lm0, e0).value;
      }
      rec.add("nesting_dyadic", label, label, lhs, factor * rhs, Check::le, 0, hi);
      const ExponentTuple ej(e0.p, e0.q, e1.r, e0.beta);
      const auto T1 = tent_norm(f, ej);
      rec.add("jensen_continuous", e0.str() + "->" + ej.str(), label, T1.value, tent_norm(f, e0).value, Check::le,
              0, hi, T1.truncation());
    }

    for (const auto& e : cfg.equivalence) {
      const std::string es = e.str();
      const auto lm = local_means(f, e.r);
      const auto D = dyadic_tent_norm(lm, e);
      for (double eps : cfg.subset_eps) {
        const auto sub = detail::random_subsets(lm, eps, cfg.family.seed + 7919u * static_cast<unsigned>(mem.index));
        const auto S = dyadic_subset_norm(lm, e, sub);
        const std::string label = "eps=" + detail::fmt(eps) + " " + es;
        rec.add("subset_domination", label, es, S.value, D.value, Check::le, 0, hi, S.truncation());
        // A single cube already gives (|Q|/|E_Q|)^{1/min(p,q)}, so the band widens with 1/eps.
        const double widen = std::pow(1.0 / eps, 1.0 / std::min(e.p, e.q));
        rec.add("subset_equivalence", label, es, D.value, S.value, Check::band, B.equiv_lo, B.equiv_hi * widen,
                S.truncation());
      }

      const double mu = std::min(1.0, e.min_pqr());
      const double Tf = tent_norm(f, e).value, Tg = tent_norm(g, e).value;
      rec.add("quasi_triangle", es, es, std::pow(tent_norm(detail::sum_field(f, g), e).value, mu),
              std::pow(Tf, mu) + std::pow(Tg, mu), Check::le, 0, hi);

      if (!is_inf(e.p)) {
        const ExponentTuple zlo(e.p, std::min(e.p, e.q), e.r, e.beta), zhi(e.p, std::max(e.p, e.q), e.r, e.beta);
        rec.add("tent_into_z_lower", zlo.str() + "->" + es, es, Tf, z_norm(f, zlo).value, Check::band, 0,
                B.equiv_hi);
        rec.add("tent_into_z_upper", es + "->" + zhi.str(), es, z_norm(f, zhi).value, Tf, Check::band, 0,
                B.equiv_hi);
      }
    }

    for (const auto& [e0, e1] : cfg.hls) {
      const std::string label = e0.str() + "->" + e1.str();
      const auto T0 = tent_norm(f, e0);
      const auto T1 = tent_norm(f, e1);
      rec.add("hardy_sobolev", label, label, T1.value, T0.value, Check::band, 0, B.equiv_hi, T1.truncation());
      const ExponentTuple za(e1.p, e0.p, e1.r, e1.beta);
      rec.add("mixed_tent_to_z", e0.str() + "->Z" + za.str(), label, z_norm(f, za).value, T0.value, Check::band, 0,
              B.equiv_hi);
      const ExponentTuple zb(e0.p, e1.p, e0.r, e0.beta);
      rec.add("mixed_z_to_tent", "Z" + zb.str() + "->" + e1.str(), label, T1.value, z_norm(f, zb).value,
              Check::band, 0, B.equiv_hi);
    }
    return rec.take();
  });

  // A misconfigured weight gap must be refused.
  detail::Recorder rej("embeddings", cfg.grid.at(0), 0, -1, "");
  bool refused = false;
  try {
    validate_embedding(ExponentTuple(1, 2, 2, 0), ExponentTuple(2, 2, 2, 0), d);
  } catch (const parameter_error&) {
    refused = true;
  }
  rej.add("hardy_sobolev_rejects_gap", "beta0-beta1=0", "(1,2,2,0)->(2,2,2,0)", refused ? 1.0 : 0.0, 1.0,
          Check::rejected, 1, 1);
  auto more = rej.take();
  recs.insert(recs.end(), more.begin(), more.end());
  return recs;
}

inline std::vector<RatioReport> suite_duality(const Config& cfg) {
  for (const auto& e : cfg.duality)
    if (!(e.p >= 1 && e.q >= 1 && e.r >= 1) || is_inf(e.p) || is_inf(e.q) || is_inf(e.r))
      throw parameter_error("Banach-range duality needs 1 <= p, q, r < inf");
  for (const auto& e : cfg.duality_q)
    if (!(e.p >= 1 && !is_inf(e.p) && e.q < 1 && e.r >= 1 && !is_inf(e.r)))
      throw parameter_error("q < 1 duality needs 1 <= p, r < inf and q < 1");
  for (const auto& e : cfg.duality_p)
    if (!(e.p < 1 && !is_inf(e.q) && e.r >= 1 && !is_inf(e.r)))
      throw parameter_error("p < 1 duality needs p < 1, q < inf and 1 <= r < inf");
  const auto fam = make_family(cfg.family, all_kinds());
  const auto& B = cfg.bands;
  const int R = cfg.grid.resolutions();
  const std::size_t M = fam.members.size();
  const int d = cfg.grid.d;
  return detail::run_tasks(R * M, worker_count(cfg), [&](std::size_t task) {
    const int res = static_cast<int>(task / M);
    const auto& mem = fam.members[task % M];
    const Domain dom = cfg.grid.at(res);
    const auto f = mem.half_space(dom);
    const auto g = fam.members[(task + 1) % M].half_space(dom);
    detail::Recorder rec("duality", dom, res, mem.index, mem.label());
    const double pair = detail::raw_pairing(f, g);

    for (const auto& e : cfg.duality) {
      const ExponentTuple ec(detail::conjugate(e.p), detail::conjugate(e.q), detail::conjugate(e.r), detail::negated(e.beta));
      const std::string label = e.str() + "x" + ec.str();
      rec.add("banach_holder", label, label, pair, tent_norm(f, e).value * tent_norm(g, ec).value, Check::le, 0,
              1.0 + B.exact_tol);
    }
    const ExponentTuple e2(2, 2, 2, 0);
    rec.add("self_pairing", e2.str(), e2.str(), detail::raw_pairing(f, f), std::pow(tent_norm(f, e2).value, 2),
            Check::identity, 0, B.identity_tol);
    for (const auto& e : cfg.duality_q) {
      const ExponentTuple ec(detail::conjugate(e.p), infinity, detail::conjugate(e.r), detail::negated(e.beta));
      const std::string label = e.str() + "x" + ec.str();
      rec.add("duality_small_q", label, label, pair, tent_norm(g, e).value * tent_norm(f, ec).value, Check::finite,
              0, infinity);
    }
    for (const auto& e : cfg.duality_p) {
      const ExponentTuple ez(infinity, infinity, detail::conjugate(e.r), d * (1.0 / e.p - 1.0) - e.beta);
      const std::string label = e.str() + "xZ" + ez.str();
      rec.add("duality_small_p", label, label, pair, tent_norm(g, e).value * z_norm(f, ez).value, Check::finite, 0,
              infinity);
    }
    return rec.take();
  });
}

inline std::vector<RatioReport> suite_interpolation(const Config& cfg) {
  std::vector<CoupleSpec> qcouples;
  for (const auto& [e0, e1] : cfg.q_endpoint) qcouples.push_back(CoupleSpec::q_endpoint_pair(e0, e1));
  const ExponentTuple& sh = cfg.tent_couple_shared;
  std::vector<CoupleSpec> tcouples;
  for (double p0 : cfg.tent_couple_p0)
    tcouples.push_back(CoupleSpec::tent_pair(ExponentTuple(p0, sh.q, sh.r, sh.beta), ExponentTuple(infinity, sh.q, sh.r, sh.beta)));
  const auto fam = make_family(cfg.family, all_kinds());
  const auto& B = cfg.bands;
  const int R = cfg.grid.resolutions();
  const std::size_t M = fam.members.size();
  const double theta = cfg.theta;

  // K(t) = min(μ, t) for the indicator of a set of measure μ in (L^1, L^∞).
  std::vector<RatioReport> recs;
  for (int res = 0; res < R; ++res) {
    const Domain dom = cfg.grid.at(res);
    detail::Recorder rec("interpolation", dom, res, -1, "indicator");
    const std::vector<double> one(dom.n_points(), 1.0);
    const double mu = dom.volume();
    const auto grid = geometric_t_grid(mu * 1e-12, mu * 1e12, 16);
    std::vector<std::pair<double, double>> tk;
    for (double t : grid) tk.emplace_back(t, k_functional_lp_truncation(one, dom.cell_volume(), 1.0, t).value);
    for (double th : {0.25, 0.5, 0.75})
      for (double q : {1.0, 2.0}) {
        const double exact = std::pow(mu, 1 - th) * std::pow(1.0 / (q * th * (1 - th)), 1.0 / q);
        rec.add("lp_couple_analytic", "theta=" + detail::fmt(th) + " q=" + detail::fmt(q), "(1,inf)",
                real_interpolation_norm(tk, th, q), exact, Check::identity, 0, B.analytic_tol,
                "t in [1e-12, 1e12]");
      }
    auto v = rec.take();
    recs.insert(recs.end(), v.begin(), v.end());
  }

  auto member_recs = detail::run_tasks(R * M, worker_count(cfg), [&](std::size_t task) {
    const int res = static_cast<int>(task / M);
    const auto& mem = fam.members[task % M];
    const Domain dom = cfg.grid.at(res);
    const auto f = mem.half_space(dom);
    detail::Recorder rec("interpolation", dom, res, mem.index, mem.label());

    for (const auto& couple : tcouples) {
      const double p0 = couple.e0.p;
      const auto lm = local_means(f, couple.e0.r);
      const auto cands = tent_split_candidates(lm, couple);
      const auto m = median_field(lm, couple.e0, 0.25);
      const double m0 = lp_norm_spatial(m, dom.cell_volume(), p0);
      const double m1 = lp_norm_spatial(m, dom.cell_volume(), infinity);
      const std::string pair = couple.e0.str() + "," + couple.e1.str();
      if (m0 > 0 && m1 > 0) {
        const auto ts = auto_t_grid(m0, m1, cfg.k_decades, cfg.k_per_decade);
        for (std::size_t i = 0; i < ts.size(); ++i) {
          const auto K = k_functional_tent(cands, ts[i]);
          rec.add("tent_k_vs_median_k", pair + " t#" + std::to_string(i), pair, K.value,
                  k_functional_lp(m, dom.cell_volume(), p0, ts[i]), Check::band, B.equiv_lo, B.equiv_hi);
        }
      } else {
        rec.add("tent_k_vs_median_k", pair + " t#0", pair, 0.0, 0.0, Check::band, B.equiv_lo, B.equiv_hi);
      }

      const double n0 = dyadic_tent_norm(lm, couple.e0).value, n1 = dyadic_tent_norm(lm, couple.e1).value;
      const double ptheta = p0 / (1 - theta);
      const ExponentTuple et(ptheta, couple.e0.q, couple.e0.r, couple.e0.beta);
      const double target = dyadic_tent_norm(lm, et).value;
      double interp = 0;
      if (n0 > 0 && n1 > 0) {
        std::vector<std::pair<double, double>> tk;
        for (double t : auto_t_grid(n0, n1, 6, 8)) tk.emplace_back(t, k_functional_tent(cands, t).value);
        interp = real_interpolation_norm(tk, theta, ptheta);
      }
      rec.add("p_scale", pair + " theta=" + detail::fmt(theta), et.str(), interp, target, Check::band, B.equiv_lo,
              B.equiv_hi);
    }

    for (const auto& couple : qcouples) {
      const auto lm = local_means(f, couple.e0.r);
      const auto cands = tent_split_candidates(lm, couple);
      const double n0 = dyadic_tent_norm(lm, couple.e0).value, n1 = dyadic_tent_norm(lm, couple.e1).value;
      const double bt = (1 - theta) * couple.e0.beta + theta * couple.e1.beta;
      const ExponentTuple ez(couple.e0.p, cfg.interp_q, couple.e0.r, bt);
      const auto Z = z_norm(f, ez);
      double interp = 0;
      if (n0 > 0 && n1 > 0) {
        std::vector<std::pair<double, double>> tk;
        for (double t : auto_t_grid(n0, n1, 6, 8)) tk.emplace_back(t, k_functional_tent(cands, t).value);
        interp = real_interpolation_norm(tk, theta, cfg.interp_q);
      }
      const std::string pair = couple.e0.str() + "," + couple.e1.str();
      rec.add("q_endpoint_scale", pair + " theta=" + detail::fmt(theta), "Z" + ez.str(), interp, Z.value,
              Check::band, B.equiv_lo, B.equiv_hi, Z.truncation());
    }
    return rec.take();
  });
  recs.insert(recs.end(), member_recs.begin(), member_recs.end());
  return recs;
}

inline std::vector<RatioReport> suite_characterization(const Config& cfg) {
  const KernelSpec heat = KernelSpec::heat();
  for (double b : cfg.char_beta) validate_extension_hypothesis(heat, b);
  const KernelSpec gw = KernelSpec::gauss_weierstrass(1);
  const double gw_beta = 0.5;
  validate_extension_hypothesis(gw, gw_beta);
  FamilyParams fp = cfg.family;
  fp.count = cfg.boundary_count;
  const auto fam = make_family(fp, boundary_kinds());
  const auto& B = cfg.bands;
  const int R = cfg.char_grid.resolutions();
  const std::size_t M = fam.members.size();
  const int d = cfg.char_grid.d;
  auto recs = detail::run_tasks(R * M, worker_count(cfg), [&](std::size_t task) {
    const int res = static_cast<int>(task / M);
    const auto& mem = fam.members[task % M];
    const Domain dom = cfg.char_grid.at(res);
    const auto f = mem.boundary(dom);
    detail::Recorder rec("characterization", dom, res, mem.index, mem.label());
    const auto blocks = lp_block_transform(f);

    const auto u = extend(f, heat, dom);
    for (double b : cfg.char_beta)
      for (double r : cfg.char_r) {
        const ExponentTuple e(infinity, cfg.char_q, r, b);
        const auto T = tent_norm(u, e);
        rec.add("heat_vs_blocks", e.str(), e.str(), T.value, f_endpoint_norm(blocks, cfg.char_q, b), Check::band,
                B.equiv_lo, B.equiv_hi, T.truncation());
      }
    const auto v = extend(f, gw, dom);
    const ExponentTuple egw(infinity, cfg.char_q, 2, gw_beta);
    const auto Tg = tent_norm(v, egw);
    rec.add("gauss_weierstrass_vs_blocks", "N=1 " + egw.str(), egw.str(), Tg.value,
            f_endpoint_norm(blocks, cfg.char_q, gw_beta), Check::band, B.equiv_lo, B.equiv_hi, Tg.truncation());

    const double crit = d / cfg.conv_alpha;
    std::vector<double> ratios;
    for (double o : cfg.conv_offsets) {
      const auto c = convolution_inequality_check(blocks, crit + o, cfg.conv_q, cfg.conv_alpha);
      rec.add("convolution_finite", "delta=d/alpha+" + detail::fmt(o), "", c.lhs, c.rhs, Check::finite, 0, infinity);
      ratios.push_back(c.ratio);
    }
    for (std::size_t i = 1; i < ratios.size(); ++i)
      rec.add("convolution_monotone",
              "delta=d/alpha+" + detail::fmt(cfg.conv_offsets[i]) + " vs +" + detail::fmt(cfg.conv_offsets[i - 1]), "",
              ratios[i], ratios[i - 1], Check::le, 0, 1.0 + B.exact_tol);
    return rec.take();
  });

  for (int res = 0; res < R; ++res) {
    const Domain dom = cfg.char_grid.at(res);
    const BoundaryField zero(dom, "zero");
    detail::Recorder rec("characterization", dom, res, -1, "zero");
    const auto blocks = lp_block_transform(zero);
    const auto u = extend(zero, heat, dom);
    for (double b : cfg.char_beta)
      for (double r : cfg.char_r) {
        const ExponentTuple e(infinity, cfg.char_q, r, b);
        rec.add("heat_vs_blocks", e.str(), e.str(), tent_norm(u, e).value, f_endpoint_norm(blocks, cfg.char_q, b),
                Check::band, B.equiv_lo, B.equiv_hi);
      }
    auto v = rec.take();
    recs.insert(recs.end(), v.begin(), v.end());
  }

  detail::Recorder rej("characterization", cfg.char_grid.at(0), 0, -1, "");
  bool refused = false;
  try {
    validate_extension_hypothesis(heat, 0.0);
  } catch (const hypothesis_error&) {
    refused = true;
  }
  rej.add("heat_rejects_beta", "beta=0", "", refused ? 1.0 : 0.0, 1.0, Check::rejected, 1, 1);
  refused = false;
  try {
    const auto f = fam.members.front().boundary(cfg.char_grid.at(0));
    (void)convolution_inequality_check(lp_block_transform(f), d / cfg.conv_alpha, cfg.conv_q, cfg.conv_alpha);
  } catch (const hypothesis_error&) {
    refused = true;
  }
  rej.add("convolution_rejects_delta", "delta=d/alpha", "", refused ? 1.0 : 0.0, 1.0, Check::rejected, 1, 1);
  auto more = rej.take();
  recs.insert(recs.end(), more.begin(), more.end());
  return recs;
}

// Experiments whose refinement drift is held to the configured limit.
inline std::map<std::string, double> drift_limits(const Config& cfg) {
  std::map<std::string, double> m;
  for (const char* e : {"dyadic_vs_continuous", "median_vs_continuous", "jn_cross_alpha", "jn_cross_alpha_dyadic",
                        "heat_vs_blocks"})
    m[e] = cfg.bands.drift;
  return m;
}

inline std::vector<RatioReport> run_suite(const Config& cfg, const std::string& name) {
  if (name == "equivalences") return suite_equivalences(cfg);
  if (name == "embeddings") return suite_embeddings(cfg);
  if (name == "duality") return suite_duality(cfg);
  if (name == "interpolation") return suite_interpolation(cfg);
  if (name == "characterization") return suite_characterization(cfg);
  throw parameter_error("unknown suite '" + name + "'");
}

inline ReportSet run_suites(const Config& cfg, const std::vector<std::string>& names) {
  cfg.validate();
  ReportSet out;
  for (const auto& n : names) {
    auto r = run_suite(cfg, n);
    out.records.insert(out.records.end(), r.begin(), r.end());
  }
  out.summaries = summarize(out.records, drift_limits(cfg));
  return out;
}

}  // namespace tentkit::harness
