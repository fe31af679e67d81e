#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "tentkit/core.hpp"
#include "tentkit/kernels.hpp"

namespace tentkit::harness {

// Seeded draws built on the raw mt19937_64 stream, so members are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : g_(seed) {}

  double uniform() { return static_cast<double>(g_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(g_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  int sign() { return (g_() & 1u) ? 1 : -1; }

 private:
  std::mt19937_64 g_;
};

struct Mode {
  std::vector<int> nu;
  double amp = 1.0;
  double phase = 0.0;
};

struct MemberSpec {
  enum class Kind { fourier_mode, trig_poly, lacunary, whitney_indicator };

  Kind kind = Kind::fourier_mode;
  int index = 0;
  std::vector<Mode> modes;
  // whitney_indicator: generation fraction, offset fractions, amplitude
  double gen_frac = 0.0;
  std::vector<double> offset_frac;
  double amp = 1.0;
  int finest_log2_h = 0;
  int extension_order = 1;

  std::string kind_name() const {
    switch (kind) {
      case Kind::fourier_mode: return "fourier_mode";
      case Kind::trig_poly: return "trig_poly";
      case Kind::lacunary: return "lacunary";
      case Kind::whitney_indicator: return "whitney_indicator";
    }
    return "?";
  }
  std::string label() const { return kind_name() + "#" + std::to_string(index); }
  bool has_boundary() const { return kind != Kind::whitney_indicator; }

  BoundaryField boundary(const Domain& dom) const {
    if (!has_boundary()) throw parameter_error("member " + label() + " has no boundary datum");
    const double w = 2.0 * std::numbers::pi / dom.side();
    return BoundaryField::from_function(
        dom,
        [&](std::span<const double> y) {
          double v = 0;
          for (const auto& m : modes) {
            double arg = m.phase;
            for (int a = 0; a < dom.d(); ++a) arg += w * m.nu[a] * y[a];
            v += m.amp * std::cos(arg);
          }
          return v;
        },
        label());
  }

  // The generation of an indicator box, fixed by the scale range so that it agrees across resolutions.
  int indicator_generation(const Domain& dom) const {
    const int lo = std::max(detail::ilog2(dom.s_min()) + 1, finest_log2_h);
    const int hi = detail::ilog2(dom.s_max());
    if (lo > hi) throw parameter_error("no Whitney box fits the scale range");
    return lo + std::min(hi - lo, static_cast<int>(gen_frac * (hi - lo + 1)));
  }

  HalfSpaceField half_space(const Domain& dom) const {
    if (kind != Kind::whitney_indicator)
      return extend(boundary(dom), KernelSpec::gauss_weierstrass(extension_order), dom);
    const int k = indicator_generation(dom);
    const double len = std::ldexp(1.0, k);
    const int per_axis = static_cast<int>(std::lround(dom.side() / len));
    std::vector<double> lo(dom.d());
    for (int a = 0; a < dom.d(); ++a) lo[a] = len * std::floor(offset_frac[a] * per_axis);
    const double s_lo = len / 2 * std::exp2(1.0 / dom.m_scale()) * (1 - 1e-12);
    const double s_hi = len * (1 + 1e-12);
    return HalfSpaceField::from_function(
        dom,
        [&](double s, std::span<const double> y) {
          if (s < s_lo || s > s_hi) return 0.0;
          for (int a = 0; a < dom.d(); ++a)
            if (y[a] < lo[a] - 1e-12 || y[a] >= lo[a] + len - 1e-12) return 0.0;
          return amp;
        },
        label());
  }
};

struct FamilyParams {
  std::uint64_t seed = 20240601;
  int count = 20;
  int d = 1;
  int max_frequency = 6;   // trig modes
  int max_lacunary = 16;   // top lacunary frequency
  int finest_log2_h = -7;  // log2 of the coarsest grid step; indicator cubes are at least one cell
  int extension_order = 1;
};

struct TestFamily {
  FamilyParams params;
  std::vector<MemberSpec> members;
};

namespace detail {

inline std::vector<int> random_frequency(Rng& rng, int d, int max_freq) {
  std::vector<int> nu(d, 0);
  while (std::all_of(nu.begin(), nu.end(), [](int v) { return v == 0; }))
    for (int& v : nu) v = rng.integer(-max_freq, max_freq);
  if (d == 1) nu[0] = std::abs(nu[0]);
  return nu;
}

}  // namespace detail

// Members cycle through `kinds`; every member draws from its own stream seeded by (seed, index).
inline TestFamily make_family(const FamilyParams& p, const std::vector<MemberSpec::Kind>& kinds) {
  if (p.count < 1) throw parameter_error("family count must be positive");
  if (kinds.empty()) throw parameter_error("family needs at least one member kind");
  TestFamily fam{p, {}};
  for (int i = 0; i < p.count; ++i) {
    Rng rng(p.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(i));
    MemberSpec m;
    m.kind = kinds[static_cast<std::size_t>(i) % kinds.size()];
    m.index = i;
    m.finest_log2_h = p.finest_log2_h;
    m.extension_order = p.extension_order;
    switch (m.kind) {
      case MemberSpec::Kind::fourier_mode:
        m.modes.push_back({detail::random_frequency(rng, p.d, p.max_frequency), 1.0,
                           rng.uniform(0, 2 * std::numbers::pi)});
        break;
      case MemberSpec::Kind::trig_poly: {
        const int terms = rng.integer(2, 5);
        for (int t = 0; t < terms; ++t)
          m.modes.push_back({detail::random_frequency(rng, p.d, p.max_frequency), rng.uniform(-1, 1),
                             rng.uniform(0, 2 * std::numbers::pi)});
        break;
      }
      case MemberSpec::Kind::lacunary: {
        auto base = detail::random_frequency(rng, p.d, 2);
        int top = 0;
        for (int v : base) top = std::max(top, std::abs(v));
        for (int k = 0; top << k <= p.max_lacunary; ++k) {
          std::vector<int> nu = base;
          for (int& v : nu) v <<= k;
          m.modes.push_back({nu, rng.uniform(0.25, 1.0) * rng.sign(), rng.uniform(0, 2 * std::numbers::pi)});
        }
        break;
      }
      case MemberSpec::Kind::whitney_indicator:
        m.gen_frac = rng.uniform();
        for (int a = 0; a < p.d; ++a) m.offset_frac.push_back(rng.uniform());
        m.amp = rng.uniform(0.5, 2.0);
        break;
    }
    fam.members.push_back(std::move(m));
  }
  return fam;
}

inline std::vector<MemberSpec::Kind> all_kinds() {
  using K = MemberSpec::Kind;
  return {K::fourier_mode, K::trig_poly, K::lacunary, K::whitney_indicator};
}

inline std::vector<MemberSpec::Kind> boundary_kinds() {
  using K = MemberSpec::Kind;
  return {K::fourier_mode, K::trig_poly, K::lacunary};
}

}  // namespace tentkit::harness
