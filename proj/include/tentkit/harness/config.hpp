#pragma once

#include <algorithm>
#include <cstdlib>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "tentkit/core.hpp"
#include "tentkit/harness/families.hpp"

namespace tentkit::harness {

struct GridConfig {
  int d = 1;
  double side = 1.0;
  double s_min = 0.015625;
  double s_max = 0.25;
  std::vector<int> n_space{128, 256};
  std::vector<int> m_scale{4, 8};

  int resolutions() const { return static_cast<int>(n_space.size()); }
  Domain at(int res) const {
    return Domain(d, side, n_space.at(static_cast<std::size_t>(res)), s_min, s_max,
                  m_scale.at(static_cast<std::size_t>(res)));
  }
  void validate(const std::string& where) const {
    if (n_space.size() != m_scale.size()) throw parameter_error(where + ": n_space and m_scale lists differ in length");
    if (n_space.size() < 2) throw parameter_error(where + ": at least two resolutions are required");
    for (int r = 0; r < resolutions(); ++r) (void)at(r);
  }
};

struct Bands {
  double equiv_lo = 0.125;
  double equiv_hi = 8.0;
  double exact_tol = 1e-12;
  double identity_tol = 1e-9;
  double drift = 0.10;
  double analytic_tol = 0.03;
  double slope_slack = 0.1;
};

using TuplePair = std::pair<ExponentTuple, ExponentTuple>;

struct Config {
  GridConfig grid;
  GridConfig coa_grid{1, 1.0, 0.00390625, 0.0625, {128, 256}, {4, 8}};
  GridConfig char_grid{1, 1.0, 0.001953125, 1.0, {128, 256}, {4, 8}};
  FamilyParams family;
  int boundary_count = 10;
  std::vector<std::string> suites{"equivalences", "embeddings", "duality", "interpolation", "characterization"};
  Bands bands;
  unsigned threads = 0;  // 0: hardware concurrency

  std::vector<ExponentTuple> equivalence;
  std::vector<ExponentTuple> change_of_angle;
  std::vector<double> lambdas{2, 4, 8};
  std::vector<double> convexity{0.5, 2, 3};
  std::vector<double> jn_alphas{0.5, 1, 2};
  std::vector<double> beyond_q{1, 2, infinity};
  std::vector<double> beyond_alpha{0.5, 1};
  std::vector<TuplePair> nesting;
  std::vector<TuplePair> hls;
  std::vector<ExponentTuple> duality;
  std::vector<ExponentTuple> duality_q;
  std::vector<ExponentTuple> duality_p;
  std::vector<double> subset_eps{0.5, 0.25};
  std::vector<double> tent_couple_p0{1, 2};
  ExponentTuple tent_couple_shared{infinity, 2, 2, 0};  // q, r, beta of the tent couple
  std::vector<TuplePair> q_endpoint;
  double theta = 0.5;
  double interp_q = 2.0;
  double k_decades = 1.0;
  int k_per_decade = 8;
  std::vector<double> char_beta{-0.5};
  double char_q = 2.0;
  std::vector<double> char_r{1, 2, infinity};
  std::vector<double> conv_offsets{0.05, 0.5, 2};
  double conv_q = 2.0;
  double conv_alpha = 2.0;

  Config();
  void validate() const;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Reals, "inf", and fractions "a/b".
inline double parse_real(const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "inf" || s == "+inf" || s == "infinity") return infinity;
  if (s == "-inf") return -infinity;
  const auto slash = s.find('/');
  try {
    std::size_t used = 0;
    if (slash != std::string::npos) {
      const double a = std::stod(s.substr(0, slash), &used);
      if (used != slash) throw std::invalid_argument(s);
      const std::string den = s.substr(slash + 1);
      const double b = std::stod(den, &used);
      if (used != den.size()) throw std::invalid_argument(s);
      return a / b;
    }
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw format_error("not a number: '" + s + "'");
  }
}

inline std::vector<double> parse_reals(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) out.push_back(parse_real(item));
  return out;
}

inline std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  for (double v : parse_reals(s)) {
    if (v != std::floor(v) || std::abs(v) > 1e9) throw format_error("not an integer list: '" + s + "'");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

inline ExponentTuple parse_tuple(const std::string& s) {
  const auto v = parse_reals(s);
  if (v.size() != 4) throw format_error("exponent tuple needs p,q,r,beta: '" + s + "'");
  ExponentTuple e(v[0], v[1], v[2], v[3]);
  e.validate();
  return e;
}

inline std::vector<ExponentTuple> parse_tuples(const std::string& s) {
  std::vector<ExponentTuple> out;
  for (const auto& item : split(s, ';')) out.push_back(parse_tuple(item));
  return out;
}

inline std::vector<TuplePair> parse_pairs(const std::string& s) {
  std::vector<TuplePair> out;
  for (const auto& item : split(s, ';')) {
    const auto parts = split(item, '>');
    if (parts.size() != 2) throw format_error("exponent pair needs 'p,q,r,b > p,q,r,b': '" + item + "'");
    out.emplace_back(parse_tuple(parts[0]), parse_tuple(parts[1]));
  }
  return out;
}

}  // namespace detail

inline Config::Config() {
  equivalence = detail::parse_tuples("2,2,2,0; 1,2,1,0.5; 1/2,1,2,0; 2,inf,2,0; 3,2,inf,-0.5; inf,2,2,0; inf,1,1,0.5; inf,inf,2,0");
  change_of_angle = detail::parse_tuples("1/2,1,2,0; 1,2,1,0; 2,2,2,0; 2,1/2,inf,0; inf,2,1,0; inf,inf,inf,0");
  nesting = detail::parse_pairs("1/2,1,2,0 > 1/2,2,1,0; 1,1,2,0 > 1,2,1,0; 2,1,2,1/2 > 2,2,1,1/2; inf,1,2,0 > inf,2,1,0");
  hls = detail::parse_pairs("1,2,2,1/2 > 2,2,2,0; 1,1,2,1 > inf,2,1,0; 1/2,2,2,1 > 1,1,2,0");
  duality = detail::parse_tuples("2,2,2,0; 3/2,3,2,0.5; 4,4/3,3,-0.5; 3,3/2,4/3,0");
  duality_q = detail::parse_tuples("2,1/2,2,0; 3/2,3/4,2,0.5");
  duality_p = detail::parse_tuples("1/2,2,2,0; 1/2,1,1,0.5");
  q_endpoint = detail::parse_pairs("2,1,2,0 > 2,2,2,1; 1,2,2,-1/2 > 1,1,2,1/2; inf,1,2,0 > inf,2,2,1");
}

inline void Config::validate() const {
  grid.validate("domain");
  coa_grid.validate("change_of_angle");
  char_grid.validate("characterization");
  if (family.d != grid.d || coa_grid.d != grid.d || char_grid.d != grid.d)
    throw parameter_error("all grids must share the dimension d");
  if (family.count < 1 || boundary_count < 1) throw parameter_error("family counts must be positive");
  if (!(theta > 0 && theta < 1)) throw parameter_error("theta must lie in (0, 1)");
  if (!(bands.equiv_lo > 0 && bands.equiv_hi >= bands.equiv_lo)) throw parameter_error("bad equivalence band");
  const std::vector<std::string> known{"equivalences", "embeddings", "duality", "interpolation", "characterization"};
  for (const auto& s : suites)
    if (std::find(known.begin(), known.end(), s) == known.end()) throw parameter_error("unknown suite '" + s + "'");
}

inline Config parse_config(std::istream& is) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw format_error(std::string("config: ") + e.what());
  }
  static const std::vector<std::pair<std::string, std::vector<std::string>>> allowed{
      {"domain", {"d", "side", "s_min", "s_max", "n_space", "m_scale"}},
      {"change_of_angle", {"s_min", "s_max", "n_space", "m_scale", "lambdas", "tuples"}},
      {"characterization",
       {"s_min", "s_max", "n_space", "m_scale", "count", "beta", "q", "r", "conv_offsets", "conv_q", "conv_alpha"}},
      {"families", {"seed", "count", "max_frequency", "max_lacunary", "extension_order"}},
      {"suites", {"run", "threads"}},
      {"bands", {"equiv_lo", "equiv_hi", "exact_tol", "identity_tol", "drift", "analytic_tol", "slope_slack"}},
      {"exponents",
       {"equivalence", "convexity", "jn_alpha", "beyond_q", "beyond_alpha", "nesting", "hls", "duality", "duality_q",
        "duality_p", "subset_eps"}},
      {"interpolation", {"tent_p0", "tent_shared", "q_endpoint", "theta", "q", "decades", "per_decade"}},
  };
  for (const auto& [sec, body] : tree) {
    auto it = std::find_if(allowed.begin(), allowed.end(), [&](const auto& a) { return a.first == sec; });
    if (it == allowed.end()) throw format_error("config: unknown section [" + sec + "]");
    for (const auto& [key, _] : body)
      if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
        throw format_error("config: unknown key '" + key + "' in [" + sec + "]");
  }

  Config c;
  auto str = [&](const std::string& path) -> std::optional<std::string> {
    auto v = tree.get_optional<std::string>(path);
    if (!v) return std::nullopt;
    return detail::trim(*v);
  };
  auto real = [&](const std::string& path, double& dst) {
    if (auto v = str(path)) dst = detail::parse_real(*v);
  };
  auto integer = [&](const std::string& path, int& dst) {
    if (auto v = str(path)) {
      const auto xs = detail::parse_ints(*v);
      if (xs.size() != 1) throw format_error("config: " + path + " must be one integer");
      dst = xs[0];
    }
  };
  auto reals = [&](const std::string& path, std::vector<double>& dst) {
    if (auto v = str(path)) dst = detail::parse_reals(*v);
  };
  auto ints = [&](const std::string& path, std::vector<int>& dst) {
    if (auto v = str(path)) dst = detail::parse_ints(*v);
  };
  auto tuples = [&](const std::string& path, std::vector<ExponentTuple>& dst) {
    if (auto v = str(path)) dst = detail::parse_tuples(*v);
  };
  auto pairs = [&](const std::string& path, std::vector<TuplePair>& dst) {
    if (auto v = str(path)) dst = detail::parse_pairs(*v);
  };
  auto grid = [&](const std::string& sec, GridConfig& g) {
    real(sec + ".s_min", g.s_min);
    real(sec + ".s_max", g.s_max);
    ints(sec + ".n_space", g.n_space);
    ints(sec + ".m_scale", g.m_scale);
  };

  try {
    integer("domain.d", c.grid.d);
    real("domain.side", c.grid.side);
    grid("domain", c.grid);
    for (GridConfig* g : {&c.coa_grid, &c.char_grid}) {
      g->d = c.grid.d;
      g->side = c.grid.side;
    }
    // Sub-grids follow the main resolutions unless they set their own.
    c.coa_grid.n_space = c.char_grid.n_space = c.grid.n_space;
    c.coa_grid.m_scale = c.char_grid.m_scale = c.grid.m_scale;
    c.coa_grid.s_max = c.grid.side / 16;
    c.coa_grid.s_min = c.coa_grid.s_max / 16;
    c.char_grid.s_max = c.grid.side;
    c.char_grid.s_min = c.grid.side / 512;
    grid("change_of_angle", c.coa_grid);
    reals("change_of_angle.lambdas", c.lambdas);
    tuples("change_of_angle.tuples", c.change_of_angle);
    grid("characterization", c.char_grid);
    integer("characterization.count", c.boundary_count);
    reals("characterization.beta", c.char_beta);
    real("characterization.q", c.char_q);
    reals("characterization.r", c.char_r);
    reals("characterization.conv_offsets", c.conv_offsets);
    real("characterization.conv_q", c.conv_q);
    real("characterization.conv_alpha", c.conv_alpha);

    if (auto v = str("families.seed")) {
      const double s = detail::parse_real(*v);
      if (s < 0 || s != std::floor(s) || s > 9.007199254740992e15) throw format_error("config: seed must be a non-negative integer");
      c.family.seed = static_cast<std::uint64_t>(s);
    }
    integer("families.count", c.family.count);
    integer("families.max_frequency", c.family.max_frequency);
    integer("families.max_lacunary", c.family.max_lacunary);
    integer("families.extension_order", c.family.extension_order);

    if (auto v = str("suites.run")) {
      c.suites.clear();
      for (const auto& s : detail::split(*v, ',')) c.suites.push_back(s);
    }
    if (auto v = str("suites.threads")) {
      const auto xs = detail::parse_ints(*v);
      if (xs.size() != 1 || xs[0] < 0) throw format_error("config: threads must be a non-negative integer");
      c.threads = static_cast<unsigned>(xs[0]);
    }

    real("bands.equiv_lo", c.bands.equiv_lo);
    real("bands.equiv_hi", c.bands.equiv_hi);
    real("bands.exact_tol", c.bands.exact_tol);
    real("bands.identity_tol", c.bands.identity_tol);
    real("bands.drift", c.bands.drift);
    real("bands.analytic_tol", c.bands.analytic_tol);
    real("bands.slope_slack", c.bands.slope_slack);

    tuples("exponents.equivalence", c.equivalence);
    reals("exponents.convexity", c.convexity);
    reals("exponents.jn_alpha", c.jn_alphas);
    reals("exponents.beyond_q", c.beyond_q);
    reals("exponents.beyond_alpha", c.beyond_alpha);
    pairs("exponents.nesting", c.nesting);
    pairs("exponents.hls", c.hls);
    tuples("exponents.duality", c.duality);
    tuples("exponents.duality_q", c.duality_q);
    tuples("exponents.duality_p", c.duality_p);
    reals("exponents.subset_eps", c.subset_eps);

    reals("interpolation.tent_p0", c.tent_couple_p0);
    if (auto v = str("interpolation.tent_shared")) c.tent_couple_shared = detail::parse_tuple(*v);
    pairs("interpolation.q_endpoint", c.q_endpoint);
    real("interpolation.theta", c.theta);
    real("interpolation.q", c.interp_q);
    real("interpolation.decades", c.k_decades);
    integer("interpolation.per_decade", c.k_per_decade);
  } catch (const parameter_error& e) {
    throw format_error(std::string("config: ") + e.what());
  }

  c.family.d = c.grid.d;
  c.family.finest_log2_h = tentkit::detail::ilog2(c.grid.side / *std::min_element(c.grid.n_space.begin(), c.grid.n_space.end()));
  const int nmin = *std::min_element(c.grid.n_space.begin(), c.grid.n_space.end());
  if (c.family.max_lacunary > nmin / 4) c.family.max_lacunary = nmin / 4;
  try {
    c.validate();
  } catch (const parameter_error& e) {
    throw format_error(std::string("config: ") + e.what());
  }
  return c;
}

inline Config load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw format_error("cannot open config " + path);
  return parse_config(is);
}

// TENTKIT_THREADS caps the worker count.
inline unsigned worker_count(const Config& c) {
  unsigned n = c.threads != 0 ? c.threads : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("TENTKIT_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) n = std::min(n, static_cast<unsigned>(cap));
  }
  return std::max(1u, n);
}

}  // namespace tentkit::harness
