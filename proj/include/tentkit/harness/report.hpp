#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "tentkit/core.hpp"

namespace tentkit::harness {

// band: lo ≤ ratio ≤ hi.  le: ratio ≤ 1 + tol.  identity: |ratio − 1| ≤ tol.
// finite: ratio recorded, only finiteness required.  rejected: lhs = 1 iff the invalid input was refused.
enum class Check { band, le, identity, finite, rejected };

inline const char* check_name(Check c) {
  switch (c) {
    case Check::band: return "band";
    case Check::le: return "le";
    case Check::identity: return "identity";
    case Check::finite: return "finite";
    case Check::rejected: return "rejected";
  }
  return "?";
}

inline Check check_from_name(const std::string& s) {
  for (Check c : {Check::band, Check::le, Check::identity, Check::finite, Check::rejected})
    if (s == check_name(c)) return c;
  throw format_error("unknown check kind '" + s + "'");
}

struct RatioReport {
  std::string suite;
  std::string experiment;
  std::string label;  // exponent tuple or parameter that distinguishes series within an experiment
  int member = -1;
  std::string member_label;
  int resolution = 0;
  std::string grid;
  std::string exponents;
  std::string truncation;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  Check check = Check::band;
  double lo = 0.0;
  double hi = 0.0;
  bool degenerate = false;
  bool pass = false;

  // Fills ratio, degenerate and pass from lhs, rhs and the check bounds.
  void evaluate() {
    if (check == Check::rejected) {
      ratio = lhs;
      degenerate = false;
      pass = lhs == 1.0;
      return;
    }
    degenerate = !(rhs > 0) || !std::isfinite(rhs) || !std::isfinite(lhs) || lhs < 0;
    if (degenerate) {
      ratio = std::numeric_limits<double>::quiet_NaN();
      pass = false;
      return;
    }
    ratio = lhs / rhs;
    switch (check) {
      case Check::band: pass = ratio >= lo && ratio <= hi; break;
      case Check::le: pass = ratio <= hi; break;
      case Check::identity: pass = std::abs(ratio - 1.0) <= hi; break;
      case Check::finite: pass = std::isfinite(ratio); break;
      case Check::rejected: break;
    }
  }
};

struct Summary {
  std::string suite;
  std::string experiment;
  std::string label;
  Check check = Check::band;
  int records = 0;
  int degenerate = 0;
  int failed = 0;
  double min = 0.0;
  double max = 0.0;
  double drift = 0.0;
  double drift_limit = 0.0;  // 0 disables the drift requirement
  bool pass = false;
};

inline nlohmann::ordered_json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

inline double number_from(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

inline nlohmann::ordered_json to_json(const RatioReport& r) {
  nlohmann::ordered_json j;
  j["type"] = "ratio";
  j["suite"] = r.suite;
  j["experiment"] = r.experiment;
  j["label"] = r.label;
  j["member"] = r.member;
  j["member_label"] = r.member_label;
  j["resolution"] = r.resolution;
  j["grid"] = r.grid;
  j["exponents"] = r.exponents;
  j["truncation"] = r.truncation;
  j["lhs"] = number_or_null(r.lhs);
  j["rhs"] = number_or_null(r.rhs);
  j["ratio"] = number_or_null(r.ratio);
  j["check"] = check_name(r.check);
  j["band"] = {number_or_null(r.lo), number_or_null(r.hi)};
  j["degenerate"] = r.degenerate;
  j["pass"] = r.pass;
  return j;
}

inline nlohmann::ordered_json to_json(const Summary& s) {
  nlohmann::ordered_json j;
  j["type"] = "summary";
  j["suite"] = s.suite;
  j["experiment"] = s.experiment;
  j["label"] = s.label;
  j["check"] = check_name(s.check);
  j["records"] = s.records;
  j["degenerate"] = s.degenerate;
  j["failed"] = s.failed;
  j["min"] = number_or_null(s.min);
  j["max"] = number_or_null(s.max);
  j["drift"] = number_or_null(s.drift);
  j["drift_limit"] = s.drift_limit;
  j["pass"] = s.pass;
  return j;
}

inline RatioReport ratio_from_json(const nlohmann::json& j) {
  RatioReport r;
  r.suite = j.at("suite");
  r.experiment = j.at("experiment");
  r.label = j.at("label");
  r.member = j.at("member");
  r.member_label = j.at("member_label");
  r.resolution = j.at("resolution");
  r.grid = j.at("grid");
  r.exponents = j.at("exponents");
  r.truncation = j.at("truncation");
  r.lhs = number_from(j.at("lhs"));
  r.rhs = number_from(j.at("rhs"));
  r.ratio = number_from(j.at("ratio"));
  r.check = check_from_name(j.at("check"));
  // An open band end is written as null.
  const auto& band = j.at("band");
  r.lo = band.at(0).is_null() ? -std::numeric_limits<double>::infinity() : band.at(0).get<double>();
  r.hi = band.at(1).is_null() ? std::numeric_limits<double>::infinity() : band.at(1).get<double>();
  r.degenerate = j.at("degenerate");
  r.pass = j.at("pass");
  return r;
}

inline Summary summary_from_json(const nlohmann::json& j) {
  Summary s;
  s.suite = j.at("suite");
  s.experiment = j.at("experiment");
  s.label = j.at("label");
  s.check = check_from_name(j.at("check"));
  s.records = j.at("records");
  s.degenerate = j.at("degenerate");
  s.failed = j.at("failed");
  s.min = number_from(j.at("min"));
  s.max = number_from(j.at("max"));
  s.drift = number_from(j.at("drift"));
  s.drift_limit = j.at("drift_limit");
  s.pass = j.at("pass");
  return s;
}

// Groups records by (suite, experiment, label). Degenerate records are excluded from the
// band statistics and counted; a summary passes when at least one record is usable, every
// usable record passes, and the refinement drift stays within its limit.
// Drift = max over members of |ratio(finest)/ratio(coarsest) − 1|.
inline std::vector<Summary> summarize(const std::vector<RatioReport>& recs,
                                      const std::map<std::string, double>& drift_limits) {
  using Key = std::tuple<std::string, std::string, std::string>;
  std::vector<Key> order;
  std::map<Key, std::vector<const RatioReport*>> groups;
  for (const auto& r : recs) {
    Key k{r.suite, r.experiment, r.label};
    auto [it, fresh] = groups.try_emplace(k);
    if (fresh) order.push_back(k);
    it->second.push_back(&r);
  }
  std::vector<Summary> out;
  for (const auto& k : order) {
    const auto& g = groups[k];
    Summary s;
    std::tie(s.suite, s.experiment, s.label) = k;
    s.check = g.front()->check;
    s.min = std::numeric_limits<double>::infinity();
    s.max = -std::numeric_limits<double>::infinity();
    int res_lo = std::numeric_limits<int>::max(), res_hi = std::numeric_limits<int>::min();
    for (const auto* r : g) {
      ++s.records;
      if (r->degenerate) {
        ++s.degenerate;
        continue;
      }
      if (!r->pass) ++s.failed;
      s.min = std::min(s.min, r->ratio);
      s.max = std::max(s.max, r->ratio);
      res_lo = std::min(res_lo, r->resolution);
      res_hi = std::max(res_hi, r->resolution);
    }
    if (s.degenerate == s.records) s.min = s.max = std::numeric_limits<double>::quiet_NaN();
    s.drift = 0.0;
    if (res_hi > res_lo) {
      std::map<std::pair<int, std::string>, std::pair<double, double>> byMember;
      for (const auto* r : g) {
        if (r->degenerate || (r->resolution != res_lo && r->resolution != res_hi)) continue;
        auto& slot = byMember.try_emplace({r->member, r->member_label},
                                          std::numeric_limits<double>::quiet_NaN(),
                                          std::numeric_limits<double>::quiet_NaN())
                         .first->second;
        (r->resolution == res_lo ? slot.first : slot.second) = r->ratio;
      }
      for (const auto& [m, v] : byMember)
        if (std::isfinite(v.first) && std::isfinite(v.second) && v.first != 0)
          s.drift = std::max(s.drift, std::abs(v.second / v.first - 1.0));
    }
    auto lim = drift_limits.find(s.experiment);
    s.drift_limit = lim == drift_limits.end() ? 0.0 : lim->second;
    s.pass = s.records > s.degenerate && s.failed == 0 && (s.drift_limit == 0.0 || s.drift <= s.drift_limit);
    out.push_back(s);
  }
  return out;
}

inline void write_jsonl(std::ostream& os, const std::vector<RatioReport>& recs, const std::vector<Summary>& sums) {
  for (const auto& r : recs) os << to_json(r).dump() << '\n';
  for (const auto& s : sums) os << to_json(s).dump() << '\n';
}

struct ReportSet {
  std::vector<RatioReport> records;
  std::vector<Summary> summaries;

  bool all_pass() const {
    return !summaries.empty() &&
           std::all_of(summaries.begin(), summaries.end(), [](const Summary& s) { return s.pass; });
  }
};

inline ReportSet read_jsonl(std::istream& is) {
  ReportSet out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const std::string type = j.at("type");
      if (type == "ratio")
        out.records.push_back(ratio_from_json(j));
      else if (type == "summary")
        out.summaries.push_back(summary_from_json(j));
      else
        throw format_error("unknown record type '" + type + "'");
    } catch (const nlohmann::json::exception& e) {
      throw format_error("report line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline void write_csv(std::ostream& os, const ReportSet& set) {
  os << "suite,experiment,label,member,member_label,resolution,grid,exponents,truncation,lhs,rhs,ratio,check,"
        "lo,hi,degenerate,pass\n";
  auto q = [](const std::string& s) {
    std::string o = "\"";
    for (char c : s) o += c == '"' ? std::string("\"\"") : std::string(1, c);
    return o + "\"";
  };
  auto num = [](double v) { return nlohmann::json(v).dump(); };
  for (const auto& r : set.records)
    os << q(r.suite) << ',' << q(r.experiment) << ',' << q(r.label) << ',' << r.member << ',' << q(r.member_label)
       << ',' << r.resolution << ',' << q(r.grid) << ',' << q(r.exponents) << ',' << q(r.truncation) << ','
       << num(r.lhs) << ',' << num(r.rhs) << ',' << num(r.ratio) << ',' << check_name(r.check) << ',' << num(r.lo)
       << ',' << num(r.hi) << ',' << (r.degenerate ? 1 : 0) << ',' << (r.pass ? 1 : 0) << '\n';
}

}  // namespace tentkit::harness
