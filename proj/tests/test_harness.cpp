#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "tentkit/harness/suites.hpp"

using namespace tentkit;
using namespace tentkit::harness;

namespace {

const char* small_ini = R"(
[domain]
n_space = 32, 64
m_scale = 2, 4
s_min = 1/32
s_max = 1/4
[change_of_angle]
n_space = 64, 128
[characterization]
s_min = 1/128
count = 3
[families]
count = 4
[suites]
threads = 2
[interpolation]
per_decade = 4
[bands]
drift = 0.3
)";

Config small_config() {
  std::stringstream ss(small_ini);
  return parse_config(ss);
}

RatioReport record(double lhs, double rhs, Check c, double lo, double hi) {
  RatioReport r;
  r.suite = "s";
  r.experiment = "e";
  r.lhs = lhs;
  r.rhs = rhs;
  r.check = c;
  r.lo = lo;
  r.hi = hi;
  r.evaluate();
  return r;
}

}  // namespace

TEST(Family, DeterministicAndSeedSensitive) {
  FamilyParams p;
  p.count = 8;
  const auto a = make_family(p, all_kinds());
  const auto b = make_family(p, all_kinds());
  const Domain dom(1, 1.0, 64, 1.0 / 64, 1.0 / 4, 4);
  ASSERT_EQ(a.members.size(), 8u);
  for (std::size_t i = 0; i < a.members.size(); ++i) {
    EXPECT_EQ(a.members[i].label(), b.members[i].label());
    EXPECT_EQ(a.members[i].half_space(dom).values(), b.members[i].half_space(dom).values());
  }
  p.seed += 1;
  const auto c = make_family(p, all_kinds());
  int differ = 0;
  for (std::size_t i = 0; i < a.members.size(); ++i)
    differ += a.members[i].half_space(dom).values() != c.members[i].half_space(dom).values();
  EXPECT_GT(differ, 0);
  EXPECT_THROW(make_family(FamilyParams{.count = 0}, all_kinds()), parameter_error);
}

TEST(Family, BoundaryMembersAreMeanZero) {
  FamilyParams p;
  p.count = 9;
  const auto fam = make_family(p, boundary_kinds());
  const Domain dom(1, 1.0, 128, 1.0 / 128, 1.0 / 4, 4);
  for (const auto& m : fam.members) {
    const auto b = m.boundary(dom);
    double mean = 0, mx = 0;
    for (double v : b.values()) mean += v, mx = std::max(mx, std::abs(v));
    EXPECT_NEAR(mean / static_cast<double>(dom.n_points()), 0.0, 1e-12) << m.label();
    EXPECT_GT(mx, 0.0) << m.label();
  }
  const auto ind = make_family(p, {MemberSpec::Kind::whitney_indicator});
  EXPECT_THROW(ind.members[0].boundary(dom), parameter_error);
}

TEST(RatioReport, ChecksAndDegenerateRecords) {
  EXPECT_TRUE(record(2, 1, Check::band, 0.5, 4).pass);
  EXPECT_FALSE(record(5, 1, Check::band, 0.5, 4).pass);
  EXPECT_TRUE(record(1 + 1e-13, 1, Check::le, 0, 1 + 1e-12).pass);
  EXPECT_FALSE(record(1.1, 1, Check::le, 0, 1 + 1e-12).pass);
  EXPECT_TRUE(record(1 + 1e-10, 1, Check::identity, 0, 1e-9).pass);
  EXPECT_FALSE(record(1 + 1e-8, 1, Check::identity, 0, 1e-9).pass);
  EXPECT_TRUE(record(1e300, 1e-5, Check::finite, 0, infinity).pass);
  for (auto [l, r] : {std::pair{1.0, 0.0}, std::pair{0.0, 0.0}, std::pair{-1.0, 1.0},
                      std::pair{std::nan(""), 1.0}, std::pair{1.0, infinity}}) {
    const auto rec = record(l, r, Check::finite, 0, infinity);
    EXPECT_TRUE(rec.degenerate);
    EXPECT_FALSE(rec.pass);
  }
  EXPECT_TRUE(record(1, 1, Check::rejected, 1, 1).pass);
  EXPECT_FALSE(record(0, 1, Check::rejected, 1, 1).pass);
}

TEST(Summarize, DriftAndDegenerateGroups) {
  std::vector<RatioReport> recs;
  for (int res : {0, 1})
    for (int m : {0, 1}) {
      auto r = record(res == 0 ? 1.0 : (m == 0 ? 1.05 : 1.2), 1.0, Check::band, 0.5, 2);
      r.experiment = "dyadic_vs_continuous";
      r.member = m;
      r.resolution = res;
      recs.push_back(r);
    }
  auto dead = record(0, 0, Check::band, 0.5, 2);
  dead.experiment = "only_zero";
  recs.push_back(dead);
  const auto s = summarize(recs, {{"dyadic_vs_continuous", 0.1}});
  ASSERT_EQ(s.size(), 2u);
  EXPECT_NEAR(s[0].drift, 0.2, 1e-12);
  EXPECT_EQ(s[0].failed, 0);
  EXPECT_FALSE(s[0].pass);
  EXPECT_TRUE(summarize(recs, {{"dyadic_vs_continuous", 0.25}})[0].pass);
  EXPECT_EQ(s[1].degenerate, 1);
  EXPECT_FALSE(s[1].pass);
}

TEST(Report, JsonRoundTrip) {
  std::vector<RatioReport> recs{record(2, 1, Check::band, 0.125, 8), record(1, 0, Check::le, 0, 1),
                                record(3, 1, Check::finite, 0, infinity)};
  recs[0].label = "a \"quoted\" label";
  const auto sums = summarize(recs, {});
  std::stringstream ss;
  write_jsonl(ss, recs, sums);
  const auto back = read_jsonl(ss);
  ASSERT_EQ(back.records.size(), recs.size());
  ASSERT_EQ(back.summaries.size(), sums.size());
  std::stringstream again;
  write_jsonl(again, back.records, back.summaries);
  EXPECT_EQ(again.str(), ss.str());
  EXPECT_TRUE(std::isinf(back.records[2].hi));
  EXPECT_TRUE(std::isnan(back.records[1].ratio));
  std::stringstream bad("{\"type\":\"other\"}\n");
  EXPECT_THROW(read_jsonl(bad), format_error);
  std::stringstream csv;
  write_csv(csv, back);
  const std::string text = csv.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}

TEST(Config, DefaultFileMatchesBuiltInDefaults) {
  const Config file = load_config(TENTKIT_DEFAULT_CONFIG);
  std::stringstream empty("");
  const Config built = parse_config(empty);
  EXPECT_EQ(file.grid.n_space, built.grid.n_space);
  EXPECT_EQ(file.grid.m_scale, built.grid.m_scale);
  EXPECT_EQ(file.grid.s_min, built.grid.s_min);
  EXPECT_EQ(file.coa_grid.s_min, built.coa_grid.s_min);
  EXPECT_EQ(file.char_grid.s_min, built.char_grid.s_min);
  EXPECT_EQ(file.family.seed, built.family.seed);
  EXPECT_EQ(file.family.count, built.family.count);
  EXPECT_EQ(file.family.finest_log2_h, -7);
  EXPECT_EQ(file.suites, built.suites);
  EXPECT_EQ(file.equivalence.size(), built.equivalence.size());
  for (std::size_t i = 0; i < file.equivalence.size(); ++i) EXPECT_EQ(file.equivalence[i].str(), built.equivalence[i].str());
  EXPECT_EQ(file.change_of_angle.size(), 6u);
  EXPECT_EQ(file.bands.drift, 0.1);
  EXPECT_EQ(file.theta, 0.5);
}

TEST(Config, RejectsUnknownAndMalformedEntries) {
  auto parse = [](const std::string& s) {
    std::stringstream ss(s);
    return parse_config(ss);
  };
  EXPECT_THROW(parse("[domain]\nn_spaces = 64, 128\n"), format_error);
  EXPECT_THROW(parse("[nowhere]\nx = 1\n"), format_error);
  EXPECT_THROW(parse("[exponents]\nequivalence = 2,2,2\n"), format_error);
  EXPECT_THROW(parse("[exponents]\nequivalence = 0,2,2,0\n"), format_error);
  EXPECT_THROW(parse("[domain]\nn_space = 64\nm_scale = 4\n"), format_error);
  EXPECT_THROW(parse("[suites]\nrun = nonsense\n"), format_error);
  EXPECT_THROW(parse("[families]\nseed = -3\n"), format_error);
  EXPECT_NO_THROW(parse("[exponents]\nconvexity = 1/3, inf\n"));
}

TEST(Validators, EmbeddingAndNesting) {
  EXPECT_NO_THROW(validate_embedding(ExponentTuple(1, 2, 2, 0.5), ExponentTuple(2, 2, 2, 0), 1));
  EXPECT_THROW(validate_embedding(ExponentTuple(1, 2, 2, 0), ExponentTuple(2, 2, 2, 0), 1), parameter_error);
  EXPECT_THROW(validate_embedding(ExponentTuple(2, 2, 2, 0), ExponentTuple(1, 2, 2, -0.5), 1), parameter_error);
  EXPECT_THROW(validate_embedding(ExponentTuple(1, 2, 1, 0.5), ExponentTuple(2, 2, 2, 0), 1), parameter_error);
  EXPECT_NO_THROW(validate_nesting(ExponentTuple(2, 1, 2, 0), ExponentTuple(2, 2, 1, 0)));
  EXPECT_THROW(validate_nesting(ExponentTuple(2, 2, 2, 0), ExponentTuple(2, 1, 2, 0)), parameter_error);
  EXPECT_THROW(validate_nesting(ExponentTuple(2, 1, 1, 0), ExponentTuple(2, 2, 2, 0)), parameter_error);
  EXPECT_THROW(validate_extension_hypothesis(KernelSpec::heat(), 0.0), hypothesis_error);
  EXPECT_NO_THROW(validate_extension_hypothesis(KernelSpec::heat(), -0.5));
}

class SmallSuite : public ::testing::TestWithParam<std::string> {};

TEST_P(SmallSuite, AllSummariesPass) {
  const Config cfg = small_config();
  const auto set = run_suites(cfg, {GetParam()});
  ASSERT_FALSE(set.summaries.empty());
  for (const auto& s : set.summaries)
    EXPECT_TRUE(s.pass) << s.experiment << " " << s.label << " failed=" << s.failed << " min=" << s.min
                        << " max=" << s.max << " drift=" << s.drift;
  for (const auto& r : set.records) EXPECT_EQ(r.suite, GetParam());
}

INSTANTIATE_TEST_SUITE_P(Suites, SmallSuite,
                         ::testing::Values("equivalences", "embeddings", "duality", "interpolation",
                                           "characterization"));

TEST(SmallSuite, ThreadCountDoesNotChangeOutput) {
  Config cfg = small_config();
  std::stringstream a, b;
  cfg.threads = 1;
  auto s1 = run_suites(cfg, {"duality"});
  write_jsonl(a, s1.records, s1.summaries);
  cfg.threads = 3;
  auto s2 = run_suites(cfg, {"duality"});
  write_jsonl(b, s2.records, s2.summaries);
  EXPECT_EQ(a.str(), b.str());
}
