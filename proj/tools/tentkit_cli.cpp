// tentkit command-line front end: norm, extend, suite, report.
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "tentkit/harness/config.hpp"
#include "tentkit/harness/report.hpp"
#include "tentkit/harness/suites.hpp"
#include "tentkit/tentkit.hpp"

namespace {

using namespace tentkit;
using namespace tentkit::harness;
namespace hd = tentkit::harness::detail;

constexpr int exit_pass = 0;
constexpr int exit_fail = 1;
constexpr int exit_usage = 2;

struct NormArgs {
  std::string kind = "tent";
  std::string p = "2", q = "2", r = "2", beta = "0";
  std::string alpha = "1", lambda = "1";
  double a = 0.5, b = 1.0, c = 1.0;
  std::string file;
};

struct ExtendArgs {
  int d = 1;
  std::string side = "1";
  int n = 128;
  std::string s_min = "1/64", s_max = "1";
  int m = 4;
  std::string kernel = "heat";
  int order = 1;
  std::string input, output;
};

struct SuiteArgs {
  std::string names;
  std::string config;
  std::string out;
  int threads = 0;
};

struct ReportArgs {
  std::string format = "json";
  std::string out;
  std::vector<std::string> files;
};

template <class Scalar>
double evaluate_norm(const BasicHalfSpaceField<Scalar>& f, const NormArgs& a) {
  const ExponentTuple e(hd::parse_real(a.p), hd::parse_real(a.q), hd::parse_real(a.r),
                        hd::parse_real(a.beta));
  const double alpha = hd::parse_real(a.alpha);
  if (a.kind == "tent") return tent_norm(f, e, AverageSpec(a.a, a.b, a.c)).value;
  if (a.kind == "z") return z_norm(f, e).value;
  if (a.kind == "beyond") return beyond_infinity_norm(f, e.q, e.beta, alpha).value;
  if (a.kind == "coa") return change_of_angle_norm(f, e, hd::parse_real(a.lambda)).value;
  if (a.kind == "jn") return jn_norm(f, e, alpha).value;
  if (a.kind == "dyadic") return dyadic_tent_norm(local_means(f, e.r), e).value;
  if (a.kind == "dyadic_jn") return jn_dyadic_norm(local_means(f, e.r), e, alpha).value;
  throw parameter_error("unknown norm kind '" + a.kind + "'");
}

int run_norm(const NormArgs& a) {
  const auto field = load_hsf1(a.file);
  const double v = std::visit([&](const auto& f) { return evaluate_norm(f, a); }, field);
  std::printf("%.17g\n", v);
  return exit_pass;
}

int run_extend(const ExtendArgs& a) {
  const Domain dom(a.d, hd::parse_real(a.side), a.n, hd::parse_real(a.s_min), hd::parse_real(a.s_max), a.m);
  std::ifstream is(a.input);
  if (!is) throw format_error("cannot open " + a.input);
  const auto f = read_boundary_csv(is, dom);
  KernelSpec k;
  if (a.kernel == "heat")
    k = KernelSpec::heat();
  else if (a.kernel == "gw")
    k = KernelSpec::gauss_weierstrass(a.order);
  else if (a.kernel == "lp_block")
    k = KernelSpec::lp_block();
  else
    throw parameter_error("unknown kernel '" + a.kernel + "'");
  save_hsf1(a.output, extend(f, k, dom));
  return exit_pass;
}

std::vector<std::string> suite_names(const std::string& arg, const Config& cfg) {
  if (arg == "all") return cfg.suites;
  std::vector<std::string> out;
  for (const auto& s : hd::split(arg, ','))
    if (!s.empty()) out.push_back(s);
  if (out.empty()) throw parameter_error("no suite named");
  return out;
}

void emit(const std::string& path, const std::function<void(std::ostream&)>& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw format_error("cannot open " + path);
  fn(os);
}

int run_suite_cmd(const SuiteArgs& a) {
  Config cfg = load_config(a.config);
  if (a.threads > 0) cfg.threads = static_cast<unsigned>(a.threads);
  const auto set = run_suites(cfg, suite_names(a.names, cfg));
  emit(a.out, [&](std::ostream& os) { write_jsonl(os, set.records, set.summaries); });
  for (const auto& s : set.summaries)
    if (!s.pass)
      std::cerr << "FAIL " << s.suite << '/' << s.experiment << " [" << s.label << "] failed=" << s.failed
                << " degenerate=" << s.degenerate << " drift=" << s.drift << '\n';
  return set.all_pass() ? exit_pass : exit_fail;
}

int run_report(const ReportArgs& a) {
  ReportSet merged;
  std::map<std::string, double> limits;
  for (const auto& path : a.files) {
    std::ifstream is(path);
    if (!is) throw format_error("cannot open " + path);
    auto set = read_jsonl(is);
    merged.records.insert(merged.records.end(), set.records.begin(), set.records.end());
    for (const auto& s : set.summaries)
      if (s.drift_limit > 0) limits[s.experiment] = s.drift_limit;
  }
  merged.summaries = summarize(merged.records, limits);
  if (a.format == "csv")
    emit(a.out, [&](std::ostream& os) { write_csv(os, merged); });
  else
    emit(a.out, [&](std::ostream& os) { write_jsonl(os, merged.records, merged.summaries); });
  return merged.all_pass() ? exit_pass : exit_fail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tentkit: tent space norms and experiment suites"};
  app.require_subcommand(1);

  NormArgs na;
  auto* norm = app.add_subcommand("norm", "Compute one norm of an HSF1 field");
  norm->add_option("--kind", na.kind, "tent | z | beyond | coa | jn | dyadic | dyadic_jn")->capture_default_str();
  norm->add_option("--p", na.p)->capture_default_str();
  norm->add_option("--q", na.q)->capture_default_str();
  norm->add_option("--r", na.r)->capture_default_str();
  norm->add_option("--beta", na.beta)->capture_default_str();
  norm->add_option("--alpha", na.alpha, "outer exponent for beyond, jn, dyadic_jn")->capture_default_str();
  norm->add_option("--lambda", na.lambda, "aperture for coa")->capture_default_str();
  norm->add_option("--a", na.a, "Whitney window scale lower factor")->capture_default_str();
  norm->add_option("--b", na.b, "Whitney window scale upper factor")->capture_default_str();
  norm->add_option("--c", na.c, "Whitney window radius factor")->capture_default_str();
  norm->add_option("file", na.file, "HSF1 field")->required();

  ExtendArgs ea;
  auto* ext = app.add_subcommand("extend", "Extend boundary data (CSV) to an HSF1 half-space field");
  ext->add_option("--d", ea.d)->capture_default_str();
  ext->add_option("--side", ea.side)->capture_default_str();
  ext->add_option("--n", ea.n)->capture_default_str();
  ext->add_option("--s-min", ea.s_min)->capture_default_str();
  ext->add_option("--s-max", ea.s_max)->capture_default_str();
  ext->add_option("--m", ea.m)->capture_default_str();
  ext->add_option("--kernel", ea.kernel, "heat | gw | lp_block")->capture_default_str();
  ext->add_option("--order", ea.order, "Gauss-Weierstrass order N")->capture_default_str();
  ext->add_option("input", ea.input, "boundary CSV")->required();
  ext->add_option("output", ea.output, "HSF1 output")->required();

  SuiteArgs sa;
  auto* suite = app.add_subcommand("suite", "Run experiment suites and write a JSONL report");
  suite->add_option("names", sa.names, "comma-separated suite names or 'all'")->required();
  suite->add_option("config", sa.config, "INI configuration")->required();
  suite->add_option("--out", sa.out, "report path (stdout when omitted)");
  suite->add_option("--threads", sa.threads, "worker threads (0: from config)");

  ReportArgs ra;
  auto* report = app.add_subcommand("report", "Merge JSONL reports into CSV or JSON lines");
  report->add_option("--format", ra.format)->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  report->add_option("--out", ra.out, "output path (stdout when omitted)");
  report->add_option("files", ra.files, "JSONL reports")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  try {
    if (*norm) return run_norm(na);
    if (*ext) return run_extend(ea);
    if (*suite) return run_suite_cmd(sa);
    if (*report) return run_report(ra);
  } catch (const tentkit::error& e) {
    std::cerr << "tentkit: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "tentkit: " << e.what() << '\n';
    return exit_usage;
  }
  return exit_usage;
}
