#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "locfaults/locfaults.hpp"
#include "locfaults/parser.hpp"
#include "locfaults/report.hpp"

namespace lf = locfaults;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw lf::Error("FileNotFound", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

lf::Domain parse_range(const std::string& spec) {
  size_t dots = spec.find("..");
  if (dots == std::string::npos)
    throw lf::Error("BadRange", "expected lo..hi, got '" + spec + "'");
  return lf::Domain{std::stoll(spec.substr(0, dots)), std::stoll(spec.substr(dots + 2))};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct CliConfig {
  std::string program_path;
  std::string ce_spec, ce_file;
  long long find_ce_budget = 0;
  std::string scan = "-4..4";
  int unroll = 3;
  int max_deviations = 3;
  int max_mcs_size = 3;
  std::string marking = "on";
  std::string domain = "-32768..32767";
  std::string format = "text";
  std::string dot_path;
  bool no_timings = false;
};

int run_single(const CliConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  lf::SourceProgram src = lf::parse_program(read_file(cfg.program_path));
  lf::ValidatedProgram vp = lf::check_semantics(src);

  lf::LocalizeOptions opts;
  opts.unroll = cfg.unroll;
  opts.max_deviations = cfg.max_deviations;
  opts.max_mcs_size = cfg.max_mcs_size;
  opts.marking = cfg.marking != "off";
  opts.domain = parse_range(cfg.domain);

  lf::Cfg graph = lf::to_dsa(lf::unroll(lf::build_cfg(vp), opts.unroll));
  if (!cfg.dot_path.empty()) {
    std::ofstream dot(cfg.dot_path);
    dot << lf::to_dot(graph);
  }

  lf::Counterexample ce;
  if (!cfg.ce_spec.empty()) {
    ce = lf::ce_from_cli(cfg.ce_spec, &vp);
  } else if (!cfg.ce_file.empty()) {
    ce = lf::ce_from_json(lf::Json::parse(read_file(cfg.ce_file)));
  } else if (cfg.find_ce_budget > 0) {
    auto found = lf::find_counterexample(vp, opts.unroll, cfg.find_ce_budget,
                                         parse_range(cfg.scan));
    if (!found) {
      std::cerr << "error[NoCounterexample]: no failing input within the budget\n";
      return 1;
    }
    ce = *found;
  } else if (!vp.program.params.empty()) {
    std::cerr << "error[Usage]: provide --ce/--ce-file or --find-ce\n";
    return 1;
  }
  double preprocess_s = seconds_since(t0);

  auto t1 = std::chrono::steady_clock::now();
  lf::LocalizationReport report = lf::localize_cfg(graph, ce, opts, vp.program.name);
  double localize_s = seconds_since(t1);

  std::optional<lf::RunTimings> timings;
  if (!cfg.no_timings) timings = lf::RunTimings{preprocess_s, localize_s};
  std::cout << lf::render_report(report, cfg.format, timings);
  return 0;
}

// ---- benchmark harness -----------------------------------------------------

std::string dirname_of(const std::string& path) {
  size_t slash = path.find_last_of('/');
  return slash == std::string::npos ? std::string(".") : path.substr(0, slash);
}

bool check_golden(const lf::Json& golden, const lf::LocalizationReport& report,
                  std::string& why) {
  lf::Json actual = lf::report_to_json(report);
  if (golden.contains("entry0_mcs")) {
    if (actual["entries"][0]["mcs"] != golden["entry0_mcs"]) {
      why = "entry0 mcs: expected " + golden["entry0_mcs"].dump() + ", got " +
            actual["entries"][0]["mcs"].dump();
      return false;
    }
  }
  if (golden.contains("dcms")) {
    lf::Json dcms = lf::Json::array();
    for (const auto& e : actual["entries"])
      if (e["is_dcm"].get<bool>())
        dcms.push_back(lf::Json{{"deviation", e["deviation"]}, {"mcs", e["mcs"]}});
    if (dcms != golden["dcms"]) {
      why = "dcms: expected " + golden["dcms"].dump() + ", got " + dcms.dump();
      return false;
    }
  }
  return true;
}

int run_bench(const std::string& manifest_path) {
  lf::Json manifest = lf::Json::parse(read_file(manifest_path));
  std::string base = dirname_of(manifest_path);

  std::printf("%-14s %4s %9s %9s  %s\n", "program", "b", "P(s)", "L(s)", "golden");
  for (const auto& run : manifest.at("runs")) {
    std::string rel = run.at("program").get<std::string>();
    std::string path = rel.front() == '/' ? rel : base + "/" + rel;

    std::vector<int> bounds;
    if (run.at("unroll").is_array())
      bounds = run.at("unroll").get<std::vector<int>>();
    else
      bounds.push_back(run.at("unroll").get<int>());

    for (int b : bounds) {
      auto t0 = std::chrono::steady_clock::now();
      lf::ValidatedProgram vp = lf::check_semantics(lf::parse_program(read_file(path)));
      lf::Cfg graph = lf::to_dsa(lf::unroll(lf::build_cfg(vp), b));

      lf::LocalizeOptions opts;
      opts.unroll = b;
      if (run.contains("max_deviations")) opts.max_deviations = run["max_deviations"].get<int>();
      if (run.contains("max_mcs_size")) opts.max_mcs_size = run["max_mcs_size"].get<int>();
      if (run.contains("domain")) opts.domain = parse_range(run["domain"].get<std::string>());

      lf::Counterexample ce;
      if (run.contains("ce")) {
        ce = lf::ce_from_json(run["ce"]);
      } else {
        auto found = lf::find_counterexample(vp, b, 1'000'000, lf::Domain{-4, 4});
        if (!found) throw lf::Error("NoCounterexample", "no failing input for " + rel);
        ce = *found;
      }
      double preprocess_s = seconds_since(t0);

      auto t1 = std::chrono::steady_clock::now();
      lf::LocalizationReport report = lf::localize_cfg(graph, ce, opts, vp.program.name);
      double localize_s = seconds_since(t1);

      std::string verdict = "-";
      if (run.contains("golden")) {
        std::string why;
        if (check_golden(run["golden"], report, why)) {
          verdict = "ok";
        } else {
          std::printf("%-14s %4d %9.3f %9.3f  FAIL\n", vp.program.name.c_str(), b,
                      preprocess_s, localize_s);
          std::cerr << "error[GoldenMismatch]: " << rel << " (b=" << b << "): " << why
                    << "\n";
          return 1;
        }
      }
      std::printf("%-14s %4d %9.3f %9.3f  %s\n", vp.program.name.c_str(), b, preprocess_s,
                  localize_s, verdict.c_str());
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constraint-based fault localization for mini imperative programs"};
  app.require_subcommand(0, 1);

  CliConfig cfg;
  app.add_option("program", cfg.program_path, "program file (.mimp)");
  app.add_option("--ce", cfg.ce_spec, "counterexample, e.g. i=0,j=1 or tab=3,2,1,0");
  app.add_option("--ce-file", cfg.ce_file, "counterexample as a JSON object");
  app.add_option("--find-ce", cfg.find_ce_budget, "search a counterexample (budget = tried inputs)");
  app.add_option("--scan", cfg.scan, "input range for --find-ce (default -4..4)");
  app.add_option("-b,--unroll", cfg.unroll, "loop unrolling bound (default 3)");
  app.add_option("--max-deviations", cfg.max_deviations, "deviation size bound (default 3)")
      ->check(CLI::Range(0, 8));
  app.add_option("--max-mcs-size", cfg.max_mcs_size, "MCS size bound (default 3)")
      ->check(CLI::Range(1, 8));
  app.add_option("--marking", cfg.marking, "node marking on|off (default on)")
      ->check(CLI::IsMember({"on", "off"}));
  app.add_option("--domain", cfg.domain, "variable domain lo..hi");
  app.add_option("--format", cfg.format, "output format text|json")
      ->check(CLI::IsMember({"text", "json"}));
  app.add_option("--dot", cfg.dot_path, "dump the unrolled graph in DOT format");
  app.add_flag("--no-timings", cfg.no_timings, "omit the timing fields");

  std::string manifest_path;
  CLI::App* bench = app.add_subcommand("bench", "replay a manifest of runs");
  bench->add_option("manifest", manifest_path, "manifest JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (bench->parsed()) return run_bench(manifest_path);
    if (cfg.program_path.empty()) {
      std::cerr << "error[Usage]: no program file given\n";
      return 1;
    }
    return run_single(cfg);
  } catch (const lf::Error& e) {
    std::cerr << "error[" << e.code() << "]: " << e.what() << "\n";
    return e.code() == "NotACounterexample" ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error[Internal]: " << e.what() << "\n";
    return 1;
  }
}
