// artts: lint stations, run batches, compute coverage, serve the bus, render reports.
//
// Exit codes: 0 success/pass, 1 domain failure, 2 usage, 3 environment.

#include "artts/bus_server.hpp"
#include "artts/explorer.hpp"
#include "artts/fsio.hpp"
#include "artts/runner.hpp"
#include "artts/station.hpp"
#include "artts/traceability.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace artts;

namespace {

constexpr int kOk = 0;
constexpr int kDomain = 1;
constexpr int kUsage = 2;
constexpr int kEnv = 3;

struct Globals {
  fs::path workspace = ".";
  std::uint64_t seed = 0;

  fs::path resolve(const fs::path& p) const { return p.is_absolute() ? p : workspace / p; }
};

struct LintArgs {
  fs::path station;
  bool explore = false;
  std::size_t state_cap = 1'000'000;
};

struct RunArgs {
  fs::path suite;
  std::optional<fs::path> station;
  fs::path out = "results";
  std::vector<std::string> select;
  std::string format = "text";
  std::optional<std::string> batch_id;
  bool no_defects = false;
};

struct CoverageArgs {
  std::string level;
  fs::path requirements;
  fs::path links;
  fs::path suite;
  std::optional<fs::path> results;
  std::string format = "text";
  bool matrix = false;
  bool rollup = false;
};

struct ServeArgs {
  fs::path station;
  std::string listen = "127.0.0.1:7502";
  std::string bridge = "127.0.0.1:7503";
  std::string mode = "stepped";
  std::optional<fs::path> hmi_dir;
  std::optional<fs::path> log;
};

struct ReportArgs {
  fs::path out = "results";
  std::optional<std::string> batch;
  std::string format = "text";
};

void print_diagnostics(const std::string& file, const DiagnosticList& diags) {
  for (const auto& d : diags) std::cout << file << ": " << format_diagnostic(d) << '\n';
}

int do_lint(const Globals& g, const LintArgs& a) {
  const fs::path dir = g.resolve(a.station);
  StationModel station;
  try {
    station = load_station(dir);
  } catch (const std::exception& ex) {
    std::cerr << "artts: " << ex.what() << '\n';
    return kEnv;
  }
  const StationLint lint = lint_station(station);
  print_diagnostics("station.json", lint.station);
  print_diagnostics("chain_a.state", lint.chain_a);
  print_diagnostics("chain_b.rung", lint.chain_b);
  bool failed = lint.has_errors();
  if (!failed) {
    try {
      (void)Engine::load(station);
    } catch (const EngineError& ex) {
      std::cout << "station: error: " << ex.what() << '\n';
      failed = true;
    }
  }
  if (!failed && a.explore) {
    ExploreOptions opts;
    opts.state_cap = a.state_cap;
    const auto report = explore_reachable(station, opts);
    std::cout << "explore states=" << report.reachable << " transitions=" << report.transitions
              << " complete=" << (report.complete ? "yes" : "no")
              << " violations=" << report.violation_count << '\n';
    for (const auto& v : report.violations) {
      std::cout << "violation " << v.rule << " at " << serialize(v.at) << '\n';
      std::cout << format_trace(v.trace, station);
    }
    if (report.violation_count > 0) failed = true;
  }
  std::cout << (failed ? "lint: FAILED" : "lint: ok") << '\n';
  return failed ? kDomain : kOk;
}

int do_run(const Globals& g, const RunArgs& a) {
  const fs::path suite_path = g.resolve(a.suite);
  TestUnitTree tree;
  try {
    tree = read_suite_file(suite_path);
  } catch (const std::exception& ex) {
    std::cerr << "artts: " << suite_path.string() << ": " << ex.what() << '\n';
    return kEnv;
  }
  BatchOptions opts;
  opts.workspace = g.workspace;
  opts.suite_dir = suite_path.parent_path();
  if (a.station) {
    opts.station_override = g.resolve(*a.station);
    try {
      (void)Engine::load(load_station(*opts.station_override));
    } catch (const std::exception& ex) {
      std::cerr << "artts: station " << opts.station_override->string() << ": " << ex.what() << '\n';
      return kEnv;
    }
  }
  opts.selection = a.select;
  if (opts.selection.empty())
    for (const auto& b : tree.builds) opts.selection.push_back(b.id);
  opts.batch_id = a.batch_id;
  opts.seed = g.seed;

  BatchReport report;
  try {
    report = run_batch(tree, opts);
  } catch (const RunnerError& ex) {
    std::cerr << "artts: " << ex.what() << '\n';
    return kUsage;
  }
  std::cout << render_report(report, a.format == "records" ? ReportFormat::Records : ReportFormat::Text);
  try {
    const fs::path out = g.resolve(a.out);
    save_batch(report, out);
    if (!a.no_defects) {
      DefectStore store(out / "defects.jsonl");
      store.load();
      for (const auto& d : store.track_batch(report))
        std::cerr << "defect " << d.id << ' ' << (d.status == DefectStatus::Open ? "open" : "closed")
                  << ' ' << d.case_id << ": " << d.summary << '\n';
    }
  } catch (const std::exception& ex) {
    std::cerr << "artts: " << ex.what() << '\n';
    return kEnv;
  }
  const bool all_pass = report.totals.fail == 0 && report.totals.error == 0;
  return all_pass ? kOk : kDomain;
}

int do_coverage(const Globals& g, const CoverageArgs& a) {
  const auto level = parse_level(a.level);
  if (!level) {
    std::cerr << "artts: unknown level '" << a.level << "' (high, intermediate or detail)\n";
    return kUsage;
  }
  try {
    const auto reqs = read_requirements_file(g.resolve(a.requirements));
    const auto tree = read_suite_file(g.resolve(a.suite));
    const auto links = read_links_file(g.resolve(a.links));
    const auto matrices = build_matrix(reqs, tree, links);
    std::optional<CaseOutcomes> outcomes;
    if (a.results) {
      const fs::path dir = g.resolve(*a.results);
      if (auto id = latest_batch_id(dir)) outcomes = case_outcomes(load_batch(dir, *id));
      else outcomes = CaseOutcomes{};
    }
    const auto report = coverage(reqs, matrices, *level, tree, outcomes ? &*outcomes : nullptr);
    if (a.format == "records") std::cout << render_coverage_records(report) << '\n';
    else std::cout << render_coverage_text(report);
    if (a.matrix) std::cout << render_matrix_text(matrices.at(*level), reqs);
    if (a.rollup) std::cout << render_rollup_text(roll_up(reqs, matrices, tree, outcomes.value_or(CaseOutcomes{})));
    return report.covered == report.total ? kOk : kDomain;
  } catch (const std::exception& ex) {
    std::cerr << "artts: " << ex.what() << '\n';
    return kEnv;
  }
}

BusServer* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

int do_serve(const Globals& g, const ServeArgs& a) {
  ServeOptions opts;
  opts.listen = a.listen;
  if (a.bridge != "none") opts.bridge = a.bridge;
  else opts.bridge.reset();
  opts.mode = a.mode == "realtime" ? BusMode::Realtime : BusMode::Stepped;
  if (a.hmi_dir) opts.hmi_dir = g.resolve(*a.hmi_dir);
  opts.log_commands = a.log.has_value();
  try {
    EngineOptions eopts;
    eopts.rng_seed = g.seed;
    BusServer server(Engine::load(load_station(g.resolve(a.station)), eopts), opts);
    server.start();
    std::cerr << "artts: serving tcp port " << server.tcp_port();
    if (opts.bridge) std::cerr << ", bridge port " << server.bridge_port();
    std::cerr << " (" << to_string(opts.mode) << ")\n";
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    server.run();
    g_server = nullptr;
    if (a.log) {
      std::string text;
      for (const auto& e : server.core().log())
        text += std::to_string(e.client) + '\t' + e.line + '\n';
      write_text(g.resolve(*a.log), text);
    }
    return kOk;
  } catch (const std::exception& ex) {
    g_server = nullptr;
    std::cerr << "artts: " << ex.what() << '\n';
    return kEnv;
  }
}

int do_report(const Globals& g, const ReportArgs& a) {
  try {
    const fs::path dir = g.resolve(a.out);
    auto id = a.batch ? a.batch : latest_batch_id(dir);
    if (!id) {
      std::cerr << "artts: no batch results in " << dir.string() << '\n';
      return kEnv;
    }
    const auto report = load_batch(dir, *id);
    std::cout << render_report(report, a.format == "records" ? ReportFormat::Records : ReportFormat::Text);
    if (a.format == "text" && fs::exists(dir / "defects.jsonl")) {
      DefectStore store(dir / "defects.jsonl");
      store.load();
      for (const auto& d : store.records())
        if (d.status == DefectStatus::Open)
          std::cout << "open defect " << d.id << ' ' << d.case_id << ": " << d.summary << '\n';
    }
    return kOk;
  } catch (const std::exception& ex) {
    std::cerr << "artts: " << ex.what() << '\n';
    return kEnv;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Automated test platform for a simulated dual-chain safety PLC", "artts"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--workspace", g.workspace, "Root for relative paths")->capture_default_str();
  app.add_option("--seed", g.seed, "Seed recorded in reports")->capture_default_str();

  LintArgs lint;
  auto* lint_cmd = app.add_subcommand("lint", "Check a station directory");
  lint_cmd->add_option("--station", lint.station, "Station directory")->required();
  lint_cmd->add_flag("--explore", lint.explore, "Also check the safety rules over all reachable states");
  lint_cmd->add_option("--state-cap", lint.state_cap, "Reachable state cap for --explore");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a batch of test cases");
  run_cmd->add_option("--suite", run.suite, "Suite file")->required();
  run_cmd->add_option("--station", run.station, "Station directory (overrides the suite)");
  run_cmd->add_option("--out", run.out, "Results directory")->capture_default_str();
  run_cmd->add_option("--select", run.select, "Build, run or case ids")->delimiter(',');
  run_cmd->add_option("--format", run.format)->check(CLI::IsMember({"text", "records"}));
  run_cmd->add_option("--batch-id", run.batch_id, "Batch id (default: from the clock)");
  run_cmd->add_flag("--no-defects", run.no_defects, "Do not update the defect log");

  CoverageArgs cov;
  auto* cov_cmd = app.add_subcommand("coverage", "Requirement coverage at one level");
  cov_cmd->add_option("--level", cov.level, "high, intermediate or detail")->required();
  cov_cmd->add_option("--requirements", cov.requirements)->required();
  cov_cmd->add_option("--links", cov.links)->required();
  cov_cmd->add_option("--suite", cov.suite)->required();
  cov_cmd->add_option("--results", cov.results, "Results directory; adds the passing count");
  cov_cmd->add_option("--format", cov.format)->check(CLI::IsMember({"text", "records"}));
  cov_cmd->add_flag("--matrix", cov.matrix, "Also print the validation matrix");
  cov_cmd->add_flag("--rollup", cov.rollup, "Also print the status roll-up");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the I/O bus and the HMI bridge");
  serve_cmd->add_option("--station", serve.station, "Station directory")->required();
  serve_cmd->add_option("--listen", serve.listen)->capture_default_str();
  serve_cmd->add_option("--bridge", serve.bridge, "Bridge endpoint or 'none'")->capture_default_str();
  serve_cmd->add_option("--mode", serve.mode)->check(CLI::IsMember({"stepped", "realtime"}));
  serve_cmd->add_option("--hmi-dir", serve.hmi_dir, "Static files for the bridge port");
  serve_cmd->add_option("--log", serve.log, "Write the applied command log here on exit");

  ReportArgs rep;
  auto* rep_cmd = app.add_subcommand("report", "Render a stored batch");
  rep_cmd->add_option("--out", rep.out, "Results directory")->capture_default_str();
  rep_cmd->add_option("--batch", rep.batch, "Batch id (default: latest)");
  rep_cmd->add_option("--format", rep.format)->check(CLI::IsMember({"text", "records"}));

  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--workspace" || arg == "--seed") {
      ++i;
      continue;
    }
    if (arg.rfind("-", 0) == 0) continue;
    if (!app.get_subcommand_no_throw(arg)) {
      std::cerr << "artts: unknown verb '" << arg << "'\n" << app.help();
      return kUsage;
    }
    break;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (*lint_cmd) return do_lint(g, lint);
  if (*run_cmd) return do_run(g, run);
  if (*cov_cmd) return do_coverage(g, cov);
  if (*serve_cmd) return do_serve(g, serve);
  if (*rep_cmd) return do_report(g, rep);
  return kUsage;
}
