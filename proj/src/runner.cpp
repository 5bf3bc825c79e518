#include "artts/runner.hpp"

#include "artts/fsio.hpp"
#include "artts/station.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <set>
#include <unordered_map>

namespace artts {

using ojson = nlohmann::ordered_json;

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Pass: return "Pass";
    case Verdict::Fail: return "Fail";
    case Verdict::Error: return "Error";
  }
  return "Error";
}

std::optional<Verdict> parse_verdict(std::string_view text) {
  for (auto v : {Verdict::Pass, Verdict::Fail, Verdict::Error})
    if (to_string(v) == text) return v;
  return std::nullopt;
}

namespace {

std::tm utc(std::chrono::system_clock::time_point t, int& millis) {
  using namespace std::chrono;
  auto ms = duration_cast<milliseconds>(t.time_since_epoch()).count();
  millis = static_cast<int>(((ms % 1000) + 1000) % 1000);
  std::time_t secs = static_cast<std::time_t>((ms - millis) / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  return tm;
}

}  // namespace

std::string format_rfc3339(std::chrono::system_clock::time_point t) {
  int ms = 0;
  std::tm tm = utc(t, ms);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, ms);
  return buf;
}

std::string batch_id_for(std::chrono::system_clock::time_point t) {
  int ms = 0;
  std::tm tm = utc(t, ms);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d%02d%02dT%02d%02d%02d%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, ms);
  return buf;
}

// ---------------------------------------------------------------------------
// Single case

namespace {

struct StepError {
  std::string message;
};

class CaseRunner {
 public:
  CaseRunner(const TestCase& tc, Engine& e) : tc_(tc), e_(e), period_(e.scan_period_ms()) {}

  TestResult run(TestResult r) {
    std::size_t index = 0;
    try {
      if (tc_.reset_before) e_.reset();
      for (const auto& step : tc_.steps) {
        ++index;
        if (auto fail = execute(step)) {
          r.verdict = Verdict::Fail;
          fail->index = static_cast<int>(index);
          fail->line = step.line;
          fail->step = format_step(step);
          r.failed_step = std::move(fail);
          break;
        }
      }
    } catch (const StepError& err) {
      r.verdict = Verdict::Error;
      r.message = where(index) + err.message;
    } catch (const EngineError& err) {
      r.verdict = Verdict::Error;
      r.message = where(index) + err.what();
    }
    r.sim_duration_ms = sim_ms_;
    return r;
  }

 private:
  std::string where(std::size_t index) const {
    if (index == 0) return "";
    return "step " + std::to_string(index) + " (line " + std::to_string(tc_.steps[index - 1].line) +
           "): ";
  }

  std::int64_t scans_for(std::int64_t ms) const {
    if (ms <= 0 || ms % period_ != 0)
      throw StepError{"duration " + std::to_string(ms) + "ms is not a positive multiple of the " +
                      "scan period (" + std::to_string(period_) + "ms)"};
    return ms / period_;
  }

  void scan() {
    e_.step_quiet();
    sim_ms_ += period_;
  }

  // Current observed value for an expectation step, as text.
  std::string observe(const TestStep& s) const {
    switch (s.kind) {
      case TestStep::Kind::Expect: return std::to_string(e_.read_point(s.target));
      case TestStep::Kind::ExpectFault: return std::string(to_string(e_.fault(s.chain).code));
      case TestStep::Kind::ExpectState: return e_.task_state(s.target).value_or("");
      default: return {};
    }
  }

  std::string expected(const TestStep& s) const {
    switch (s.kind) {
      case TestStep::Kind::Expect: return std::to_string(s.value);
      case TestStep::Kind::ExpectFault: return std::string(to_string(s.code));
      case TestStep::Kind::ExpectState: return s.state;
      default: return {};
    }
  }

  void bind(const TestStep& s) const {
    if (s.kind == TestStep::Kind::Expect || s.kind == TestStep::Kind::Set) {
      if (e_.point_index(s.target) < 0) throw StepError{"unknown point " + s.target};
    } else if (s.kind == TestStep::Kind::ExpectState) {
      if (!e_.task_state(s.target)) throw StepError{"unknown task " + s.target};
      if (!e_.has_state(s.target, s.state))
        throw StepError{"unknown state " + s.state + " in task " + s.target};
    }
  }

  std::optional<FailedStep> execute(const TestStep& s) {
    bind(s);
    switch (s.kind) {
      case TestStep::Kind::Set: e_.write_point(s.target, s.value); return std::nullopt;
      case TestStep::Kind::Wait: {
        const auto n = scans_for(s.duration_ms);
        for (std::int64_t i = 0; i < n; ++i) scan();
        return std::nullopt;
      }
      case TestStep::Kind::InjectFault: e_.inject_fault(s.chain, s.code); return std::nullopt;
      case TestStep::Kind::ResetFaults: e_.reset_faults(); return std::nullopt;
      case TestStep::Kind::ResetStation: e_.reset(); return std::nullopt;
      case TestStep::Kind::Expect:
      case TestStep::Kind::ExpectFault:
      case TestStep::Kind::ExpectState: {
        const auto n = scans_for(s.duration_ms);
        const std::string want = expected(s);
        std::string got = observe(s);
        for (std::int64_t i = 0; got != want && i < n; ++i) {
          scan();
          got = observe(s);
        }
        if (got == want) return std::nullopt;
        FailedStep f;
        f.expected = want;
        f.actual = got;
        return f;
      }
    }
    return std::nullopt;
  }

  const TestCase& tc_;
  Engine& e_;
  std::int64_t period_;
  std::int64_t sim_ms_ = 0;
};

std::chrono::system_clock::time_point now_from(const WallClock& clock) {
  return clock ? clock() : std::chrono::system_clock::now();
}

}  // namespace

TestResult run_case(const TestCase& test_case, Engine& engine, const WallClock& clock) {
  TestResult r;
  r.case_id = test_case.id;
  r.title = test_case.title;
  r.started_at = format_rfc3339(now_from(clock));
  return CaseRunner(test_case, engine).run(std::move(r));
}

// ---------------------------------------------------------------------------
// Batches

std::vector<std::string> resolve_selection(const TestUnitTree& tree,
                                           const std::vector<std::string>& ids) {
  std::set<std::string> chosen;
  for (const auto& id : ids) {
    auto kind = tree.kind_of(id);
    if (!kind) throw RunnerError("unresolvable selection: " + id);
    if (*kind == UnitKind::Case) {
      chosen.insert(id);
    } else if (*kind == UnitKind::Run) {
      for (const auto& c : tree.find_run(id)->cases) chosen.insert(c);
    } else {
      for (const auto& r : tree.find_build(id)->runs)
        for (const auto& c : tree.find_run(r)->cases) chosen.insert(c);
    }
  }
  std::vector<std::string> out;
  for (const auto& c : tree.cases)
    if (chosen.count(c)) out.push_back(c);
  return out;
}

void finalize_totals(BatchReport& report) {
  report.totals = {};
  report.sim_elapsed_ms = 0;
  for (const auto& r : report.results) {
    switch (r.verdict) {
      case Verdict::Pass: ++report.totals.pass; break;
      case Verdict::Fail: ++report.totals.fail; break;
      case Verdict::Error: ++report.totals.error; break;
    }
    report.sim_elapsed_ms += r.sim_duration_ms;
  }
  report.mean_sim_per_case_ms =
      report.results.empty()
          ? 0.0
          : static_cast<double>(report.sim_elapsed_ms) / static_cast<double>(report.results.size());
}

BatchReport run_batch(const TestUnitTree& tree, const BatchOptions& options) {
  const auto wall_start = std::chrono::steady_clock::now();
  const auto t0 = now_from(options.clock);
  BatchReport report;
  report.id = options.batch_id.value_or(batch_id_for(t0));
  report.selection = options.selection;
  report.seed = options.seed;
  report.started_at = format_rfc3339(t0);

  const auto cases = resolve_selection(tree, options.selection);
  std::unordered_map<std::string, Engine> engines;
  std::optional<std::string> aborted;

  for (const auto& id : cases) {
    TestResult r;
    r.case_id = id;
    r.verdict = Verdict::Error;
    if (aborted) {
      r.started_at = format_rfc3339(now_from(options.clock));
      r.message = "skipped: " + *aborted;
      report.results.push_back(std::move(r));
      continue;
    }
    const Build* build = tree.build_of_run(tree.run_of_case(id)->id);
    const auto station_dir = options.station_override.value_or(options.workspace / build->station);
    auto it = engines.find(station_dir.string());
    if (it == engines.end()) {
      try {
        it = engines.emplace(station_dir.string(), Engine::load(load_station(station_dir))).first;
      } catch (const std::exception& ex) {
        aborted = "station load failed (" + station_dir.string() + "): " + ex.what();
        r.started_at = format_rfc3339(now_from(options.clock));
        r.message = *aborted;
        report.results.push_back(std::move(r));
        continue;
      }
    }

    const auto path = options.suite_dir / tree.cases_dir / (id + ".tc");
    std::string text;
    try {
      text = read_text(path);
    } catch (const IoError& ex) {
      r.started_at = format_rfc3339(now_from(options.clock));
      r.message = ex.what();
      report.results.push_back(std::move(r));
      continue;
    }
    auto parsed = parse_test_script(text);
    if (auto* diags = std::get_if<DiagnosticList>(&parsed)) {
      r.started_at = format_rfc3339(now_from(options.clock));
      r.message = path.filename().string() + ": " + format_diagnostic(diags->front());
      report.results.push_back(std::move(r));
      continue;
    }
    const auto& tc = std::get<TestCase>(parsed);
    if (tc.id != id) {
      r.started_at = format_rfc3339(now_from(options.clock));
      r.title = tc.title;
      r.message = path.filename().string() + " declares case " + tc.id;
      report.results.push_back(std::move(r));
      continue;
    }
    Engine engine = it->second;  // fresh copy per case
    engine.reset();
    report.results.push_back(run_case(tc, engine, options.clock));
  }

  finalize_totals(report);
  report.wall_elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::steady_clock::now() - wall_start)
                               .count();
  return report;
}

CaseOutcomes case_outcomes(const BatchReport& report) {
  CaseOutcomes out;
  for (const auto& r : report.results)
    out[r.case_id] = r.verdict == Verdict::Pass ? Status::Pass : Status::Fail;
  return out;
}

// ---------------------------------------------------------------------------
// Records

std::string result_record(const TestResult& r) {
  ojson j;
  j["case_id"] = r.case_id;
  j["title"] = r.title;
  j["verdict"] = to_string(r.verdict);
  j["started_at"] = r.started_at;
  j["sim_duration_ms"] = r.sim_duration_ms;
  if (r.failed_step)
    j["failed_step"] = {{"index", r.failed_step->index},
                        {"line", r.failed_step->line},
                        {"step", r.failed_step->step},
                        {"expected", r.failed_step->expected},
                        {"actual", r.failed_step->actual}};
  if (!r.message.empty()) j["message"] = r.message;
  return j.dump();
}

TestResult parse_result_record(std::string_view line) {
  try {
    auto j = ojson::parse(line);
    TestResult r;
    r.case_id = j.at("case_id").get<std::string>();
    r.title = j.value("title", "");
    auto v = parse_verdict(j.at("verdict").get<std::string>());
    if (!v) throw RunnerError("bad verdict");
    r.verdict = *v;
    r.started_at = j.value("started_at", "");
    r.sim_duration_ms = j.at("sim_duration_ms").get<std::int64_t>();
    if (j.contains("failed_step")) {
      const auto& f = j["failed_step"];
      r.failed_step = FailedStep{f.at("index").get<int>(), f.value("line", 0),
                                 f.value("step", ""), f.at("expected").get<std::string>(),
                                 f.at("actual").get<std::string>()};
    }
    r.message = j.value("message", "");
    return r;
  } catch (const ojson::exception& ex) {
    throw RunnerError(std::string("malformed result record: ") + ex.what());
  }
}

std::string batch_record(const BatchReport& b) {
  ojson j;
  j["batch_id"] = b.id;
  j["selection"] = b.selection;
  j["seed"] = b.seed;
  j["started_at"] = b.started_at;
  j["cases"] = b.results.size();
  j["totals"] = {{"pass", b.totals.pass}, {"fail", b.totals.fail}, {"error", b.totals.error}};
  j["sim_elapsed_ms"] = b.sim_elapsed_ms;
  j["mean_sim_per_case_ms"] = b.mean_sim_per_case_ms;
  j["wall_elapsed_ms"] = b.wall_elapsed_ms;
  return j.dump();
}

namespace {

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string pad(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

}  // namespace

std::string render_report(const BatchReport& b, ReportFormat format) {
  if (format == ReportFormat::Records) {
    std::string out = batch_record(b) + '\n';
    for (const auto& r : b.results) out += result_record(r) + '\n';
    return out;
  }
  std::string sel;
  for (const auto& s : b.selection) sel += (sel.empty() ? "" : ",") + s;
  std::string out = "batch " + b.id + '\n';
  out += "started " + b.started_at + '\n';
  out += "selection " + (sel.empty() ? std::string("-") : sel) + '\n';
  out += "seed " + std::to_string(b.seed) + "\n\n";

  std::size_t wid = 4, wts = 10, wsim = 6;
  for (const auto& r : b.results) {
    wid = std::max(wid, r.case_id.size());
    wts = std::max(wts, r.started_at.size());
    wsim = std::max(wsim, std::to_string(r.sim_duration_ms).size());
  }
  out += pad("case", wid) + "  " + pad("verdict", 7) + "  " + pad("started_at", wts) + "  " +
         pad("sim_ms", wsim) + "  title\n";
  for (const auto& r : b.results) {
    out += pad(r.case_id, wid) + "  " + pad(std::string(to_string(r.verdict)), 7) + "  " +
           pad(r.started_at, wts) + "  " + pad(std::to_string(r.sim_duration_ms), wsim) + "  " +
           r.title + '\n';
    if (r.failed_step)
      out += std::string(wid + 2, ' ') + "step " + std::to_string(r.failed_step->index) +
             " (line " + std::to_string(r.failed_step->line) + ") " + r.failed_step->step +
             ": expected " + r.failed_step->expected + ", actual " + r.failed_step->actual + '\n';
    if (!r.message.empty()) out += std::string(wid + 2, ' ') + r.message + '\n';
  }
  out += "\ntotals pass=" + std::to_string(b.totals.pass) + " fail=" + std::to_string(b.totals.fail) +
         " error=" + std::to_string(b.totals.error) + " cases=" + std::to_string(b.results.size()) +
         '\n';
  out += "sim_elapsed_ms " + std::to_string(b.sim_elapsed_ms) + '\n';
  out += "mean_sim_per_case_ms " + fixed3(b.mean_sim_per_case_ms) + '\n';
  out += "wall_elapsed_ms " + std::to_string(b.wall_elapsed_ms) + '\n';
  return out;
}

void save_batch(const BatchReport& report, const std::filesystem::path& out_dir) {
  std::string lines;
  for (const auto& r : report.results) lines += result_record(r) + '\n';
  write_text(out_dir / (report.id + ".jsonl"), lines);
  write_text(out_dir / (report.id + ".batch.json"), batch_record(report) + '\n');
  write_text(out_dir / "report.txt", render_report(report, ReportFormat::Text));
}

BatchReport load_batch(const std::filesystem::path& out_dir, const std::string& batch_id) {
  BatchReport b;
  try {
    auto j = ojson::parse(read_text(out_dir / (batch_id + ".batch.json")));
    b.id = j.at("batch_id").get<std::string>();
    b.selection = j.at("selection").get<std::vector<std::string>>();
    b.seed = j.value("seed", std::uint64_t{0});
    b.started_at = j.value("started_at", "");
    b.wall_elapsed_ms = j.value("wall_elapsed_ms", std::int64_t{0});
  } catch (const ojson::exception& ex) {
    throw RunnerError("malformed batch file for " + batch_id + ": " + ex.what());
  }
  const std::string text = read_text(out_dir / (batch_id + ".jsonl"));
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = std::string_view(text).substr(pos, nl == std::string::npos ? nl : nl - pos);
    if (!line.empty()) b.results.push_back(parse_result_record(line));
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  finalize_totals(b);
  return b;
}

std::optional<std::string> latest_batch_id(const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::optional<std::pair<std::string, std::string>> best;  // (started_at, id)
  for (const auto& entry : std::filesystem::directory_iterator(out_dir, ec)) {
    const std::string name = entry.path().filename().string();
    const std::string suffix = ".batch.json";
    if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix))
      continue;
    std::string id = name.substr(0, name.size() - suffix.size());
    std::string started;
    try {
      started = ojson::parse(read_text(entry.path())).value("started_at", "");
    } catch (const std::exception&) {
      continue;
    }
    std::pair<std::string, std::string> key{started, id};
    if (!best || key > *best) best = key;
  }
  if (!best) return std::nullopt;
  return best->second;
}

// ---------------------------------------------------------------------------
// Defects

namespace {

std::string_view to_string(DefectStatus s) { return s == DefectStatus::Open ? "Open" : "Closed"; }

std::string defect_line(const DefectRecord& d) {
  ojson j;
  j["id"] = d.id;
  j["case_id"] = d.case_id;
  j["signature"] = d.signature;
  j["summary"] = d.summary;
  j["status"] = to_string(d.status);
  j["opened_at"] = d.opened_at;
  j["updated_at"] = d.updated_at;
  j["last_seen_batch"] = d.last_seen_batch;
  j["closed_by_batch"] = d.closed_by_batch ? ojson(*d.closed_by_batch) : ojson(nullptr);
  return j.dump();
}

DefectRecord parse_defect(const ojson& j) {
  DefectRecord d;
  d.id = j.at("id").get<std::string>();
  d.case_id = j.at("case_id").get<std::string>();
  d.signature = j.at("signature").get<std::string>();
  d.summary = j.value("summary", "");
  const auto status = j.at("status").get<std::string>();
  if (status != "Open" && status != "Closed") throw RunnerError("bad defect status " + status);
  d.status = status == "Open" ? DefectStatus::Open : DefectStatus::Closed;
  d.opened_at = j.value("opened_at", "");
  d.updated_at = j.value("updated_at", "");
  d.last_seen_batch = j.value("last_seen_batch", "");
  if (j.contains("closed_by_batch") && !j["closed_by_batch"].is_null())
    d.closed_by_batch = j["closed_by_batch"].get<std::string>();
  return d;
}

int defect_number(const std::string& id) {
  if (id.size() < 3 || id.compare(0, 2, "D-") != 0) return 0;
  try {
    return std::stoi(id.substr(2));
  } catch (const std::exception&) {
    return 0;
  }
}

}  // namespace

std::string failure_signature(const TestResult& r) {
  if (!r.failed_step) return r.case_id;
  return r.case_id + '|' + std::to_string(r.failed_step->index) + '|' + r.failed_step->expected +
         '|' + r.failed_step->actual;
}

DefectStore::DefectStore(std::filesystem::path path) : path_(std::move(path)) {}

void DefectStore::load() {
  records_.clear();
  if (!std::filesystem::exists(path_)) return;
  const std::string text = read_text(path_);
  std::map<std::string, DefectRecord> latest;
  std::size_t pos = 0;
  int n = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = std::string_view(text).substr(pos, nl == std::string::npos ? nl : nl - pos);
    ++n;
    if (!line.empty()) {
      try {
        auto d = parse_defect(ojson::parse(line));
        latest[d.id] = std::move(d);
      } catch (const std::exception& ex) {
        throw IoError(path_.string() + ":" + std::to_string(n) + ": malformed defect record: " +
                      ex.what());
      }
    }
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  for (auto& [id, d] : latest) records_.push_back(std::move(d));
  std::sort(records_.begin(), records_.end(), [](const auto& a, const auto& b) {
    return defect_number(a.id) < defect_number(b.id);
  });
}

void DefectStore::persist(const DefectRecord& record) {
  append_text(path_, defect_line(record) + '\n');
}

std::vector<DefectRecord> DefectStore::open_for(std::string_view case_id) const {
  std::vector<DefectRecord> out;
  for (const auto& d : records_)
    if (d.case_id == case_id && d.status == DefectStatus::Open) out.push_back(d);
  return out;
}

std::vector<DefectRecord> DefectStore::track(const TestResult& result, const std::string& batch_id,
                                             const std::string& now) {
  std::vector<DefectRecord> changed;
  if (result.verdict == Verdict::Pass) {
    for (auto& d : records_) {
      if (d.case_id != result.case_id || d.status != DefectStatus::Open) continue;
      d.status = DefectStatus::Closed;
      d.closed_by_batch = batch_id;
      d.updated_at = now;
      d.last_seen_batch = batch_id;
      persist(d);
      changed.push_back(d);
    }
    return changed;
  }
  if (result.verdict != Verdict::Fail) return changed;

  const std::string sig = failure_signature(result);
  for (auto& d : records_) {
    if (d.signature == sig && d.status == DefectStatus::Open) {
      d.updated_at = now;
      d.last_seen_batch = batch_id;
      persist(d);
      changed.push_back(d);
      return changed;
    }
  }
  int next = 0;
  for (const auto& d : records_) next = std::max(next, defect_number(d.id));
  char id[16];
  std::snprintf(id, sizeof id, "D-%04d", next + 1);
  DefectRecord d;
  d.id = id;
  d.case_id = result.case_id;
  d.signature = sig;
  if (const auto& f = result.failed_step)
    d.summary = "step " + std::to_string(f->index) + " (line " + std::to_string(f->line) + ") " +
                f->step + ": expected " + f->expected + ", actual " + f->actual;
  else
    d.summary = "failed";
  d.opened_at = now;
  d.updated_at = now;
  d.last_seen_batch = batch_id;
  persist(d);
  records_.push_back(d);
  changed.push_back(std::move(d));
  return changed;
}

std::vector<DefectRecord> DefectStore::track_batch(const BatchReport& report) {
  std::vector<DefectRecord> changed;
  for (const auto& r : report.results) {
    auto c = track(r, report.id, r.started_at);
    changed.insert(changed.end(), c.begin(), c.end());
  }
  return changed;
}

}  // namespace artts
