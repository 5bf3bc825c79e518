#pragma once

// Test execution, batch accounting, defect tracking and reports.

#include "artts/engine.hpp"
#include "artts/test_script.hpp"
#include "artts/traceability.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace artts {

enum class Verdict { Pass, Fail, Error };
std::string_view to_string(Verdict verdict);
std::optional<Verdict> parse_verdict(std::string_view text);

struct FailedStep {
  int index = 0;  // 1-based position in the case's step list
  int line = 0;
  std::string step;      // canonical step text
  std::string expected;  // e.g. "1", "DISCREPANCY", "SECURED"
  std::string actual;

  bool operator==(const FailedStep&) const = default;
};

struct TestResult {
  std::string case_id;
  std::string title;
  Verdict verdict = Verdict::Pass;
  std::string started_at;  // RFC 3339 wall clock; metadata only
  std::int64_t sim_duration_ms = 0;
  std::optional<FailedStep> failed_step;  // Fail only
  std::string message;                    // Error only

  bool operator==(const TestResult&) const = default;
};

using WallClock = std::function<std::chrono::system_clock::time_point()>;

// "2026-10-19T12:34:56.789Z"
std::string format_rfc3339(std::chrono::system_clock::time_point t);
// "20261019T123456789Z", usable as a file name
std::string batch_id_for(std::chrono::system_clock::time_point t);

// Runs one case against `engine`. Resets the engine first unless the case
// says `continue`. Never throws for script or engine errors; those become
// an Error verdict.
TestResult run_case(const TestCase& test_case, Engine& engine, const WallClock& clock = {});

struct Totals {
  std::size_t pass = 0;
  std::size_t fail = 0;
  std::size_t error = 0;
  bool operator==(const Totals&) const = default;
};

struct BatchReport {
  std::string id;
  std::vector<std::string> selection;
  std::uint64_t seed = 0;
  std::string started_at;  // wall metadata
  std::vector<TestResult> results;  // execution order
  Totals totals;
  std::int64_t wall_elapsed_ms = 0;  // wall metadata
  std::int64_t sim_elapsed_ms = 0;
  double mean_sim_per_case_ms = 0.0;
};

class RunnerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Case ids selected by build/run/case ids, in tree order, without
// duplicates. Throws RunnerError for an id not in the tree.
std::vector<std::string> resolve_selection(const TestUnitTree& tree,
                                           const std::vector<std::string>& ids);

struct BatchOptions {
  std::filesystem::path workspace = ".";
  std::filesystem::path suite_dir = ".";  // directory holding the suite file
  std::optional<std::filesystem::path> station_override;
  std::vector<std::string> selection;  // build/run/case ids
  std::optional<std::string> batch_id;  // default: from the wall clock
  std::uint64_t seed = 0;
  WallClock clock;  // default: system_clock::now
};

// Fresh engine per case, sequential in tree order. A station that fails to
// load aborts the batch: every case not yet executed gets an Error result.
BatchReport run_batch(const TestUnitTree& tree, const BatchOptions& options);

// Recomputes totals, sim_elapsed_ms and the mean from `results`.
void finalize_totals(BatchReport& report);

CaseOutcomes case_outcomes(const BatchReport& report);

enum class ReportFormat { Text, Records };
std::string render_report(const BatchReport& report, ReportFormat format);

std::string result_record(const TestResult& result);  // one JSON line, no LF
TestResult parse_result_record(std::string_view line);
std::string batch_record(const BatchReport& report);  // metadata only, no results

// Writes <out>/<id>.jsonl, <out>/<id>.batch.json and <out>/report.txt.
void save_batch(const BatchReport& report, const std::filesystem::path& out_dir);
BatchReport load_batch(const std::filesystem::path& out_dir, const std::string& batch_id);
// Most recent batch id in `out_dir` (ids sort chronologically), if any.
std::optional<std::string> latest_batch_id(const std::filesystem::path& out_dir);

enum class DefectStatus { Open, Closed };

struct DefectRecord {
  std::string id;  // D-0001, ...
  std::string case_id;
  std::string signature;  // case|step|expected|actual
  std::string summary;
  DefectStatus status = DefectStatus::Open;
  std::string opened_at;
  std::string updated_at;
  std::string last_seen_batch;
  std::optional<std::string> closed_by_batch;

  bool operator==(const DefectRecord&) const = default;
};

std::string failure_signature(const TestResult& result);

// Append-only JSON-lines store; the latest line for an id is its state.
class DefectStore {
 public:
  explicit DefectStore(std::filesystem::path path);

  void load();  // throws IoError on unreadable or malformed content
  // Applies one result; returns the records it changed (already persisted).
  std::vector<DefectRecord> track(const TestResult& result, const std::string& batch_id,
                                  const std::string& now);
  std::vector<DefectRecord> track_batch(const BatchReport& report);

  const std::vector<DefectRecord>& records() const { return records_; }
  std::vector<DefectRecord> open_for(std::string_view case_id) const;

 private:
  void persist(const DefectRecord& record);

  std::filesystem::path path_;
  std::vector<DefectRecord> records_;  // current state, id order
};

}  // namespace artts
