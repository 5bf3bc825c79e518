#pragma once

// Requirement hierarchy, test unit tree, validation matrices and coverage.
//
// Levels pair with unit kinds: High <-> Build, Intermediate <-> TestRun,
// Detail <-> TestCase.

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

namespace artts {

enum class Level { High, Intermediate, Detail };
enum class UnitKind { Build, Run, Case };

std::string_view to_string(Level level);
std::optional<Level> parse_level(std::string_view text);  // case-insensitive
std::string_view to_string(UnitKind kind);
UnitKind unit_kind_for(Level level);

class TraceError : public std::runtime_error {
 public:
  TraceError(int line, const std::string& msg)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct Requirement {
  std::string id;
  Level level = Level::Detail;
  std::optional<std::string> parent;
  std::string text;

  bool operator==(const Requirement&) const = default;
};

struct RequirementSet {
  std::vector<Requirement> items;  // file order

  const Requirement* find(std::string_view id) const;
  std::vector<const Requirement*> at_level(Level level) const;
  std::vector<const Requirement*> children(std::string_view id) const;
};

// `id|level|parent|text` per line; `#` comments and blank lines ignored.
RequirementSet load_requirements(std::string_view text);
RequirementSet read_requirements_file(const std::filesystem::path& path);
std::string format_requirements(const RequirementSet& reqs);

struct Build {
  std::string id;
  std::string name;
  std::string station;  // station directory, relative to the workspace
  std::vector<std::string> runs;
};

struct TestRun {
  std::string id;
  std::string name;
  std::vector<std::string> cases;
};

struct TestUnitTree {
  std::string name;
  std::string cases_dir = "cases";  // relative to the suite file
  std::vector<Build> builds;
  std::vector<TestRun> runs;
  std::vector<std::string> cases;  // tree order: builds, runs, cases

  const Build* find_build(std::string_view id) const;
  const TestRun* find_run(std::string_view id) const;
  bool has_case(std::string_view id) const;
  std::optional<UnitKind> kind_of(std::string_view id) const;
  const Build* build_of_run(std::string_view run) const;
  const TestRun* run_of_case(std::string_view test_case) const;
};

TestUnitTree parse_suite_json(std::string_view json_text);
TestUnitTree read_suite_file(const std::filesystem::path& path);

struct Link {
  std::string requirement;
  std::string unit;
  bool operator<(const Link& o) const {
    return std::tie(requirement, unit) < std::tie(o.requirement, o.unit);
  }
  bool operator==(const Link&) const = default;
};

// `REQ -> UNIT` per line.
std::vector<Link> parse_links(std::string_view text);
std::vector<Link> read_links_file(const std::filesystem::path& path);

struct ValidationMatrix {
  Level level = Level::Detail;
  std::set<Link> links;

  std::vector<std::string> units_of(std::string_view requirement) const;
  std::vector<std::string> requirements_of(std::string_view unit) const;
};

struct Matrices {
  std::array<ValidationMatrix, 3> by_level{
      {{Level::High, {}}, {Level::Intermediate, {}}, {Level::Detail, {}}}};

  const ValidationMatrix& at(Level level) const { return by_level[static_cast<int>(level)]; }
};

// Throws TraceError on unknown ids or links whose unit kind does not match
// the requirement level.
Matrices build_matrix(const RequirementSet& reqs, const TestUnitTree& tree,
                      const std::vector<Link>& links);

enum class Status { Pass, Fail, Empty, NotRun };
std::string_view to_string(Status status);

// Latest outcome per test case id (Pass or Fail); absent = not run.
using CaseOutcomes = std::map<std::string, Status>;

Status run_status(const TestUnitTree& tree, std::string_view run, const CaseOutcomes& outcomes);
Status build_status(const TestUnitTree& tree, std::string_view build,
                    const CaseOutcomes& outcomes);
Status unit_status(const TestUnitTree& tree, std::string_view unit, const CaseOutcomes& outcomes);

struct CoverageReport {
  Level level = Level::Detail;
  std::size_t total = 0;
  std::size_t covered = 0;
  std::optional<std::size_t> covered_and_passing;  // absent without results
  std::vector<std::string> uncovered_ids;           // requirement file order

  double percent() const { return total == 0 ? 100.0 : 100.0 * covered / total; }
};

CoverageReport coverage(const RequirementSet& reqs, const Matrices& matrices, Level level,
                        const TestUnitTree& tree, const CaseOutcomes* outcomes = nullptr);

struct RollUpNode {
  std::string requirement;
  Level level = Level::High;
  std::vector<std::pair<std::string, Status>> units;  // linked units
  std::vector<RollUpNode> children;
};

struct RollUp {
  std::vector<RollUpNode> roots;  // High requirements
  std::vector<std::pair<std::string, Status>> builds;
  std::vector<std::pair<std::string, Status>> runs;
};

RollUp roll_up(const RequirementSet& reqs, const Matrices& matrices, const TestUnitTree& tree,
               const CaseOutcomes& outcomes);

std::string render_coverage_text(const CoverageReport& report);
std::string render_coverage_records(const CoverageReport& report);
std::string render_matrix_text(const ValidationMatrix& matrix, const RequirementSet& reqs);
std::string render_rollup_text(const RollUp& rollup);

}  // namespace artts
