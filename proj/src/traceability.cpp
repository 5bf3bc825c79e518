#include "artts/traceability.hpp"

#include "artts/fsio.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>

namespace artts {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool valid_id(std::string_view id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' || c == '_';
  });
}

// Calls fn(line_number, content) for each non-blank, non-comment line.
template <typename Fn>
void for_each_line(std::string_view text, Fn fn) {
  int n = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++n;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    fn(n, t);
  }
}

}  // namespace

std::string_view to_string(Level level) {
  switch (level) {
    case Level::High: return "High";
    case Level::Intermediate: return "Intermediate";
    case Level::Detail: return "Detail";
  }
  return "Detail";
}

std::optional<Level> parse_level(std::string_view text) {
  std::string lower(text);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "high") return Level::High;
  if (lower == "intermediate") return Level::Intermediate;
  if (lower == "detail") return Level::Detail;
  return std::nullopt;
}

std::string_view to_string(UnitKind kind) {
  switch (kind) {
    case UnitKind::Build: return "Build";
    case UnitKind::Run: return "TestRun";
    case UnitKind::Case: return "TestCase";
  }
  return "TestCase";
}

UnitKind unit_kind_for(Level level) {
  switch (level) {
    case Level::High: return UnitKind::Build;
    case Level::Intermediate: return UnitKind::Run;
    case Level::Detail: return UnitKind::Case;
  }
  return UnitKind::Case;
}

std::string_view to_string(Status status) {
  switch (status) {
    case Status::Pass: return "Pass";
    case Status::Fail: return "Fail";
    case Status::Empty: return "Empty";
    case Status::NotRun: return "NotRun";
  }
  return "NotRun";
}

// ---------------------------------------------------------------------------
// Requirements

const Requirement* RequirementSet::find(std::string_view id) const {
  for (const auto& r : items)
    if (r.id == id) return &r;
  return nullptr;
}

std::vector<const Requirement*> RequirementSet::at_level(Level level) const {
  std::vector<const Requirement*> out;
  for (const auto& r : items)
    if (r.level == level) out.push_back(&r);
  return out;
}

std::vector<const Requirement*> RequirementSet::children(std::string_view id) const {
  std::vector<const Requirement*> out;
  for (const auto& r : items)
    if (r.parent && *r.parent == id) out.push_back(&r);
  return out;
}

RequirementSet load_requirements(std::string_view text) {
  RequirementSet set;
  std::vector<int> lines;
  std::unordered_map<std::string, std::size_t> by_id;
  for_each_line(text, [&](int n, std::string_view line) {
    std::string_view f[4];
    for (int i = 0; i < 3; ++i) {
      auto bar = line.find('|');
      if (bar == std::string_view::npos) throw TraceError(n, "expected id|level|parent|text");
      f[i] = trim(line.substr(0, bar));
      line = line.substr(bar + 1);
    }
    f[3] = trim(line);
    Requirement r;
    r.id = std::string(f[0]);
    if (!valid_id(r.id)) throw TraceError(n, "invalid requirement id '" + r.id + "'");
    auto level = parse_level(f[1]);
    if (!level) throw TraceError(n, "unknown level '" + std::string(f[1]) + "'");
    r.level = *level;
    if (!f[2].empty()) r.parent = std::string(f[2]);
    r.text = std::string(f[3]);
    if (!by_id.emplace(r.id, set.items.size()).second)
      throw TraceError(n, "duplicate requirement id " + r.id);
    set.items.push_back(std::move(r));
    lines.push_back(n);
  });
  for (std::size_t i = 0; i < set.items.size(); ++i) {
    const auto& r = set.items[i];
    if (r.level == Level::High) {
      if (r.parent) throw TraceError(lines[i], "High requirement " + r.id + " has a parent");
      continue;
    }
    if (!r.parent) throw TraceError(lines[i], "requirement " + r.id + " has no parent");
    auto it = by_id.find(*r.parent);
    if (it == by_id.end()) throw TraceError(lines[i], "dangling parent " + *r.parent);
    Level want = r.level == Level::Detail ? Level::Intermediate : Level::High;
    const auto& p = set.items[it->second];
    if (p.level != want)
      throw TraceError(lines[i], "level/parent mismatch: " + r.id + " (" +
                                     std::string(to_string(r.level)) + ") has parent " + p.id +
                                     " (" + std::string(to_string(p.level)) + ")");
  }
  return set;
}

RequirementSet read_requirements_file(const std::filesystem::path& path) {
  return load_requirements(read_text(path));
}

std::string format_requirements(const RequirementSet& reqs) {
  std::string out;
  for (const auto& r : reqs.items)
    out += r.id + '|' + std::string(to_string(r.level)) + '|' + r.parent.value_or("") + '|' +
           r.text + '\n';
  return out;
}

// ---------------------------------------------------------------------------
// Test unit tree

const Build* TestUnitTree::find_build(std::string_view id) const {
  for (const auto& b : builds)
    if (b.id == id) return &b;
  return nullptr;
}

const TestRun* TestUnitTree::find_run(std::string_view id) const {
  for (const auto& r : runs)
    if (r.id == id) return &r;
  return nullptr;
}

bool TestUnitTree::has_case(std::string_view id) const {
  return std::find(cases.begin(), cases.end(), id) != cases.end();
}

std::optional<UnitKind> TestUnitTree::kind_of(std::string_view id) const {
  if (find_build(id)) return UnitKind::Build;
  if (find_run(id)) return UnitKind::Run;
  if (has_case(id)) return UnitKind::Case;
  return std::nullopt;
}

const Build* TestUnitTree::build_of_run(std::string_view run) const {
  for (const auto& b : builds)
    if (std::find(b.runs.begin(), b.runs.end(), run) != b.runs.end()) return &b;
  return nullptr;
}

const TestRun* TestUnitTree::run_of_case(std::string_view test_case) const {
  for (const auto& r : runs)
    if (std::find(r.cases.begin(), r.cases.end(), test_case) != r.cases.end()) return &r;
  return nullptr;
}

TestUnitTree parse_suite_json(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw TraceError(0, std::string("suite: ") + e.what());
  }
  TestUnitTree tree;
  try {
    tree.name = j.value("name", "");
    tree.cases_dir = j.value("cases_dir", "cases");
    for (const auto& b : j.at("builds"))
      tree.builds.push_back({b.at("id").get<std::string>(), b.value("name", ""),
                             b.at("station").get<std::string>(),
                             b.at("runs").get<std::vector<std::string>>()});
    for (const auto& r : j.at("runs"))
      tree.runs.push_back({r.at("id").get<std::string>(), r.value("name", ""),
                           r.at("cases").get<std::vector<std::string>>()});
  } catch (const json::exception& e) {
    throw TraceError(0, std::string("suite: ") + e.what());
  }

  std::unordered_set<std::string> ids;
  auto unique = [&](const std::string& id, const char* what) {
    if (!valid_id(id)) throw TraceError(0, std::string("suite: invalid ") + what + " id '" + id + "'");
    if (!ids.insert(id).second) throw TraceError(0, "suite: duplicate unit id " + id);
  };
  for (const auto& b : tree.builds) unique(b.id, "build");
  for (const auto& r : tree.runs) unique(r.id, "run");

  std::unordered_map<std::string, std::string> run_owner;
  for (const auto& b : tree.builds)
    for (const auto& r : b.runs) {
      if (!tree.find_run(r)) throw TraceError(0, "suite: build " + b.id + " lists unknown run " + r);
      if (!run_owner.emplace(r, b.id).second)
        throw TraceError(0, "suite: run " + r + " belongs to more than one build");
    }
  for (const auto& r : tree.runs)
    if (!run_owner.count(r.id)) throw TraceError(0, "suite: run " + r.id + " belongs to no build");
  for (const auto& b : tree.builds)
    for (const auto& rid : b.runs)
      for (const auto& c : tree.find_run(rid)->cases) {
        unique(c, "case");
        tree.cases.push_back(c);
      }
  return tree;
}

TestUnitTree read_suite_file(const std::filesystem::path& path) {
  return parse_suite_json(read_text(path));
}

// ---------------------------------------------------------------------------
// Links and matrices

std::vector<Link> parse_links(std::string_view text) {
  std::vector<Link> out;
  for_each_line(text, [&](int n, std::string_view line) {
    auto arrow = line.find("->");
    if (arrow == std::string_view::npos) throw TraceError(n, "expected 'REQ -> UNIT'");
    Link l{std::string(trim(line.substr(0, arrow))), std::string(trim(line.substr(arrow + 2)))};
    if (!valid_id(l.requirement) || !valid_id(l.unit)) throw TraceError(n, "expected 'REQ -> UNIT'");
    out.push_back(std::move(l));
  });
  return out;
}

std::vector<Link> read_links_file(const std::filesystem::path& path) {
  return parse_links(read_text(path));
}

std::vector<std::string> ValidationMatrix::units_of(std::string_view requirement) const {
  std::vector<std::string> out;
  for (const auto& l : links)
    if (l.requirement == requirement) out.push_back(l.unit);
  return out;
}

std::vector<std::string> ValidationMatrix::requirements_of(std::string_view unit) const {
  std::vector<std::string> out;
  for (const auto& l : links)
    if (l.unit == unit) out.push_back(l.requirement);
  return out;
}

Matrices build_matrix(const RequirementSet& reqs, const TestUnitTree& tree,
                      const std::vector<Link>& links) {
  Matrices m;
  for (const auto& l : links) {
    const Requirement* r = reqs.find(l.requirement);
    if (!r) throw TraceError(0, "unknown requirement " + l.requirement);
    auto kind = tree.kind_of(l.unit);
    if (!kind) throw TraceError(0, "unknown unit " + l.unit);
    if (*kind != unit_kind_for(r->level))
      throw TraceError(0, "cross-level link: " + l.requirement + " (" +
                              std::string(to_string(r->level)) + ") -> " + l.unit + " (" +
                              std::string(to_string(*kind)) + ")");
    m.by_level[static_cast<int>(r->level)].links.insert(l);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Status and coverage

Status run_status(const TestUnitTree& tree, std::string_view run, const CaseOutcomes& outcomes) {
  const TestRun* r = tree.find_run(run);
  if (!r || r->cases.empty()) return Status::Empty;
  bool not_run = false;
  for (const auto& c : r->cases) {
    auto it = outcomes.find(c);
    if (it == outcomes.end() || it->second == Status::NotRun)
      not_run = true;
    else if (it->second != Status::Pass)
      return Status::Fail;
  }
  return not_run ? Status::NotRun : Status::Pass;
}

Status build_status(const TestUnitTree& tree, std::string_view build,
                    const CaseOutcomes& outcomes) {
  const Build* b = tree.find_build(build);
  if (!b || b->runs.empty()) return Status::Empty;
  bool empty = false, not_run = false;
  for (const auto& r : b->runs) {
    switch (run_status(tree, r, outcomes)) {
      case Status::Fail: return Status::Fail;
      case Status::Empty: empty = true; break;
      case Status::NotRun: not_run = true; break;
      case Status::Pass: break;
    }
  }
  if (empty) return Status::Empty;
  return not_run ? Status::NotRun : Status::Pass;
}

Status unit_status(const TestUnitTree& tree, std::string_view unit, const CaseOutcomes& outcomes) {
  switch (tree.kind_of(unit).value_or(UnitKind::Case)) {
    case UnitKind::Build: return build_status(tree, unit, outcomes);
    case UnitKind::Run: return run_status(tree, unit, outcomes);
    case UnitKind::Case: {
      auto it = outcomes.find(std::string(unit));
      return it == outcomes.end() ? Status::NotRun : it->second;
    }
  }
  return Status::NotRun;
}

CoverageReport coverage(const RequirementSet& reqs, const Matrices& matrices, Level level,
                        const TestUnitTree& tree, const CaseOutcomes* outcomes) {
  CoverageReport rep;
  rep.level = level;
  const auto& matrix = matrices.at(level);
  std::unordered_map<std::string, std::vector<std::string>> units;
  for (const auto& l : matrix.links) units[l.requirement].push_back(l.unit);
  if (outcomes) rep.covered_and_passing = 0;
  for (const auto* r : reqs.at_level(level)) {
    ++rep.total;
    auto it = units.find(r->id);
    if (it == units.end()) {
      rep.uncovered_ids.push_back(r->id);
      continue;
    }
    ++rep.covered;
    if (outcomes &&
        std::any_of(it->second.begin(), it->second.end(), [&](const std::string& u) {
          return unit_status(tree, u, *outcomes) == Status::Pass;
        }))
      ++*rep.covered_and_passing;
  }
  return rep;
}

namespace {

RollUpNode rollup_node(const Requirement& r, const RequirementSet& reqs, const Matrices& m,
                       const TestUnitTree& tree, const CaseOutcomes& outcomes) {
  RollUpNode node;
  node.requirement = r.id;
  node.level = r.level;
  for (const auto& u : m.at(r.level).units_of(r.id))
    node.units.emplace_back(u, unit_status(tree, u, outcomes));
  for (const auto* child : reqs.children(r.id))
    node.children.push_back(rollup_node(*child, reqs, m, tree, outcomes));
  return node;
}

}  // namespace

RollUp roll_up(const RequirementSet& reqs, const Matrices& matrices, const TestUnitTree& tree,
               const CaseOutcomes& outcomes) {
  RollUp out;
  for (const auto* r : reqs.at_level(Level::High))
    out.roots.push_back(rollup_node(*r, reqs, matrices, tree, outcomes));
  for (const auto& b : tree.builds) out.builds.emplace_back(b.id, build_status(tree, b.id, outcomes));
  for (const auto& r : tree.runs) out.runs.emplace_back(r.id, run_status(tree, r.id, outcomes));
  return out;
}

// ---------------------------------------------------------------------------
// Rendering

std::string render_coverage_text(const CoverageReport& report) {
  char pct[32];
  std::snprintf(pct, sizeof pct, "%.1f%%", report.percent());
  std::string out = "coverage level=" + std::string(to_string(report.level)) + '\n';
  out += "total      " + std::to_string(report.total) + '\n';
  out += "covered    " + std::to_string(report.covered) + " (" + pct + ")\n";
  out += "passing    " +
         (report.covered_and_passing ? std::to_string(*report.covered_and_passing) : "n/a") + '\n';
  for (const auto& id : report.uncovered_ids) out += "uncovered  " + id + '\n';
  return out;
}

std::string render_coverage_records(const CoverageReport& report) {
  json j = {
      {"level", to_string(report.level)},
      {"total", report.total},
      {"covered", report.covered},
      {"covered_and_passing",
       report.covered_and_passing ? json(*report.covered_and_passing) : json(nullptr)},
      {"uncovered", report.uncovered_ids},
  };
  return j.dump() + '\n';
}

std::string render_matrix_text(const ValidationMatrix& matrix, const RequirementSet& reqs) {
  std::vector<std::pair<std::string, std::string>> rows;
  std::size_t w = std::string_view("requirement").size();
  for (const auto* r : reqs.at_level(matrix.level)) {
    std::string units;
    for (const auto& u : matrix.units_of(r->id)) units += (units.empty() ? "" : ",") + u;
    rows.emplace_back(r->id, units.empty() ? "-" : units);
    w = std::max(w, r->id.size());
  }
  auto pad = [&](const std::string& s) { return s + std::string(w - s.size() + 2, ' '); };
  std::string out = pad("requirement") + std::string(to_string(unit_kind_for(matrix.level))) + '\n';
  for (const auto& [id, units] : rows) out += pad(id) + units + '\n';
  return out;
}

namespace {

void render_node(const RollUpNode& n, int depth, std::string& out) {
  out += std::string(depth * 2, ' ') + n.requirement;
  if (n.units.empty()) out += "  (unlinked)";
  for (const auto& [u, s] : n.units) out += "  " + u + '=' + std::string(to_string(s));
  out += '\n';
  for (const auto& c : n.children) render_node(c, depth + 1, out);
}

}  // namespace

std::string render_rollup_text(const RollUp& rollup) {
  std::string out;
  for (const auto& n : rollup.roots) render_node(n, 0, out);
  out += "builds:";
  for (const auto& [id, s] : rollup.builds) out += ' ' + id + '=' + std::string(to_string(s));
  out += "\nruns:";
  for (const auto& [id, s] : rollup.runs) out += ' ' + id + '=' + std::string(to_string(s));
  out += '\n';
  return out;
}

}  // namespace artts
