#include "artts/traceability.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>

using namespace artts;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const TraceError& e) {
    return e.what();
  }
  return {};
}

bool contains(const std::string& s, const std::string& part) {
  return s.find(part) != std::string::npos;
}

// n Detail requirements under one High/Intermediate pair, and a tree with
// one build, one run and n cases.
struct Synthetic {
  RequirementSet reqs;
  TestUnitTree tree;
};

Synthetic synthetic(int n) {
  std::string text = "HR-1|High||top\nIR-1.1|Intermediate|HR-1|middle\n";
  std::string cases;
  for (int i = 1; i <= n; ++i) {
    text += "DR-1.1." + std::to_string(i) + "|Detail|IR-1.1|detail " + std::to_string(i) + "\n";
    char id[16];
    std::snprintf(id, sizeof id, "TC-%03d", i);
    cases += std::string(i > 1 ? "," : "") + "\"" + id + "\"";
  }
  Synthetic s;
  s.reqs = load_requirements(text);
  s.tree = parse_suite_json(R"({"builds":[{"id":"B-01","station":"s","runs":["TR-01"]}],
                                "runs":[{"id":"TR-01","cases":[)" + cases + "]}]}");
  return s;
}

std::string case_id(int i) {
  char id[16];
  std::snprintf(id, sizeof id, "TC-%03d", i);
  return id;
}

const char* const kSmallTree = R"({
  "builds": [
    {"id": "B-01", "station": "stations/station-a", "runs": ["TR-01", "TR-02"]},
    {"id": "B-02", "station": "stations/station-a", "runs": ["TR-03"]}
  ],
  "runs": [
    {"id": "TR-01", "cases": ["TC-001", "TC-002"]},
    {"id": "TR-02", "cases": ["TC-003"]},
    {"id": "TR-03", "cases": []}
  ]
})";

}  // namespace

TEST_SUITE("traceability") {

TEST_CASE("load_requirements hierarchy") {
  const auto reqs = load_requirements(
      "# comment\n"
      "HR-1|High||top\n"
      "IR-1.1|Intermediate|HR-1|a\n"
      "IR-1.2|Intermediate|HR-1|b\n"
      "\n"
      "DR-1.1.1|Detail|IR-1.1|c\n"
      "DR-1.1.2|Detail|IR-1.1|d\n"
      "DR-1.2.1|Detail|IR-1.2|e\n"
      "DR-1.2.2|detail|IR-1.2|text with | bar\n");
  CHECK(reqs.items.size() == 7);
  CHECK(reqs.at_level(Level::High).size() == 1);
  CHECK(reqs.at_level(Level::Intermediate).size() == 2);
  CHECK(reqs.at_level(Level::Detail).size() == 4);
  CHECK(reqs.children("IR-1.2").size() == 2);
  CHECK(reqs.find("DR-1.2.2")->text == "text with | bar");
  CHECK(load_requirements(format_requirements(reqs)).items == reqs.items);
}

TEST_CASE("load_requirements errors") {
  CHECK(contains(error_of([] { load_requirements("HR-1|High||a\nDR-1|Detail|HR-1|b\n"); }),
                 "level/parent mismatch"));
  CHECK(contains(error_of([] { load_requirements("HR-1|High||a\nHR-1|High||b\n"); }),
                 "duplicate requirement id HR-1"));
  CHECK(contains(error_of([] { load_requirements("IR-1|Intermediate|HR-9|a\n"); }),
                 "dangling parent HR-9"));
  CHECK(contains(error_of([] { load_requirements("HR-1|Top||a\n"); }), "unknown level"));
  CHECK(contains(error_of([] { load_requirements("HR-1|High|IR-1|a\n"); }), "has a parent"));
  CHECK(contains(error_of([] { load_requirements("HR-1|High||a\nbad line\n"); }), "line 2"));
}

TEST_CASE("empty requirements file is valid and coverage is vacuous") {
  const auto reqs = load_requirements("");
  CHECK(reqs.items.empty());
  const auto tree = parse_suite_json(kSmallTree);
  const auto m = build_matrix(reqs, tree, {});
  const auto c = coverage(reqs, m, Level::Detail, tree);
  CHECK(c.total == 0);
  CHECK(c.percent() == 100.0);
}

TEST_CASE("suite tree validation") {
  const auto tree = parse_suite_json(kSmallTree);
  CHECK(tree.cases == std::vector<std::string>{"TC-001", "TC-002", "TC-003"});
  CHECK(tree.build_of_run("TR-03")->id == "B-02");
  CHECK(tree.run_of_case("TC-003")->id == "TR-02");
  CHECK(tree.kind_of("TR-02") == UnitKind::Run);
  CHECK(!tree.kind_of("TC-999"));
  CHECK(contains(error_of([] {
                   parse_suite_json(R"({"builds":[{"id":"B-01","station":"s","runs":["TR-01"]},
                     {"id":"B-02","station":"s","runs":["TR-01"]}],"runs":[{"id":"TR-01","cases":[]}]})");
                 }),
                 "more than one build"));
  CHECK(contains(error_of([] {
                   parse_suite_json(R"({"builds":[],"runs":[{"id":"TR-01","cases":[]}]})");
                 }),
                 "belongs to no build"));
  CHECK(contains(error_of([] {
                   parse_suite_json(R"({"builds":[{"id":"B-01","station":"s","runs":["TR-01","TR-02"]}],
                     "runs":[{"id":"TR-01","cases":["TC-1"]},{"id":"TR-02","cases":["TC-1"]}]})");
                 }),
                 "duplicate unit id TC-1"));
}

TEST_CASE("build_matrix") {
  const auto reqs = load_requirements(
      "HR-1|High||a\nIR-1.1|Intermediate|HR-1|b\nDR-1.1.1|Detail|IR-1.1|c\n");
  const auto tree = parse_suite_json(kSmallTree);
  SUBCASE("detail link lands in the detail matrix only") {
    const auto m = build_matrix(reqs, tree, parse_links("DR-1.1.1 -> TC-001\n"));
    CHECK(m.at(Level::Detail).links.size() == 1);
    CHECK(m.at(Level::High).links.empty());
    CHECK(m.at(Level::Intermediate).links.empty());
  }
  SUBCASE("cross-level link rejected") {
    CHECK(contains(error_of([&] { build_matrix(reqs, tree, parse_links("HR-1 -> TC-001\n")); }),
                   "cross-level link"));
    CHECK(contains(error_of([&] { build_matrix(reqs, tree, parse_links("DR-1.1.1 -> B-01\n")); }),
                   "cross-level link"));
  }
  SUBCASE("unknown ids rejected") {
    CHECK(contains(error_of([&] { build_matrix(reqs, tree, parse_links("DR-9 -> TC-001\n")); }),
                   "unknown requirement DR-9"));
    CHECK(contains(error_of([&] { build_matrix(reqs, tree, parse_links("DR-1.1.1 -> TC-9\n")); }),
                   "unknown unit TC-9"));
  }
  SUBCASE("malformed link line") {
    CHECK(contains(error_of([] { parse_links("DR-1 TC-1\n"); }), "line 1"));
  }
}

TEST_CASE("150 x 150 diagonal: full coverage") {
  auto s = synthetic(150);
  std::vector<Link> links;
  for (int i = 1; i <= 150; ++i) links.push_back({"DR-1.1." + std::to_string(i), case_id(i)});
  const auto m = build_matrix(s.reqs, s.tree, links);
  CaseOutcomes all_pass;
  for (const auto& c : s.tree.cases) all_pass[c] = Status::Pass;
  const auto c = coverage(s.reqs, m, Level::Detail, s.tree, &all_pass);
  CHECK(c.total == 150);
  CHECK(c.covered == 150);
  CHECK(c.covered_and_passing == 150);
  CHECK(c.percent() == 100.0);
  CHECK(c.uncovered_ids.empty());
}

TEST_CASE("half linked is 50%") {
  auto s = synthetic(150);
  std::vector<Link> links;
  for (int i = 1; i <= 150; i += 2) links.push_back({"DR-1.1." + std::to_string(i), case_id(i)});
  const auto m = build_matrix(s.reqs, s.tree, links);
  const auto c = coverage(s.reqs, m, Level::Detail, s.tree);
  CHECK(c.covered == 75);
  CHECK(c.percent() == 50.0);
  CHECK(!c.covered_and_passing);
  CHECK(c.uncovered_ids.front() == "DR-1.1.2");
}

TEST_CASE("each single link removal on the shipped suite drops coverage by one") {
  const auto reqs = read_requirements_file(test::suite_dir() / "requirements.txt");
  const auto tree = read_suite_file(test::suite_dir() / "suite.json");
  const auto links = read_links_file(test::suite_dir() / "links.txt");
  const auto full = coverage(reqs, build_matrix(reqs, tree, links), Level::Detail, tree);
  REQUIRE(full.covered == full.total);
  REQUIRE(full.total == 160);
  std::map<std::string, int> link_count;
  for (const auto& l : links) ++link_count[l.requirement];
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (!links[i].requirement.starts_with("DR-")) continue;
    auto fewer = links;
    fewer.erase(fewer.begin() + static_cast<long>(i));
    const auto c = coverage(reqs, build_matrix(reqs, tree, fewer), Level::Detail, tree);
    CAPTURE(links[i].requirement);
    if (link_count[links[i].requirement] == 1) {
      CHECK(c.covered == full.covered - 1);
      CHECK(c.uncovered_ids == std::vector<std::string>{links[i].requirement});
    } else {
      CHECK(c.covered == full.covered);
    }
  }
}

TEST_CASE("properties over random link sets") {
  auto s = synthetic(40);
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Link> links;
    for (int k = static_cast<int>(rng() % 80); k > 0; --k)
      links.push_back({"DR-1.1." + std::to_string(1 + rng() % 40), case_id(1 + static_cast<int>(rng() % 40))});
    if (rng() % 2) links.push_back({"HR-1", "B-01"});
    if (rng() % 2) links.push_back({"IR-1.1", "TR-01"});
    const auto m = build_matrix(s.reqs, s.tree, links);

    // Level partition: every distinct link sits in exactly one matrix.
    std::set<Link> distinct(links.begin(), links.end());
    std::size_t total = 0;
    for (const auto& vm : m.by_level) total += vm.links.size();
    CHECK(total == distinct.size());

    // Link symmetry between the two derived views.
    const auto& dm = m.at(Level::Detail);
    for (const auto& r : s.reqs.at_level(Level::Detail))
      for (const auto& u : dm.units_of(r->id)) {
        const auto back = dm.requirements_of(u);
        CHECK(std::find(back.begin(), back.end(), r->id) != back.end());
      }

    // Coverage against a direct count, and monotonicity under one more link.
    std::set<std::string> linked;
    for (const auto& l : dm.links) linked.insert(l.requirement);
    CaseOutcomes outcomes;
    for (const auto& c : s.tree.cases)
      if (rng() % 3) outcomes[c] = rng() % 2 ? Status::Pass : Status::Fail;
    const auto c = coverage(s.reqs, m, Level::Detail, s.tree, &outcomes);
    CHECK(c.covered == linked.size());
    CHECK(*c.covered_and_passing <= c.covered);
    CHECK(c.covered <= c.total);
    auto more = links;
    more.push_back({"DR-1.1." + std::to_string(1 + rng() % 40), case_id(1 + static_cast<int>(rng() % 40))});
    CHECK(coverage(s.reqs, build_matrix(s.reqs, s.tree, more), Level::Detail, s.tree).covered >=
          c.covered);
  }
}

TEST_CASE("status propagation and roll_up") {
  const auto reqs = load_requirements(
      "HR-1|High||a\nHR-2|High||b\nIR-1.1|Intermediate|HR-1|c\nDR-1.1.1|Detail|IR-1.1|d\n");
  const auto tree = parse_suite_json(kSmallTree);
  const auto m = build_matrix(
      reqs, tree, parse_links("HR-1 -> B-01\nHR-2 -> B-02\nIR-1.1 -> TR-01\nDR-1.1.1 -> TC-001\n"));

  CaseOutcomes outcomes{{"TC-001", Status::Pass}, {"TC-002", Status::Pass}, {"TC-003", Status::Pass}};
  CHECK(build_status(tree, "B-01", outcomes) == Status::Pass);
  CHECK(run_status(tree, "TR-03", outcomes) == Status::Empty);
  CHECK(build_status(tree, "B-02", outcomes) != Status::Pass);

  outcomes["TC-002"] = Status::Fail;
  CHECK(run_status(tree, "TR-01", outcomes) == Status::Fail);
  CHECK(run_status(tree, "TR-02", outcomes) == Status::Pass);
  CHECK(build_status(tree, "B-01", outcomes) == Status::Fail);

  outcomes.erase("TC-003");
  CHECK(run_status(tree, "TR-02", outcomes) == Status::NotRun);

  const auto r = roll_up(reqs, m, tree, outcomes);
  REQUIRE(r.roots.size() == 2);
  CHECK(r.roots[0].requirement == "HR-1");
  CHECK(r.roots[0].units == std::vector<std::pair<std::string, Status>>{{"B-01", Status::Fail}});
  REQUIRE(r.roots[0].children.size() == 1);
  CHECK(r.roots[0].children[0].units ==
        std::vector<std::pair<std::string, Status>>{{"TR-01", Status::Fail}});
  CHECK(r.roots[0].children[0].children[0].units ==
        std::vector<std::pair<std::string, Status>>{{"TC-001", Status::Pass}});
  CHECK(render_rollup_text(r) == render_rollup_text(roll_up(reqs, m, tree, outcomes)));
}

TEST_CASE("reports are deterministic") {
  const auto reqs = read_requirements_file(test::suite_dir() / "requirements.txt");
  const auto tree = read_suite_file(test::suite_dir() / "suite.json");
  const auto m = build_matrix(reqs, tree, read_links_file(test::suite_dir() / "links.txt"));
  const auto c = coverage(reqs, m, Level::Detail, tree);
  CHECK(render_coverage_text(c) == render_coverage_text(coverage(reqs, m, Level::Detail, tree)));
  CHECK(render_coverage_records(c) ==
        render_coverage_records(coverage(reqs, m, Level::Detail, tree)));
  CHECK(render_matrix_text(m.at(Level::Detail), reqs) ==
        render_matrix_text(m.at(Level::Detail), reqs));
}

}  // TEST_SUITE
