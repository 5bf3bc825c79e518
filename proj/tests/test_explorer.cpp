#include "artts/explorer.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace artts;

namespace {

StationModel sabotaged_station() {
  auto st = build_reference_station();
  const std::string cut = "DOOR_CLOSED_1 AND ";
  const auto rung = st.chain_b_source.find("rung SHUTTER_PERMIT_B");
  const auto pos = st.chain_b_source.find(cut, rung);
  REQUIRE(pos != std::string::npos);
  st.chain_b_source.erase(pos, cut.size());
  return st;
}

// Replays a trace without timer expiries on a real engine.
Engine replay(const StationModel& st, const std::vector<TraceStep>& trace) {
  auto e = Engine::load(st);
  for (const auto& s : trace) {
    if (s.action == "inject A WATCHDOG") e.inject_fault(Chain::A, FaultCode::Watchdog);
    if (s.action == "inject B WATCHDOG") e.inject_fault(Chain::B, FaultCode::Watchdog);
    if (s.action == "reset faults") e.reset_faults();
    e.write_inputs(s.inputs);
    e.step();
  }
  return e;
}

bool rule_holds(const Engine& e, const SafetyRule& rule) {
  if (!e.read_point(rule.permit)) return true;
  for (const auto& p : rule.required_high)
    if (!e.read_point(p)) return false;
  for (auto c : rule.fault_free)
    if (e.fault(c).code != FaultCode::NoFault) return false;
  return true;
}

}  // namespace

TEST_SUITE("explorer") {

TEST_CASE("reference station: no violations and the goal is reachable") {
  const auto report = explore_reachable(build_reference_station());
  CHECK(report.complete);
  CHECK(report.violation_count == 0);
  CHECK(report.reachable == 15327);
  CHECK(report.transitions == 20128768);
  REQUIRE(report.goal_reachable);
  // The goal witness needs no timer expiries, so it replays on a plain engine.
  auto e = replay(build_reference_station(), report.goal_trace);
  CHECK(e.read_point("SECURED_LED") == 1);
}

TEST_CASE("sabotaged chain B is caught with a replayable counterexample") {
  const auto st = sabotaged_station();
  ExploreOptions opts;
  opts.max_traces = 50;
  const auto report = explore_reachable(st, opts);
  CHECK(report.complete);
  REQUIRE(report.violation_count >= 1);
  REQUIRE(!report.violations.empty());
  int replayed = 0;
  for (const auto& v : report.violations) {
    CHECK(!v.trace.empty());
    bool plain = true;
    for (const auto& s : v.trace) plain &= s.expiries.empty();
    if (!plain) continue;
    const auto rules = reference_safety_rules();
    const auto rule = std::find_if(rules.begin(), rules.end(),
                                   [&](const SafetyRule& r) { return r.name == v.rule; });
    REQUIRE(rule != rules.end());
    auto e = replay(st, v.trace);
    CHECK(serialize(e.current_record()) == serialize(v.at));
    CHECK(!rule_holds(e, *rule));
    ++replayed;
  }
  CHECK(replayed > 0);
  CHECK(!format_trace(report.violations.front().trace, st).empty());
}

TEST_CASE("empty alphabet without environment actions has one state") {
  ExploreOptions opts;
  opts.alphabet = std::vector<std::uint32_t>{};
  opts.inject_faults = false;
  opts.operator_resets = false;
  const auto report = explore_reachable(build_reference_station(), opts);
  CHECK(report.reachable == 1);
  CHECK(report.transitions == 0);
  CHECK(report.complete);
  CHECK(!report.goal_reachable);
}

TEST_CASE("state cap marks the exploration incomplete") {
  ExploreOptions opts;
  opts.state_cap = 100;
  const auto report = explore_reachable(build_reference_station(), opts);
  CHECK(!report.complete);
  CHECK(report.reachable <= 100);
}

TEST_CASE("restricted alphabet explores a subset") {
  ExploreOptions opts;
  opts.alphabet = std::vector<std::uint32_t>{0x0, 0x3, 0x13, 0x23, 0x43, 0xC3};
  const auto report = explore_reachable(build_reference_station(), opts);
  CHECK(report.complete);
  CHECK(report.violation_count == 0);
  CHECK(report.reachable > 1);
  CHECK(report.reachable < 15327);
  CHECK(report.goal_reachable);
}

}  // TEST_SUITE
