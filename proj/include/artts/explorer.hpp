#pragma once

// Exhaustive breadth-first reachability over engine states.
//
// Each edge is one environment action, an optional set of timer expiries and
// one full input vector, followed by one scan. Timers and timeouts are
// abstracted: a running timer is either still running or expires on this
// scan, so every interleaving of expiries with inputs is covered.

#include "artts/engine.hpp"
#include "artts/station.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace artts {

// permit == 1 must imply every `required_high` point is 1 and every chain in
// `fault_free` holds NoFault.
struct SafetyRule {
  std::string name;
  PointName permit;
  std::vector<PointName> required_high;
  std::vector<Chain> fault_free;
};

// Rules for Station A: the combined shutter permit and each chain's own permit.
std::vector<SafetyRule> reference_safety_rules();

struct ExploreOptions {
  // Input vectors, bit i = i-th input point. Absent: all 2^n vectors.
  std::optional<std::vector<std::uint32_t>> alphabet;
  std::size_t state_cap = 1'000'000;
  std::vector<SafetyRule> rules = reference_safety_rules();
  bool inject_faults = true;    // WATCHDOG injection on either chain
  bool operator_resets = true;  // reset_faults between scans
  std::vector<PointName> goal = {"SECURED_LED"};  // all 1 at once
  std::size_t max_traces = 20;
};

struct TraceStep {
  std::string action;                // "none", "inject A WATCHDOG", "reset faults"
  std::vector<std::string> expiries;  // timers / task timeouts forced this scan
  std::uint32_t inputs = 0;
};

struct Violation {
  std::string rule;
  std::vector<TraceStep> trace;  // from reset
  ScanRecord at;                 // boundary where the rule failed
};

struct ReachabilityReport {
  std::size_t reachable = 0;
  std::size_t transitions = 0;
  bool complete = true;  // false: state cap hit, exploration incomplete
  std::size_t violation_count = 0;
  std::vector<Violation> violations;  // at most max_traces, in BFS order
  bool goal_reachable = false;
  std::vector<TraceStep> goal_trace;
};

ReachabilityReport explore_reachable(const StationModel& station,
                                     const ExploreOptions& options = {});

// One line per step: `<n> <action> inputs=<hex> [expire=<names>]`.
std::string format_trace(const std::vector<TraceStep>& trace, const StationModel& station);

}  // namespace artts
