#pragma once

// Chain program languages.
//
// Chain B (`.rung`): relay-ladder rungs evaluated top to bottom every scan.
//
//   input DOOR_CLOSED_1
//   timer SEARCH_TMR 30000ms := SEARCHING
//   rung SEARCHING := (READY AND SEARCH_BTN_1) OR (SEARCHING AND NOT SEARCH_TMR.DN)
//
// Chain A (`.state`): independent tasks, each a Moore machine with guarded
// and timed transitions.
//
//   input SEARCH_BTN_1
//   task ACCESS
//     state IDLE initial
//       when SEARCH_BTN_1 goto SEARCH_1
//     state SEARCH_1
//       emit SEARCH_LED_A 1
//       timeout 30s goto EXPIRED
//
// Full grammar: docs/chain-dsl.md.

#include "artts/diagnostic.hpp"
#include "artts/expr.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace artts {

struct IoPoint;

// Source line of a program element. Kept for diagnostics only, so it never
// takes part in structural comparison.
struct SourceLine {
  int value = 0;
  bool operator==(const SourceLine&) const { return true; }
};

struct TimerDecl {
  std::string name;
  std::int64_t preset_ms = 0;
  Expr enable;
  SourceLine line;
  bool operator==(const TimerDecl&) const = default;
};

struct Rung {
  PointName coil;
  Expr expr;
  SourceLine line;
  bool operator==(const Rung&) const = default;
};

struct RungProgram {
  std::vector<Rung> rungs;            // declaration order is evaluation order
  std::vector<TimerDecl> timers;
  std::vector<PointName> declared_inputs;
  std::vector<PointName> declared_coils;  // one per rung, rung order

  const Rung* find_rung(std::string_view coil) const;
  const TimerDecl* find_timer(std::string_view name) const;
  bool operator==(const RungProgram&) const = default;
};

struct Transition {
  enum class Kind { Guard, Timeout };
  Kind kind = Kind::Guard;
  Expr guard;                 // Guard
  std::int64_t timeout_ms = 0;  // Timeout
  std::string target;
  SourceLine line;
  bool operator==(const Transition&) const = default;
};

struct Emission {
  PointName point;
  int value = 0;
  bool operator==(const Emission&) const = default;
};

struct State {
  std::string name;
  std::vector<Emission> emissions;
  std::vector<Transition> transitions;  // first true transition fires
  SourceLine line;
  bool operator==(const State&) const = default;
};

struct StateTask {
  std::string name;
  std::vector<State> states;
  std::string initial_state;
  SourceLine line;

  int state_index(std::string_view state) const;  // -1 if absent
  // Every point emitted by any state of this task, first-emission order.
  std::vector<PointName> emitted_points() const;
  bool operator==(const StateTask&) const = default;
};

struct StateProgram {
  std::vector<StateTask> tasks;
  std::vector<PointName> declared_inputs;
  std::vector<PointName> emitted_points;  // across tasks, first-emission order

  bool operator==(const StateProgram&) const = default;
};

Parsed<RungProgram> parse_rung_program(std::string_view text);
Parsed<StateProgram> parse_state_program(std::string_view text);

// Canonical source text. Reparsing yields a structurally equal program.
std::string print_program(const RungProgram& program);
std::string print_program(const StateProgram& program);

// Warnings only: map points the program never reads or writes, coils nobody
// references, states unreachable from the initial state. `mapped` names extra
// signals consumed outside the program (fault triggers and the like).
DiagnosticList lint_program(const RungProgram& program, std::span<const IoPoint> points,
                            std::span<const std::string> mapped = {});
DiagnosticList lint_program(const StateProgram& program, std::span<const IoPoint> points,
                            std::span<const std::string> mapped = {});

}  // namespace artts
