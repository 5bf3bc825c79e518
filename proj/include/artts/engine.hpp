#pragma once

// Dual-chain scan-cycle interpreter.
//
// One scan, in this fixed order:
//   1. latch the pending input image (an asserted fault-reset input performs
//      an operator fault reset here)
//   2. chain B: advance timers, then evaluate rungs top to bottom; a coil read
//      before its own rung holds last scan's value
//   3. chain A: per task, fire at most one transition, then apply the active
//      state's emissions
//   4. fault detection: redundant-pair discrepancy, fault inputs, program
//      fault signals
//   5. commit chain outputs (forced to 0 on a faulted chain), fault LEDs and
//      the combined outputs
//   6. advance simulated time by one scan period
//
// A faulted chain is halted: its program does not run until the fault is
// reset. Time is simulated only.

#include "artts/io.hpp"
#include "artts/station.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace artts {

struct FaultRegister {
  Chain chain = Chain::A;
  FaultCode code = FaultCode::NoFault;
  std::optional<std::int64_t> latched_at_ms;  // present iff code != NoFault

  bool operator==(const FaultRegister&) const = default;
};

struct ScanRecord {
  std::uint64_t seq = 0;
  std::int64_t time_ms = 0;
  std::vector<std::uint8_t> inputs;   // input points, declaration order
  std::vector<std::uint8_t> outputs;  // output points, declaration order
  FaultRegister fault_a{Chain::A, FaultCode::NoFault, std::nullopt};
  FaultRegister fault_b{Chain::B, FaultCode::NoFault, std::nullopt};
  std::vector<std::pair<std::string, std::string>> active_states;  // task -> state

  bool operator==(const ScanRecord&) const = default;
};

// Canonical one-line form:
//   seq TAB time_ms TAB inputs_hex TAB outputs_hex TAB faultA TAB faultB [TAB TASK=STATE]...
// Bit i of a hex field is the i-th point of that direction in declaration
// order (bit 0 = least significant bit of the last hex digit).
std::string serialize(const ScanRecord& record);

enum class EngineErrc { UnknownPoint, NotInput, BadValue, BadDuration, Load };

class EngineError : public std::runtime_error {
 public:
  EngineError(EngineErrc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  EngineErrc code() const { return code_; }

 private:
  EngineErrc code_;
};

struct EngineOptions {
  std::optional<std::int64_t> scan_period_ms;  // default: station value
  std::optional<int> discrepancy_window_scans;
  std::uint64_t rng_seed = 0;  // reserved for fault-injection schedules
};

// Truth table of one combined output.
int combine(int permit_a, int permit_b, FaultCode fault_a, FaultCode fault_b);

class Engine {
 public:
  // Complete dynamic state. Two engines over the same station with equal
  // states behave identically from here on.
  struct State {
    std::vector<std::uint8_t> pending;  // environment writes, per point
    std::vector<std::uint8_t> image;    // committed image, per point
    std::vector<std::uint8_t> coils;    // chain B coil table
    std::vector<std::int64_t> timer_acc;
    std::vector<std::uint16_t> task_state;  // chain A, per task
    std::vector<std::int64_t> task_elapsed;
    std::vector<std::uint8_t> emitted;  // chain A emitted signals
    std::vector<std::uint16_t> disagree_scans;  // per redundant pair
    std::array<FaultRegister, 2> faults{
        {{Chain::A, FaultCode::NoFault, std::nullopt}, {Chain::B, FaultCode::NoFault, std::nullopt}}};
    std::uint64_t seq = 0;
    std::int64_t time_ms = 0;

    bool operator==(const State&) const = default;
  };

  // Throws EngineError(Load) on parse errors, point-map mismatch or timer
  // presets that are not a multiple of the scan period.
  static Engine load(const StationModel& station, const EngineOptions& options = {});

  ScanRecord step();
  void step_quiet();  // same scan without building a record
  std::vector<ScanRecord> run_for(std::int64_t duration_ms);

  void write_point(std::string_view point, int value);
  // Sets every input at once; bit i = i-th input point in declaration order.
  void write_inputs(std::uint64_t bits);
  int read_point(std::string_view point) const;
  void inject_fault(Chain chain, FaultCode code);
  void reset_faults();
  void reset();

  std::vector<std::pair<PointName, int>> combined_permit() const;
  std::vector<std::pair<std::string, std::string>> task_states() const;
  std::optional<std::string> task_state(std::string_view task) const;
  bool has_state(std::string_view task, std::string_view state) const;
  const FaultRegister& fault(Chain chain) const;
  ScanRecord current_record() const;  // the most recent boundary as a record

  std::int64_t time_ms() const { return s_.time_ms; }
  std::uint64_t seq() const { return s_.seq; }
  std::int64_t scan_period_ms() const;
  int discrepancy_window_scans() const;
  std::uint64_t rng_seed() const;
  const StationModel& station() const;
  const std::vector<IoPoint>& points() const;
  int point_index(std::string_view point) const;  // -1 if unknown

  // Raw access for the explorer and other whole-state tools.
  const State& state() const { return s_; }
  void restore(const State& state);
  std::size_t timer_count() const;
  std::int64_t timer_preset(std::size_t timer) const;
  const std::string& timer_name(std::size_t timer) const;
  const std::string& task_name(std::size_t task) const;
  const std::string& state_name(std::size_t task, std::size_t state) const;
  const std::vector<int>& input_indices() const;  // point indices of inputs
  std::size_t task_count() const;
  // Ascending distinct timeout thresholds of a state's transitions.
  const std::vector<std::int64_t>& state_timeouts(std::size_t task, std::size_t state) const;
  bool coil_value(std::string_view coil) const;

  struct Compiled;

 private:
  Engine() = default;

  void scan();
  void run_chain_b();
  void run_chain_a();
  void detect_faults(std::int64_t at_ms);
  void commit_outputs();
  void latch(Chain chain, FaultCode code, std::int64_t at_ms);
  bool condition_present(FaultCode code) const;
  void reinit_chains();

  std::shared_ptr<const Compiled> c_;
  State s_;
  std::vector<std::uint8_t> stack_;  // evaluation scratch
};

}  // namespace artts
