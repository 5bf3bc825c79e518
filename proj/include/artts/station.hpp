#pragma once

#include "artts/chain_dsl.hpp"
#include "artts/diagnostic.hpp"
#include "artts/io.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace artts {

enum class PanelKind { UserPanel, DoorPanel, SystemController };
enum class WidgetKind { Switch, MomentaryButton, KeySwitch, Led, Beacon };

struct Widget {
  WidgetKind kind = WidgetKind::Led;
  PointName point;
  std::string label;
  bool operator==(const Widget&) const = default;
};

struct PanelSpec {
  PanelKind panel = PanelKind::UserPanel;
  std::string title;
  std::vector<Widget> widgets;
  bool operator==(const PanelSpec&) const = default;
};

// Environment input that latches `code` on both chains while asserted.
struct FaultInput {
  PointName point;
  FaultCode code = FaultCode::EstopLatch;
  bool operator==(const FaultInput&) const = default;
};

// Program signal (chain B coil or chain A emitted point) that latches `code`
// on its own chain when it reads 1 at the end of a scan.
struct FaultSignal {
  Chain chain = Chain::A;
  PointName signal;
  FaultCode code = FaultCode::SearchTimeout;
  bool operator==(const FaultSignal&) const = default;
};

struct StationModel {
  std::string name;
  std::int64_t scan_period_ms = 10;
  int discrepancy_window_scans = 5;
  std::vector<IoPoint> points;  // declaration order = image bit order
  std::vector<std::pair<PointName, PointName>> redundant_pairs;
  std::string chain_a_source;  // state program
  std::string chain_b_source;  // rung program
  std::vector<PanelSpec> panels;

  // Outputs driven by the engine from the fault registers, not by programs.
  std::optional<PointName> fault_led_a;
  std::optional<PointName> fault_led_b;
  std::vector<FaultInput> fault_inputs;
  std::vector<FaultSignal> fault_signals;
  // Input that performs an operator fault reset while any fault is latched.
  std::optional<PointName> fault_reset_input;

  const IoPoint* find_point(std::string_view point) const;
  bool operator==(const StationModel&) const = default;
};

class StationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The shipped Station A (also on disk under stations/station-a).
StationModel build_reference_station();

// Reads station.json, chain_a.state and chain_b.rung from `dir`.
StationModel load_station(const std::filesystem::path& dir);
void save_station(const StationModel& station, const std::filesystem::path& dir);

std::string station_json(const StationModel& station);
StationModel parse_station_json(std::string_view json_text, std::string chain_a_source,
                                std::string chain_b_source);

// Structural invariants of the station description itself (errors only).
DiagnosticList validate_station(const StationModel& station);

// Points each chain program is expected to touch: inputs of that chain (or
// Both) and that chain's outputs, minus the engine-driven fault LED.
std::vector<IoPoint> chain_point_map(const StationModel& station, Chain chain);

struct StationLint {
  DiagnosticList station;  // validate_station
  DiagnosticList chain_a;  // parse errors or lint warnings
  DiagnosticList chain_b;

  bool has_errors() const;
  bool clean() const;  // no diagnostics at all
};

StationLint lint_station(const StationModel& station);

std::string_view to_string(PanelKind kind);
std::string_view to_string(WidgetKind kind);

}  // namespace artts
