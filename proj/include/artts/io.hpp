#pragma once

#include "artts/expr.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace artts {

enum class Direction { Input, Output };
enum class Chain { A, B };
enum class Affinity { A, B, Both };

struct IoPoint {
  PointName name;
  Direction direction = Direction::Input;
  Affinity chain = Affinity::Both;
  int initial = 0;
  // Combined (chain Both) outputs: the chain A and chain B points they vote on.
  std::vector<PointName> sources;

  bool operator==(const IoPoint&) const = default;
};

enum class FaultCode : std::uint8_t {
  NoFault,
  Discrepancy,
  Watchdog,
  EstopLatch,
  SearchTimeout,
  ProgramHalt,
};

inline constexpr FaultCode kAllFaultCodes[] = {
    FaultCode::NoFault,    FaultCode::Discrepancy,   FaultCode::Watchdog,
    FaultCode::EstopLatch, FaultCode::SearchTimeout, FaultCode::ProgramHalt,
};

std::string_view to_string(FaultCode code);
std::optional<FaultCode> parse_fault_code(std::string_view text);

std::string_view to_string(Chain chain);
std::optional<Chain> parse_chain(std::string_view text);
std::string_view to_string(Affinity affinity);
std::optional<Affinity> parse_affinity(std::string_view text);

}  // namespace artts
