#include "artts/io.hpp"

#include "artts/diagnostic.hpp"

namespace artts {

std::string_view to_string(FaultCode code) {
  switch (code) {
    case FaultCode::NoFault: return "NoFault";
    case FaultCode::Discrepancy: return "DISCREPANCY";
    case FaultCode::Watchdog: return "WATCHDOG";
    case FaultCode::EstopLatch: return "ESTOP_LATCH";
    case FaultCode::SearchTimeout: return "SEARCH_TIMEOUT";
    case FaultCode::ProgramHalt: return "PROGRAM_HALT";
  }
  return "NoFault";
}

std::optional<FaultCode> parse_fault_code(std::string_view text) {
  for (FaultCode c : kAllFaultCodes)
    if (to_string(c) == text) return c;
  return std::nullopt;
}

std::string_view to_string(Chain chain) { return chain == Chain::A ? "A" : "B"; }

std::optional<Chain> parse_chain(std::string_view text) {
  if (text == "A") return Chain::A;
  if (text == "B") return Chain::B;
  return std::nullopt;
}

std::string_view to_string(Affinity affinity) {
  switch (affinity) {
    case Affinity::A: return "A";
    case Affinity::B: return "B";
    case Affinity::Both: return "Both";
  }
  return "Both";
}

std::optional<Affinity> parse_affinity(std::string_view text) {
  if (text == "A") return Affinity::A;
  if (text == "B") return Affinity::B;
  if (text == "Both") return Affinity::Both;
  return std::nullopt;
}

std::string format_diagnostic(const Diagnostic& d) {
  return "line " + std::to_string(d.line) + ": " +
         (d.severity == Severity::Error ? "error: " : "warning: ") + d.message;
}

}  // namespace artts
