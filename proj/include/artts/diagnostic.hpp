#pragma once

#include <string>
#include <variant>
#include <vector>

namespace artts {

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  int line = 1;
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

using DiagnosticList = std::vector<Diagnostic>;

// Either a parsed value or the errors that prevented it.
template <typename T>
using Parsed = std::variant<T, DiagnosticList>;

inline bool has_errors(const DiagnosticList& diags) {
  for (const auto& d : diags)
    if (d.severity == Severity::Error) return true;
  return false;
}

// "line 3: error: expected expression"
std::string format_diagnostic(const Diagnostic& d);

}  // namespace artts
