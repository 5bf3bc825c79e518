#pragma once

// Line-oriented register protocol over one engine.
//
//   READ pt | WRITE pt bit | STEP n | RUN ms | SNAPSHOT | FAULT A|B code |
//   RESETF | RESET | SUB pt[,pt...] | MODE stepped|realtime
//
// Every command gets exactly one `OK [payload]` or `ERR code "msg"` line
// (SNAPSHOT adds `POINT value` lines and a closing `.`). Scans caused by a
// command emit `EVT time point value` lines to subscribers, before the
// command's own response.

#include "artts/engine.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace artts {

enum class BusMode { Stepped, Realtime };
std::string_view to_string(BusMode mode);

inline constexpr std::size_t kMaxLineBytes = 1024;
inline constexpr std::int64_t kMaxScansPerCommand = 1'000'000;

class BusCore {
 public:
  using ClientId = std::uint64_t;

  struct Output {
    ClientId client;
    std::string line;  // without LF
  };

  struct LogEntry {
    ClientId client;
    std::string line;
    bool operator==(const LogEntry&) const = default;
  };

  explicit BusCore(Engine engine, BusMode mode = BusMode::Stepped);

  ClientId connect();
  void disconnect(ClientId client);

  // Applies one command line (LF already stripped) from `client`.
  std::vector<Output> handle(ClientId client, std::string_view line);
  // One free-running scan (realtime pacing); returns the events it caused.
  std::vector<Output> tick();

  Engine& engine() { return engine_; }
  const Engine& engine() const { return engine_; }
  BusMode mode() const { return mode_; }
  const std::set<int>& subscriptions(ClientId client) const;

  // Every applied command in application order, for replay checks.
  void enable_log(bool on) { log_enabled_ = on; }
  const std::vector<LogEntry>& log() const { return log_; }

 private:
  void scan(std::vector<Output>& out);
  void emit_changes(const std::vector<std::uint8_t>& before, std::vector<Output>& out);

  Engine engine_;
  BusMode mode_;
  ClientId next_client_ = 1;
  std::map<ClientId, std::set<int>> subs_;  // point indices
  bool log_enabled_ = false;
  std::vector<LogEntry> log_;
};

// `ERR code "msg"` with `"` and `\` escaped.
std::string bus_error(std::string_view code, std::string_view msg);

}  // namespace artts
