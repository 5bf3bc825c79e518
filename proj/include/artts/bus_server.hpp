#pragma once

// TCP server for the bus protocol plus a browser bridge.
//
// One thread runs a poll loop; every command from every connection is
// applied to the single BusCore in arrival order. The bridge port speaks
// WebSocket (one text message per protocol line in each direction) and
// answers plain HTTP GETs with static files from the HMI directory.

#include "artts/bus.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

namespace artts {

class BusServerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ServeOptions {
  std::string listen = "127.0.0.1:7502";
  std::optional<std::string> bridge = "127.0.0.1:7503";
  BusMode mode = BusMode::Stepped;
  std::optional<std::filesystem::path> hmi_dir;
  std::size_t max_output_bytes = 1 << 20;  // per connection
  bool log_commands = false;
};

// "host:port", ":port" or "port"; port 0 picks a free port.
std::pair<std::string, std::uint16_t> parse_endpoint(std::string_view text);

class BusServer {
 public:
  BusServer(Engine engine, ServeOptions options);
  ~BusServer();
  BusServer(const BusServer&) = delete;
  BusServer& operator=(const BusServer&) = delete;

  void start();  // binds both endpoints; throws BusServerError
  void run();    // serves until stop()
  void stop();   // async-signal-safe

  std::uint16_t tcp_port() const;
  std::uint16_t bridge_port() const;

  // Safe to use only while run() is not executing.
  BusCore& core();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Blocking line client, used by tools and tests.
class BusClient {
 public:
  BusClient(const std::string& host, std::uint16_t port);  // throws BusServerError
  ~BusClient();
  BusClient(BusClient&& other) noexcept;
  BusClient(const BusClient&) = delete;
  BusClient& operator=(const BusClient&) = delete;

  void send_raw(std::string_view bytes);
  void send_line(std::string_view line);
  // Next line without LF, or nullopt on timeout or close.
  std::optional<std::string> read_line(int timeout_ms = 5000);
  // Sends one command and returns every line up to and including its
  // response (EVT lines first; SNAPSHOT through the closing ".").
  std::vector<std::string> command(std::string_view line, int timeout_ms = 5000);
  void close();

 private:
  int fd_ = -1;
  std::string buf_;
};

}  // namespace artts
