#pragma once

// Shared helpers for the test binaries.

#include "artts/engine.hpp"
#include "artts/fsio.hpp"
#include "artts/station.hpp"

#include <array>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <sys/wait.h>

namespace test {

inline std::filesystem::path source_dir() { return ARTTS_SOURCE_DIR; }
inline std::filesystem::path station_dir() { return source_dir() / "stations" / "station-a"; }
inline std::filesystem::path suite_dir() { return source_dir() / "suite"; }
inline std::filesystem::path golden_dir() { return source_dir() / "tests" / "golden"; }

inline artts::Engine reference_engine() {
  return artts::Engine::load(artts::build_reference_station());
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  auto dir = std::filesystem::temp_directory_path() /
             ("artts-" + tag + "-" + std::to_string(rng() % 1000000000));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout only
};

inline CommandResult run_command(const std::string& cmd) {
  CommandResult r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  int status = ::pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

// Sets each door contact and operator input, then scans until the access
// task reaches `state` (at most `max_scans`).
inline bool scan_until_state(artts::Engine& e, const std::string& state, int max_scans = 10) {
  for (int i = 0; i < max_scans; ++i) {
    if (e.task_state("ACCESS") == state) return true;
    e.step();
  }
  return e.task_state("ACCESS") == state;
}

// Reference secure sequence ending with BEAM_REQ asserted.
inline void drive_to_beam(artts::Engine& e) {
  e.write_point("DOOR_CLOSED_1", 1);
  e.write_point("DOOR_CLOSED_2", 1);
  e.step();
  e.write_point("SEARCH_BTN_1", 1);
  e.step();
  e.write_point("SEARCH_BTN_1", 0);
  e.write_point("SEARCH_BTN_2", 1);
  e.step();
  e.write_point("SEARCH_BTN_2", 0);
  e.write_point("SECURE_KEY", 1);
  e.step();
  e.write_point("SECURE_KEY", 0);
  e.write_point("BEAM_REQ", 1);
  e.step();
}

}  // namespace test
