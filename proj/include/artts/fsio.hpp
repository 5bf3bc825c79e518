#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace artts {

// File system failures (missing files, unwritable directories).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);
void append_text(const std::filesystem::path& path, std::string_view text);

}  // namespace artts
