#include "artts/fsio.hpp"

#include <fstream>
#include <sstream>

namespace artts {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

void put(const std::filesystem::path& path, std::string_view text, std::ios::openmode mode) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | mode);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

void write_text(const std::filesystem::path& path, std::string_view text) {
  put(path, text, std::ios::trunc);
}

void append_text(const std::filesystem::path& path, std::string_view text) {
  put(path, text, std::ios::app);
}

}  // namespace artts
