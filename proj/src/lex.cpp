#include "lex.hpp"

#include <cctype>
#include <charconv>
#include <limits>

namespace artts::lex {

namespace {

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
         c == '-';
}

}  // namespace

LexResult tokenize(std::string_view source) {
  LexResult out;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= source.size()) {
    std::size_t eol = source.find('\n', pos);
    if (eol == std::string_view::npos) eol = source.size();
    std::string_view text = source.substr(pos, eol - pos);
    ++number;
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);

    Line line;
    line.number = number;
    std::size_t i = 0;
    while (i < text.size()) {
      char c = text[i];
      if (c == '#') break;
      if (c == ' ' || c == '\t') {
        ++i;
        continue;
      }
      if (c == '"') {
        std::string value;
        ++i;
        bool closed = false;
        while (i < text.size()) {
          if (text[i] == '\\' && i + 1 < text.size() &&
              (text[i + 1] == '"' || text[i + 1] == '\\')) {
            value.push_back(text[i + 1]);
            i += 2;
          } else if (text[i] == '"') {
            closed = true;
            ++i;
            break;
          } else {
            value.push_back(text[i++]);
          }
        }
        if (!closed) {
          out.error = {number, "unterminated string"};
          out.total_lines = number;
          return out;
        }
        line.tokens.push_back({Kind::String, std::move(value)});
        continue;
      }
      if (c == ':' && i + 1 < text.size() && text[i + 1] == '=') {
        line.tokens.push_back({Kind::Symbol, ":="});
        i += 2;
        continue;
      }
      if (c == '=' && i + 1 < text.size() && text[i + 1] == '=') {
        line.tokens.push_back({Kind::Symbol, "=="});
        i += 2;
        continue;
      }
      if (c == '=' || c == '(' || c == ')' || c == ',') {
        line.tokens.push_back({Kind::Symbol, std::string(1, c)});
        ++i;
        continue;
      }
      if (is_word_char(c)) {
        std::size_t start = i;
        while (i < text.size() && is_word_char(text[i])) ++i;
        line.tokens.push_back({Kind::Word, std::string(text.substr(start, i - start))});
        continue;
      }
      out.error = {number, "unexpected character '" + std::string(1, c) + "'"};
      out.total_lines = number;
      return out;
    }
    if (!line.tokens.empty()) out.lines.push_back(std::move(line));
    if (eol == source.size()) break;
    pos = eol + 1;
  }
  // A trailing newline does not start another line.
  out.total_lines = (!source.empty() && source.back() == '\n') ? number - 1 : number;
  if (out.total_lines < 1) out.total_lines = 1;
  return out;
}

std::optional<std::int64_t> parse_duration_ms(std::string_view word) {
  std::int64_t scale = 0;
  if (word.size() > 2 && word.substr(word.size() - 2) == "ms") {
    scale = 1;
    word.remove_suffix(2);
  } else if (word.size() > 1 && word.back() == 's') {
    scale = 1000;
    word.remove_suffix(1);
  } else {
    return std::nullopt;
  }
  bool negative = false;
  if (!word.empty() && word.front() == '-') {
    negative = true;
    word.remove_prefix(1);
  }
  if (word.empty()) return std::nullopt;
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), value);
  if (ec != std::errc{} || ptr != word.data() + word.size()) return std::nullopt;
  if (value > std::numeric_limits<std::int64_t>::max() / scale) return std::nullopt;
  value *= scale;
  return negative ? -value : value;
}

bool is_keyword_like(std::string_view word) {
  if (word.empty()) return false;
  for (char c : word)
    if (!(std::islower(static_cast<unsigned char>(c)) || c == '-')) return false;
  return true;
}

}  // namespace artts::lex
