#pragma once

// Line tokenizer shared by the chain-program and test-script parsers.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace artts::lex {

enum class Kind { Word, String, Symbol };

struct Token {
  Kind kind = Kind::Word;
  std::string text;
};

struct Line {
  int number = 0;
  std::vector<Token> tokens;
};

// Splits source into non-empty logical lines. Strips `#` comments and a
// trailing CR. Words are runs of [A-Za-z0-9_.-]; symbols are `:=`, `==`,
// `=`, `(`, `)`, `,`; strings are double-quoted with `\"` and `\\` escapes.
// Returns the error message and line on the first unlexable character.
struct LexResult {
  std::vector<Line> lines;
  std::optional<std::pair<int, std::string>> error;
  int total_lines = 0;
};

LexResult tokenize(std::string_view source);

// `30000ms`, `30s`; nullopt if malformed. Zero is returned as 0 so that the
// caller can report "must be positive" rather than a syntax error.
std::optional<std::int64_t> parse_duration_ms(std::string_view word);

bool is_keyword_like(std::string_view word);

}  // namespace artts::lex
