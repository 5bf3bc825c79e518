#pragma once

#include "artts/expr.hpp"
#include "lex.hpp"

#include <optional>
#include <span>
#include <string>

namespace artts::detail {

struct ExprParse {
  std::optional<Expr> expr;
  std::string error;       // set when expr is empty
  std::size_t consumed = 0;
};

// Parses `tokens` as OR-of-AND-of-unary. Stops at the first token that cannot
// continue the expression; the caller decides whether leftovers are an error.
ExprParse parse_expr(std::span<const lex::Token> tokens);

}  // namespace artts::detail
