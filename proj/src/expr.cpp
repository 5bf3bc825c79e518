#include "artts/expr.hpp"

#include "expr_parser.hpp"

namespace artts {

bool is_point_name(std::string_view name) {
  if (name.empty() || name.size() > 64) return false;
  for (char c : name)
    if (!((c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_')) return false;
  return true;
}

bool is_reserved_word(std::string_view name) {
  return name == "AND" || name == "OR" || name == "NOT";
}

namespace {

int precedence(Expr::Kind k) {
  switch (k) {
    case Expr::Kind::Or: return 1;
    case Expr::Kind::And: return 2;
    case Expr::Kind::Not: return 3;
    default: return 4;
  }
}

void print(const Expr& e, std::string& out) {
  switch (e.kind) {
    case Expr::Kind::Ref:
      out += e.name;
      return;
    case Expr::Kind::TimerDone:
      out += e.name;
      out += ".DN";
      return;
    case Expr::Kind::Not: {
      out += "NOT ";
      const Expr& c = e.children.front();
      bool parens = c.kind == Expr::Kind::And || c.kind == Expr::Kind::Or;
      if (parens) out += '(';
      print(c, out);
      if (parens) out += ')';
      return;
    }
    case Expr::Kind::And:
    case Expr::Kind::Or: {
      const char* op = e.kind == Expr::Kind::And ? " AND " : " OR ";
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        if (i) out += op;
        const Expr& c = e.children[i];
        // Equal precedence is parenthesized too so nesting survives a reparse.
        bool parens = precedence(c.kind) <= precedence(e.kind);
        if (parens) out += '(';
        print(c, out);
        if (parens) out += ')';
      }
      return;
    }
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

void for_each_leaf(const Expr& e, const std::function<void(const Expr&)>& visit) {
  if (e.kind == Expr::Kind::Ref || e.kind == Expr::Kind::TimerDone) {
    visit(e);
    return;
  }
  for (const auto& c : e.children) for_each_leaf(c, visit);
}

bool evaluate(const Expr& e, const std::function<bool(const Expr&)>& lookup) {
  switch (e.kind) {
    case Expr::Kind::Ref:
    case Expr::Kind::TimerDone:
      return lookup(e);
    case Expr::Kind::Not:
      return !evaluate(e.children.front(), lookup);
    case Expr::Kind::And:
      for (const auto& c : e.children)
        if (!evaluate(c, lookup)) return false;
      return true;
    case Expr::Kind::Or:
      for (const auto& c : e.children)
        if (evaluate(c, lookup)) return true;
      return false;
  }
  return false;
}

namespace detail {

namespace {

class Parser {
 public:
  explicit Parser(std::span<const lex::Token> t) : tokens_(t) {}

  std::optional<Expr> parse_or() {
    auto first = parse_and();
    if (!first) return std::nullopt;
    std::vector<Expr> terms{std::move(*first)};
    while (peek_word("OR")) {
      ++pos_;
      auto next = parse_and();
      if (!next) return std::nullopt;
      terms.push_back(std::move(*next));
    }
    if (terms.size() == 1) return std::move(terms.front());
    return Expr::any(std::move(terms));
  }

  std::string error;
  std::size_t pos_ = 0;

 private:
  std::optional<Expr> parse_and() {
    auto first = parse_unary();
    if (!first) return std::nullopt;
    std::vector<Expr> terms{std::move(*first)};
    while (peek_word("AND")) {
      ++pos_;
      auto next = parse_unary();
      if (!next) return std::nullopt;
      terms.push_back(std::move(*next));
    }
    if (terms.size() == 1) return std::move(terms.front());
    return Expr::all(std::move(terms));
  }

  std::optional<Expr> parse_unary() {
    if (peek_word("NOT")) {
      ++pos_;
      auto inner = parse_unary();
      if (!inner) return std::nullopt;
      return Expr::negate(std::move(*inner));
    }
    return parse_primary();
  }

  std::optional<Expr> parse_primary() {
    if (pos_ >= tokens_.size()) {
      error = "expected expression";
      return std::nullopt;
    }
    const auto& t = tokens_[pos_];
    if (t.kind == lex::Kind::Symbol && t.text == "(") {
      ++pos_;
      auto inner = parse_or();
      if (!inner) return std::nullopt;
      if (pos_ >= tokens_.size() || tokens_[pos_].text != ")" ||
          tokens_[pos_].kind != lex::Kind::Symbol) {
        error = "expected ')'";
        return std::nullopt;
      }
      ++pos_;
      return inner;
    }
    if (t.kind != lex::Kind::Word) {
      error = "expected expression";
      return std::nullopt;
    }
    std::string_view word = t.text;
    bool timer = false;
    if (word.size() > 3 && word.substr(word.size() - 3) == ".DN") {
      timer = true;
      word.remove_suffix(3);
    }
    if (is_reserved_word(word)) {
      error = "expected expression";
      return std::nullopt;
    }
    if (!is_point_name(word)) {
      error = "invalid name '" + t.text + "'";
      return std::nullopt;
    }
    ++pos_;
    return timer ? Expr::timer_done(std::string(word)) : Expr::ref(std::string(word));
  }

  bool peek_word(std::string_view w) const {
    return pos_ < tokens_.size() && tokens_[pos_].kind == lex::Kind::Word &&
           tokens_[pos_].text == w;
  }

  std::span<const lex::Token> tokens_;
};

}  // namespace

ExprParse parse_expr(std::span<const lex::Token> tokens) {
  Parser p(tokens);
  ExprParse out;
  out.expr = p.parse_or();
  out.consumed = p.pos_;
  if (!out.expr) out.error = p.error.empty() ? "expected expression" : p.error;
  return out;
}

}  // namespace detail

}  // namespace artts
