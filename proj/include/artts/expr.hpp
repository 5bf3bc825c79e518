#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace artts {

// Point names: uppercase letters, digits and underscore, 1 to 64 chars.
// Comparison is case-sensitive.
using PointName = std::string;

bool is_point_name(std::string_view name);
bool is_reserved_word(std::string_view name);  // AND, OR, NOT

// Boolean expression over named signals. `TimerDone` refers to `NAME.DN`.
struct Expr {
  enum class Kind { Ref, TimerDone, Not, And, Or };

  Kind kind = Kind::Ref;
  std::string name;             // Ref, TimerDone
  std::vector<Expr> children;   // Not (1), And/Or (>= 2)

  static Expr ref(std::string n) { return {Kind::Ref, std::move(n), {}}; }
  static Expr timer_done(std::string n) { return {Kind::TimerDone, std::move(n), {}}; }
  static Expr negate(Expr e) { return {Kind::Not, {}, {std::move(e)}}; }
  static Expr all(std::vector<Expr> c) { return {Kind::And, {}, std::move(c)}; }
  static Expr any(std::vector<Expr> c) { return {Kind::Or, {}, std::move(c)}; }

  bool operator==(const Expr&) const = default;
};

// Canonical text form; parsing the result yields an equal tree.
std::string to_string(const Expr& e);

// Calls `visit` for every Ref / TimerDone leaf.
void for_each_leaf(const Expr& e, const std::function<void(const Expr&)>& visit);

// Direct recursive evaluation. Used by oracles and tools; the engine runs
// its own compiled form.
bool evaluate(const Expr& e, const std::function<bool(const Expr& leaf)>& lookup);

}  // namespace artts
