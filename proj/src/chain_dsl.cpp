#include "artts/chain_dsl.hpp"

#include "expr_parser.hpp"
#include "lex.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace artts {

const Rung* RungProgram::find_rung(std::string_view coil) const {
  for (const auto& r : rungs)
    if (r.coil == coil) return &r;
  return nullptr;
}

const TimerDecl* RungProgram::find_timer(std::string_view name) const {
  for (const auto& t : timers)
    if (t.name == name) return &t;
  return nullptr;
}

int StateTask::state_index(std::string_view state) const {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i].name == state) return static_cast<int>(i);
  return -1;
}

std::vector<PointName> StateTask::emitted_points() const {
  std::vector<PointName> out;
  for (const auto& s : states)
    for (const auto& e : s.emissions)
      if (std::find(out.begin(), out.end(), e.point) == out.end()) out.push_back(e.point);
  return out;
}

namespace {

using lex::Kind;
using lex::Token;

class DiagSink {
 public:
  void error(int line, std::string msg) {
    diags.push_back({Severity::Error, line, std::move(msg)});
  }
  DiagnosticList diags;
};

bool is_word(const std::vector<Token>& t, std::size_t i, std::string_view w = {}) {
  return i < t.size() && t[i].kind == Kind::Word && (w.empty() || t[i].text == w);
}

bool is_symbol(const std::vector<Token>& t, std::size_t i, std::string_view s) {
  return i < t.size() && t[i].kind == Kind::Symbol && t[i].text == s;
}

// Validates a declared name token; reports and returns false otherwise.
bool check_name(const std::vector<Token>& t, std::size_t i, int line, std::string_view what,
                DiagSink& sink) {
  if (i >= t.size()) {
    sink.error(line, "expected " + std::string(what) + " name");
    return false;
  }
  if (t[i].kind != Kind::Word || !is_point_name(t[i].text)) {
    sink.error(line, "invalid " + std::string(what) + " name '" + t[i].text + "'");
    return false;
  }
  if (is_reserved_word(t[i].text)) {
    sink.error(line, "'" + t[i].text + "' is a reserved word");
    return false;
  }
  return true;
}

// Parses tokens[from..] as a complete expression.
std::optional<Expr> parse_tail_expr(const std::vector<Token>& t, std::size_t from, int line,
                                    DiagSink& sink) {
  std::span<const Token> rest(t.data() + std::min(from, t.size()),
                              t.size() - std::min(from, t.size()));
  auto r = detail::parse_expr(rest);
  if (!r.expr) {
    sink.error(line, r.error);
    return std::nullopt;
  }
  if (r.consumed != rest.size()) {
    sink.error(line, "unexpected '" + rest[r.consumed].text + "' after expression");
    return std::nullopt;
  }
  return r.expr;
}

void check_trailing(const std::vector<Token>& t, std::size_t expected, int line,
                    DiagSink& sink) {
  if (t.size() > expected) sink.error(line, "unexpected '" + t[expected].text + "'");
}

}  // namespace

// ---------------------------------------------------------------------------
// Chain B

Parsed<RungProgram> parse_rung_program(std::string_view text) {
  DiagSink sink;
  auto lexed = lex::tokenize(text);
  if (lexed.error) {
    sink.error(lexed.error->first, lexed.error->second);
    return sink.diags;
  }

  RungProgram prog;
  std::map<std::string, int> input_lines;
  std::map<std::string, int> coil_decl_lines;  // explicit `coil` lines

  for (const auto& line : lexed.lines) {
    const auto& t = line.tokens;
    const int n = line.number;
    if (!is_word(t, 0)) {
      sink.error(n, "expected statement");
      continue;
    }
    const std::string& kw = t[0].text;
    if (kw == "input" || kw == "coil") {
      if (!check_name(t, 1, n, kw, sink)) continue;
      check_trailing(t, 2, n, sink);
      const std::string& name = t[1].text;
      auto& lines = kw == "input" ? input_lines : coil_decl_lines;
      if (lines.count(name)) {
        sink.error(n, "duplicate " + kw + " " + name);
        continue;
      }
      lines[name] = n;
      if (kw == "input") prog.declared_inputs.push_back(name);
    } else if (kw == "timer") {
      if (!check_name(t, 1, n, "timer", sink)) continue;
      if (!is_word(t, 2)) {
        sink.error(n, "expected timer preset");
        continue;
      }
      auto preset = lex::parse_duration_ms(t[2].text);
      if (!preset) {
        sink.error(n, "invalid timer preset '" + t[2].text + "'");
        continue;
      }
      if (*preset <= 0) {
        sink.error(n, "timer preset must be positive");
        continue;
      }
      if (!is_symbol(t, 3, ":=")) {
        sink.error(n, "expected ':=' after timer preset");
        continue;
      }
      auto expr = parse_tail_expr(t, 4, n, sink);
      if (!expr) continue;
      if (prog.find_timer(t[1].text)) {
        sink.error(n, "duplicate timer " + t[1].text);
        continue;
      }
      prog.timers.push_back({t[1].text, *preset, std::move(*expr), {n}});
    } else if (kw == "rung") {
      if (!check_name(t, 1, n, "coil", sink)) continue;
      if (!is_symbol(t, 2, ":=")) {
        sink.error(n, "expected ':=' after coil name");
        continue;
      }
      auto expr = parse_tail_expr(t, 3, n, sink);
      if (!expr) continue;
      if (prog.find_rung(t[1].text)) {
        sink.error(n, "duplicate coil " + t[1].text);
        continue;
      }
      prog.rungs.push_back({t[1].text, std::move(*expr), {n}});
      prog.declared_coils.push_back(t[1].text);
    } else {
      sink.error(n, "unknown statement '" + kw + "'");
    }
  }

  // Cross-reference checks.
  for (const auto& r : prog.rungs) {
    if (input_lines.count(r.coil))
      sink.error(r.line.value, "coil " + r.coil + " collides with input of the same name");
  }
  for (const auto& [name, line] : coil_decl_lines) {
    if (!prog.find_rung(name)) sink.error(line, "coil " + name + " has no rung");
    if (input_lines.count(name))
      sink.error(line, "coil " + name + " collides with input of the same name");
  }
  for (const auto& tm : prog.timers) {
    if (input_lines.count(tm.name) || prog.find_rung(tm.name))
      sink.error(tm.line.value, "timer " + tm.name + " collides with a point name");
  }
  auto check_refs = [&](const Expr& e, int line) {
    for_each_leaf(e, [&](const Expr& leaf) {
      if (leaf.kind == Expr::Kind::TimerDone) {
        if (!prog.find_timer(leaf.name)) sink.error(line, "undeclared timer " + leaf.name);
      } else if (!input_lines.count(leaf.name) && !prog.find_rung(leaf.name)) {
        sink.error(line, "undeclared point " + leaf.name);
      }
    });
  };
  for (const auto& tm : prog.timers) check_refs(tm.enable, tm.line.value);
  for (const auto& r : prog.rungs) check_refs(r.expr, r.line.value);

  if (!sink.diags.empty()) {
    std::stable_sort(sink.diags.begin(), sink.diags.end(),
                     [](const auto& a, const auto& b) { return a.line < b.line; });
    return sink.diags;
  }
  return prog;
}

// ---------------------------------------------------------------------------
// Chain A

Parsed<StateProgram> parse_state_program(std::string_view text) {
  DiagSink sink;
  auto lexed = lex::tokenize(text);
  if (lexed.error) {
    sink.error(lexed.error->first, lexed.error->second);
    return sink.diags;
  }

  StateProgram prog;
  std::set<std::string> inputs;
  StateTask* task = nullptr;
  State* state = nullptr;
  std::map<std::size_t, int> initial_count;  // by task index

  for (const auto& line : lexed.lines) {
    const auto& t = line.tokens;
    const int n = line.number;
    if (!is_word(t, 0)) {
      sink.error(n, "expected statement");
      continue;
    }
    const std::string& kw = t[0].text;
    if (kw == "input") {
      if (!check_name(t, 1, n, "input", sink)) continue;
      check_trailing(t, 2, n, sink);
      if (!inputs.insert(t[1].text).second) {
        sink.error(n, "duplicate input " + t[1].text);
        continue;
      }
      prog.declared_inputs.push_back(t[1].text);
    } else if (kw == "task") {
      if (!check_name(t, 1, n, "task", sink)) continue;
      check_trailing(t, 2, n, sink);
      bool dup = std::any_of(prog.tasks.begin(), prog.tasks.end(),
                             [&](const auto& tk) { return tk.name == t[1].text; });
      if (dup) sink.error(n, "duplicate task " + t[1].text);
      prog.tasks.push_back({t[1].text, {}, {}, {n}});
      task = &prog.tasks.back();
      state = nullptr;
    } else if (kw == "state") {
      if (!task) {
        sink.error(n, "state outside of a task");
        continue;
      }
      if (!check_name(t, 1, n, "state", sink)) continue;
      bool initial = false;
      if (is_word(t, 2, "initial")) {
        initial = true;
        check_trailing(t, 3, n, sink);
      } else {
        check_trailing(t, 2, n, sink);
      }
      if (task->state_index(t[1].text) >= 0) {
        sink.error(n, "duplicate state " + t[1].text + " in task " + task->name);
        continue;
      }
      task->states.push_back({t[1].text, {}, {}, {n}});
      state = &task->states.back();
      if (initial) {
        if (++initial_count[prog.tasks.size() - 1] > 1)
          sink.error(n, "task " + task->name + " has more than one initial state");
        else
          task->initial_state = t[1].text;
      }
    } else if (kw == "emit" || kw == "when" || kw == "timeout") {
      if (!state) {
        sink.error(n, "'" + kw + "' outside of a state");
        continue;
      }
      if (kw == "emit") {
        if (!check_name(t, 1, n, "point", sink)) continue;
        if (!is_word(t, 2) || (t[2].text != "0" && t[2].text != "1")) {
          sink.error(n, "emit value must be 0 or 1");
          continue;
        }
        check_trailing(t, 3, n, sink);
        const std::string& p = t[1].text;
        bool dup = std::any_of(state->emissions.begin(), state->emissions.end(),
                               [&](const auto& e) { return e.point == p; });
        if (dup) {
          sink.error(n, "point " + p + " emitted twice in state " + state->name);
          continue;
        }
        state->emissions.push_back({p, t[2].text == "1" ? 1 : 0});
      } else {
        // when EXPR goto NAME | timeout DURATION goto NAME
        std::size_t goto_at = t.size();
        for (std::size_t i = 1; i < t.size(); ++i)
          if (is_word(t, i, "goto")) goto_at = i;
        if (goto_at == t.size()) {
          sink.error(n, "expected 'goto'");
          continue;
        }
        if (!check_name(t, goto_at + 1, n, "state", sink)) continue;
        check_trailing(t, goto_at + 2, n, sink);
        Transition tr;
        tr.target = t[goto_at + 1].text;
        tr.line = {n};
        if (kw == "when") {
          std::vector<Token> guard(t.begin() + 1, t.begin() + static_cast<long>(goto_at));
          auto expr = parse_tail_expr(guard, 0, n, sink);
          if (!expr) continue;
          tr.kind = Transition::Kind::Guard;
          tr.guard = std::move(*expr);
        } else {
          if (goto_at != 2) {
            sink.error(n, "expected 'timeout <duration> goto <state>'");
            continue;
          }
          auto ms = lex::parse_duration_ms(t[1].text);
          if (!ms) {
            sink.error(n, "invalid duration '" + t[1].text + "'");
            continue;
          }
          if (*ms <= 0) {
            sink.error(n, "duration must be positive");
            continue;
          }
          tr.kind = Transition::Kind::Timeout;
          tr.timeout_ms = *ms;
        }
        state->transitions.push_back(std::move(tr));
      }
    } else {
      sink.error(n, "unknown statement '" + kw + "'");
    }
  }

  // Structural checks.
  std::map<std::string, std::string> emitter;  // point -> task
  for (const auto& tk : prog.tasks) {
    if (tk.states.empty()) {
      sink.error(tk.line.value, "task " + tk.name + " has no states");
      continue;
    }
    if (tk.initial_state.empty())
      sink.error(tk.line.value, "task " + tk.name + " has no initial state");
    for (const auto& st : tk.states) {
      for (const auto& tr : st.transitions) {
        if (tk.state_index(tr.target) < 0)
          sink.error(tr.line.value, "unknown state " + tr.target);
        if (tr.kind != Transition::Kind::Guard) continue;
        for_each_leaf(tr.guard, [&](const Expr& leaf) {
          if (leaf.kind == Expr::Kind::TimerDone)
            sink.error(tr.line.value, "undeclared timer " + leaf.name);
          else if (!inputs.count(leaf.name))
            sink.error(tr.line.value, "undeclared point " + leaf.name);
        });
      }
      for (const auto& em : st.emissions) {
        if (inputs.count(em.point))
          sink.error(st.line.value, "cannot emit input " + em.point);
      }
    }
    for (const auto& p : tk.emitted_points()) {
      auto [it, fresh] = emitter.emplace(p, tk.name);
      if (!fresh && it->second != tk.name)
        sink.error(tk.line.value, "point emitted by multiple tasks: " + p + " (" + it->second +
                                      ", " + tk.name + ")");
    }
  }

  if (!sink.diags.empty()) {
    std::stable_sort(sink.diags.begin(), sink.diags.end(),
                     [](const auto& a, const auto& b) { return a.line < b.line; });
    return sink.diags;
  }
  for (const auto& tk : prog.tasks)
    for (const auto& p : tk.emitted_points()) prog.emitted_points.push_back(p);
  return prog;
}

// ---------------------------------------------------------------------------
// Printing

std::string print_program(const RungProgram& program) {
  std::string out;
  for (const auto& in : program.declared_inputs) out += "input " + in + "\n";
  for (const auto& tm : program.timers)
    out += "timer " + tm.name + " " + std::to_string(tm.preset_ms) + "ms := " +
           to_string(tm.enable) + "\n";
  for (const auto& r : program.rungs) out += "rung " + r.coil + " := " + to_string(r.expr) + "\n";
  return out;
}

std::string print_program(const StateProgram& program) {
  std::string out;
  for (const auto& in : program.declared_inputs) out += "input " + in + "\n";
  for (const auto& tk : program.tasks) {
    out += "task " + tk.name + "\n";
    for (const auto& st : tk.states) {
      out += "  state " + st.name + (st.name == tk.initial_state ? " initial" : "") + "\n";
      for (const auto& em : st.emissions)
        out += "    emit " + em.point + " " + std::to_string(em.value) + "\n";
      for (const auto& tr : st.transitions) {
        if (tr.kind == Transition::Kind::Guard)
          out += "    when " + to_string(tr.guard) + " goto " + tr.target + "\n";
        else
          out += "    timeout " + std::to_string(tr.timeout_ms) + "ms goto " + tr.target + "\n";
      }
    }
  }
  return out;
}

}  // namespace artts
