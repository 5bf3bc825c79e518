#include "artts/chain_dsl.hpp"
#include "artts/io.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace artts {

namespace {

Diagnostic warning(int line, std::string msg) {
  return {Severity::Warning, line > 0 ? line : 1, std::move(msg)};
}

void collect_refs(const Expr& e, std::set<std::string>& refs) {
  for_each_leaf(e, [&](const Expr& leaf) {
    if (leaf.kind == Expr::Kind::Ref) refs.insert(leaf.name);
  });
}

}  // namespace

DiagnosticList lint_program(const RungProgram& program, std::span<const IoPoint> points,
                            std::span<const std::string> mapped) {
  DiagnosticList out;

  std::set<std::string> read;
  for (const auto& tm : program.timers) collect_refs(tm.enable, read);
  for (const auto& r : program.rungs) collect_refs(r.expr, read);

  for (const auto& p : points) {
    bool written = program.find_rung(p.name) != nullptr;
    if (!read.count(p.name) && !written)
      out.push_back(warning(1, "point " + p.name + " is never read or written by the program"));
  }

  // A coil is referenced if another rung or a timer reads it, or something
  // outside the program consumes it. Seal-in self-references do not count.
  for (const auto& r : program.rungs) {
    bool used = std::any_of(points.begin(), points.end(),
                            [&](const IoPoint& p) { return p.name == r.coil; }) ||
                std::find(mapped.begin(), mapped.end(), r.coil) != mapped.end();
    for (const auto& tm : program.timers) {
      std::set<std::string> refs;
      collect_refs(tm.enable, refs);
      used = used || refs.count(r.coil);
    }
    for (const auto& other : program.rungs) {
      if (&other == &r) continue;
      std::set<std::string> refs;
      collect_refs(other.expr, refs);
      used = used || refs.count(r.coil);
    }
    if (!used) out.push_back(warning(r.line.value, "coil " + r.coil + " is never referenced"));
  }
  return out;
}

DiagnosticList lint_program(const StateProgram& program, std::span<const IoPoint> points,
                            std::span<const std::string> /*mapped*/) {
  DiagnosticList out;

  std::set<std::string> used;
  for (const auto& tk : program.tasks)
    for (const auto& st : tk.states) {
      for (const auto& em : st.emissions) used.insert(em.point);
      for (const auto& tr : st.transitions)
        if (tr.kind == Transition::Kind::Guard) collect_refs(tr.guard, used);
    }
  for (const auto& p : points)
    if (!used.count(p.name))
      out.push_back(warning(1, "point " + p.name + " is never read or written by the program"));

  for (const auto& tk : program.tasks) {
    std::vector<bool> seen(tk.states.size(), false);
    std::deque<int> queue;
    int start = tk.state_index(tk.initial_state);
    if (start < 0) continue;
    seen[start] = true;
    queue.push_back(start);
    while (!queue.empty()) {
      int s = queue.front();
      queue.pop_front();
      for (const auto& tr : tk.states[s].transitions) {
        int next = tk.state_index(tr.target);
        if (next >= 0 && !seen[next]) {
          seen[next] = true;
          queue.push_back(next);
        }
      }
    }
    for (std::size_t i = 0; i < tk.states.size(); ++i)
      if (!seen[i])
        out.push_back(warning(tk.states[i].line.value,
                              "unreachable state " + tk.states[i].name + " in task " + tk.name));
  }
  return out;
}

}  // namespace artts
