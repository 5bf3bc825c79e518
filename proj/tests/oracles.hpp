#pragma once

// Independent oracles shared by the unit tests and the acceptance gate.

#include "artts/chain_dsl.hpp"
#include "artts/engine.hpp"
#include "artts/expr.hpp"
#include "artts/station.hpp"

#include "support.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace test {

using namespace artts;

inline std::vector<std::filesystem::path> corpus(const std::string& sub, const std::string& ext) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(test::source_dir() / "tests" / "corpus" / sub))
    if (e.path().extension() == ext) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

// Truth-table oracle: evaluates rung text directly, independent of the
// library's expression parser and the engine's compiled form.

class TextEval {
 public:
  TextEval(std::string_view src, const std::map<std::string, bool>& env) : env_(env) {
    std::size_t i = 0;
    while (i < src.size()) {
      char c = src[i];
      if (c == ' ' || c == '\t') {
        ++i;
      } else if (c == '(' || c == ')') {
        toks_.emplace_back(1, c);
        ++i;
      } else {
        std::size_t j = i;
        while (j < src.size() && src[j] != ' ' && src[j] != '(' && src[j] != ')') ++j;
        toks_.emplace_back(src.substr(i, j - i));
        i = j;
      }
    }
  }

  bool value() {
    bool v = disj();
    if (pos_ != toks_.size()) throw std::runtime_error("trailing tokens");
    return v;
  }

 private:
  bool disj() {
    bool v = conj();
    while (peek() == "OR") {
      ++pos_;
      bool r = conj();
      v = v || r;
    }
    return v;
  }
  bool conj() {
    bool v = unary();
    while (peek() == "AND") {
      ++pos_;
      bool r = unary();
      v = v && r;
    }
    return v;
  }
  bool unary() {
    if (peek() == "NOT") {
      ++pos_;
      return !unary();
    }
    if (peek() == "(") {
      ++pos_;
      bool v = disj();
      if (peek() != ")") throw std::runtime_error("expected )");
      ++pos_;
      return v;
    }
    auto it = env_.find(toks_.at(pos_++));
    if (it == env_.end()) throw std::runtime_error("unbound name");
    return it->second;
  }
  std::string peek() const { return pos_ < toks_.size() ? toks_[pos_] : std::string(); }

  const std::map<std::string, bool>& env_;
  std::vector<std::string> toks_;
  std::size_t pos_ = 0;
};

struct TextRung {
  std::string coil;
  std::string expr;
};

inline std::vector<TextRung> text_rungs(std::string_view source) {
  std::vector<TextRung> out;
  std::size_t start = 0;
  while (start <= source.size()) {
    auto end = source.find('\n', start);
    std::string line(source.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.rfind("rung ", 0) == 0) {
      auto assign = line.find(":=");
      std::string coil = line.substr(5, assign - 5);
      coil.erase(coil.find_last_not_of(' ') + 1);
      out.push_back({coil, line.substr(assign + 2)});
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

// A program is latch-free when every rung reads only inputs and coils of
// earlier rungs, and it has no timers.
inline bool latch_free(const RungProgram& p) {
  if (!p.timers.empty()) return false;
  std::set<std::string> known(p.declared_inputs.begin(), p.declared_inputs.end());
  for (const auto& r : p.rungs) {
    bool ok_refs = true;
    for_each_leaf(r.expr, [&](const Expr& leaf) {
      if (leaf.kind != Expr::Kind::Ref || !known.count(leaf.name)) ok_refs = false;
    });
    if (!ok_refs) return false;
    known.insert(r.coil);
  }
  return true;
}

// Minimal station around a chain B program so the engine can run it.
inline StationModel harness_station(const RungProgram& prog, const std::string& source) {
  StationModel st;
  st.name = "harness";
  for (const auto& in : prog.declared_inputs) st.points.push_back({in, Direction::Input, Affinity::Both, 0, {}});
  st.points.push_back({"SHUTTER_PERMIT_A", Direction::Output, Affinity::A, 0, {}});
  bool has_permit_b = false;
  for (const auto& r : prog.rungs) has_permit_b |= r.coil == "SHUTTER_PERMIT_B";
  if (!has_permit_b) throw std::runtime_error("corpus program must drive SHUTTER_PERMIT_B");
  st.points.push_back({"SHUTTER_PERMIT_B", Direction::Output, Affinity::B, 0, {}});
  st.points.push_back(
      {"SHUTTER_PERMIT", Direction::Output, Affinity::Both, 0, {"SHUTTER_PERMIT_A", "SHUTTER_PERMIT_B"}});
  st.chain_a_source = "task IDLE\n  state IDLE initial\n";
  st.chain_b_source = source;
  return st;
}

// Drives every latch-free corpus program with at most 10 inputs through all
// input vectors and compares each coil with TextEval.
struct TruthTableCheck {
  int programs = 0;
  long rows = 0;
  long mismatches = 0;
  std::string first_mismatch;  // "file bits=N coil=C"
};

inline TruthTableCheck check_corpus_truth_tables() {
  TruthTableCheck out;
  for (const auto& path : corpus("rungs", ".rung")) {
    const auto src = read_text(path);
    const auto parsed = parse_rung_program(src);
    if (!std::holds_alternative<RungProgram>(parsed))
      throw std::runtime_error(path.filename().string() + " does not parse");
    const auto& prog = std::get<RungProgram>(parsed);
    if (!latch_free(prog) || prog.declared_inputs.size() > 10) continue;
    ++out.programs;
    auto engine = Engine::load(harness_station(prog, src));
    const auto rungs = text_rungs(src);
    if (rungs.size() != prog.rungs.size()) throw std::runtime_error("rung count mismatch");
    const std::size_t n = prog.declared_inputs.size();
    for (std::uint32_t bits = 0; bits < (1u << n); ++bits) {
      std::map<std::string, bool> env;
      for (std::size_t i = 0; i < n; ++i) {
        env[prog.declared_inputs[i]] = (bits >> i) & 1u;
        engine.write_point(prog.declared_inputs[i], (bits >> i) & 1u);
      }
      engine.step();
      ++out.rows;
      for (const auto& r : rungs) {
        env[r.coil] = TextEval(r.expr, env).value();
        if (engine.coil_value(r.coil) == env[r.coil]) continue;
        if (out.mismatches++ == 0)
          out.first_mismatch =
              path.filename().string() + " bits=" + std::to_string(bits) + " coil=" + r.coil;
      }
      if (engine.read_point("SHUTTER_PERMIT_B") != static_cast<int>(env["SHUTTER_PERMIT_B"]) &&
          out.mismatches++ == 0)
        out.first_mismatch = path.filename().string() + " bits=" + std::to_string(bits) +
                             " point=SHUTTER_PERMIT_B";
    }
  }
  return out;
}

// Expected combined output per the voting rule; written out row by row.
struct CombinerRow {
  int a, b;
  bool fault_a, fault_b;
  int expected;
};

inline constexpr CombinerRow kCombinerTable[16] = {
    {0, 0, false, false, 0}, {0, 0, false, true, 0}, {0, 0, true, false, 0}, {0, 0, true, true, 0},
    {0, 1, false, false, 0}, {0, 1, false, true, 0}, {0, 1, true, false, 0}, {0, 1, true, true, 0},
    {1, 0, false, false, 0}, {1, 0, false, true, 0}, {1, 0, true, false, 0}, {1, 0, true, true, 0},
    {1, 1, false, false, 1}, {1, 1, false, true, 0}, {1, 1, true, false, 0}, {1, 1, true, true, 0},
};

}  // namespace test
