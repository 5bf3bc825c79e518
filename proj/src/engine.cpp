#include "artts/engine.hpp"

#include <algorithm>
#include <unordered_map>

namespace artts {

namespace {

struct Op {
  enum Code : std::uint8_t { Input, Coil, Timer, Not, And, Or };
  Code code;
  std::uint16_t arg;  // index, or child count for And/Or
};

using Program = std::vector<Op>;

struct CompiledTransition {
  bool timeout = false;
  std::int64_t timeout_ms = 0;
  Program guard;
  std::uint16_t target = 0;
};

struct CompiledState {
  std::string name;
  std::vector<CompiledTransition> transitions;
  std::vector<std::pair<int, std::uint8_t>> emissions;  // emit slot, value
  std::vector<std::int64_t> thresholds;
};

struct CompiledTask {
  std::string name;
  std::vector<CompiledState> states;
  std::uint16_t initial = 0;
  std::vector<int> emit_slots;
};

char hex_digit(int v) { return static_cast<char>(v < 10 ? '0' + v : 'a' + v - 10); }

std::string to_hex(const std::vector<std::uint8_t>& bits) {
  if (bits.empty()) return "0";
  std::size_t digits = (bits.size() + 3) / 4;
  std::string out(digits, '0');
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) {
      std::size_t d = digits - 1 - i / 4;
      int v = (out[d] >= 'a' ? out[d] - 'a' + 10 : out[d] - '0') | (1 << (i % 4));
      out[d] = hex_digit(v);
    }
  return out;
}

[[noreturn]] void load_error(const std::string& msg) { throw EngineError(EngineErrc::Load, msg); }

}  // namespace

struct Engine::Compiled {
  StationModel station;
  std::int64_t period = 10;
  int window = 5;
  std::uint64_t seed = 0;

  std::vector<IoPoint> points;
  std::unordered_map<std::string, int> index;
  std::vector<int> input_idx;
  std::vector<int> output_idx;

  // chain B
  std::vector<std::string> coil_names;
  std::vector<int> coil_point;  // -1 for internal relays
  std::vector<std::pair<int, Program>> rungs;
  std::vector<std::string> timer_names;
  std::vector<std::int64_t> timer_presets;
  std::vector<Program> timer_enables;

  // chain A
  std::vector<CompiledTask> tasks;
  std::vector<std::string> emit_names;
  std::vector<int> emit_point;

  struct Combined {
    int point, src_a, src_b;
  };
  std::vector<Combined> combined;
  std::array<int, 2> fault_led{-1, -1};
  std::vector<std::pair<int, int>> pairs;
  std::vector<std::pair<int, FaultCode>> fault_inputs;
  struct Signal {
    Chain chain;
    int index;  // coil index (B) or emit slot (A)
    FaultCode code;
  };
  std::vector<Signal> signals;
  int reset_input = -1;
  std::size_t max_stack = 1;
};

namespace {

class ProgramCompiler {
 public:
  ProgramCompiler(const Engine::Compiled& c, bool chain_b) : c_(c), chain_b_(chain_b) {}

  Program compile(const Expr& e) {
    Program out;
    emit(e, out);
    return out;
  }

 private:
  void emit(const Expr& e, Program& out) {
    switch (e.kind) {
      case Expr::Kind::Ref: {
        if (chain_b_) {
          auto it = std::find(c_.coil_names.begin(), c_.coil_names.end(), e.name);
          if (it != c_.coil_names.end()) {
            out.push_back({Op::Coil, static_cast<std::uint16_t>(it - c_.coil_names.begin())});
            return;
          }
        }
        auto pi = c_.index.find(e.name);
        if (pi == c_.index.end() || c_.points[pi->second].direction != Direction::Input)
          load_error("program reads " + e.name + ", which is not a station input");
        out.push_back({Op::Input, static_cast<std::uint16_t>(pi->second)});
        return;
      }
      case Expr::Kind::TimerDone: {
        auto it = std::find(c_.timer_names.begin(), c_.timer_names.end(), e.name);
        if (it == c_.timer_names.end()) load_error("unknown timer " + e.name);
        out.push_back({Op::Timer, static_cast<std::uint16_t>(it - c_.timer_names.begin())});
        return;
      }
      case Expr::Kind::Not:
        emit(e.children.front(), out);
        out.push_back({Op::Not, 1});
        return;
      case Expr::Kind::And:
      case Expr::Kind::Or:
        for (const auto& ch : e.children) emit(ch, out);
        out.push_back({e.kind == Expr::Kind::And ? Op::And : Op::Or,
                       static_cast<std::uint16_t>(e.children.size())});
        return;
    }
  }

  const Engine::Compiled& c_;
  bool chain_b_;
};

std::size_t stack_depth(const Program& p) {
  std::size_t depth = 0, max = 0;
  for (const auto& op : p) {
    if (op.code == Op::And || op.code == Op::Or)
      depth -= op.arg - 1;
    else if (op.code != Op::Not)
      ++depth;
    max = std::max(max, depth);
  }
  return max;
}

struct EvalContext {
  const std::uint8_t* image;
  const std::uint8_t* coils;
  const std::int64_t* timer_acc;
  const std::int64_t* timer_presets;
};

bool eval(const Program& p, const EvalContext& ctx, std::uint8_t* stack) {
  std::size_t sp = 0;
  for (const auto& op : p) {
    switch (op.code) {
      case Op::Input: stack[sp++] = ctx.image[op.arg]; break;
      case Op::Coil: stack[sp++] = ctx.coils[op.arg]; break;
      case Op::Timer:
        stack[sp++] = ctx.timer_acc[op.arg] >= ctx.timer_presets[op.arg] ? 1 : 0;
        break;
      case Op::Not: stack[sp - 1] = !stack[sp - 1]; break;
      case Op::And: {
        std::uint8_t v = 1;
        for (std::size_t i = sp - op.arg; i < sp; ++i) v &= stack[i];
        sp -= op.arg;
        stack[sp++] = v;
        break;
      }
      case Op::Or: {
        std::uint8_t v = 0;
        for (std::size_t i = sp - op.arg; i < sp; ++i) v |= stack[i];
        sp -= op.arg;
        stack[sp++] = v;
        break;
      }
    }
  }
  return stack[0] != 0;
}

}  // namespace

int combine(int permit_a, int permit_b, FaultCode fault_a, FaultCode fault_b) {
  return (permit_a && permit_b && fault_a == FaultCode::NoFault && fault_b == FaultCode::NoFault)
             ? 1
             : 0;
}

std::string serialize(const ScanRecord& r) {
  std::string out = std::to_string(r.seq) + '\t' + std::to_string(r.time_ms) + '\t' +
                    to_hex(r.inputs) + '\t' + to_hex(r.outputs) + '\t' +
                    std::string(to_string(r.fault_a.code)) + '\t' +
                    std::string(to_string(r.fault_b.code));
  for (const auto& [task, state] : r.active_states) out += '\t' + task + '=' + state;
  return out;
}

// ---------------------------------------------------------------------------
// Loading

Engine Engine::load(const StationModel& station, const EngineOptions& options) {
  auto c = std::make_shared<Compiled>();
  c->station = station;
  c->period = options.scan_period_ms.value_or(station.scan_period_ms);
  c->window = options.discrepancy_window_scans.value_or(station.discrepancy_window_scans);
  c->seed = options.rng_seed;
  if (c->period <= 0) load_error("scan period must be positive");
  if (c->window <= 0) load_error("discrepancy window must be positive");

  auto problems = validate_station(station);
  if (!problems.empty()) load_error("station: " + problems.front().message);

  c->points = station.points;
  for (std::size_t i = 0; i < c->points.size(); ++i) {
    c->index[c->points[i].name] = static_cast<int>(i);
    (c->points[i].direction == Direction::Input ? c->input_idx : c->output_idx)
        .push_back(static_cast<int>(i));
  }
  auto idx = [&](const std::string& name) { return c->index.at(name); };
  if (station.fault_led_a) c->fault_led[0] = idx(*station.fault_led_a);
  if (station.fault_led_b) c->fault_led[1] = idx(*station.fault_led_b);

  auto expect_input = [&](const std::string& name, Affinity chain) {
    const IoPoint* p = station.find_point(name);
    if (!p || p->direction != Direction::Input ||
        !(p->chain == chain || p->chain == Affinity::Both))
      load_error("program/point-map mismatch: input " + name + " is not a chain " +
                 std::string(to_string(chain)) + " input of the station");
  };
  auto driven_point = [&](const std::string& name, Affinity chain, int led) -> int {
    const IoPoint* p = station.find_point(name);
    if (!p) return -1;  // internal signal
    int i = idx(name);
    if (p->direction != Direction::Output || p->chain != chain || i == led)
      load_error("program/point-map mismatch: " + name + " is not a chain " +
                 std::string(to_string(chain)) + " program output");
    return i;
  };

  // Chain B.
  auto parsed_b = parse_rung_program(station.chain_b_source);
  if (auto* d = std::get_if<DiagnosticList>(&parsed_b))
    load_error("chain B program: " + format_diagnostic(d->front()));
  const auto& prog_b = std::get<RungProgram>(parsed_b);
  for (const auto& in : prog_b.declared_inputs) expect_input(in, Affinity::B);
  for (const auto& r : prog_b.rungs) {
    c->coil_names.push_back(r.coil);
    c->coil_point.push_back(driven_point(r.coil, Affinity::B, c->fault_led[1]));
  }
  for (const auto& tm : prog_b.timers) {
    if (tm.preset_ms % c->period != 0)
      load_error("timer " + tm.name + ": preset not a multiple of scan period (" +
                 std::to_string(tm.preset_ms) + " ms vs " + std::to_string(c->period) + " ms)");
    c->timer_names.push_back(tm.name);
    c->timer_presets.push_back(tm.preset_ms);
  }
  {
    ProgramCompiler comp(*c, true);
    for (const auto& tm : prog_b.timers) c->timer_enables.push_back(comp.compile(tm.enable));
    for (std::size_t i = 0; i < prog_b.rungs.size(); ++i)
      c->rungs.emplace_back(static_cast<int>(i), comp.compile(prog_b.rungs[i].expr));
  }

  // Chain A.
  auto parsed_a = parse_state_program(station.chain_a_source);
  if (auto* d = std::get_if<DiagnosticList>(&parsed_a))
    load_error("chain A program: " + format_diagnostic(d->front()));
  const auto& prog_a = std::get<StateProgram>(parsed_a);
  for (const auto& in : prog_a.declared_inputs) expect_input(in, Affinity::A);
  for (const auto& p : prog_a.emitted_points) {
    c->emit_names.push_back(p);
    c->emit_point.push_back(driven_point(p, Affinity::A, c->fault_led[0]));
  }
  {
    ProgramCompiler comp(*c, false);
    auto slot = [&](const std::string& p) {
      return static_cast<int>(std::find(c->emit_names.begin(), c->emit_names.end(), p) -
                              c->emit_names.begin());
    };
    for (const auto& tk : prog_a.tasks) {
      CompiledTask ct;
      ct.name = tk.name;
      ct.initial = static_cast<std::uint16_t>(tk.state_index(tk.initial_state));
      for (const auto& p : tk.emitted_points()) ct.emit_slots.push_back(slot(p));
      for (const auto& st : tk.states) {
        CompiledState cs;
        cs.name = st.name;
        for (const auto& em : st.emissions)
          cs.emissions.emplace_back(slot(em.point), static_cast<std::uint8_t>(em.value));
        for (const auto& tr : st.transitions) {
          CompiledTransition ctr;
          ctr.target = static_cast<std::uint16_t>(tk.state_index(tr.target));
          if (tr.kind == Transition::Kind::Timeout) {
            if (tr.timeout_ms % c->period != 0)
              load_error("state " + st.name + ": timeout not a multiple of scan period (" +
                         std::to_string(tr.timeout_ms) + " ms vs " + std::to_string(c->period) +
                         " ms)");
            ctr.timeout = true;
            ctr.timeout_ms = tr.timeout_ms;
            cs.thresholds.push_back(tr.timeout_ms);
          } else {
            ctr.guard = comp.compile(tr.guard);
          }
          cs.transitions.push_back(std::move(ctr));
        }
        std::sort(cs.thresholds.begin(), cs.thresholds.end());
        cs.thresholds.erase(std::unique(cs.thresholds.begin(), cs.thresholds.end()),
                            cs.thresholds.end());
        ct.states.push_back(std::move(cs));
      }
      c->tasks.push_back(std::move(ct));
    }
  }

  // Combiner, fault sources.
  for (const auto& p : station.points)
    if (p.direction == Direction::Output && p.chain == Affinity::Both)
      c->combined.push_back({idx(p.name), idx(p.sources[0]), idx(p.sources[1])});
  for (const auto& [a, b] : station.redundant_pairs) c->pairs.emplace_back(idx(a), idx(b));
  for (const auto& fi : station.fault_inputs) c->fault_inputs.emplace_back(idx(fi.point), fi.code);
  for (const auto& fs : station.fault_signals) {
    const auto& names = fs.chain == Chain::B ? c->coil_names : c->emit_names;
    auto it = std::find(names.begin(), names.end(), fs.signal);
    if (it == names.end())
      load_error("fault signal " + fs.signal + " is not produced by the chain " +
                 std::string(to_string(fs.chain)) + " program");
    c->signals.push_back({fs.chain, static_cast<int>(it - names.begin()), fs.code});
  }
  if (station.fault_reset_input) c->reset_input = idx(*station.fault_reset_input);

  for (const auto& [coil, prog] : c->rungs) c->max_stack = std::max(c->max_stack, stack_depth(prog));
  for (const auto& prog : c->timer_enables) c->max_stack = std::max(c->max_stack, stack_depth(prog));
  for (const auto& tk : c->tasks)
    for (const auto& st : tk.states)
      for (const auto& tr : st.transitions)
        c->max_stack = std::max(c->max_stack, stack_depth(tr.guard));

  Engine e;
  e.c_ = std::move(c);
  e.stack_.assign(e.c_->max_stack + 1, 0);
  e.reset();
  return e;
}

// ---------------------------------------------------------------------------
// Accessors

std::int64_t Engine::scan_period_ms() const { return c_->period; }
int Engine::discrepancy_window_scans() const { return c_->window; }
std::uint64_t Engine::rng_seed() const { return c_->seed; }
const StationModel& Engine::station() const { return c_->station; }
const std::vector<IoPoint>& Engine::points() const { return c_->points; }

int Engine::point_index(std::string_view point) const {
  auto it = c_->index.find(std::string(point));
  return it == c_->index.end() ? -1 : it->second;
}

std::size_t Engine::timer_count() const { return c_->timer_presets.size(); }
std::int64_t Engine::timer_preset(std::size_t timer) const { return c_->timer_presets.at(timer); }
std::size_t Engine::task_count() const { return c_->tasks.size(); }
const std::string& Engine::timer_name(std::size_t timer) const { return c_->timer_names.at(timer); }
const std::string& Engine::task_name(std::size_t task) const { return c_->tasks.at(task).name; }
const std::string& Engine::state_name(std::size_t task, std::size_t state) const {
  return c_->tasks.at(task).states.at(state).name;
}
const std::vector<int>& Engine::input_indices() const { return c_->input_idx; }

const std::vector<std::int64_t>& Engine::state_timeouts(std::size_t task, std::size_t state) const {
  return c_->tasks.at(task).states.at(state).thresholds;
}

bool Engine::coil_value(std::string_view coil) const {
  for (std::size_t i = 0; i < c_->coil_names.size(); ++i)
    if (c_->coil_names[i] == coil) return s_.coils[i] != 0;
  throw EngineError(EngineErrc::UnknownPoint, "unknown coil " + std::string(coil));
}

const FaultRegister& Engine::fault(Chain chain) const {
  return s_.faults[chain == Chain::A ? 0 : 1];
}

std::vector<std::pair<std::string, std::string>> Engine::task_states() const {
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(c_->tasks.size());
  for (std::size_t t = 0; t < c_->tasks.size(); ++t)
    out.emplace_back(c_->tasks[t].name, c_->tasks[t].states[s_.task_state[t]].name);
  return out;
}

std::optional<std::string> Engine::task_state(std::string_view task) const {
  for (std::size_t t = 0; t < c_->tasks.size(); ++t)
    if (c_->tasks[t].name == task) return c_->tasks[t].states[s_.task_state[t]].name;
  return std::nullopt;
}

bool Engine::has_state(std::string_view task, std::string_view state) const {
  for (const auto& t : c_->tasks)
    if (t.name == task)
      for (const auto& st : t.states)
        if (st.name == state) return true;
  return false;
}

std::vector<std::pair<PointName, int>> Engine::combined_permit() const {
  std::vector<std::pair<PointName, int>> out;
  for (const auto& cb : c_->combined)
    out.emplace_back(c_->points[cb.point].name,
                     combine(s_.image[cb.src_a], s_.image[cb.src_b], s_.faults[0].code,
                             s_.faults[1].code));
  return out;
}

ScanRecord Engine::current_record() const {
  ScanRecord r;
  r.seq = s_.seq;
  r.time_ms = s_.time_ms;
  r.inputs.reserve(c_->input_idx.size());
  for (int i : c_->input_idx) r.inputs.push_back(s_.image[i]);
  r.outputs.reserve(c_->output_idx.size());
  for (int i : c_->output_idx) r.outputs.push_back(s_.image[i]);
  r.fault_a = s_.faults[0];
  r.fault_b = s_.faults[1];
  r.active_states = task_states();
  return r;
}

void Engine::restore(const State& state) {
  if (state.image.size() != s_.image.size() || state.coils.size() != s_.coils.size() ||
      state.task_state.size() != s_.task_state.size())
    throw EngineError(EngineErrc::BadValue, "state does not belong to this station");
  s_ = state;
}

// ---------------------------------------------------------------------------
// Environment operations

void Engine::write_point(std::string_view point, int value) {
  int i = point_index(point);
  if (i < 0) throw EngineError(EngineErrc::UnknownPoint, "unknown point " + std::string(point));
  if (c_->points[i].direction != Direction::Input)
    throw EngineError(EngineErrc::NotInput, std::string(point) + " is an output");
  if (value != 0 && value != 1)
    throw EngineError(EngineErrc::BadValue, "value must be 0 or 1");
  s_.pending[i] = static_cast<std::uint8_t>(value);
}

void Engine::write_inputs(std::uint64_t bits) {
  for (std::size_t i = 0; i < c_->input_idx.size(); ++i)
    s_.pending[c_->input_idx[i]] = static_cast<std::uint8_t>((bits >> i) & 1U);
}

int Engine::read_point(std::string_view point) const {
  int i = point_index(point);
  if (i < 0) throw EngineError(EngineErrc::UnknownPoint, "unknown point " + std::string(point));
  return s_.image[i];
}

void Engine::inject_fault(Chain chain, FaultCode code) {
  if (code == FaultCode::NoFault)
    throw EngineError(EngineErrc::BadValue, "cannot inject NoFault; use a fault reset");
  latch(chain, code, s_.time_ms);
}

void Engine::reset() {
  const auto& c = *c_;
  s_ = State{};
  s_.pending.assign(c.points.size(), 0);
  s_.image.assign(c.points.size(), 0);
  for (int i : c.input_idx) {
    s_.pending[i] = static_cast<std::uint8_t>(c.points[i].initial);
    s_.image[i] = s_.pending[i];
  }
  s_.disagree_scans.assign(c.pairs.size(), 0);
  reinit_chains();
}

void Engine::reinit_chains() {
  const auto& c = *c_;
  s_.coils.assign(c.coil_names.size(), 0);
  s_.timer_acc.assign(c.timer_presets.size(), 0);
  s_.task_state.resize(c.tasks.size());
  s_.task_elapsed.assign(c.tasks.size(), 0);
  s_.emitted.assign(c.emit_names.size(), 0);
  for (std::size_t t = 0; t < c.tasks.size(); ++t) {
    s_.task_state[t] = c.tasks[t].initial;
    for (const auto& [slot, v] : c.tasks[t].states[c.tasks[t].initial].emissions)
      s_.emitted[slot] = v;
  }
}

void Engine::reset_faults() {
  for (auto& reg : s_.faults) {
    if (reg.code != FaultCode::NoFault && !condition_present(reg.code)) {
      reg.code = FaultCode::NoFault;
      reg.latched_at_ms.reset();
    }
  }
  reinit_chains();
}

bool Engine::condition_present(FaultCode code) const {
  const auto& c = *c_;
  if (code == FaultCode::Discrepancy)
    for (const auto& [a, b] : c.pairs)
      if (s_.image[a] != s_.image[b]) return true;
  for (const auto& [pt, fc] : c.fault_inputs)
    if (fc == code && s_.image[pt]) return true;
  return false;
}

void Engine::latch(Chain chain, FaultCode code, std::int64_t at_ms) {
  auto& reg = s_.faults[chain == Chain::A ? 0 : 1];
  if (reg.code != FaultCode::NoFault) return;  // first cause wins
  reg.code = code;
  reg.latched_at_ms = at_ms;
}

// ---------------------------------------------------------------------------
// Scan

ScanRecord Engine::step() {
  scan();
  return current_record();
}

void Engine::step_quiet() { scan(); }

std::vector<ScanRecord> Engine::run_for(std::int64_t duration_ms) {
  if (duration_ms < 0 || duration_ms % c_->period != 0)
    throw EngineError(EngineErrc::BadDuration,
                      "duration " + std::to_string(duration_ms) +
                          " ms is not a non-negative multiple of the scan period");
  std::vector<ScanRecord> out;
  const std::int64_t n = duration_ms / c_->period;
  out.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) out.push_back(step());
  return out;
}

void Engine::scan() {
  const auto& c = *c_;
  for (int i : c.input_idx) s_.image[i] = s_.pending[i];
  if (c.reset_input >= 0 && s_.image[c.reset_input] &&
      (s_.faults[0].code != FaultCode::NoFault || s_.faults[1].code != FaultCode::NoFault))
    reset_faults();

  const std::int64_t next_time = s_.time_ms + c.period;
  if (s_.faults[1].code == FaultCode::NoFault) {
    try {
      run_chain_b();
    } catch (const std::exception&) {
      latch(Chain::B, FaultCode::ProgramHalt, next_time);
    }
  }
  if (s_.faults[0].code == FaultCode::NoFault) {
    try {
      run_chain_a();
    } catch (const std::exception&) {
      latch(Chain::A, FaultCode::ProgramHalt, next_time);
    }
  }
  detect_faults(next_time);
  commit_outputs();
  s_.time_ms = next_time;
  ++s_.seq;
}

void Engine::run_chain_b() {
  const auto& c = *c_;
  EvalContext ctx{s_.image.data(), s_.coils.data(), s_.timer_acc.data(), c.timer_presets.data()};
  for (std::size_t t = 0; t < c.timer_enables.size(); ++t) {
    auto& acc = s_.timer_acc[t];
    acc = eval(c.timer_enables[t], ctx, stack_.data()) ? std::min(acc + c.period, c.timer_presets[t])
                                                       : 0;
  }
  for (const auto& [coil, prog] : c.rungs)
    s_.coils[coil] = eval(prog, ctx, stack_.data()) ? 1 : 0;
}

void Engine::run_chain_a() {
  const auto& c = *c_;
  EvalContext ctx{s_.image.data(), nullptr, nullptr, nullptr};
  for (std::size_t t = 0; t < c.tasks.size(); ++t) {
    const auto& task = c.tasks[t];
    auto& cur = s_.task_state[t];
    auto& elapsed = s_.task_elapsed[t];
    const auto& thresholds = task.states[cur].thresholds;
    // Elapsed time only matters up to the state's largest timeout.
    elapsed = thresholds.empty() ? 0 : std::min(elapsed + c.period, thresholds.back());
    for (const auto& tr : task.states[cur].transitions) {
      bool fire = tr.timeout ? elapsed >= tr.timeout_ms : eval(tr.guard, ctx, stack_.data());
      if (fire) {
        cur = tr.target;
        elapsed = 0;
        break;
      }
    }
    for (int slot : task.emit_slots) s_.emitted[slot] = 0;
    for (const auto& [slot, v] : task.states[cur].emissions) s_.emitted[slot] = v;
  }
}

void Engine::detect_faults(std::int64_t at_ms) {
  const auto& c = *c_;
  const auto cap = static_cast<std::uint16_t>(c.window + 1);
  for (std::size_t p = 0; p < c.pairs.size(); ++p) {
    auto& count = s_.disagree_scans[p];
    if (s_.image[c.pairs[p].first] != s_.image[c.pairs[p].second]) {
      if (count < cap) ++count;
      if (count > c.window) {
        latch(Chain::A, FaultCode::Discrepancy, at_ms);
        latch(Chain::B, FaultCode::Discrepancy, at_ms);
      }
    } else {
      count = 0;
    }
  }
  for (const auto& [pt, code] : c.fault_inputs)
    if (s_.image[pt]) {
      latch(Chain::A, code, at_ms);
      latch(Chain::B, code, at_ms);
    }
  for (const auto& sig : c.signals) {
    bool raised = sig.chain == Chain::B ? s_.coils[sig.index] != 0 : s_.emitted[sig.index] != 0;
    if (raised) latch(sig.chain, sig.code, at_ms);
  }
}

void Engine::commit_outputs() {
  const auto& c = *c_;
  const bool fa = s_.faults[0].code != FaultCode::NoFault;
  const bool fb = s_.faults[1].code != FaultCode::NoFault;
  for (std::size_t i = 0; i < c.coil_point.size(); ++i)
    if (c.coil_point[i] >= 0) s_.image[c.coil_point[i]] = fb ? 0 : s_.coils[i];
  for (std::size_t i = 0; i < c.emit_point.size(); ++i)
    if (c.emit_point[i] >= 0) s_.image[c.emit_point[i]] = fa ? 0 : s_.emitted[i];
  if (c.fault_led[0] >= 0) s_.image[c.fault_led[0]] = fa ? 1 : 0;
  if (c.fault_led[1] >= 0) s_.image[c.fault_led[1]] = fb ? 1 : 0;
  for (const auto& cb : c.combined)
    s_.image[cb.point] = static_cast<std::uint8_t>(
        combine(s_.image[cb.src_a], s_.image[cb.src_b], s_.faults[0].code, s_.faults[1].code));
}

}  // namespace artts
