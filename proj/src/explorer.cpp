#include "artts/explorer.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace artts {

std::vector<SafetyRule> reference_safety_rules() {
  return {
      {"SHUTTER_PERMIT",
       "SHUTTER_PERMIT",
       {"DOOR_CLOSED_1", "DOOR_CLOSED_2", "SECURED_LED_A", "SECURED_LED_B"},
       {Chain::A, Chain::B}},
      {"SHUTTER_PERMIT_A",
       "SHUTTER_PERMIT_A",
       {"DOOR_CLOSED_1", "DOOR_CLOSED_2", "SECURED_LED_A"},
       {Chain::A}},
      {"SHUTTER_PERMIT_B",
       "SHUTTER_PERMIT_B",
       {"DOOR_CLOSED_1", "DOOR_CLOSED_2", "SECURED_LED_B"},
       {Chain::B}},
  };
}

namespace {

enum Action : std::uint8_t { kNone, kInjectA, kInjectB, kReset };

const char* action_name(std::uint8_t a) {
  switch (a) {
    case kInjectA: return "inject A WATCHDOG";
    case kInjectB: return "inject B WATCHDOG";
    case kReset: return "reset faults";
    default: return "none";
  }
}

// Expiry variant: bits 0..31 timers, then 4 bits per task holding the
// 1-based index of the forced timeout threshold.
constexpr int kMaxTimers = 32;
constexpr int kMaxTasks = 8;

struct Edge {
  std::uint32_t parent = 0;
  std::uint32_t inputs = 0;
  std::uint64_t expiry = 0;
  std::uint8_t action = kNone;
};

struct CompiledRule {
  const SafetyRule* rule;
  int permit;
  std::vector<int> high;
};

class Explorer {
 public:
  Explorer(const StationModel& station, const ExploreOptions& options)
      : station_(station), opt_(options), engine_(Engine::load(station)) {
    if (engine_.timer_count() > kMaxTimers || engine_.task_count() > kMaxTasks)
      throw std::invalid_argument("station too large for the explorer");
    period_ = engine_.scan_period_ms();
    const auto& inputs = engine_.input_indices();
    if (inputs.size() > 20) throw std::invalid_argument("too many inputs for the explorer");
    if (opt_.alphabet) {
      alphabet_ = *opt_.alphabet;
    } else {
      for (std::uint32_t v = 0; v < (1U << inputs.size()); ++v) alphabet_.push_back(v);
    }

    auto idx = [&](const std::string& name) {
      int i = engine_.point_index(name);
      if (i < 0) throw std::invalid_argument("unknown point " + name);
      return i;
    };
    carried_.assign(engine_.points().size(), 0);
    for (int i = 0; i < static_cast<int>(carried_.size()); ++i)
      if (engine_.points()[i].direction == Direction::Output) carried_[i] = 1;
    // Inputs whose latched value survives into the next step.
    for (const auto& [a, b] : station.redundant_pairs) carried_[idx(a)] = carried_[idx(b)] = 1;
    for (const auto& fi : station.fault_inputs) carried_[idx(fi.point)] = 1;
    for (const auto& r : opt_.rules) {
      CompiledRule cr{&r, idx(r.permit), {}};
      for (const auto& p : r.required_high) cr.high.push_back(idx(p));
      for (int i : cr.high) carried_[i] = 1;
      rules_.push_back(std::move(cr));
    }
    for (const auto& g : opt_.goal) {
      goal_.push_back(idx(g));
      carried_[goal_.back()] = 1;
    }
  }

  ReachabilityReport run() {
    ReachabilityReport report;
    Engine::State init = engine_.state();
    canonicalize(init);
    add_node(init, Edge{}, report);

    std::vector<std::uint8_t> actions;
    std::vector<std::string> pre_keys;
    std::string key;
    Engine::State base, pre, var;
    for (std::size_t head = 0; head < keys_.size(); ++head) {
      decode(*keys_[head], base);
      actions.clear();
      actions.push_back(kNone);
      if (opt_.inject_faults) {
        if (base.faults[0].code == FaultCode::NoFault) actions.push_back(kInjectA);
        if (base.faults[1].code == FaultCode::NoFault) actions.push_back(kInjectB);
      }
      if (opt_.operator_resets) actions.push_back(kReset);
      pre_keys.clear();
      for (std::uint8_t a : actions) {
        engine_.restore(base);
        if (a == kInjectA) engine_.inject_fault(Chain::A, FaultCode::Watchdog);
        if (a == kInjectB) engine_.inject_fault(Chain::B, FaultCode::Watchdog);
        if (a == kReset) engine_.reset_faults();
        pre = engine_.state();
        canonicalize(pre);
        encode(pre, key);
        if (std::find(pre_keys.begin(), pre_keys.end(), key) != pre_keys.end()) continue;
        pre_keys.push_back(key);

        for (std::uint64_t expiry : variants(pre)) {
          var = pre;
          apply_expiry(var, expiry);
          for (std::uint32_t sym : alphabet_) {
            engine_.restore(var);
            engine_.write_inputs(sym);
            engine_.step_quiet();
            ++report.transitions;
            Engine::State& next = scratch_;
            next = engine_.state();
            canonicalize(next);
            encode(next, key);
            if (index_.find(key) != index_.end()) continue;
            if (keys_.size() >= opt_.state_cap) {
              report.complete = false;
              report.reachable = keys_.size();
              return report;
            }
            add_node(next, Edge{static_cast<std::uint32_t>(head), sym, expiry, a}, report);
          }
        }
      }
    }
    report.reachable = keys_.size();
    return report;
  }

 private:
  void add_node(const Engine::State& s, const Edge& edge, ReachabilityReport& report) {
    std::string key;
    encode(s, key);
    auto [it, inserted] = index_.emplace(std::move(key), static_cast<std::uint32_t>(keys_.size()));
    keys_.push_back(&it->first);
    edges_.push_back(edge);
    const std::uint32_t id = it->second;

    for (const auto& cr : rules_) {
      if (!s.image[cr.permit]) continue;
      bool ok = std::all_of(cr.high.begin(), cr.high.end(), [&](int i) { return s.image[i] != 0; });
      for (Chain ch : cr.rule->fault_free)
        if (s.faults[ch == Chain::A ? 0 : 1].code != FaultCode::NoFault) ok = false;
      if (ok) continue;
      ++report.violation_count;
      if (report.violations.size() < opt_.max_traces) {
        Violation v;
        v.rule = cr.rule->name;
        v.trace = trace_to(id);
        v.at = replay_record(v.trace);
        report.violations.push_back(std::move(v));
      }
    }
    if (!report.goal_reachable && !goal_.empty() &&
        std::all_of(goal_.begin(), goal_.end(), [&](int i) { return s.image[i] != 0; })) {
      report.goal_reachable = true;
      report.goal_trace = trace_to(id);
    }
  }

  std::vector<TraceStep> trace_to(std::uint32_t id) const {
    std::vector<TraceStep> out;
    while (id != 0) {
      const Edge& e = edges_[id];
      TraceStep step;
      step.action = action_name(e.action);
      step.inputs = e.inputs;
      step.expiries = expiry_names(e.expiry, *keys_[e.parent], e.action);
      out.push_back(std::move(step));
      id = e.parent;
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

  std::vector<std::string> expiry_names(std::uint64_t expiry, const std::string& parent_key,
                                        std::uint8_t action) const {
    std::vector<std::string> names;
    for (std::size_t t = 0; t < engine_.timer_count(); ++t)
      if (expiry >> t & 1U) names.push_back(engine_.timer_name(t) + ".DN");
    Engine::State s;
    decode(parent_key, s);
    // reset_faults puts tasks back in their initial states before expiry.
    Engine tmp = engine_;
    tmp.restore(s);
    if (action == kReset) tmp.reset_faults();
    for (std::size_t k = 0; k < engine_.task_count(); ++k) {
      unsigned sel = (expiry >> (kMaxTimers + 4 * k)) & 0xFU;
      if (!sel) continue;
      std::size_t st = tmp.state().task_state[k];
      names.push_back(engine_.task_name(k) + "." + engine_.state_name(k, st) + " timeout " +
                      std::to_string(engine_.state_timeouts(k, st)[sel - 1]) + "ms");
    }
    return names;
  }

  // Replays a trace concretely from reset, forcing the recorded expiries.
  ScanRecord replay_record(const std::vector<TraceStep>& trace) {
    Engine e = engine_;
    e.reset();
    for (const auto& step : trace) {
      if (step.action == action_name(kInjectA)) e.inject_fault(Chain::A, FaultCode::Watchdog);
      if (step.action == action_name(kInjectB)) e.inject_fault(Chain::B, FaultCode::Watchdog);
      if (step.action == action_name(kReset)) e.reset_faults();
      Engine::State pre = e.state();
      canonicalize(pre, true);
      apply_expiry(pre, expiry_code(step, pre));
      e.restore(pre);
      e.write_inputs(step.inputs);
      e.step_quiet();
    }
    return e.current_record();
  }

  std::uint64_t expiry_code(const TraceStep& step, const Engine::State& pre) const {
    std::uint64_t code = 0;
    for (const auto& name : step.expiries) {
      for (std::size_t t = 0; t < engine_.timer_count(); ++t)
        if (name == engine_.timer_name(t) + ".DN") code |= 1ULL << t;
      for (std::size_t k = 0; k < engine_.task_count(); ++k) {
        std::size_t st = pre.task_state[k];
        const auto& th = engine_.state_timeouts(k, st);
        for (std::size_t j = 0; j < th.size(); ++j)
          if (name == engine_.task_name(k) + "." + engine_.state_name(k, st) + " timeout " +
                          std::to_string(th[j]) + "ms")
            code |= static_cast<std::uint64_t>(j + 1) << (kMaxTimers + 4 * k);
      }
    }
    return code;
  }

  std::vector<std::uint64_t> variants(const Engine::State& s) const {
    std::vector<std::uint64_t> out{0};
    for (std::size_t t = 0; t < s.timer_acc.size(); ++t) {
      const auto acc = s.timer_acc[t];
      const auto preset = engine_.timer_preset(t);
      if (acc > 0 && acc + period_ < preset) {
        const std::size_t n = out.size();
        for (std::size_t i = 0; i < n; ++i) out.push_back(out[i] | (1ULL << t));
      }
    }
    for (std::size_t k = 0; k < s.task_state.size(); ++k) {
      const auto& th = engine_.state_timeouts(k, s.task_state[k]);
      const std::size_t n = out.size();
      for (std::size_t j = 0; j < th.size() && j < 15; ++j) {
        if (th[j] <= s.task_elapsed[k] + period_) continue;  // fires without help
        for (std::size_t i = 0; i < n; ++i)
          out.push_back(out[i] | (static_cast<std::uint64_t>(j + 1) << (kMaxTimers + 4 * k)));
      }
    }
    return out;
  }

  void apply_expiry(Engine::State& s, std::uint64_t expiry) const {
    for (std::size_t t = 0; t < s.timer_acc.size(); ++t)
      if (expiry >> t & 1U) s.timer_acc[t] = engine_.timer_preset(t) - period_;
    for (std::size_t k = 0; k < s.task_state.size(); ++k) {
      unsigned sel = (expiry >> (kMaxTimers + 4 * k)) & 0xFU;
      if (sel) s.task_elapsed[k] = engine_.state_timeouts(k, s.task_state[k])[sel - 1] - period_;
    }
  }

  // Drops everything that cannot influence the future: clock, pending writes,
  // inputs that the next latch overwrites, exact timer progress.
  void canonicalize(Engine::State& s, bool keep_clock = false) const {
    if (!keep_clock) {
      s.seq = 0;
      s.time_ms = 0;
      for (auto& f : s.faults)
        if (f.code != FaultCode::NoFault) f.latched_at_ms = 0;
    }
    std::fill(s.pending.begin(), s.pending.end(), 0);
    for (std::size_t i = 0; i < s.image.size(); ++i)
      if (!carried_[i]) s.image[i] = 0;
    for (std::size_t t = 0; t < s.timer_acc.size(); ++t)
      if (s.timer_acc[t] > 0 && s.timer_acc[t] < engine_.timer_preset(t))
        s.timer_acc[t] = std::min(period_, engine_.timer_preset(t) - period_);
    std::fill(s.task_elapsed.begin(), s.task_elapsed.end(), 0);
  }

  void encode(const Engine::State& s, std::string& key) const {
    key.clear();
    for (std::size_t i = 0; i < s.image.size(); ++i) key.push_back(static_cast<char>(s.image[i]));
    for (auto c : s.coils) key.push_back(static_cast<char>(c));
    for (std::size_t t = 0; t < s.timer_acc.size(); ++t)
      key.push_back(static_cast<char>(s.timer_acc[t] == 0                              ? 0
                                      : s.timer_acc[t] >= engine_.timer_preset(t) ? 2
                                                                                      : 1));
    for (auto st : s.task_state) {
      key.push_back(static_cast<char>(st & 0xFF));
      key.push_back(static_cast<char>(st >> 8));
    }
    for (auto e : s.emitted) key.push_back(static_cast<char>(e));
    for (auto d : s.disagree_scans) key.push_back(static_cast<char>(std::min<int>(d, 255)));
    key.push_back(static_cast<char>(s.faults[0].code));
    key.push_back(static_cast<char>(s.faults[1].code));
  }

  void decode(const std::string& key, Engine::State& s) const {
    s = template_state();
    std::size_t p = 0;
    for (auto& v : s.image) v = static_cast<std::uint8_t>(key[p++]);
    for (auto& v : s.coils) v = static_cast<std::uint8_t>(key[p++]);
    for (std::size_t t = 0; t < s.timer_acc.size(); ++t) {
      int code = key[p++];
      const auto preset = engine_.timer_preset(t);
      s.timer_acc[t] = code == 0 ? 0 : code == 2 ? preset : std::min(period_, preset - period_);
    }
    for (auto& st : s.task_state) {
      st = static_cast<std::uint16_t>(static_cast<std::uint8_t>(key[p]) |
                                      (static_cast<std::uint8_t>(key[p + 1]) << 8));
      p += 2;
    }
    for (auto& v : s.emitted) v = static_cast<std::uint8_t>(key[p++]);
    for (auto& v : s.disagree_scans) v = static_cast<std::uint8_t>(key[p++]);
    for (auto& f : s.faults) {
      f.code = static_cast<FaultCode>(key[p++]);
      if (f.code != FaultCode::NoFault) f.latched_at_ms = 0;
      else f.latched_at_ms.reset();
    }
  }

  const Engine::State& template_state() const {
    if (!template_) {
      Engine e = engine_;
      e.reset();
      template_ = e.state();
      canonicalize(*template_);
    }
    return *template_;
  }

  const StationModel& station_;
  const ExploreOptions& opt_;
  Engine engine_;
  std::int64_t period_ = 10;
  std::vector<std::uint32_t> alphabet_;
  std::vector<std::uint8_t> carried_;
  std::vector<CompiledRule> rules_;
  std::vector<int> goal_;

  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<const std::string*> keys_;
  std::vector<Edge> edges_;
  Engine::State scratch_;
  mutable std::optional<Engine::State> template_;
};

}  // namespace

ReachabilityReport explore_reachable(const StationModel& station, const ExploreOptions& options) {
  return Explorer(station, options).run();
}

std::string format_trace(const std::vector<TraceStep>& trace, const StationModel& station) {
  std::vector<std::string> inputs;
  for (const auto& p : station.points)
    if (p.direction == Direction::Input) inputs.push_back(p.name);
  std::string out;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& st = trace[i];
    out += std::to_string(i + 1) + ' ' + st.action + " inputs=";
    bool any = false;
    for (std::size_t b = 0; b < inputs.size(); ++b)
      if (st.inputs >> b & 1U) {
        out += (any ? "," : "") + inputs[b];
        any = true;
      }
    if (!any) out += '-';
    if (!st.expiries.empty()) {
      out += " expire=";
      for (std::size_t k = 0; k < st.expiries.size(); ++k)
        out += (k ? "," : "") + st.expiries[k];
    }
    out += '\n';
  }
  return out;
}

}  // namespace artts
