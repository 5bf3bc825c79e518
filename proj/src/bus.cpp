#include "artts/bus.hpp"

#include <charconv>

namespace artts {

std::string_view to_string(BusMode mode) {
  return mode == BusMode::Stepped ? "stepped" : "realtime";
}

std::string bus_error(std::string_view code, std::string_view msg) {
  std::string out = "ERR ";
  out += code;
  out += " \"";
  for (char c : msg) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::optional<std::int64_t> parse_uint(std::string_view s) {
  if (s.empty() || s.size() > 18) return std::nullopt;
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || v < 0) return std::nullopt;
  for (char c : s)
    if (c < '0' || c > '9') return std::nullopt;
  return v;
}

}  // namespace

BusCore::BusCore(Engine engine, BusMode mode) : engine_(std::move(engine)), mode_(mode) {}

BusCore::ClientId BusCore::connect() {
  ClientId id = next_client_++;
  subs_[id];
  return id;
}

void BusCore::disconnect(ClientId client) { subs_.erase(client); }

const std::set<int>& BusCore::subscriptions(ClientId client) const {
  static const std::set<int> kNone;
  auto it = subs_.find(client);
  return it == subs_.end() ? kNone : it->second;
}

void BusCore::emit_changes(const std::vector<std::uint8_t>& before, std::vector<Output>& out) {
  const auto& after = engine_.state().image;
  const auto& points = engine_.points();
  const std::string t = std::to_string(engine_.time_ms());
  for (std::size_t p = 0; p < after.size(); ++p) {
    if (before[p] == after[p]) continue;
    for (const auto& [client, set] : subs_)
      if (set.count(static_cast<int>(p)))
        out.push_back({client, "EVT " + t + ' ' + points[p].name + ' ' + std::to_string(after[p])});
  }
}

void BusCore::scan(std::vector<Output>& out) {
  const auto before = engine_.state().image;
  engine_.step_quiet();
  emit_changes(before, out);
}

std::vector<BusCore::Output> BusCore::tick() {
  std::vector<Output> out;
  scan(out);
  return out;
}

std::vector<BusCore::Output> BusCore::handle(ClientId client, std::string_view line) {
  std::vector<Output> out;
  auto reply = [&](std::string text) { out.push_back({client, std::move(text)}); };
  if (log_enabled_) log_.push_back({client, std::string(line)});

  if (line.size() > kMaxLineBytes) {
    reply(bus_error("cap", "line too long"));
    return out;
  }
  const auto args = split_spaces(line);
  if (args.empty()) {
    reply(bus_error("unknown-cmd", "empty command"));
    return out;
  }
  const std::string_view cmd = args[0];
  auto usage = [&](std::string_view form) { reply(bus_error("bad-value", "usage: " + std::string(form))); };
  auto point_of = [&](std::string_view name) -> int {
    int i = engine_.point_index(name);
    if (i < 0) reply(bus_error("unknown-point", "unknown point " + std::string(name)));
    return i;
  };
  auto stepped_only = [&]() {
    if (mode_ == BusMode::Realtime) {
      reply(bus_error("mode", "stepped commands rejected in realtime"));
      return false;
    }
    return true;
  };
  auto run_scans = [&](std::int64_t n) {
    for (std::int64_t i = 0; i < n; ++i) scan(out);
    reply("OK " + std::to_string(engine_.time_ms()));
  };

  if (cmd == "READ") {
    if (args.size() != 2) {
      usage("READ <point>");
      return out;
    }
    int p = point_of(args[1]);
    if (p >= 0) reply("OK " + std::to_string(engine_.state().image[p]));
  } else if (cmd == "WRITE") {
    if (args.size() != 3) {
      usage("WRITE <point> <0|1>");
      return out;
    }
    int p = point_of(args[1]);
    if (p < 0) return out;
    if (engine_.points()[p].direction != Direction::Input) {
      reply(bus_error("not-input", std::string(args[1]) + " is an output"));
    } else if (args[2] != "0" && args[2] != "1") {
      reply(bus_error("bad-value", "value must be 0 or 1"));
    } else {
      engine_.write_point(args[1], args[2] == "1");
      reply("OK");
    }
  } else if (cmd == "STEP") {
    if (args.size() != 2) {
      usage("STEP <count>");
      return out;
    }
    if (!stepped_only()) return out;
    auto n = parse_uint(args[1]);
    if (!n) {
      reply(bus_error("bad-value", "count must be an unsigned integer"));
      return out;
    }
    if (*n > kMaxScansPerCommand) {
      reply(bus_error("cap", "at most " + std::to_string(kMaxScansPerCommand) + " scans per command"));
      return out;
    }
    run_scans(*n);
  } else if (cmd == "RUN") {
    if (args.size() != 2) {
      usage("RUN <ms>");
      return out;
    }
    if (!stepped_only()) return out;
    auto ms = parse_uint(args[1]);
    const auto period = engine_.scan_period_ms();
    if (!ms || *ms % period != 0) {
      reply(bus_error("bad-value", "duration must be a multiple of the scan period (" +
                                       std::to_string(period) + "ms)"));
      return out;
    }
    if (*ms / period > kMaxScansPerCommand) {
      reply(bus_error("cap", "at most " + std::to_string(kMaxScansPerCommand) + " scans per command"));
      return out;
    }
    run_scans(*ms / period);
  } else if (cmd == "SNAPSHOT") {
    if (args.size() != 1) {
      usage("SNAPSHOT");
      return out;
    }
    reply("OK " + std::to_string(engine_.time_ms()));
    const auto& image = engine_.state().image;
    for (std::size_t p = 0; p < image.size(); ++p)
      reply(engine_.points()[p].name + ' ' + std::to_string(image[p]));
    reply(".");
  } else if (cmd == "FAULT") {
    if (args.size() != 3) {
      usage("FAULT <A|B> <code>");
      return out;
    }
    auto chain = parse_chain(args[1]);
    auto code = parse_fault_code(args[2]);
    if (!chain) {
      reply(bus_error("bad-value", "chain must be A or B"));
      return out;
    }
    if (!code || *code == FaultCode::NoFault) {
      reply(bus_error("bad-value", "unknown fault code " + std::string(args[2])));
      return out;
    }
    engine_.inject_fault(*chain, *code);
    reply("OK");
  } else if (cmd == "RESETF") {
    if (args.size() != 1) {
      usage("RESETF");
      return out;
    }
    engine_.reset_faults();
    reply("OK");
  } else if (cmd == "RESET") {
    if (args.size() != 1) {
      usage("RESET");
      return out;
    }
    const auto before = engine_.state().image;
    engine_.reset();
    emit_changes(before, out);
    reply("OK");
  } else if (cmd == "SUB") {
    if (args.size() != 2) {
      usage("SUB <point>[,<point>...]");
      return out;
    }
    std::set<int> add;
    std::string_view rest = args[1];
    while (true) {
      auto comma = rest.find(',');
      std::string_view name = rest.substr(0, comma);
      int p = point_of(name);
      if (p < 0) return out;
      add.insert(p);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    subs_[client].insert(add.begin(), add.end());
    reply("OK " + std::to_string(subs_[client].size()));
  } else if (cmd == "MODE") {
    if (args.size() != 2) {
      usage("MODE <stepped|realtime>");
      return out;
    }
    if (args[1] == "stepped") mode_ = BusMode::Stepped;
    else if (args[1] == "realtime") mode_ = BusMode::Realtime;
    else {
      reply(bus_error("bad-value", "mode must be stepped or realtime"));
      return out;
    }
    reply("OK");
  } else {
    reply(bus_error("unknown-cmd", "unknown command " + std::string(cmd)));
  }
  return out;
}

}  // namespace artts
