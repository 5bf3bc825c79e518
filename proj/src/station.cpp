#include "artts/station.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace artts {

using nlohmann::json;

const IoPoint* StationModel::find_point(std::string_view point) const {
  for (const auto& p : points)
    if (p.name == point) return &p;
  return nullptr;
}

std::string_view to_string(PanelKind kind) {
  switch (kind) {
    case PanelKind::UserPanel: return "UserPanel";
    case PanelKind::DoorPanel: return "DoorPanel";
    case PanelKind::SystemController: return "SystemController";
  }
  return "UserPanel";
}

std::string_view to_string(WidgetKind kind) {
  switch (kind) {
    case WidgetKind::Switch: return "Switch";
    case WidgetKind::MomentaryButton: return "MomentaryButton";
    case WidgetKind::KeySwitch: return "KeySwitch";
    case WidgetKind::Led: return "Led";
    case WidgetKind::Beacon: return "Beacon";
  }
  return "Led";
}

namespace {

PanelKind parse_panel_kind(const std::string& s) {
  for (auto k : {PanelKind::UserPanel, PanelKind::DoorPanel, PanelKind::SystemController})
    if (to_string(k) == s) return k;
  throw StationError("unknown panel kind '" + s + "'");
}

WidgetKind parse_widget_kind(const std::string& s) {
  for (auto k : {WidgetKind::Switch, WidgetKind::MomentaryButton, WidgetKind::KeySwitch,
                 WidgetKind::Led, WidgetKind::Beacon})
    if (to_string(k) == s) return k;
  throw StationError("unknown widget kind '" + s + "'");
}

FaultCode parse_code(const std::string& s) {
  auto c = parse_fault_code(s);
  if (!c) throw StationError("unknown fault code '" + s + "'");
  return *c;
}

Chain parse_chain_or_throw(const std::string& s) {
  auto c = parse_chain(s);
  if (!c) throw StationError("unknown chain '" + s + "'");
  return *c;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw StationError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw StationError("cannot write " + p.string());
  out << text;
}

Diagnostic station_error(std::string msg) { return {Severity::Error, 1, std::move(msg)}; }

}  // namespace

StationModel parse_station_json(std::string_view json_text, std::string chain_a_source,
                                std::string chain_b_source) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw StationError(std::string("station.json: ") + e.what());
  }
  StationModel st;
  try {
    st.name = j.at("name").get<std::string>();
    st.scan_period_ms = j.value("scan_period_ms", std::int64_t{10});
    st.discrepancy_window_scans = j.value("discrepancy_window_scans", 5);
    for (const auto& jp : j.at("points")) {
      IoPoint p;
      p.name = jp.at("name").get<std::string>();
      std::string dir = jp.at("direction").get<std::string>();
      if (dir == "input")
        p.direction = Direction::Input;
      else if (dir == "output")
        p.direction = Direction::Output;
      else
        throw StationError("point " + p.name + ": unknown direction '" + dir + "'");
      auto aff = parse_affinity(jp.value("chain", std::string("Both")));
      if (!aff) throw StationError("point " + p.name + ": unknown chain affinity");
      p.chain = *aff;
      p.initial = jp.value("initial", 0);
      if (jp.contains("sources")) p.sources = jp.at("sources").get<std::vector<std::string>>();
      st.points.push_back(std::move(p));
    }
    for (const auto& pair : j.value("redundant_pairs", json::array()))
      st.redundant_pairs.emplace_back(pair.at(0).get<std::string>(),
                                      pair.at(1).get<std::string>());
    if (j.contains("fault_leds")) {
      const auto& leds = j.at("fault_leds");
      if (leds.contains("A")) st.fault_led_a = leds.at("A").get<std::string>();
      if (leds.contains("B")) st.fault_led_b = leds.at("B").get<std::string>();
    }
    for (const auto& fi : j.value("fault_inputs", json::array()))
      st.fault_inputs.push_back(
          {fi.at("point").get<std::string>(), parse_code(fi.at("code").get<std::string>())});
    for (const auto& fs : j.value("fault_signals", json::array()))
      st.fault_signals.push_back({parse_chain_or_throw(fs.at("chain").get<std::string>()),
                                  fs.at("signal").get<std::string>(),
                                  parse_code(fs.at("code").get<std::string>())});
    if (j.contains("fault_reset_input"))
      st.fault_reset_input = j.at("fault_reset_input").get<std::string>();
    for (const auto& jpanel : j.value("panels", json::array())) {
      PanelSpec panel;
      panel.panel = parse_panel_kind(jpanel.at("panel").get<std::string>());
      panel.title = jpanel.value("title", std::string{});
      for (const auto& jw : jpanel.at("widgets"))
        panel.widgets.push_back({parse_widget_kind(jw.at("kind").get<std::string>()),
                                 jw.at("point").get<std::string>(),
                                 jw.value("label", std::string{})});
      st.panels.push_back(std::move(panel));
    }
  } catch (const json::exception& e) {
    throw StationError(std::string("station.json: ") + e.what());
  }
  st.chain_a_source = std::move(chain_a_source);
  st.chain_b_source = std::move(chain_b_source);
  return st;
}

std::string station_json(const StationModel& st) {
  json j;
  j["name"] = st.name;
  j["scan_period_ms"] = st.scan_period_ms;
  j["discrepancy_window_scans"] = st.discrepancy_window_scans;
  j["points"] = json::array();
  for (const auto& p : st.points) {
    json jp;
    jp["name"] = p.name;
    jp["direction"] = p.direction == Direction::Input ? "input" : "output";
    jp["chain"] = std::string(to_string(p.chain));
    if (p.direction == Direction::Input) jp["initial"] = p.initial;
    if (!p.sources.empty()) jp["sources"] = p.sources;
    j["points"].push_back(jp);
  }
  j["redundant_pairs"] = json::array();
  for (const auto& [a, b] : st.redundant_pairs) j["redundant_pairs"].push_back({a, b});
  if (st.fault_led_a || st.fault_led_b) {
    json leds = json::object();
    if (st.fault_led_a) leds["A"] = *st.fault_led_a;
    if (st.fault_led_b) leds["B"] = *st.fault_led_b;
    j["fault_leds"] = leds;
  }
  j["fault_inputs"] = json::array();
  for (const auto& fi : st.fault_inputs)
    j["fault_inputs"].push_back({{"point", fi.point}, {"code", std::string(to_string(fi.code))}});
  j["fault_signals"] = json::array();
  for (const auto& fs : st.fault_signals)
    j["fault_signals"].push_back({{"chain", std::string(to_string(fs.chain))},
                                  {"signal", fs.signal},
                                  {"code", std::string(to_string(fs.code))}});
  if (st.fault_reset_input) j["fault_reset_input"] = *st.fault_reset_input;
  j["panels"] = json::array();
  for (const auto& panel : st.panels) {
    json jpanel;
    jpanel["panel"] = std::string(to_string(panel.panel));
    jpanel["title"] = panel.title;
    jpanel["widgets"] = json::array();
    for (const auto& w : panel.widgets)
      jpanel["widgets"].push_back(
          {{"kind", std::string(to_string(w.kind))}, {"point", w.point}, {"label", w.label}});
    j["panels"].push_back(jpanel);
  }
  return j.dump(2) + "\n";
}

StationModel load_station(const std::filesystem::path& dir) {
  return parse_station_json(read_file(dir / "station.json"), read_file(dir / "chain_a.state"),
                            read_file(dir / "chain_b.rung"));
}

void save_station(const StationModel& station, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "station.json", station_json(station));
  write_file(dir / "chain_a.state", station.chain_a_source);
  write_file(dir / "chain_b.rung", station.chain_b_source);
}

DiagnosticList validate_station(const StationModel& st) {
  DiagnosticList out;
  auto err = [&](std::string m) { out.push_back(station_error(std::move(m))); };

  if (st.scan_period_ms <= 0) err("scan_period_ms must be positive");
  if (st.discrepancy_window_scans <= 0) err("discrepancy_window_scans must be positive");

  std::set<std::string> names;
  for (const auto& p : st.points) {
    if (!is_point_name(p.name) || is_reserved_word(p.name))
      err("invalid point name '" + p.name + "'");
    if (!names.insert(p.name).second) err("duplicate point " + p.name);
    if (p.initial != 0 && p.initial != 1) err("point " + p.name + ": initial must be 0 or 1");
    if (p.direction == Direction::Output && p.initial != 0)
      err("output " + p.name + " cannot declare an initial value");
    bool combined = p.direction == Direction::Output && p.chain == Affinity::Both;
    if (!combined && !p.sources.empty()) err("point " + p.name + ": only combined outputs have sources");
  }
  auto is_output_of = [&](const std::string& name, Affinity chain) {
    const IoPoint* p = st.find_point(name);
    return p && p->direction == Direction::Output && p->chain == chain;
  };
  auto is_input = [&](const std::string& name) {
    const IoPoint* p = st.find_point(name);
    return p && p->direction == Direction::Input;
  };
  for (const auto& p : st.points) {
    if (p.direction != Direction::Output || p.chain != Affinity::Both) continue;
    if (p.sources.size() != 2) {
      err("combined output " + p.name + " needs exactly two sources (chain A, chain B)");
      continue;
    }
    if (!is_output_of(p.sources[0], Affinity::A))
      err("combined output " + p.name + ": " + p.sources[0] + " is not a chain A output");
    if (!is_output_of(p.sources[1], Affinity::B))
      err("combined output " + p.name + ": " + p.sources[1] + " is not a chain B output");
  }
  for (const auto& [a, b] : st.redundant_pairs) {
    if (!is_input(a)) err("redundant pair member " + a + " is not an input");
    if (!is_input(b)) err("redundant pair member " + b + " is not an input");
  }
  if (!is_output_of("SHUTTER_PERMIT_A", Affinity::A)) err("missing chain A output SHUTTER_PERMIT_A");
  if (!is_output_of("SHUTTER_PERMIT_B", Affinity::B)) err("missing chain B output SHUTTER_PERMIT_B");
  if (!is_output_of("SHUTTER_PERMIT", Affinity::Both)) err("missing combined output SHUTTER_PERMIT");

  if (st.fault_led_a && !is_output_of(*st.fault_led_a, Affinity::A))
    err("fault LED " + *st.fault_led_a + " is not a chain A output");
  if (st.fault_led_b && !is_output_of(*st.fault_led_b, Affinity::B))
    err("fault LED " + *st.fault_led_b + " is not a chain B output");
  for (const auto& fi : st.fault_inputs) {
    if (!is_input(fi.point)) err("fault input " + fi.point + " is not an input");
    if (fi.code == FaultCode::NoFault) err("fault input " + fi.point + " cannot latch NoFault");
  }
  for (const auto& fs : st.fault_signals)
    if (fs.code == FaultCode::NoFault) err("fault signal " + fs.signal + " cannot latch NoFault");
  if (st.fault_reset_input && !is_input(*st.fault_reset_input))
    err("fault reset input " + *st.fault_reset_input + " is not an input");

  for (const auto& panel : st.panels)
    for (const auto& w : panel.widgets) {
      const IoPoint* p = st.find_point(w.point);
      if (!p) {
        err("widget bound to unknown point " + w.point);
        continue;
      }
      bool wants_input = w.kind == WidgetKind::Switch || w.kind == WidgetKind::MomentaryButton ||
                         w.kind == WidgetKind::KeySwitch;
      if (wants_input != (p->direction == Direction::Input))
        err(std::string(to_string(w.kind)) + " widget cannot bind " +
            (wants_input ? "output " : "input ") + w.point);
    }
  return out;
}

std::vector<IoPoint> chain_point_map(const StationModel& st, Chain chain) {
  const Affinity own = chain == Chain::A ? Affinity::A : Affinity::B;
  const auto& led = chain == Chain::A ? st.fault_led_a : st.fault_led_b;
  std::vector<IoPoint> out;
  for (const auto& p : st.points) {
    if (p.direction == Direction::Input) {
      if (p.chain == own || p.chain == Affinity::Both) out.push_back(p);
    } else if (p.chain == own && !(led && *led == p.name)) {
      out.push_back(p);
    }
  }
  return out;
}

bool StationLint::has_errors() const {
  return artts::has_errors(station) || artts::has_errors(chain_a) || artts::has_errors(chain_b);
}

bool StationLint::clean() const { return station.empty() && chain_a.empty() && chain_b.empty(); }

StationLint lint_station(const StationModel& st) {
  StationLint out;
  out.station = validate_station(st);
  auto mapped_for = [&](Chain c) {
    std::vector<std::string> names;
    for (const auto& fs : st.fault_signals)
      if (fs.chain == c) names.push_back(fs.signal);
    return names;
  };
  auto a = parse_state_program(st.chain_a_source);
  if (auto* diags = std::get_if<DiagnosticList>(&a)) {
    out.chain_a = *diags;
  } else {
    auto map = chain_point_map(st, Chain::A);
    auto mapped = mapped_for(Chain::A);
    out.chain_a = lint_program(std::get<StateProgram>(a), map, mapped);
  }
  auto b = parse_rung_program(st.chain_b_source);
  if (auto* diags = std::get_if<DiagnosticList>(&b)) {
    out.chain_b = *diags;
  } else {
    auto map = chain_point_map(st, Chain::B);
    auto mapped = mapped_for(Chain::B);
    out.chain_b = lint_program(std::get<RungProgram>(b), map, mapped);
  }
  return out;
}

}  // namespace artts
