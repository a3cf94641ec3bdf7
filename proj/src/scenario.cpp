#include "mulenet/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace mulenet::sim {

using nlohmann::json;

namespace {

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out = "invalid scenario:";
  for (const auto& l : lines) out.append("\n  ").append(l);
  return out;
}

Point point_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

json point_to_json(Point p) { return json::array({p.x, p.y}); }

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> problems)
    : std::runtime_error(join_lines(problems)), problems_(std::move(problems)) {}

std::string_view to_string(DayPattern p) {
  switch (p) {
    case DayPattern::Sunny: return "sunny";
    case DayPattern::Cloudy: return "cloudy";
    case DayPattern::Dark: return "dark";
    case DayPattern::AlwaysSunny: return "always_sunny";
    case DayPattern::Custom: return "custom";
  }
  return "?";
}

DayPattern day_pattern_from_string(std::string_view s) {
  if (s == "sunny") return DayPattern::Sunny;
  if (s == "cloudy") return DayPattern::Cloudy;
  if (s == "dark") return DayPattern::Dark;
  if (s == "always_sunny") return DayPattern::AlwaysSunny;
  if (s == "custom") return DayPattern::Custom;
  throw std::invalid_argument("unknown day pattern '" + std::string(s) + "'");
}

DayPattern Weather::pattern_for(int day) const {
  if (custom.contains(day)) return DayPattern::Custom;
  if (auto it = days.find(day); it != days.end()) return it->second;
  return default_day;
}

double Weather::klux_at(double time_s) const {
  const double day_f = std::floor(time_s / kDaySeconds);
  const int day = static_cast<int>(day_f);
  const double in_day = time_s - day_f * kDaySeconds;
  const int slot = std::clamp(static_cast<int>(in_day / kWeatherSlotSeconds), 0, kSlotsPerDay - 1);
  // Light from 06:00 to 18:00.
  const bool daylight = slot >= 18 && slot < 54;
  switch (pattern_for(day)) {
    case DayPattern::Sunny: return daylight ? sunny_klux : 0.0;
    case DayPattern::Cloudy: return daylight ? cloudy_klux : 0.0;
    case DayPattern::Dark: return 0.0;
    case DayPattern::AlwaysSunny: return sunny_klux;
    case DayPattern::Custom: return custom.at(day)[static_cast<std::size_t>(slot)];
  }
  return 0.0;
}

energy::CapacitorState EnergyConfig::initial_capacitor() const {
  return {capacitance_f, v_max, v_min, initial_voltage};
}

const NodePlacement* Scenario::find_node(NodeId id) const {
  for (const auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

bool point_in_polygon(Point p, const std::vector<Point>& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  // Boundary counts as inside.
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point a = poly[j], b = poly[i];
    const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    if (std::abs(cross) <= 1e-9 * std::max(1.0, len) && p.x >= std::min(a.x, b.x) - 1e-9 &&
        p.x <= std::max(a.x, b.x) + 1e-9 && p.y >= std::min(a.y, b.y) - 1e-9 && p.y <= std::max(a.y, b.y) + 1e-9)
      return true;
  }
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point a = poly[j], b = poly[i];
    if ((b.y > p.y) != (a.y > p.y)) {
      const double x_cross = b.x + (p.y - b.y) * (a.x - b.x) / (a.y - b.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

void Scenario::validate() const {
  std::vector<std::string> problems;
  if (schema_version != kScenarioSchemaVersion)
    problems.push_back("schema_version: expected " + std::to_string(kScenarioSchemaVersion));
  if (field.size() < 3) problems.push_back("field: polygon needs at least 3 vertices");
  if (nodes.empty()) problems.push_back("nodes: at least one node is required");
  std::set<NodeId> ids;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    const std::string where = "nodes[" + std::to_string(i) + "]";
    if (!ids.insert(n.id).second) problems.push_back(where + ".id: duplicate id " + std::to_string(n.id));
    if (field.size() >= 3 && !point_in_polygon(n.position, field))
      problems.push_back(where + ".position: node " + std::to_string(n.id) + " lies outside the field");
    try {
      const auto soil = sensing::SoilType::preset(n.soil);
      if (n.initial_vwc && (*n.initial_vwc < 0.0 || *n.initial_vwc > soil.saturation_vwc))
        problems.push_back(where + ".initial_vwc: outside [0, saturation]");
    } catch (const std::invalid_argument& e) {
      problems.push_back(where + ".soil: " + e.what());
    }
  }
  for (std::size_t i = 0; i < roads.size(); ++i)
    if (roads[i].size() < 2) problems.push_back("roads[" + std::to_string(i) + "]: needs at least 2 points");
  for (std::size_t i = 0; i < routes.size(); ++i) {
    const auto& r = routes[i];
    const std::string where = "routes[" + std::to_string(i) + "]";
    if (r.route.empty()) problems.push_back(where + ".waypoints: route has no waypoints");
    if (!r.daily && !r.days.empty()) problems.push_back(where + ".days: only valid for daily routes");
    if (r.daily && !r.route.empty() &&
        (r.route.start_time() < 0.0 || r.route.end_time() > kDaySeconds))
      problems.push_back(where + ".waypoints: daily route times must lie within [0, 86400]");
  }
  if (!(duty_cycle_minutes >= energy::kMinDutyCycleMinutes && duty_cycle_minutes <= energy::kMaxDutyCycleMinutes))
    problems.push_back("duty_cycle_minutes: outside the timer's 100 ms .. 2 h range");
  if (!(duration_days > 0.0)) problems.push_back("duration_days: must be positive");
  for (const auto& [day, pattern] : weather.days)
    if (pattern == DayPattern::Custom && !weather.custom.contains(day))
      problems.push_back("weather.days." + std::to_string(day) + ": custom day without slots");
  if (weather.default_day == DayPattern::Custom) problems.push_back("weather.default_day: cannot be custom");
  for (const auto& [day, slots] : weather.custom)
    if (slots.size() != static_cast<std::size_t>(kSlotsPerDay))
      problems.push_back("weather.custom." + std::to_string(day) + ": needs 72 slots");
  try {
    link.validate();
  } catch (const std::invalid_argument& e) {
    problems.push_back(std::string("link: ") + e.what());
  }
  try {
    energy.initial_capacitor();
    energy.power.validate();
    energy.harvest.validate();
  } catch (const std::invalid_argument& e) {
    problems.push_back(std::string("energy: ") + e.what());
  }
  if (buffer_capacity == 0) problems.push_back("buffer_capacity: must be positive");
  if (!problems.empty()) throw ScenarioError(std::move(problems));
}

gateway::Route route_from_json(const json& j) {
  std::vector<std::string> problems;
  if (!j.is_object()) throw ScenarioError({"route: expected an object"});
  if (j.contains("schema_version") && j["schema_version"] != kScenarioSchemaVersion)
    problems.push_back("schema_version: expected " + std::to_string(kScenarioSchemaVersion));
  if (!j.contains("waypoints") || !j["waypoints"].is_array()) {
    problems.push_back("waypoints: required array of [x, y, t]");
    throw ScenarioError(std::move(problems));
  }
  std::vector<gateway::Waypoint> wps;
  const auto& arr = j["waypoints"];
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = "waypoints[" + std::to_string(i) + "]";
    const auto& w = arr[i];
    if (!w.is_array() || w.size() != 3 || !w[0].is_number() || !w[1].is_number() || !w[2].is_number()) {
      problems.push_back(where + ": expected [x, y, t] numbers");
      continue;
    }
    gateway::Waypoint wp{w[0].get<double>(), w[1].get<double>(), w[2].get<double>()};
    if (!wps.empty() && !(wp.time_s > wps.back().time_s))
      problems.push_back(where + ".t: times must be strictly increasing");
    wps.push_back(wp);
  }
  bool loop = false;
  if (j.contains("loop")) {
    if (!j["loop"].is_boolean()) problems.push_back("loop: expected boolean");
    else loop = j["loop"].get<bool>();
  }
  if (!problems.empty()) throw ScenarioError(std::move(problems));
  return gateway::Route(std::move(wps), loop);
}

json route_to_json(const gateway::Route& r) {
  json wps = json::array();
  for (const auto& w : r.waypoints()) wps.push_back(json::array({w.x_m, w.y_m, w.time_s}));
  return {{"schema_version", kScenarioSchemaVersion}, {"waypoints", wps}, {"loop", r.loop()}};
}

Scenario scenario_from_json(const json& j) {
  Scenario s;
  std::vector<std::string> route_problems;
  try {
    if (!j.is_object()) throw ScenarioError({"scenario: expected a JSON object"});
    if (!j.contains("schema_version")) throw ScenarioError({"schema_version: required"});
    s.schema_version = j.at("schema_version").get<int>();
    s.name = j.value("name", std::string{});
    for (const auto& p : j.at("field")) s.field.push_back(point_from_json(p));
    if (j.contains("roads"))
      for (const auto& road : j["roads"]) {
        std::vector<Point> pts;
        for (const auto& p : road) pts.push_back(point_from_json(p));
        s.roads.push_back(std::move(pts));
      }
    for (const auto& nj : j.at("nodes")) {
      NodePlacement n;
      n.id = nj.at("id").get<NodeId>();
      n.position = point_from_json(nj.at("position"));
      n.soil = nj.value("soil", std::string("Osco"));
      n.antenna_above_canopy = nj.value("antenna_above_canopy", true);
      if (nj.contains("initial_vwc")) n.initial_vwc = nj["initial_vwc"].get<double>();
      if (nj.contains("watering"))
        for (const auto& w : nj["watering"]) n.watering.push_back({w.at(0).get<double>(), w.at(1).get<double>()});
      s.nodes.push_back(std::move(n));
    }
    if (j.contains("routes"))
      for (std::size_t i = 0; i < j["routes"].size(); ++i) {
        const auto& rj = j["routes"][i];
        RoutePlan plan;
        try {
          plan.route = route_from_json(rj);
        } catch (const ScenarioError& e) {
          for (const auto& p : e.problems()) route_problems.push_back("routes[" + std::to_string(i) + "]." + p);
          continue;
        }
        plan.daily = rj.value("daily", false);
        if (rj.contains("days")) plan.days = rj["days"].get<std::vector<int>>();
        s.routes.push_back(std::move(plan));
      }
    if (j.contains("weather")) {
      const auto& w = j["weather"];
      if (w.contains("default_day")) s.weather.default_day = day_pattern_from_string(w["default_day"].get<std::string>());
      if (w.contains("days"))
        for (const auto& [day, pat] : w["days"].items())
          s.weather.days[std::stoi(day)] = day_pattern_from_string(pat.get<std::string>());
      if (w.contains("custom"))
        for (const auto& [day, slots] : w["custom"].items())
          s.weather.custom[std::stoi(day)] = slots.get<std::vector<double>>();
      s.weather.sunny_klux = w.value("sunny_klux", s.weather.sunny_klux);
      s.weather.cloudy_klux = w.value("cloudy_klux", s.weather.cloudy_klux);
    }
    s.duty_cycle_minutes = j.value("duty_cycle_minutes", s.duty_cycle_minutes);
    s.duration_days = j.value("duration_days", s.duration_days);
    s.rng_seed = j.value("rng_seed", s.rng_seed);
    if (j.contains("link")) {
      const auto& l = j["link"];
      s.link.tx_power_dbm = l.value("tx_power_dbm", s.link.tx_power_dbm);
      s.link.clear_los_range_m = l.value("clear_los_range_m", s.link.clear_los_range_m);
      s.link.canopy_range_m = l.value("canopy_range_m", s.link.canopy_range_m);
      s.link.rolloff_width_m = l.value("rolloff_width_m", s.link.rolloff_width_m);
    }
    if (j.contains("energy")) {
      const auto& e = j["energy"];
      auto& en = s.energy;
      en.capacitance_f = e.value("capacitance_f", en.capacitance_f);
      en.v_max = e.value("v_max", en.v_max);
      en.v_min = e.value("v_min", en.v_min);
      en.initial_voltage = e.value("initial_voltage", en.v_max);
      en.harvest = energy::HarvestProfile::node_default(e.value("full_sun_power_mw", 12.0));
      en.harvest.leakage_mw = e.value("leakage_mw", 0.0);
      if (e.contains("cycle_energy_mj"))
        for (const auto& [key, val] : e["cycle_energy_mj"].items()) {
          if (key.size() != 1) throw ScenarioError({"energy.cycle_energy_mj: keys are A..F"});
          en.power.energy_mj[static_cast<std::size_t>(energy::cycle_path_from_char(key[0]))] = val.get<double>();
        }
    }
    if (j.contains("sensor")) {
      const auto& se = j["sensor"];
      if (se.contains("electrode")) {
        const auto pair = sensing::electrode_pair_from_string(se["electrode"].get<std::string>());
        s.sensor = pair == sensing::ElectrodePair::ZnAl ? sensing::GalvanicSensorModel::zinc_aluminum()
                                                         : sensing::GalvanicSensorModel::zinc_stainless();
      }
      s.sensor.noise_sigma_v = se.value("noise_sigma_v", s.sensor.noise_sigma_v);
      s.sensor.temp_coeff_v_per_c = se.value("temp_coeff_v_per_c", s.sensor.temp_coeff_v_per_c);
    }
    if (j.contains("thresholds")) {
      const auto& t = j["thresholds"];
      s.thresholds.sunny_min_current_ma = t.value("sunny_min_current_ma", s.thresholds.sunny_min_current_ma);
      s.thresholds.cloudy_max_current_ma = t.value("cloudy_max_current_ma", s.thresholds.cloudy_max_current_ma);
      s.thresholds.cloudy_min_voltage_v = t.value("cloudy_min_voltage_v", s.thresholds.cloudy_min_voltage_v);
    }
    s.buffer_capacity = j.value("buffer_capacity", s.buffer_capacity);
  } catch (const json::exception& e) {
    throw ScenarioError({std::string("malformed scenario: ") + e.what()});
  } catch (const std::invalid_argument& e) {
    throw ScenarioError({std::string("malformed scenario: ") + e.what()});
  }
  try {
    s.validate();
  } catch (const ScenarioError& e) {
    route_problems.insert(route_problems.end(), e.problems().begin(), e.problems().end());
  }
  if (!route_problems.empty()) throw ScenarioError(std::move(route_problems));
  return s;
}

Scenario parse_scenario(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError({std::string("scenario is not valid JSON: ") + e.what()});
  }
  return scenario_from_json(j);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError({"cannot open scenario file '" + path + "'"});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

json scenario_to_json(const Scenario& s) {
  json j;
  j["schema_version"] = s.schema_version;
  j["name"] = s.name;
  j["field"] = json::array();
  for (Point p : s.field) j["field"].push_back(point_to_json(p));
  j["roads"] = json::array();
  for (const auto& road : s.roads) {
    json r = json::array();
    for (Point p : road) r.push_back(point_to_json(p));
    j["roads"].push_back(r);
  }
  j["nodes"] = json::array();
  for (const auto& n : s.nodes) {
    json nj = {{"id", n.id}, {"position", point_to_json(n.position)}, {"soil", n.soil},
               {"antenna_above_canopy", n.antenna_above_canopy}};
    if (n.initial_vwc) nj["initial_vwc"] = *n.initial_vwc;
    json w = json::array();
    for (const auto& e : n.watering) w.push_back(json::array({e.time_s, e.added_vwc}));
    nj["watering"] = w;
    j["nodes"].push_back(nj);
  }
  j["routes"] = json::array();
  for (const auto& r : s.routes) {
    json rj = route_to_json(r.route);
    rj["daily"] = r.daily;
    if (!r.days.empty()) rj["days"] = r.days;
    j["routes"].push_back(rj);
  }
  json days = json::object();
  for (const auto& [d, p] : s.weather.days) days[std::to_string(d)] = std::string(to_string(p));
  json custom = json::object();
  for (const auto& [d, slots] : s.weather.custom) custom[std::to_string(d)] = slots;
  j["weather"] = {{"default_day", std::string(to_string(s.weather.default_day))},
                  {"days", days},
                  {"custom", custom},
                  {"sunny_klux", s.weather.sunny_klux},
                  {"cloudy_klux", s.weather.cloudy_klux}};
  j["duty_cycle_minutes"] = s.duty_cycle_minutes;
  j["duration_days"] = s.duration_days;
  j["rng_seed"] = s.rng_seed;
  j["link"] = {{"tx_power_dbm", s.link.tx_power_dbm},
               {"clear_los_range_m", s.link.clear_los_range_m},
               {"canopy_range_m", s.link.canopy_range_m},
               {"rolloff_width_m", s.link.rolloff_width_m}};
  json energies = json::object();
  for (auto p : energy::kAllPaths) energies[std::string(1, energy::to_char(p))] = s.energy.power.millijoules(p);
  j["energy"] = {{"capacitance_f", s.energy.capacitance_f},
                 {"v_max", s.energy.v_max},
                 {"v_min", s.energy.v_min},
                 {"initial_voltage", s.energy.initial_voltage},
                 {"full_sun_power_mw", s.energy.harvest.full_sun_power_mw()},
                 {"leakage_mw", s.energy.harvest.leakage_mw},
                 {"cycle_energy_mj", energies}};
  j["sensor"] = {{"electrode", std::string(sensing::to_string(s.sensor.electrode_pair))},
                 {"noise_sigma_v", s.sensor.noise_sigma_v},
                 {"temp_coeff_v_per_c", s.sensor.temp_coeff_v_per_c}};
  j["thresholds"] = {{"sunny_min_current_ma", s.thresholds.sunny_min_current_ma},
                     {"cloudy_max_current_ma", s.thresholds.cloudy_max_current_ma},
                     {"cloudy_min_voltage_v", s.thresholds.cloudy_min_voltage_v}};
  j["buffer_capacity"] = s.buffer_capacity;
  return j;
}

}  // namespace mulenet::sim
