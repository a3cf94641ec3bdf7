#pragma once

// Scenario description and its JSON file format (schema_version 1).
//
// {
//   "schema_version": 1,
//   "name": "demo",
//   "field": [[0,0],[1000,0],[1000,800],[0,800]],
//   "roads": [[[0,400],[1000,400]]],
//   "nodes": [{"id": 1, "position": [200,300], "soil": "Osco",
//              "antenna_above_canopy": true, "initial_vwc": 0.3,
//              "watering": [[36000, 0.1]]}],
//   "routes": [{"waypoints": [[0,400,28800],[1000,400,30600]],
//               "daily": true, "loop": false, "days": [0,2]}],
//   "weather": {"default_day": "sunny", "days": {"3": "cloudy"},
//               "sunny_klux": 80, "cloudy_klux": 8,
//               "custom": {"4": [72 kLux values]}},
//   "duty_cycle_minutes": 20, "duration_days": 7, "rng_seed": 42,
//   "link": {"tx_power_dbm": 2, "clear_los_range_m": 1000,
//            "canopy_range_m": 250, "rolloff_width_m": 0},
//   "energy": {"capacitance_f": 1, "v_max": 5.5, "v_min": 3.3,
//              "initial_voltage": 5.5, "full_sun_power_mw": 12,
//              "leakage_mw": 0, "cycle_energy_mj": {"A": 429.403, ...}},
//   "sensor": {"electrode": "ZnSS", "noise_sigma_v": 0.002},
//   "thresholds": {"sunny_min_current_ma": 0.5, ...},
//   "buffer_capacity": 4600
// }
//
// Everything except field, nodes and schema_version has a default. Times are
// seconds since scenario start; daily route waypoints are seconds since
// midnight.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mulenet/common.hpp"
#include "mulenet/energy.hpp"
#include "mulenet/gateway.hpp"
#include "mulenet/link.hpp"
#include "mulenet/node.hpp"
#include "mulenet/sensing.hpp"

namespace mulenet::sim {

using node::NodeId;

inline constexpr int kScenarioSchemaVersion = 1;
inline constexpr double kDaySeconds = 86400.0;
inline constexpr double kWeatherSlotSeconds = 1200.0;
inline constexpr int kSlotsPerDay = 72;

/// Collects every validation problem found, one line each.
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct NodePlacement {
  NodeId id = 0;
  Point position;
  std::string soil = "Osco";
  bool antenna_above_canopy = true;
  std::optional<double> initial_vwc;
  std::vector<sensing::WateringEvent> watering;
};

struct RoutePlan {
  gateway::Route route;
  bool daily = false;     // waypoint times are seconds since midnight
  std::vector<int> days;  // restricts a daily route; empty = every day
};

enum class DayPattern { Sunny, Cloudy, Dark, AlwaysSunny, Custom };

std::string_view to_string(DayPattern p);
DayPattern day_pattern_from_string(std::string_view s);

/// Piecewise-constant illuminance in 20-minute slots. Sunny/cloudy days are
/// dark 00:00-06:00 and 18:00-24:00.
struct Weather {
  DayPattern default_day = DayPattern::Sunny;
  std::map<int, DayPattern> days;
  std::map<int, std::vector<double>> custom;  // day -> 72 kLux slots
  double sunny_klux = 80.0;
  double cloudy_klux = 8.0;

  double klux_at(double time_s) const;
  DayPattern pattern_for(int day) const;
};

struct EnergyConfig {
  double capacitance_f = 1.0;
  double v_max = 5.5;
  double v_min = 3.3;
  double initial_voltage = 5.5;
  energy::CyclePowerTable power;
  energy::HarvestProfile harvest = energy::HarvestProfile::node_default();

  energy::CapacitorState initial_capacitor() const;
};

struct Scenario {
  int schema_version = kScenarioSchemaVersion;
  std::string name;
  std::vector<Point> field;
  std::vector<NodePlacement> nodes;
  std::vector<std::vector<Point>> roads;
  std::vector<RoutePlan> routes;
  Weather weather;
  double duty_cycle_minutes = 20.0;
  double duration_days = 1.0;
  std::uint64_t rng_seed = 1;
  link::LinkModel link;
  EnergyConfig energy;
  sensing::GalvanicSensorModel sensor = sensing::GalvanicSensorModel::zinc_stainless();
  node::SignatureThresholds thresholds;
  std::size_t buffer_capacity = node::kFramCapacityRecords;

  double duty_cycle_s() const { return duty_cycle_minutes * 60.0; }
  double duration_s() const { return duration_days * kDaySeconds; }
  const NodePlacement* find_node(NodeId id) const;

  /// Throws ScenarioError listing every problem.
  void validate() const;
};

bool point_in_polygon(Point p, const std::vector<Point>& polygon);

/// Parses and validates. Throws ScenarioError (bad content) or
/// nlohmann::json::exception wrapped in ScenarioError (bad syntax/types).
Scenario scenario_from_json(const nlohmann::json& j);
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::string& path);
nlohmann::json scenario_to_json(const Scenario& s);

/// Route file: {"schema_version": 1, "waypoints": [[x, y, t], ...], "loop": false}.
/// Problems are reported per field ("waypoints[2].t: ...").
gateway::Route route_from_json(const nlohmann::json& j);
nlohmann::json route_to_json(const gateway::Route& r);

}  // namespace mulenet::sim
