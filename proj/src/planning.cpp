#include "mulenet/planning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mulenet::sim {

namespace {

// Parameter interval [s0, s1] within [0, 1] where a + s(b - a) lies inside
// the disc, if any.
std::optional<std::pair<double, double>> clip_to_disc(Point a, Point b, Point c, double r) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double fx = a.x - c.x, fy = a.y - c.y;
  const double qa = dx * dx + dy * dy;
  const double qb = 2.0 * (fx * dx + fy * dy);
  const double qc = fx * fx + fy * fy - r * r;
  if (qa == 0.0) {
    if (qc <= 0.0) return std::pair{0.0, 1.0};
    return std::nullopt;
  }
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  const double s0 = std::max(0.0, (-qb - sq) / (2.0 * qa));
  const double s1 = std::min(1.0, (-qb + sq) / (2.0 * qa));
  if (s0 > s1) return std::nullopt;
  return std::pair{s0, s1};
}

Point lerp(Point a, Point b, double s) { return {a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)}; }

bool route_enters_disc(const gateway::Route& route, Point c, double r) {
  const auto& w = route.waypoints();
  if (w.size() == 1) return distance({w[0].x_m, w[0].y_m}, c) <= r;
  for (std::size_t i = 1; i < w.size(); ++i)
    if (clip_to_disc({w[i - 1].x_m, w[i - 1].y_m}, {w[i].x_m, w[i].y_m}, c, r)) return true;
  return false;
}

}  // namespace

std::vector<PickupZone> compute_pickup_zones(const Scenario& scenario) {
  std::vector<NodePlacement> nodes = scenario.nodes;
  std::sort(nodes.begin(), nodes.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::vector<PickupZone> zones;
  for (const auto& n : nodes) {
    PickupZone z;
    z.node_id = n.id;
    z.dwell_minutes = scenario.duty_cycle_minutes;
    z.range_m = scenario.link.guaranteed_range_m(!n.antenna_above_canopy);
    for (std::size_t r = 0; r < scenario.roads.size(); ++r) {
      const auto& road = scenario.roads[r];
      for (std::size_t i = 0; i + 1 < road.size(); ++i) {
        const auto clip = clip_to_disc(road[i], road[i + 1], n.position, z.range_m);
        if (!clip) continue;
        z.segments.push_back({r, i, lerp(road[i], road[i + 1], clip->first),
                              lerp(road[i], road[i + 1], clip->second)});
      }
    }
    zones.push_back(std::move(z));
  }
  return zones;
}

std::vector<ContactPrediction> whatif_route(const Simulation& sim, const gateway::Route& candidate) {
  const Scenario& sc = sim.scenario();
  const double duty_s = sc.duty_cycle_s();
  std::vector<ContactPrediction> out;
  for (NodeId id : sim.node_ids()) {
    ContactPrediction p;
    p.node_id = id;
    const auto* placement = sc.find_node(id);
    const bool canopy = !placement->antenna_above_canopy;
    if (candidate.empty() || !route_enters_disc(candidate, placement->position, sc.link.guaranteed_range_m(canopy))) {
      out.push_back(p);
      continue;
    }
    p.required_dwell_minutes = sc.duty_cycle_minutes;

    auto certain_at = [&](double t) {
      if (!candidate.active_at(t)) return false;
      return link::success_probability(sc.link, distance(placement->position, candidate.position_at(t)), canopy) >=
             1.0;
    };

    bool dark_flag = sim.node(id).dark_flag();
    const double horizon = candidate.loop() ? sim.end_time() : std::min(sim.end_time(), candidate.end_time());
    // Same arithmetic as the scheduler so times compare exactly.
    const double phase = sim.wake_phase_s(id);
    for (long long k = std::llround((sim.pending_wake(id) - phase) / duty_s);; ++k) {
      const double w = phase + static_cast<double>(k) * duty_s;
      if (w >= sim.end_time() || w > horizon) break;
      const auto panel = sc.energy.harvest.panel_at(sc.weather.klux_at(w));
      const auto cond = node::infer_condition({panel.current_ma, panel.voltage_v}, sc.thresholds);
      if (cond == energy::LightCondition::Dark) {
        dark_flag = true;
        continue;
      }
      if (cond != energy::LightCondition::Sunny) continue;
      if (dark_flag) {
        dark_flag = false;
        continue;
      }
      if (certain_at(w) && certain_at(w + gateway::kAckDelayS)) {
        p.will_contact = true;
        p.earliest_contact_time_s = w + gateway::kAckDelayS;
        p.required_dwell_minutes = 0.0;
        break;
      }
    }
    out.push_back(p);
  }
  return out;
}

nlohmann::json zones_to_json(const std::vector<PickupZone>& zones) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& z : zones) {
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& s : z.segments)
      segs.push_back({{"road", s.road_index},
                      {"segment", s.segment_index},
                      {"from", {s.from.x, s.from.y}},
                      {"to", {s.to.x, s.to.y}}});
    arr.push_back({{"node_id", z.node_id}, {"range_m", z.range_m}, {"dwell_minutes", z.dwell_minutes},
                   {"segments", segs}});
  }
  return arr;
}

nlohmann::json predictions_to_json(const std::vector<ContactPrediction>& predictions, int schema_version) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : predictions) {
    arr.push_back({{"node_id", p.node_id},
                   {"will_contact", p.will_contact},
                   {"earliest_contact_time_s",
                    p.earliest_contact_time_s ? nlohmann::json(*p.earliest_contact_time_s) : nlohmann::json(nullptr)},
                   {"required_dwell_minutes",
                    p.required_dwell_minutes ? nlohmann::json(*p.required_dwell_minutes) : nlohmann::json(nullptr)}});
  }
  return {{"schema_version", schema_version}, {"predictions", arr}};
}

double estimate_deployment_cost(long long n_nodes, long long n_gateways) {
  if (n_nodes < 0 || n_gateways < 0) throw std::invalid_argument("cost: counts must be non-negative");
  const double usd = static_cast<double>(n_nodes) * kNodeUnitCostUsd + static_cast<double>(n_gateways) * kGatewayUnitCostUsd;
  return static_cast<double>(std::llround(usd * 100.0)) / 100.0;
}

}  // namespace mulenet::sim
