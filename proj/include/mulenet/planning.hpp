#pragma once

// Pickup zones, route what-if queries and deployment cost.

#include <optional>
#include <vector>

#include <json.hpp>

#include "mulenet/gateway.hpp"
#include "mulenet/scenario.hpp"
#include "mulenet/simulation.hpp"

namespace mulenet::sim {

struct ZoneSegment {
  std::size_t road_index;
  std::size_t segment_index;  // polyline leg
  Point from;
  Point to;
};

/// Stretch of road where a parked gateway is certain to hear the node.
struct PickupZone {
  NodeId node_id = 0;
  std::vector<ZoneSegment> segments;  // empty when no road comes close enough
  double dwell_minutes = 0.0;
  double range_m = 0.0;

  bool empty() const { return segments.empty(); }
};

/// Clips each road polyline against the node's guaranteed-range disc. One
/// zone per node, in node id order.
std::vector<PickupZone> compute_pickup_zones(const Scenario& scenario);

struct ContactPrediction {
  NodeId node_id = 0;
  bool will_contact = false;
  std::optional<double> earliest_contact_time_s;
  /// 0 when contact is predicted, one duty cycle when the route enters the
  /// zone but leaves before a usable wake, empty when it never gets close.
  std::optional<double> required_dwell_minutes;
};

/// Replays the node wake schedule against `candidate` from the simulation's
/// current time. Reads `sim` only.
std::vector<ContactPrediction> whatif_route(const Simulation& sim, const gateway::Route& candidate);

nlohmann::json zones_to_json(const std::vector<PickupZone>& zones);
nlohmann::json predictions_to_json(const std::vector<ContactPrediction>& predictions, int schema_version);

inline constexpr double kNodeUnitCostUsd = 33.6779;
inline constexpr double kGatewayUnitCostUsd = 91.16;

/// USD rounded to cents. Throws std::invalid_argument for negative counts.
double estimate_deployment_cost(long long n_nodes, long long n_gateways);

}  // namespace mulenet::sim
