#pragma once

// Deterministic discrete-event world: node wakes on their timers, gateway
// motion along the scenario routes, handshakes resolved through the link
// model.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "mulenet/gateway.hpp"
#include "mulenet/node.hpp"
#include "mulenet/scenario.hpp"
#include "mulenet/sensing.hpp"

namespace mulenet::sim {

/// Per-node results of a run.
struct NodeMetrics {
  NodeId id = 0;
  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;  // released from FRAM by a data-ack
  std::uint64_t buffered = 0;
  std::uint64_t dropped = 0;    // FRAM overflow
  std::uint64_t ingested = 0;   // unique records in the uplink log
  std::uint64_t successful_wakes = 0;
  std::uint64_t missed_wakes = 0;  // store empty at the timer tick
  std::optional<double> first_dead_time_s;
  std::size_t max_buffer = 0;
  double min_voltage = 0.0;
  double harvested_joules = 0.0;
  double initial_usable_joules = 0.0;
  double final_usable_joules = 0.0;
  std::array<std::uint64_t, 6> path_counts{};
  std::array<double, 6> path_energy_joules{};
  std::vector<double> latencies_s;  // generation -> first ingestion
  std::uint64_t contacts = 0;       // completed data uploads
  std::optional<double> last_contact_s;
  std::vector<gateway::RecencyClass> daily_recency;  // sampled at each midnight

  double completeness() const;
  double max_latency_s() const;
};

struct Metrics {
  std::vector<NodeMetrics> nodes;
  double sim_end_s = 0.0;
  std::uint64_t events = 0;
  std::uint64_t trace_hash = 0;
  std::size_t uplink_entries = 0;

  double completeness() const;
  const NodeMetrics& node(NodeId id) const;
  nlohmann::json to_json() const;
};

/// One resolved wake, kept for replay checks and the trace.
struct WakeLog {
  double time_s;
  NodeId node;
  std::optional<energy::CyclePath> path;  // empty when the node was dead
  std::size_t buffer_after;
};

class Simulation {
 public:
  /// Validates the scenario (throws ScenarioError).
  explicit Simulation(Scenario scenario);

  /// Processes every event with time <= t (clamped to the scenario end).
  void run_until(double t_s);
  void run_to_end() { run_until(end_time()); }
  void step_minutes(double minutes) { run_until(now_ + minutes * 60.0); }

  double now() const { return now_; }
  double end_time() const { return scenario_.duration_s(); }
  bool finished() const { return now_ >= end_time(); }

  const Scenario& scenario() const { return scenario_; }
  const gateway::GatewayState& gateway() const { return gateway_; }
  const node::NodeFsm& node(NodeId id) const;
  std::vector<NodeId> node_ids() const;

  /// Gateway position when some route is active at t.
  std::optional<Point> gateway_position(double t_s) const;
  double illuminance_at(double t_s) const { return scenario_.weather.klux_at(t_s); }
  double temperature_at(double t_s) const;
  double node_vwc_at(NodeId id, double t_s) const;
  bool node_in_canopy(NodeId id) const;

  /// Wake phase within the duty period, derived from (seed, node id).
  double wake_phase_s(NodeId id) const;
  /// First scheduled wake at or after t.
  double next_wake_at_or_after(NodeId id, double t_s) const;
  /// When the next pending wake for `id` fires.
  double pending_wake(NodeId id) const;

  Metrics metrics() const;
  const std::string& trace() const { return trace_; }
  std::uint64_t trace_hash() const { return fnv1a64(trace_); }
  const std::vector<WakeLog>& wake_log() const { return wake_log_; }
  std::string uplink_csv() const;
  /// Wall time each record was generated.
  std::optional<double> generation_time(NodeId id, std::uint32_t cycle_index) const;

 private:
  struct NodeRuntime {
    NodePlacement placement;
    node::NodeFsm fsm;
    sensing::SoilTrace soil;
    Rng rng;
    double last_update_s = 0.0;
    double next_wake_s = 0.0;
    NodeMetrics metrics;
    std::unordered_map<std::uint32_t, double> generated_at;
  };

  enum class EventKind { Wake = 0, DaySample = 1 };
  using Event = std::tuple<double, NodeId, int>;  // (time, node, kind)

  class Radio;

  void process_wake(NodeRuntime& n, double t);
  void sample_day(double t);
  void harvest_until(NodeRuntime& n, double t);
  NodeRuntime& runtime(NodeId id);
  const NodeRuntime& runtime(NodeId id) const;

  Scenario scenario_;
  std::vector<NodeRuntime> nodes_;
  std::map<NodeId, std::size_t> index_;
  gateway::GatewayState gateway_;
  Rng link_rng_;
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue_;
  double now_ = 0.0;
  std::uint64_t events_ = 0;
  std::string trace_;
  std::vector<WakeLog> wake_log_;
};

struct RunResult {
  Metrics metrics;
  std::string uplink_csv;
  std::string trace;
};

/// Full run from t = 0 to the scenario end.
RunResult run(const Scenario& scenario);

}  // namespace mulenet::sim
