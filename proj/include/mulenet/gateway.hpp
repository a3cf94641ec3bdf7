#pragma once

// Mobile gateway ("data mule"): route following, handshake responder,
// deduplicating uplink log and contact-recency ledger.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "mulenet/common.hpp"
#include "mulenet/link.hpp"
#include "mulenet/node.hpp"

namespace mulenet::gateway {

using node::NodeId;
using node::SensorRecord;

struct Waypoint {
  double x_m;
  double y_m;
  double time_s;

  friend bool operator==(const Waypoint&, const Waypoint&) = default;
};

class Route {
 public:
  Route() = default;
  /// Throws std::invalid_argument when times are not strictly increasing.
  explicit Route(std::vector<Waypoint> waypoints, bool loop = false);

  /// Piecewise-linear position. Clamps to the end points outside the span
  /// unless the route loops, in which case time wraps modulo the span.
  Point position_at(double time_s) const;

  bool empty() const { return waypoints_.empty(); }
  bool loop() const { return loop_; }
  double start_time() const;
  double end_time() const;
  /// True while the vehicle is out on this route (always after start for a
  /// looping route).
  bool active_at(double time_s) const;
  const std::vector<Waypoint>& waypoints() const { return waypoints_; }
  /// Same path shifted in time.
  Route shifted(double dt_s) const;

  friend bool operator==(const Route&, const Route&) = default;

 private:
  std::vector<Waypoint> waypoints_;
  bool loop_ = false;
};

Point position_at(const Route& route, double time_s);

enum class RecencyClass { Green, Yellow, Red };

std::string_view to_string(RecencyClass c);

inline constexpr double kGreenMaxAgeS = 24.0 * 3600.0;
inline constexpr double kYellowMaxAgeS = 72.0 * 3600.0;

/// Green below 24 h, Yellow through 72 h inclusive, Red beyond. Throws
/// std::invalid_argument when now < last.
RecencyClass recency_classify(double last_contact_s, double now_s);
/// Never contacted counts as Red.
RecencyClass recency_classify(std::optional<double> last_contact_s, double now_s);

struct UplinkEntry {
  double receive_time_s;
  NodeId node_id;
  SensorRecord record;
  double reconstructed_time_s;

  friend bool operator==(const UplinkEntry&, const UplinkEntry&) = default;
};

struct PingReply {
  bool acked = false;
  double ack_time_s = 0.0;
};

struct IngestResult {
  std::size_t new_records = 0;
  std::size_t duplicates = 0;
  bool data_ack = true;
};

/// Fixed handshake timing relative to the node's ping.
inline constexpr double kAckDelayS = 1.0;        // downlink receive window
inline constexpr double kExchangeTailS = 1.0;    // data upload + data-ack

class GatewayState {
 public:
  explicit GatewayState(double duty_cycle_s = 1200.0);

  Point position() const { return position_; }
  void set_position(Point p) { position_ = p; }

  /// When an ack for a ping arriving at `t` would go out, given that the
  /// gateway serves one exchange at a time in arrival order.
  double ack_time_for(double ping_time_s) const;

  /// Answers a ping received at `t`. The ack goes out at ack_time_for(t) if
  /// the downlink at `downlink_distance_m` survives the link model. Does not
  /// touch last_contact.
  PingReply handle_ping(NodeId node, double downlink_distance_m, bool in_canopy,
                        const link::LinkModel& link, double t, Rng& rng);

  /// Deduplicates on (node, cycle index), appends new records stamped with
  /// `t` and reconstructed wall times anchored on the newest index in the
  /// batch, and records the contact.
  IngestResult ingest_records(NodeId node, std::span<const SensorRecord> records, double t);

  const std::vector<UplinkEntry>& uplink_log() const { return log_; }
  const std::map<NodeId, double>& last_contact() const { return last_contact_; }
  std::optional<double> last_contact(NodeId node) const;
  bool has_record(NodeId node, std::uint32_t cycle_index) const;
  double duty_cycle_s() const { return duty_cycle_s_; }

 private:
  double duty_cycle_s_;
  Point position_{};
  double busy_until_s_ = -1e300;
  std::vector<UplinkEntry> log_;
  std::set<std::pair<NodeId, std::uint32_t>> seen_;
  std::map<NodeId, double> last_contact_;
};

inline constexpr std::string_view kUplinkCsvHeader =
    "receive_time_s,node_id,cycle_index,sun_state,temp_c,voltage_v,reconstructed_time_s";

/// temp_c with 2 decimals and voltage_v with 4, exactly the wire resolution.
void write_uplink_csv(std::ostream& out, std::span<const UplinkEntry> log);
std::vector<UplinkEntry> read_uplink_csv(std::istream& in);

}  // namespace mulenet::gateway
