#include "mulenet/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mulenet::gateway {

Route::Route(std::vector<Waypoint> waypoints, bool loop) : waypoints_(std::move(waypoints)), loop_(loop) {
  for (std::size_t i = 0; i < waypoints_.size(); ++i) {
    const auto& w = waypoints_[i];
    if (!std::isfinite(w.x_m) || !std::isfinite(w.y_m) || !std::isfinite(w.time_s))
      throw std::invalid_argument("waypoint " + std::to_string(i) + " is not finite");
    if (i > 0 && !(w.time_s > waypoints_[i - 1].time_s))
      throw std::invalid_argument("waypoint " + std::to_string(i) + ": times must be strictly increasing");
  }
}

double Route::start_time() const {
  if (waypoints_.empty()) throw std::logic_error("empty route");
  return waypoints_.front().time_s;
}

double Route::end_time() const {
  if (waypoints_.empty()) throw std::logic_error("empty route");
  return waypoints_.back().time_s;
}

bool Route::active_at(double t) const {
  if (waypoints_.empty() || t < start_time()) return false;
  return loop_ || t <= end_time();
}

Route Route::shifted(double dt_s) const {
  Route r = *this;
  for (auto& w : r.waypoints_) w.time_s += dt_s;
  return r;
}

Point Route::position_at(double t) const {
  if (waypoints_.empty()) throw std::logic_error("position_at on an empty route");
  const auto& first = waypoints_.front();
  const auto& last = waypoints_.back();
  if (t <= first.time_s) return {first.x_m, first.y_m};
  if (t > last.time_s) {
    const double span = last.time_s - first.time_s;
    if (!loop_ || span <= 0.0) return {last.x_m, last.y_m};
    t = first.time_s + std::fmod(t - first.time_s, span);
  }
  auto it = std::lower_bound(waypoints_.begin(), waypoints_.end(), t,
                             [](const Waypoint& w, double time) { return w.time_s < time; });
  if (it == waypoints_.begin()) return {first.x_m, first.y_m};
  const Waypoint& b = *it;
  const Waypoint& a = *(it - 1);
  const double f = (t - a.time_s) / (b.time_s - a.time_s);
  return {a.x_m + f * (b.x_m - a.x_m), a.y_m + f * (b.y_m - a.y_m)};
}

Point position_at(const Route& route, double time_s) { return route.position_at(time_s); }

std::string_view to_string(RecencyClass c) {
  switch (c) {
    case RecencyClass::Green: return "green";
    case RecencyClass::Yellow: return "yellow";
    case RecencyClass::Red: return "red";
  }
  return "?";
}

RecencyClass recency_classify(double last_contact_s, double now_s) {
  const double age = now_s - last_contact_s;
  if (age < 0.0) throw std::invalid_argument("recency: contact lies in the future");
  if (age < kGreenMaxAgeS) return RecencyClass::Green;
  if (age <= kYellowMaxAgeS) return RecencyClass::Yellow;
  return RecencyClass::Red;
}

RecencyClass recency_classify(std::optional<double> last_contact_s, double now_s) {
  if (!last_contact_s) return RecencyClass::Red;
  return recency_classify(*last_contact_s, now_s);
}

GatewayState::GatewayState(double duty_cycle_s) : duty_cycle_s_(duty_cycle_s) {
  if (!(duty_cycle_s_ > 0.0)) throw std::invalid_argument("gateway duty cycle must be positive");
}

double GatewayState::ack_time_for(double ping_time_s) const {
  return std::max(ping_time_s, busy_until_s_) + kAckDelayS;
}

PingReply GatewayState::handle_ping(NodeId /*node*/, double downlink_distance_m, bool in_canopy,
                                    const link::LinkModel& link, double t, Rng& rng) {
  PingReply reply;
  reply.ack_time_s = ack_time_for(t);
  reply.acked = link::packet_success(link, downlink_distance_m, in_canopy, rng);
  if (reply.acked) busy_until_s_ = reply.ack_time_s + kExchangeTailS;
  return reply;
}

IngestResult GatewayState::ingest_records(NodeId node, std::span<const SensorRecord> records, double t) {
  IngestResult result;
  if (!records.empty()) {
    std::uint32_t anchor = records.front().cycle_index;
    for (const auto& r : records) anchor = std::max(anchor, r.cycle_index);
    const auto stamped = node::reconstruct_timestamps(records, anchor, t, duty_cycle_s_);
    for (const auto& [when, rec] : stamped) {
      if (seen_.insert({node, rec.cycle_index}).second) {
        log_.push_back({t, node, rec, when});
        ++result.new_records;
      } else {
        ++result.duplicates;
      }
    }
  }
  auto [it, inserted] = last_contact_.try_emplace(node, t);
  if (!inserted) it->second = std::max(it->second, t);
  return result;
}

std::optional<double> GatewayState::last_contact(NodeId node) const {
  auto it = last_contact_.find(node);
  if (it == last_contact_.end()) return std::nullopt;
  return it->second;
}

bool GatewayState::has_record(NodeId node, std::uint32_t cycle_index) const {
  return seen_.contains({node, cycle_index});
}

void write_uplink_csv(std::ostream& out, std::span<const UplinkEntry> log) {
  out << kUplinkCsvHeader << '\n';
  for (const auto& e : log) {
    out << format_decimal(e.receive_time_s) << ',' << e.node_id << ',' << e.record.cycle_index << ','
        << energy::to_string(e.record.sun_state) << ',' << format_fixed(e.record.temp_c(), 2) << ','
        << format_fixed(e.record.voltage_v(), 4) << ',' << format_decimal(e.reconstructed_time_s) << '\n';
  }
}

std::vector<UplinkEntry> read_uplink_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kUplinkCsvHeader) throw std::runtime_error("uplink CSV: bad header");
  std::vector<UplinkEntry> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (f.size() != 7) throw std::runtime_error("uplink CSV line " + std::to_string(line_no) + ": expected 7 fields");
    try {
      UplinkEntry e;
      e.receive_time_s = parse_decimal(f[0]);
      e.node_id = static_cast<NodeId>(std::stoul(f[1]));
      const auto cycle = static_cast<std::uint32_t>(std::stoul(f[2]));
      e.record = SensorRecord::from_measurement(energy::light_condition_from_string(f[3]), parse_decimal(f[4]),
                                                parse_decimal(f[5]), cycle);
      e.reconstructed_time_s = parse_decimal(f[6]);
      out.push_back(e);
    } catch (const std::exception& ex) {
      throw std::runtime_error("uplink CSV line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return out;
}

}  // namespace mulenet::gateway
