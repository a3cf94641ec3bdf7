#include "mulenet/node.hpp"

#include <json.hpp>

#include <algorithm>
#include <stdexcept>

namespace mulenet::node {

using energy::CapacitorState;

std::string_view to_string(FsmState s) {
  switch (s) {
    case FsmState::S1_CpuOn: return "S1";
    case FsmState::S1B_PowerOn: return "S1B";
    case FsmState::S2_PingBase: return "S2";
    case FsmState::S3_Transmit: return "S3";
    case FsmState::S3B_SaveData: return "S3B";
    case FsmState::S4_Charging: return "S4";
    case FsmState::S5_Cloudy: return "S5";
    case FsmState::S6_Dark: return "S6";
    case FsmState::S7_Sleep: return "S7";
  }
  return "?";
}

std::string_view to_string(MessageKind k) {
  switch (k) {
    case MessageKind::Ping: return "ping";
    case MessageKind::Data: return "data";
    case MessageKind::AliveNotice: return "alive";
  }
  return "?";
}

LightCondition infer_condition(const PanelSignature& sig, const SignatureThresholds& th) {
  if (sig.panel_current_ma >= th.sunny_min_current_ma) return LightCondition::Sunny;
  if (sig.panel_current_ma < th.cloudy_max_current_ma && sig.panel_voltage_v >= th.cloudy_min_voltage_v)
    return LightCondition::Cloudy;
  return LightCondition::Dark;
}

double NodeCounters::total_drain_joules() const {
  double sum = 0.0;
  for (double e : path_energy_joules) sum += e;
  return sum;
}

NodeFsm::NodeFsm(NodeId id, CapacitorState cap, NodeConfig config)
    : id_(id), cap_(cap), buffer_(config.buffer_capacity), config_(std::move(config)) {
  config_.power.validate();
  if (!(config_.duty_cycle_minutes >= energy::kMinDutyCycleMinutes &&
        config_.duty_cycle_minutes <= energy::kMaxDutyCycleMinutes))
    throw std::invalid_argument("duty cycle outside the timer's 100 ms .. 2 h range");
}

WakeOutcome NodeFsm::wake(const WakeEnvironment& env, HandshakePort& radio) {
  if (state_ != FsmState::S7_Sleep) throw std::logic_error("wake() requires the node to be asleep");
  const auto& power = config_.power;
  const double available = energy::usable_energy(cap_);
  if (available < power.joules(CyclePath::F))
    throw energy::NodeDead("node " + std::to_string(id_) + " cannot afford a wake");

  WakeOutcome out{};
  out.visited.push_back(FsmState::S1_CpuOn);
  out.observed = infer_condition(env.panel, config_.thresholds);
  out.record = SensorRecord::from_measurement(out.observed, env.temp_c, env.sensor_voltage_v, cycle_counter_);

  const double radio_cost = std::max({power.joules(CyclePath::A), power.joules(CyclePath::B),
                                      power.joules(CyclePath::C)});
  auto save = [&] {
    out.visited.push_back(FsmState::S3B_SaveData);
    out.overflowed = buffer_.push(out.record);
  };

  switch (out.observed) {
    case LightCondition::Sunny:
      if (dark_flag_ && available >= power.joules(CyclePath::D)) {
        // Back from darkness: tell the gateway we are alive, keep the data for
        // the next cycle and let the capacitor charge.
        out.path = CyclePath::D;
        out.visited.push_back(FsmState::S4_Charging);
        radio.announce_alive(id_, cycle_counter_);
        out.messages.push_back({MessageKind::AliveNotice, cycle_counter_, 0, false});
        out.overflowed = buffer_.push(out.record);
        dark_flag_ = false;
      } else if (!dark_flag_ && available >= radio_cost) {
        out.visited.push_back(FsmState::S1B_PowerOn);
        out.visited.push_back(FsmState::S2_PingBase);
        const bool acked = radio.ping(id_, cycle_counter_);
        out.messages.push_back({MessageKind::Ping, cycle_counter_, 0, acked});
        if (!acked) {
          out.path = CyclePath::B;
          save();
        } else {
          out.visited.push_back(FsmState::S3_Transmit);
          std::vector<SensorRecord> batch = buffer_.to_vector();
          batch.push_back(out.record);
          const bool data_acked = radio.transmit(id_, batch);
          out.messages.push_back({MessageKind::Data, cycle_counter_, batch.size(), data_acked});
          if (data_acked) {
            out.path = CyclePath::A;
            out.delivered = batch.size();
            buffer_.clear();
          } else {
            out.path = CyclePath::C;
            save();
          }
        }
      } else {
        // Not enough stored energy for the radio: log only.
        out.path = CyclePath::E;
        out.radio_skipped_low_energy = true;
        out.visited.push_back(FsmState::S5_Cloudy);
        out.overflowed = buffer_.push(out.record);
      }
      break;
    case LightCondition::Cloudy:
      out.path = CyclePath::E;
      out.visited.push_back(FsmState::S5_Cloudy);
      out.overflowed = buffer_.push(out.record);
      break;
    case LightCondition::Dark:
      out.path = CyclePath::F;
      out.visited.push_back(FsmState::S6_Dark);
      out.overflowed = buffer_.push(out.record);
      dark_flag_ = true;
      break;
  }

  out.visited.push_back(FsmState::S7_Sleep);
  out.energy_joules = power.joules(out.path);
  cap_ = energy::drain_cycle(cap_, out.path, power);

  const auto slot = static_cast<std::size_t>(out.path);
  ++counters_.path_counts[slot];
  counters_.path_energy_joules[slot] += out.energy_joules;
  ++counters_.generated;
  counters_.delivered += out.delivered;
  ++cycle_counter_;
  state_ = FsmState::S7_Sleep;
  return out;
}

namespace {

std::string to_hex(const RecordBytes& b) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  for (std::uint8_t v : b) {
    s.push_back(digits[v >> 4]);
    s.push_back(digits[v & 0xF]);
  }
  return s;
}

RecordBytes from_hex(const std::string& s) {
  if (s.size() != 2 * kRecordBytes) throw std::invalid_argument("bad record hex length");
  auto nibble = [](char c) -> std::uint8_t {
    if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
    throw std::invalid_argument("bad record hex digit");
  };
  RecordBytes b{};
  for (std::size_t i = 0; i < kRecordBytes; ++i)
    b[i] = static_cast<std::uint8_t>((nibble(s[2 * i]) << 4) | nibble(s[2 * i + 1]));
  return b;
}

}  // namespace

std::string NodeFsm::snapshot() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["node_id"] = id_;
  j["dark_flag"] = dark_flag_;
  j["cycle_counter"] = cycle_counter_;
  j["capacitor"] = {{"capacitance_f", cap_.capacitance_farads()},
                    {"v_max", cap_.v_max_volts()},
                    {"v_min", cap_.v_min_volts()},
                    {"v_now", cap_.v_now_volts()}};
  j["config"] = {{"duty_cycle_minutes", config_.duty_cycle_minutes},
                 {"sunny_min_current_ma", config_.thresholds.sunny_min_current_ma},
                 {"cloudy_max_current_ma", config_.thresholds.cloudy_max_current_ma},
                 {"cloudy_min_voltage_v", config_.thresholds.cloudy_min_voltage_v},
                 {"cycle_energy_mj", config_.power.energy_mj},
                 {"buffer_capacity", config_.buffer_capacity}};
  nlohmann::json records = nlohmann::json::array();
  for (const SensorRecord& r : buffer_.records()) records.push_back(to_hex(r.encode()));
  j["buffer"] = {{"records", records}, {"overflow_count", buffer_.overflow_count()}};
  j["counters"] = {{"generated", counters_.generated},
                   {"delivered", counters_.delivered},
                   {"path_counts", counters_.path_counts},
                   {"path_energy_joules", counters_.path_energy_joules}};
  return j.dump();
}

NodeFsm NodeFsm::restore(std::string_view snapshot) {
  const auto j = nlohmann::json::parse(snapshot);
  if (j.at("schema_version").get<int>() != 1) throw std::invalid_argument("unsupported node snapshot version");
  const auto& c = j.at("capacitor");
  CapacitorState cap(c.at("capacitance_f").get<double>(), c.at("v_max").get<double>(),
                     c.at("v_min").get<double>(), c.at("v_now").get<double>());
  const auto& cfg = j.at("config");
  NodeConfig config;
  config.duty_cycle_minutes = cfg.at("duty_cycle_minutes").get<double>();
  config.thresholds.sunny_min_current_ma = cfg.at("sunny_min_current_ma").get<double>();
  config.thresholds.cloudy_max_current_ma = cfg.at("cloudy_max_current_ma").get<double>();
  config.thresholds.cloudy_min_voltage_v = cfg.at("cloudy_min_voltage_v").get<double>();
  config.power.energy_mj = cfg.at("cycle_energy_mj").get<std::array<double, 6>>();
  config.buffer_capacity = cfg.at("buffer_capacity").get<std::size_t>();

  NodeFsm fsm(j.at("node_id").get<NodeId>(), cap, config);
  fsm.dark_flag_ = j.at("dark_flag").get<bool>();
  fsm.cycle_counter_ = j.at("cycle_counter").get<std::uint32_t>();
  std::vector<SensorRecord> records;
  for (const auto& hex : j.at("buffer").at("records")) {
    const RecordBytes b = from_hex(hex.get<std::string>());
    records.push_back(SensorRecord::decode(b));
  }
  fsm.buffer_.restore(std::move(records), j.at("buffer").at("overflow_count").get<std::uint64_t>());
  const auto& k = j.at("counters");
  fsm.counters_.generated = k.at("generated").get<std::uint64_t>();
  fsm.counters_.delivered = k.at("delivered").get<std::uint64_t>();
  fsm.counters_.path_counts = k.at("path_counts").get<std::array<std::uint64_t, 6>>();
  fsm.counters_.path_energy_joules = k.at("path_energy_joules").get<std::array<double, 6>>();
  return fsm;
}

}  // namespace mulenet::node
