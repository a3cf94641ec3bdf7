#pragma once

// Battery-free node runtime: wake FSM, panel-signature inference, FRAM
// store-and-forward buffer and the node side of the handshake.

#include <array>
#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mulenet/energy.hpp"

namespace mulenet::node {

using energy::CyclePath;
using energy::LightCondition;

using NodeId = std::uint32_t;

enum class FsmState { S1_CpuOn, S1B_PowerOn, S2_PingBase, S3_Transmit, S3B_SaveData, S4_Charging,
                      S5_Cloudy, S6_Dark, S7_Sleep };

std::string_view to_string(FsmState s);

// --- 9-byte reading ---------------------------------------------------------

inline constexpr std::size_t kRecordBytes = 9;
using RecordBytes = std::array<std::uint8_t, kRecordBytes>;

/// One logged reading. Wire layout, little-endian:
///   [0]    flags: bits 0-1 sun state (0 dark, 1 cloudy, 2 sunny), rest zero
///   [1..2] temperature, signed centi-degrees C
///   [3..4] cell voltage, unsigned tenths of a millivolt
///   [5..8] cycle index
struct SensorRecord {
  LightCondition sun_state = LightCondition::Dark;
  std::int16_t temp_centi_c = 0;
  std::uint16_t voltage_tenth_mv = 0;
  std::uint32_t cycle_index = 0;

  /// Quantizes to the wire resolution. Throws std::out_of_range when the
  /// temperature or voltage cannot be represented.
  static SensorRecord from_measurement(LightCondition sun, double temp_c, double voltage_v,
                                       std::uint32_t cycle_index);

  double temp_c() const { return temp_centi_c / 100.0; }
  double voltage_v() const { return voltage_tenth_mv / 10000.0; }

  RecordBytes encode() const;
  /// Throws std::invalid_argument on an invalid sun state or reserved bits.
  static SensorRecord decode(std::span<const std::uint8_t, kRecordBytes> bytes);

  friend bool operator==(const SensorRecord&, const SensorRecord&) = default;
};

// --- FRAM ring buffer -------------------------------------------------------

inline constexpr std::size_t kFramCapacityRecords = 4600;

/// FIFO store-and-forward queue. At capacity the oldest record is dropped
/// and counted.
class FramBuffer {
 public:
  explicit FramBuffer(std::size_t capacity_records = kFramCapacityRecords);

  /// Returns true when the push displaced the oldest record.
  bool push(const SensorRecord& rec);
  void clear() { records_.clear(); }

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t bytes_used() const { return records_.size() * kRecordBytes; }
  std::uint64_t overflow_count() const { return overflow_count_; }
  const std::deque<SensorRecord>& records() const { return records_; }
  std::vector<SensorRecord> to_vector() const { return {records_.begin(), records_.end()}; }

  /// Restores contents and overflow counter (checkpoint load).
  void restore(std::vector<SensorRecord> records, std::uint64_t overflow_count);

 private:
  std::size_t capacity_;
  std::deque<SensorRecord> records_;
  std::uint64_t overflow_count_ = 0;
};

/// Functional form of FramBuffer::push.
FramBuffer buffer_push(FramBuffer buf, const SensorRecord& rec);

// --- Environment inference --------------------------------------------------

struct PanelSignature {
  double panel_current_ma = 0.0;
  double panel_voltage_v = 0.0;
};

struct SignatureThresholds {
  double sunny_min_current_ma = 0.5;
  double cloudy_max_current_ma = 0.1;
  double cloudy_min_voltage_v = 1.0;
};

LightCondition infer_condition(const PanelSignature& sig, const SignatureThresholds& th = {});

// --- Handshake --------------------------------------------------------------

/// Radio as seen from the node during one wake.
class HandshakePort {
 public:
  virtual ~HandshakePort() = default;
  /// State 2 ping; true when the gateway's ack lands in the receive window.
  virtual bool ping(NodeId node, std::uint32_t cycle_index) = 0;
  /// State 3 batch upload; true on data-ack.
  virtual bool transmit(NodeId node, std::span<const SensorRecord> batch) = 0;
  /// State 4 one-way "alive, data next cycle" notice.
  virtual void announce_alive(NodeId node, std::uint32_t cycle_index) = 0;
};

enum class MessageKind { Ping, Data, AliveNotice };

std::string_view to_string(MessageKind k);

struct Message {
  MessageKind kind;
  std::uint32_t cycle_index;
  std::size_t record_count = 0;
  bool acked = false;

  friend bool operator==(const Message&, const Message&) = default;
};

struct WakeEnvironment {
  PanelSignature panel;
  double sensor_voltage_v = 0.0;
  double temp_c = 20.0;
};

struct WakeOutcome {
  CyclePath path;
  LightCondition observed;
  std::vector<FsmState> visited;  // S1 ... S7
  std::vector<Message> messages;
  SensorRecord record;            // the reading taken this wake
  std::size_t delivered = 0;      // records released by a data-ack
  bool overflowed = false;
  double energy_joules = 0.0;
  /// Sunny but the store could not cover a radio cycle, so the reading was
  /// only saved.
  bool radio_skipped_low_energy = false;
};

struct NodeConfig {
  double duty_cycle_minutes = 20.0;
  SignatureThresholds thresholds;
  energy::CyclePowerTable power;
  std::size_t buffer_capacity = kFramCapacityRecords;
};

/// Cumulative per-node bookkeeping.
struct NodeCounters {
  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;  // released from FRAM by a data-ack
  std::array<std::uint64_t, 6> path_counts{};
  std::array<double, 6> path_energy_joules{};

  double total_drain_joules() const;
};

class NodeFsm {
 public:
  NodeFsm(NodeId id, energy::CapacitorState cap, NodeConfig config = {});

  /// Runs one timer-triggered wake from S7 to S7. Throws energy::NodeDead
  /// (state untouched) when the store cannot pay even for a dark cycle.
  WakeOutcome wake(const WakeEnvironment& env, HandshakePort& radio);

  NodeId id() const { return id_; }
  FsmState state() const { return state_; }
  bool dark_flag() const { return dark_flag_; }
  std::uint32_t cycle_counter() const { return cycle_counter_; }
  const energy::CapacitorState& capacitor() const { return cap_; }
  const FramBuffer& buffer() const { return buffer_; }
  const NodeConfig& config() const { return config_; }
  const NodeCounters& counters() const { return counters_; }

  /// Replaces the capacitor (harvest applied by the scheduler between wakes).
  void set_capacitor(const energy::CapacitorState& cap) { cap_ = cap; }

  /// Checkpoint as a JSON document; the buffer is stored as hex wire records.
  std::string snapshot() const;
  static NodeFsm restore(std::string_view snapshot);

 private:
  NodeId id_;
  FsmState state_ = FsmState::S7_Sleep;
  bool dark_flag_ = false;
  std::uint32_t cycle_counter_ = 0;
  energy::CapacitorState cap_;
  FramBuffer buffer_;
  NodeConfig config_;
  NodeCounters counters_;
};

/// wall_time_i = anchor_time - (anchor_index - index_i) * duty. Throws
/// std::invalid_argument on duplicate cycle indices.
std::vector<std::pair<double, SensorRecord>> reconstruct_timestamps(
    std::span<const SensorRecord> records, std::uint32_t anchor_cycle_index, double anchor_time_s,
    double duty_cycle_s);

}  // namespace mulenet::node
