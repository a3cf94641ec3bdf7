#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "mulenet/node.hpp"

namespace mulenet::node {

SensorRecord SensorRecord::from_measurement(LightCondition sun, double temp_c, double voltage_v,
                                            std::uint32_t cycle_index) {
  const double centi = std::round(temp_c * 100.0);
  if (!(centi >= -32768.0 && centi <= 32767.0)) throw std::out_of_range("temperature not representable");
  const double tenth_mv = std::round(voltage_v * 10000.0);
  if (!(tenth_mv >= 0.0 && tenth_mv <= 65535.0)) throw std::out_of_range("voltage not representable");
  return {sun, static_cast<std::int16_t>(centi), static_cast<std::uint16_t>(tenth_mv), cycle_index};
}

RecordBytes SensorRecord::encode() const {
  RecordBytes b{};
  b[0] = static_cast<std::uint8_t>(sun_state) & 0x03;
  const auto t = static_cast<std::uint16_t>(temp_centi_c);
  b[1] = static_cast<std::uint8_t>(t & 0xFF);
  b[2] = static_cast<std::uint8_t>(t >> 8);
  b[3] = static_cast<std::uint8_t>(voltage_tenth_mv & 0xFF);
  b[4] = static_cast<std::uint8_t>(voltage_tenth_mv >> 8);
  for (int i = 0; i < 4; ++i) b[5 + i] = static_cast<std::uint8_t>(cycle_index >> (8 * i));
  return b;
}

SensorRecord SensorRecord::decode(std::span<const std::uint8_t, kRecordBytes> b) {
  if (b[0] & 0xFC) throw std::invalid_argument("record flag byte has reserved bits set");
  if ((b[0] & 0x03) == 3) throw std::invalid_argument("record sun state out of range");
  SensorRecord r;
  r.sun_state = static_cast<LightCondition>(b[0] & 0x03);
  r.temp_centi_c = static_cast<std::int16_t>(static_cast<std::uint16_t>(b[1] | (b[2] << 8)));
  r.voltage_tenth_mv = static_cast<std::uint16_t>(b[3] | (b[4] << 8));
  r.cycle_index = 0;
  for (int i = 0; i < 4; ++i) r.cycle_index |= static_cast<std::uint32_t>(b[5 + i]) << (8 * i);
  return r;
}

FramBuffer::FramBuffer(std::size_t capacity_records) : capacity_(capacity_records) {
  if (capacity_ == 0) throw std::invalid_argument("FRAM buffer capacity must be positive");
}

bool FramBuffer::push(const SensorRecord& rec) {
  bool dropped = false;
  if (records_.size() == capacity_) {
    records_.pop_front();
    ++overflow_count_;
    dropped = true;
  }
  records_.push_back(rec);
  return dropped;
}

void FramBuffer::restore(std::vector<SensorRecord> records, std::uint64_t overflow_count) {
  if (records.size() > capacity_) throw std::invalid_argument("restored buffer exceeds capacity");
  records_.assign(records.begin(), records.end());
  overflow_count_ = overflow_count;
}

FramBuffer buffer_push(FramBuffer buf, const SensorRecord& rec) {
  buf.push(rec);
  return buf;
}

std::vector<std::pair<double, SensorRecord>> reconstruct_timestamps(
    std::span<const SensorRecord> records, std::uint32_t anchor_cycle_index, double anchor_time_s,
    double duty_cycle_s) {
  std::unordered_set<std::uint32_t> seen;
  std::vector<std::pair<double, SensorRecord>> out;
  out.reserve(records.size());
  for (const SensorRecord& r : records) {
    if (!seen.insert(r.cycle_index).second)
      throw std::invalid_argument("duplicate cycle index " + std::to_string(r.cycle_index));
    const auto lag = static_cast<std::int64_t>(anchor_cycle_index) - static_cast<std::int64_t>(r.cycle_index);
    out.emplace_back(anchor_time_s - static_cast<double>(lag) * duty_cycle_s, r);
  }
  return out;
}

}  // namespace mulenet::node
