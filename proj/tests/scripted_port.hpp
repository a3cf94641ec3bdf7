#pragma once

#include <vector>

#include "mulenet/node.hpp"

namespace testing_support {

// Radio stub answering ping and data with fixed replies and logging calls.
struct ScriptedPort : mulenet::node::HandshakePort {
  bool ping_ack = false;
  bool data_ack = false;
  int pings = 0;
  int transmits = 0;
  int alive_notices = 0;
  std::vector<std::vector<mulenet::node::SensorRecord>> sent;

  bool ping(mulenet::node::NodeId, std::uint32_t) override {
    ++pings;
    return ping_ack;
  }
  bool transmit(mulenet::node::NodeId, std::span<const mulenet::node::SensorRecord> batch) override {
    ++transmits;
    sent.emplace_back(batch.begin(), batch.end());
    return data_ack;
  }
  void announce_alive(mulenet::node::NodeId, std::uint32_t) override { ++alive_notices; }
};

inline mulenet::node::WakeEnvironment env_for(mulenet::energy::LightCondition c, double volts = 0.5,
                                              double temp = 20.0) {
  using mulenet::energy::LightCondition;
  switch (c) {
    case LightCondition::Sunny: return {{1.0, 4.7}, volts, temp};
    case LightCondition::Cloudy: return {{0.05, 4.3}, volts, temp};
    case LightCondition::Dark: break;
  }
  return {{0.0, 0.0}, volts, temp};
}

}  // namespace testing_support
