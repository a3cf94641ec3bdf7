#pragma once

#include "mulenet/scenario.hpp"

namespace testing_support {

// Square 1 km field, one east-west road at y = 500.
inline mulenet::sim::Scenario base_scenario(int n_nodes = 1) {
  using namespace mulenet;
  sim::Scenario s;
  s.name = "test";
  s.field = {{0, 0}, {1000, 0}, {1000, 1000}, {0, 1000}};
  s.roads = {{{0, 500}, {1000, 500}}};
  for (int i = 0; i < n_nodes; ++i) {
    sim::NodePlacement p;
    p.id = static_cast<node::NodeId>(i + 1);
    p.position = {100.0 + 300.0 * i, 450.0};
    p.initial_vwc = 0.3;
    s.nodes.push_back(p);
  }
  s.rng_seed = 5;
  return s;
}

// Gateway parked at `where` from t0 to t1 (absolute times).
inline mulenet::sim::RoutePlan parked(mulenet::Point where, double t0, double t1) {
  return {mulenet::gateway::Route({{where.x, where.y, t0}, {where.x, where.y, t1}}), false, {}};
}

}  // namespace testing_support
