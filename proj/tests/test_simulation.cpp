#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "mulenet/simulation.hpp"
#include "sim_fixtures.hpp"

using namespace mulenet;
using namespace mulenet::sim;
using testing_support::base_scenario;
using testing_support::parked;

TEST(Simulation, AlwaysReachableNodeDeliversEverything) {
  auto s = base_scenario();
  s.weather.default_day = DayPattern::AlwaysSunny;
  s.routes = {parked({100, 500}, 0, 2 * kDaySeconds)};
  const auto r = run(s);
  const auto& n = r.metrics.node(1);
  EXPECT_EQ(n.generated, 72u);
  EXPECT_DOUBLE_EQ(n.completeness(), 1.0);
  EXPECT_EQ(n.buffered, 0u);
  EXPECT_EQ(n.path_counts[static_cast<int>(energy::CyclePath::A)], 72u);
  ASSERT_EQ(n.latencies_s.size(), 72u);
  for (double l : n.latencies_s) {
    EXPECT_GE(l, 0.0);
    EXPECT_LE(l, s.duty_cycle_s());
  }
}

TEST(Simulation, NeverReachableNodeBuffersEveryCycle) {
  auto s = base_scenario();
  s.duration_days = 2;
  const auto r = run(s);
  const auto& n = r.metrics.node(1);
  EXPECT_EQ(n.generated, 144u);
  EXPECT_EQ(n.ingested, 0u);
  EXPECT_DOUBLE_EQ(r.metrics.completeness(), 0.0);
  EXPECT_EQ(n.buffered, 144u);
  EXPECT_EQ(n.max_buffer, 144u);
  EXPECT_EQ(r.uplink_csv, std::string(gateway::kUplinkCsvHeader) + "\n");
}

TEST(Simulation, DailyVisitBoundsBufferToOneDay) {
  auto s = base_scenario();
  s.duration_days = 4;
  // Parked near the node 12:00-13:00 every day.
  s.routes = {{gateway::Route({{100, 500, 43200}, {100, 500, 46800}}), true, {}}};
  Simulation sim(s);
  sim.run_until(43200 + 3600 + 1);
  EXPECT_LE(sim.node(1).buffer().size(), 3u);
  sim.run_to_end();
  const auto m = sim.metrics();
  const auto& n = m.node(1);
  EXPECT_GE(n.max_buffer, 66u);
  EXPECT_LE(n.max_buffer, 74u);
  EXPECT_EQ(n.dropped, 0u);
  EXPECT_EQ(n.generated, n.delivered + n.buffered + n.dropped);
  for (auto c : n.daily_recency) EXPECT_EQ(c, gateway::RecencyClass::Green);
}

TEST(Simulation, SameSeedSameTraceDifferentSeedDifferentPhase) {
  auto s = base_scenario(3);
  s.duration_days = 3;
  s.routes = {{gateway::Route({{0, 500, 36000}, {1000, 500, 39600}}), true, {}}};
  s.sensor.noise_sigma_v = 0.003;
  const auto a = run(s);
  const auto b = run(s);
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_EQ(a.uplink_csv, b.uplink_csv);
  EXPECT_EQ(a.metrics.to_json(), b.metrics.to_json());
  s.rng_seed = 6;
  EXPECT_NE(run(s).metrics.trace_hash, a.metrics.trace_hash);
}

TEST(Simulation, SteppedRunMatchesOneShot) {
  auto s = base_scenario(2);
  s.duration_days = 2;
  s.routes = {{gateway::Route({{0, 500, 36000}, {1000, 500, 39600}}), true, {}}};
  Simulation stepped(s);
  while (!stepped.finished()) stepped.step_minutes(7.3);
  EXPECT_EQ(stepped.trace(), run(s).trace);
}

TEST(Simulation, WakePhasesSpreadWithinDuty) {
  auto s = base_scenario(3);
  Simulation sim(s);
  std::set<double> phases;
  for (auto id : sim.node_ids()) {
    const double p = sim.wake_phase_s(id);
    EXPECT_GE(p, 0.0);
    EXPECT_LT(p, s.duty_cycle_s());
    phases.insert(p);
    EXPECT_DOUBLE_EQ(sim.next_wake_at_or_after(id, p + 1.0), p + s.duty_cycle_s());
    EXPECT_DOUBLE_EQ(sim.next_wake_at_or_after(id, p), p);
  }
  EXPECT_EQ(phases.size(), 3u);
}

TEST(Simulation, AllDarkKillsNodeAfter1464Wakes) {
  auto s = base_scenario();
  s.weather.default_day = DayPattern::Dark;
  s.duration_days = 25;
  const auto r = run(s);
  const auto& n = r.metrics.node(1);
  EXPECT_EQ(n.successful_wakes, 1464u);
  EXPECT_EQ(n.generated, 1464u);
  ASSERT_TRUE(n.first_dead_time_s.has_value());
  EXPECT_NEAR(*n.first_dead_time_s / kDaySeconds, 1464.0 * 20.0 / 1440.0, 20.0 / 1440.0 + 1e-9);
  EXPECT_EQ(n.successful_wakes + n.missed_wakes, 25u * 72u);
}

TEST(Simulation, EnergyBookkeepingBalances) {
  auto s = base_scenario(2);
  s.duration_days = 3;
  s.weather.days[1] = DayPattern::Cloudy;
  s.routes = {{gateway::Route({{0, 500, 36000}, {1000, 500, 39600}}), true, {}}};
  const auto r = run(s);
  for (const auto& n : r.metrics.nodes) {
    double drained = 0.0;
    for (double e : n.path_energy_joules) drained += e;
    EXPECT_NEAR(n.initial_usable_joules + n.harvested_joules - drained, n.final_usable_joules, 1e-9);
    EXPECT_GT(n.min_voltage, 3.3);
  }
}

TEST(Simulation, DarkFlagProducesAliveNoticeAtDawn) {
  auto s = base_scenario();
  Simulation sim(s);
  sim.run_to_end();
  // The first daylight wake after the night takes path D.
  std::optional<energy::CyclePath> first_day_path;
  for (const auto& w : sim.wake_log())
    if (sim.illuminance_at(w.time_s) > 12.0) {
      first_day_path = w.path;
      break;
    }
  ASSERT_TRUE(first_day_path.has_value());
  EXPECT_EQ(*first_day_path, energy::CyclePath::D);
}

TEST(Simulation, CanopyNodeNeedsCloserGateway) {
  auto s = base_scenario();
  s.nodes[0].antenna_above_canopy = false;
  s.weather.default_day = DayPattern::AlwaysSunny;
  s.routes = {parked({100, 750}, 0, kDaySeconds)};  // 300 m away
  EXPECT_EQ(run(s).metrics.node(1).ingested, 0u);
  s.routes = {parked({100, 650}, 0, kDaySeconds)};  // 200 m away
  EXPECT_EQ(run(s).metrics.node(1).ingested, 72u);
}

TEST(Simulation, UplinkCsvHasNoDuplicates) {
  auto s = base_scenario(3);
  s.duration_days = 3;
  s.link.rolloff_width_m = 400.0;
  s.routes = {{gateway::Route({{0, 900, 36000}, {1000, 900, 39600}}), true, {}}};
  const auto r = run(s);
  std::istringstream in(r.uplink_csv);
  const auto rows = gateway::read_uplink_csv(in);
  std::set<std::pair<node::NodeId, std::uint32_t>> keys;
  for (const auto& e : rows) EXPECT_TRUE(keys.insert({e.node_id, e.record.cycle_index}).second);
  for (const auto& n : r.metrics.nodes) {
    EXPECT_EQ(n.generated, n.delivered + n.buffered + n.dropped);
    EXPECT_GE(n.ingested, n.delivered);
    EXPECT_GE(n.completeness(), 0.0);
    EXPECT_LE(n.completeness(), 1.0);
  }
}

TEST(Simulation, RejectsInvalidScenario) {
  auto s = base_scenario();
  s.nodes[0].position = {2000, 2000};
  EXPECT_THROW(Simulation{s}, ScenarioError);
}

TEST(Metrics, JsonHasPerNodeFields) {
  auto s = base_scenario();
  const auto j = run(s).metrics.to_json();
  EXPECT_EQ(j["schema_version"], 1);
  ASSERT_EQ(j["nodes"].size(), 1u);
  for (const char* key : {"generated", "delivered", "buffered", "dropped", "completeness", "max_buffer",
                          "min_voltage", "path_counts", "path_energy_joules", "latency_s", "daily_recency"})
    EXPECT_TRUE(j["nodes"][0].contains(key)) << key;
}
