#include "mulenet/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace mulenet::sim {

namespace {

// How long after its ping the node keeps listening for the ack.
constexpr double kRxWindowS = 1.0;

}  // namespace

double NodeMetrics::completeness() const {
  if (generated == 0) return 1.0;
  return static_cast<double>(ingested) / static_cast<double>(generated);
}

double NodeMetrics::max_latency_s() const {
  return latencies_s.empty() ? 0.0 : *std::max_element(latencies_s.begin(), latencies_s.end());
}

double Metrics::completeness() const {
  std::uint64_t gen = 0, got = 0;
  for (const auto& n : nodes) {
    gen += n.generated;
    got += n.ingested;
  }
  return gen == 0 ? 1.0 : static_cast<double>(got) / static_cast<double>(gen);
}

const NodeMetrics& Metrics::node(NodeId id) const {
  for (const auto& n : nodes)
    if (n.id == id) return n;
  throw std::out_of_range("no metrics for node " + std::to_string(id));
}

nlohmann::json Metrics::to_json() const {
  using nlohmann::json;
  json j;
  j["schema_version"] = kScenarioSchemaVersion;
  j["sim_end_s"] = sim_end_s;
  j["events"] = events;
  j["trace_hash"] = trace_hash;
  j["uplink_entries"] = uplink_entries;
  j["completeness"] = completeness();
  json ns = json::array();
  for (const auto& n : nodes) {
    json paths = json::object();
    json energies = json::object();
    for (auto p : energy::kAllPaths) {
      const auto i = static_cast<std::size_t>(p);
      paths[std::string(1, energy::to_char(p))] = n.path_counts[i];
      energies[std::string(1, energy::to_char(p))] = n.path_energy_joules[i];
    }
    json recency = json::array();
    for (auto r : n.daily_recency) recency.push_back(std::string(gateway::to_string(r)));
    double mean_latency = 0.0;
    for (double l : n.latencies_s) mean_latency += l;
    if (!n.latencies_s.empty()) mean_latency /= static_cast<double>(n.latencies_s.size());
    ns.push_back({{"id", n.id},
                  {"generated", n.generated},
                  {"delivered", n.delivered},
                  {"buffered", n.buffered},
                  {"dropped", n.dropped},
                  {"ingested", n.ingested},
                  {"completeness", n.completeness()},
                  {"successful_wakes", n.successful_wakes},
                  {"missed_wakes", n.missed_wakes},
                  {"first_dead_time_s", n.first_dead_time_s ? json(*n.first_dead_time_s) : json(nullptr)},
                  {"max_buffer", n.max_buffer},
                  {"min_voltage", n.min_voltage},
                  {"harvested_joules", n.harvested_joules},
                  {"path_counts", paths},
                  {"path_energy_joules", energies},
                  {"latency_s", {{"count", n.latencies_s.size()},
                                 {"mean", mean_latency},
                                 {"max", n.max_latency_s()}}},
                  {"contacts", n.contacts},
                  {"last_contact_s", n.last_contact_s ? json(*n.last_contact_s) : json(nullptr)},
                  {"daily_recency", recency}});
  }
  j["nodes"] = ns;
  return j;
}

// Radio seen by one node during one wake at time t.
class Simulation::Radio : public node::HandshakePort {
 public:
  Radio(Simulation& sim, NodeRuntime& n, double t) : sim_(sim), n_(n), t_(t) {}

  bool ping(NodeId id, std::uint32_t) override {
    const bool canopy = !n_.placement.antenna_above_canopy;
    const auto up = sim_.gateway_position(t_);
    if (!up) return false;
    sim_.gateway_.set_position(*up);
    if (!link::packet_success(sim_.scenario_.link, distance(n_.placement.position, *up), canopy, sim_.link_rng_))
      return false;
    const double ack_t = sim_.gateway_.ack_time_for(t_);
    if (ack_t > t_ + gateway::kAckDelayS + kRxWindowS) return false;  // queued past our window
    const auto down = sim_.gateway_position(ack_t);
    if (!down) return false;
    const auto reply = sim_.gateway_.handle_ping(id, distance(n_.placement.position, *down), canopy,
                                                 sim_.scenario_.link, t_, sim_.link_rng_);
    ack_time_ = reply.ack_time_s;
    return reply.acked;
  }

  bool transmit(NodeId id, std::span<const node::SensorRecord> batch) override {
    const bool canopy = !n_.placement.antenna_above_canopy;
    const auto up = sim_.gateway_position(ack_time_);
    if (!up || !link::packet_success(sim_.scenario_.link, distance(n_.placement.position, *up), canopy,
                                     sim_.link_rng_))
      return false;
    for (const auto& r : batch) {
      if (sim_.gateway_.has_record(id, r.cycle_index)) continue;
      if (auto it = n_.generated_at.find(r.cycle_index); it != n_.generated_at.end()) {
        n_.metrics.latencies_s.push_back(ack_time_ - it->second);
      }
    }
    sim_.gateway_.ingest_records(id, batch, ack_time_);
    ++n_.metrics.contacts;
    const double dack_t = ack_time_ + gateway::kExchangeTailS;
    const auto down = sim_.gateway_position(dack_t);
    return down && link::packet_success(sim_.scenario_.link, distance(n_.placement.position, *down), canopy,
                                        sim_.link_rng_);
  }

  void announce_alive(NodeId, std::uint32_t) override {}

 private:
  Simulation& sim_;
  NodeRuntime& n_;
  double t_;
  double ack_time_ = 0.0;
};

Simulation::Simulation(Scenario scenario)
    : scenario_(std::move(scenario)),
      gateway_(scenario_.duty_cycle_s()),
      link_rng_(mix_seed(scenario_.rng_seed, ~0ULL)) {
  scenario_.validate();
  node::NodeConfig cfg;
  cfg.duty_cycle_minutes = scenario_.duty_cycle_minutes;
  cfg.thresholds = scenario_.thresholds;
  cfg.power = scenario_.energy.power;
  cfg.buffer_capacity = scenario_.buffer_capacity;

  std::vector<NodePlacement> placements = scenario_.nodes;
  std::sort(placements.begin(), placements.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  nodes_.reserve(placements.size());
  for (const auto& p : placements) {
    const auto cap = scenario_.energy.initial_capacitor();
    NodeRuntime rt{p,
                   node::NodeFsm(p.id, cap, cfg),
                   sensing::SoilTrace(sensing::SoilType::preset(p.soil), p.watering, p.initial_vwc),
                   Rng(mix_seed(scenario_.rng_seed, static_cast<std::uint64_t>(p.id) + 1)),
                   0.0,
                   0.0,
                   {},
                   {}};
    rt.metrics.id = p.id;
    rt.metrics.min_voltage = cap.v_now_volts();
    rt.metrics.initial_usable_joules = energy::usable_energy(cap);
    index_[p.id] = nodes_.size();
    nodes_.push_back(std::move(rt));
  }
  for (auto& n : nodes_) {
    n.next_wake_s = wake_phase_s(n.placement.id);
    if (n.next_wake_s < end_time()) queue_.emplace(n.next_wake_s, n.placement.id, static_cast<int>(EventKind::Wake));
  }
  for (int day = 1; day * kDaySeconds <= end_time(); ++day)
    queue_.emplace(day * kDaySeconds, 0, static_cast<int>(EventKind::DaySample));
}

double Simulation::wake_phase_s(NodeId id) const {
  const auto period_ms = static_cast<std::uint64_t>(std::llround(scenario_.duty_cycle_s() * 1000.0));
  return static_cast<double>(mix_seed(scenario_.rng_seed, id) % std::max<std::uint64_t>(period_ms, 1)) / 1000.0;
}

double Simulation::next_wake_at_or_after(NodeId id, double t_s) const {
  const double phase = wake_phase_s(id);
  const double duty = scenario_.duty_cycle_s();
  if (t_s <= phase) return phase;
  const double k = std::ceil((t_s - phase) / duty);
  double w = phase + k * duty;
  if (w < t_s) w = phase + (k + 1.0) * duty;
  return w;
}

double Simulation::pending_wake(NodeId id) const { return runtime(id).next_wake_s; }

Simulation::NodeRuntime& Simulation::runtime(NodeId id) {
  auto it = index_.find(id);
  if (it == index_.end()) throw std::out_of_range("unknown node " + std::to_string(id));
  return nodes_[it->second];
}

const Simulation::NodeRuntime& Simulation::runtime(NodeId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw std::out_of_range("unknown node " + std::to_string(id));
  return nodes_[it->second];
}

const node::NodeFsm& Simulation::node(NodeId id) const { return runtime(id).fsm; }

std::vector<NodeId> Simulation::node_ids() const {
  std::vector<NodeId> ids;
  for (const auto& n : nodes_) ids.push_back(n.placement.id);
  return ids;
}

bool Simulation::node_in_canopy(NodeId id) const { return !runtime(id).placement.antenna_above_canopy; }

std::optional<Point> Simulation::gateway_position(double t) const {
  for (const auto& plan : scenario_.routes) {
    if (plan.daily) {
      const double day_f = std::floor(t / kDaySeconds);
      const int day = static_cast<int>(day_f);
      if (!plan.days.empty() && std::find(plan.days.begin(), plan.days.end(), day) == plan.days.end()) continue;
      const double local = t - day_f * kDaySeconds;
      if (plan.route.active_at(local)) return plan.route.position_at(local);
    } else if (plan.route.active_at(t)) {
      return plan.route.position_at(t);
    }
  }
  return std::nullopt;
}

double Simulation::temperature_at(double t) const {
  // Buried probe: mild diurnal swing peaking mid-afternoon.
  return 18.0 + 4.0 * std::sin(2.0 * std::numbers::pi * (t / kDaySeconds - 0.375));
}

double Simulation::node_vwc_at(NodeId id, double t) const { return runtime(id).soil.vwc_at(t); }

std::optional<double> Simulation::generation_time(NodeId id, std::uint32_t cycle_index) const {
  const auto& rt = runtime(id);
  if (auto it = rt.generated_at.find(cycle_index); it != rt.generated_at.end()) return it->second;
  return std::nullopt;
}

void Simulation::harvest_until(NodeRuntime& n, double t) {
  const auto& profile = scenario_.energy.harvest;
  double a = n.last_update_s;
  while (a < t) {
    const double slot_end = (std::floor(a / kWeatherSlotSeconds) + 1.0) * kWeatherSlotSeconds;
    const double b = std::min(t, slot_end);
    const double before = energy::usable_energy(n.fsm.capacitor());
    n.fsm.set_capacitor(energy::harvest_step(n.fsm.capacitor(), profile, scenario_.weather.klux_at(a), b - a));
    n.metrics.harvested_joules += energy::usable_energy(n.fsm.capacitor()) - before;
    a = b;
  }
  n.last_update_s = std::max(n.last_update_s, t);
}

void Simulation::process_wake(NodeRuntime& n, double t) {
  harvest_until(n, t);
  const NodeId id = n.placement.id;
  const double klux = scenario_.weather.klux_at(t);
  const auto panel = scenario_.energy.harvest.panel_at(klux);
  const double temp = temperature_at(t);
  const double vwc = n.soil.vwc_at(t);
  const double volts = scenario_.sensor.voltage(vwc, n.soil.soil(), temp, n.rng);
  node::WakeEnvironment env{{panel.current_ma, panel.voltage_v}, volts, temp};

  const std::uint32_t idx = n.fsm.cycle_counter();
  n.generated_at[idx] = t;
  Radio radio(*this, n, t);
  std::ostringstream line;
  line << format_decimal(t) << "\tnode=" << id;
  try {
    const auto out = n.fsm.wake(env, radio);
    ++n.metrics.successful_wakes;
    n.metrics.max_buffer = std::max(n.metrics.max_buffer, n.fsm.buffer().size());
    n.metrics.min_voltage = std::min(n.metrics.min_voltage, n.fsm.capacitor().v_now_volts());
    line << "\tcycle=" << idx << "\tpath=" << energy::to_char(out.path) << "\tlight="
         << energy::to_string(out.observed) << "\tbuf=" << n.fsm.buffer().size()
         << "\tv=" << format_fixed(n.fsm.capacitor().v_now_volts(), 9);
    for (const auto& m : out.messages)
      line << '\t' << node::to_string(m.kind) << ':' << m.record_count << ':' << (m.acked ? "ack" : "nak");
    if (out.overflowed) line << "\toverflow";
    wake_log_.push_back({t, id, out.path, n.fsm.buffer().size()});
  } catch (const energy::NodeDead&) {
    n.generated_at.erase(idx);
    ++n.metrics.missed_wakes;
    if (!n.metrics.first_dead_time_s) n.metrics.first_dead_time_s = t;
    line << "\tdead";
    wake_log_.push_back({t, id, std::nullopt, n.fsm.buffer().size()});
  }
  trace_ += line.str();
  trace_ += '\n';
}

void Simulation::sample_day(double t) {
  for (auto& n : nodes_)
    n.metrics.daily_recency.push_back(gateway::recency_classify(gateway_.last_contact(n.placement.id), t));
  trace_ += format_decimal(t) + "\tday-sample\n";
}

void Simulation::run_until(double t_s) {
  const double limit = std::min(t_s, end_time());
  while (!queue_.empty() && std::get<0>(queue_.top()) <= limit) {
    const auto [t, id, kind] = queue_.top();
    queue_.pop();
    now_ = t;
    ++events_;
    if (kind == static_cast<int>(EventKind::DaySample)) {
      sample_day(t);
      continue;
    }
    auto& n = runtime(id);
    process_wake(n, t);
    const auto k = std::llround((t - wake_phase_s(id)) / scenario_.duty_cycle_s()) + 1;
    n.next_wake_s = wake_phase_s(id) + static_cast<double>(k) * scenario_.duty_cycle_s();
    if (n.next_wake_s < end_time()) queue_.emplace(n.next_wake_s, id, static_cast<int>(EventKind::Wake));
  }
  now_ = std::max(now_, limit);
}

Metrics Simulation::metrics() const {
  Metrics m;
  m.sim_end_s = now_;
  m.events = events_;
  m.trace_hash = trace_hash();
  m.uplink_entries = gateway_.uplink_log().size();
  std::map<NodeId, std::uint64_t> ingested;
  for (const auto& e : gateway_.uplink_log()) ++ingested[e.node_id];
  for (const auto& n : nodes_) {
    NodeMetrics nm = n.metrics;
    const auto& c = n.fsm.counters();
    nm.generated = c.generated;
    nm.delivered = c.delivered;
    nm.buffered = n.fsm.buffer().size();
    nm.dropped = n.fsm.buffer().overflow_count();
    nm.ingested = ingested[n.placement.id];
    nm.path_counts = c.path_counts;
    nm.path_energy_joules = c.path_energy_joules;
    nm.final_usable_joules = energy::usable_energy(n.fsm.capacitor());
    nm.last_contact_s = gateway_.last_contact(n.placement.id);
    m.nodes.push_back(std::move(nm));
  }
  return m;
}

std::string Simulation::uplink_csv() const {
  std::ostringstream out;
  gateway::write_uplink_csv(out, gateway_.uplink_log());
  return out.str();
}

RunResult run(const Scenario& scenario) {
  Simulation sim(scenario);
  sim.run_to_end();
  return {sim.metrics(), sim.uplink_csv(), sim.trace()};
}

}  // namespace mulenet::sim
