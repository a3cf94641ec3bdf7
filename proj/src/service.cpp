#include "mulenet/service.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <regex>

namespace mulenet::service {

using nlohmann::json;

namespace {

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    if (!out.empty()) out += "; ";
    out += l;
  }
  return out;
}

json error_body(const std::string& message, const std::vector<std::string>& problems = {}) {
  return {{"schema_version", kWireSchemaVersion}, {"error", message}, {"problems", problems}};
}

double parse_query_number(const std::map<std::string, std::string>& query, const std::string& key) {
  try {
    return parse_decimal(query.at(key));
  } catch (const std::exception&) {
    throw BadRequest({key + ": expected a number"});
  }
}

}  // namespace

BadRequest::BadRequest(std::vector<std::string> problems)
    : std::runtime_error(join_lines(problems)), problems_(std::move(problems)) {}

Service::Service(sensing::CalibrationModel calibration) : calibration_(calibration) {}

Service::~Service() { stop_playback(); }

void Service::load_session(const json& scenario) {
  try {
    load_session(sim::scenario_from_json(scenario));
  } catch (const sim::ScenarioError& e) {
    throw BadRequest(e.problems());
  }
}

void Service::load_session(const sim::Scenario& scenario) {
  stop_playback();
  try {
    sim::Simulation fresh(scenario);
    auto zones = sim::compute_pickup_zones(scenario);
    std::unique_lock lock(mu_);
    sim_.reset();
    sim_.emplace(std::move(fresh));
    zones_ = std::move(zones);
  } catch (const sim::ScenarioError& e) {
    throw BadRequest(e.problems());
  }
}

bool Service::has_session() const {
  std::shared_lock lock(mu_);
  return sim_.has_value();
}

const sim::Simulation& Service::session() const {
  if (!sim_) throw NoSession();
  return *sim_;
}

json Service::get_field() const {
  std::shared_lock lock(mu_);
  const auto& s = session();
  const auto& sc = s.scenario();
  const double now = s.now();

  json field = json::array();
  for (const auto& p : sc.field) field.push_back({p.x, p.y});
  json roads = json::array();
  for (const auto& road : sc.roads) {
    json pts = json::array();
    for (const auto& p : road) pts.push_back({p.x, p.y});
    roads.push_back(pts);
  }

  // Latest delivered reading per node, as the farmer would see it.
  std::map<node::NodeId, const gateway::UplinkEntry*> latest;
  for (const auto& e : s.gateway().uplink_log()) {
    auto& slot = latest[e.node_id];
    if (!slot || e.reconstructed_time_s > slot->reconstructed_time_s) slot = &e;
  }

  json nodes = json::array();
  for (node::NodeId id : s.node_ids()) {
    const auto* placement = sc.find_node(id);
    const auto last = s.gateway().last_contact(id);
    json last_vwc = nullptr;
    if (auto it = latest.find(id); it != latest.end())
      last_vwc = sensing::vwc_percent(sensing::voltage_to_vwc(it->second->record.voltage_v(), calibration_));
    nodes.push_back({{"id", id},
                     {"position", {placement->position.x, placement->position.y}},
                     {"antenna_above_canopy", placement->antenna_above_canopy},
                     {"recency", std::string(gateway::to_string(gateway::recency_classify(last, now)))},
                     {"last_contact_s", last ? json(*last) : json(nullptr)},
                     {"buffer_occupancy", s.node(id).buffer().size()},
                     {"last_vwc_pct", last_vwc}});
  }
  const auto gw = s.gateway_position(now);
  return {{"schema_version", kWireSchemaVersion},
          {"time_s", now},
          {"end_time_s", s.end_time()},
          {"field", field},
          {"roads", roads},
          {"nodes", nodes},
          {"gateway", gw ? json({gw->x, gw->y}) : json(nullptr)},
          {"zones", sim::zones_to_json(zones_)}};
}

json Service::get_node_series(node::NodeId id, std::optional<double> from_s, std::optional<double> to_s) const {
  std::shared_lock lock(mu_);
  const auto& s = session();
  if (!s.scenario().find_node(id)) throw UnknownNode(id);

  std::vector<const gateway::UplinkEntry*> rows;
  for (const auto& e : s.gateway().uplink_log())
    if (e.node_id == id) rows.push_back(&e);
  std::sort(rows.begin(), rows.end(),
            [](const auto* a, const auto* b) { return a->record.cycle_index < b->record.cycle_index; });

  sensing::TimeSeries raw;
  for (const auto* e : rows)
    raw.push_back(e->reconstructed_time_s,
                  sensing::vwc_percent(sensing::voltage_to_vwc(e->record.voltage_v(), calibration_)));
  const auto window = static_cast<std::size_t>(std::max(1.0, std::round(sim::kDaySeconds / s.scenario().duty_cycle_s())));
  const auto smooth = sensing::rolling_mean(raw, window);

  json points = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double t = raw[i].time_s;
    if ((from_s && t < *from_s) || (to_s && t > *to_s)) continue;
    points.push_back({{"t", t},
                      {"cycle_index", rows[i]->record.cycle_index},
                      {"vwc_pct", smooth[i].value},
                      {"vwc_pct_unsmoothed", raw[i].value},
                      {"temp_c", rows[i]->record.temp_c()},
                      {"sun_state", std::string(energy::to_string(rows[i]->record.sun_state))}});
  }
  return {{"schema_version", kWireSchemaVersion}, {"node_id", id}, {"window", window}, {"points", points}};
}

json Service::get_zones() const {
  std::shared_lock lock(mu_);
  session();
  return {{"schema_version", kWireSchemaVersion}, {"zones", sim::zones_to_json(zones_)}};
}

json Service::post_whatif(const json& route) const {
  gateway::Route candidate;
  try {
    candidate = sim::route_from_json(route);
  } catch (const sim::ScenarioError& e) {
    throw BadRequest(e.problems());
  }
  const int version = route.is_object() && route.contains("schema_version") && route["schema_version"].is_number_integer()
                          ? route["schema_version"].get<int>()
                          : kWireSchemaVersion;
  std::shared_lock lock(mu_);
  return sim::predictions_to_json(sim::whatif_route(session(), candidate), version);
}

json Service::step(double minutes) {
  if (!std::isfinite(minutes) || minutes < 0.0) throw BadRequest({"minutes: expected a non-negative number"});
  std::unique_lock lock(mu_);
  if (!sim_) throw NoSession();
  sim_->step_minutes(minutes);
  return {{"schema_version", kWireSchemaVersion}, {"time_s", sim_->now()}, {"finished", sim_->finished()}};
}

void Service::start_playback(double ratio, std::chrono::milliseconds tick) {
  if (!(ratio > 0.0)) throw BadRequest({"ratio: must be positive"});
  stop_playback();
  playback_ = std::jthread([this, ratio, tick](std::stop_token stop) {
    const double sim_minutes = ratio * std::chrono::duration<double>(tick).count() / 60.0;
    while (!stop.stop_requested()) {
      std::this_thread::sleep_for(tick);
      std::unique_lock lock(mu_);
      if (!sim_ || sim_->finished()) break;
      sim_->step_minutes(sim_minutes);
    }
  });
}

void Service::stop_playback() {
  if (playback_.joinable()) {
    playback_.request_stop();
    playback_.join();
  }
}

Response Service::handle(const std::string& method, const std::string& path,
                         const std::map<std::string, std::string>& query, const std::string& body) {
  static const std::regex series_re(R"(^/nodes/(\d+)/series$)");
  try {
    std::smatch m;
    if (method == "GET" && path == "/field") return {200, get_field().dump()};
    if (method == "GET" && path == "/zones") return {200, get_zones().dump()};
    if (method == "GET" && std::regex_match(path, m, series_re)) {
      const auto id = static_cast<node::NodeId>(std::stoul(m[1].str()));
      std::optional<double> from, to;
      if (query.contains("from")) from = parse_query_number(query, "from");
      if (query.contains("to")) to = parse_query_number(query, "to");
      return {200, get_node_series(id, from, to).dump()};
    }
    if (method == "POST" && (path == "/whatif" || path == "/session")) {
      json doc;
      try {
        doc = json::parse(body);
      } catch (const json::parse_error& e) {
        throw BadRequest({std::string("body: ") + e.what()});
      }
      if (path == "/whatif") return {200, post_whatif(doc).dump()};
      load_session(doc);
      return {200, json({{"schema_version", kWireSchemaVersion}, {"loaded", true}}).dump()};
    }
    if (method == "POST" && path == "/step") {
      if (!query.contains("minutes")) throw BadRequest({"minutes: required"});
      return {200, step(parse_query_number(query, "minutes")).dump()};
    }
    return {404, error_body("no route for " + method + " " + path).dump()};
  } catch (const BadRequest& e) {
    return {400, error_body("bad request", e.problems()).dump()};
  } catch (const NoSession& e) {
    return {409, error_body(e.what()).dump()};
  } catch (const UnknownNode& e) {
    return {404, error_body(e.what()).dump()};
  } catch (const std::out_of_range& e) {
    return {404, error_body(e.what()).dump()};
  }
}

}  // namespace mulenet::service
