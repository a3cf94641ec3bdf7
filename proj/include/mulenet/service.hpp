#pragma once

// Read/query interface over one live simulation session. Every payload is a
// JSON document carrying "schema_version"; times are seconds since scenario
// start.
//
//   GET  /field                        field snapshot
//   GET  /nodes/{id}/series?from&to    calibrated, smoothed delivered data
//   GET  /zones                        pickup zones
//   POST /whatif                       body: route document
//   POST /session                      body: scenario document
//   POST /step?minutes=N               advance the simulation

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "mulenet/planning.hpp"
#include "mulenet/sensing.hpp"
#include "mulenet/simulation.hpp"

namespace mulenet::service {

inline constexpr int kWireSchemaVersion = 1;

class NoSession : public std::runtime_error {
 public:
  NoSession() : std::runtime_error("no simulation session loaded") {}
};

class UnknownNode : public std::runtime_error {
 public:
  explicit UnknownNode(node::NodeId id) : std::runtime_error("unknown node " + std::to_string(id)) {}
};

/// Malformed request; `problems` holds one line per offending field.
class BadRequest : public std::runtime_error {
 public:
  explicit BadRequest(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct Response {
  int status = 200;
  std::string body;
};

class Service {
 public:
  explicit Service(sensing::CalibrationModel calibration = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Replaces any running session. Throws BadRequest on an invalid scenario.
  void load_session(const nlohmann::json& scenario);
  void load_session(const sim::Scenario& scenario);
  bool has_session() const;

  nlohmann::json get_field() const;
  nlohmann::json get_node_series(node::NodeId id, std::optional<double> from_s = std::nullopt,
                                 std::optional<double> to_s = std::nullopt) const;
  nlohmann::json get_zones() const;
  nlohmann::json post_whatif(const nlohmann::json& route) const;
  /// Advances the session clock; returns {"time_s": ...}.
  nlohmann::json step(double minutes);

  /// Live playback: every tick advances sim time by ratio * tick.
  void start_playback(double ratio, std::chrono::milliseconds tick = std::chrono::milliseconds(100));
  void stop_playback();

  /// Transport-free dispatcher used by the HTTP binding.
  Response handle(const std::string& method, const std::string& path,
                  const std::map<std::string, std::string>& query, const std::string& body);

 private:
  const sim::Simulation& session() const;

  sensing::CalibrationModel calibration_;
  mutable std::shared_mutex mu_;
  std::optional<sim::Simulation> sim_;
  std::vector<sim::PickupZone> zones_;
  std::jthread playback_;
};

/// HTTP binding of Service::handle.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  /// Binds without serving; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called from another thread.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Binds and blocks serving `service` until the process is stopped.
void serve_http(Service& service, const std::string& host, int port);

}  // namespace mulenet::service
