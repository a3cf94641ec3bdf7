#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "mulenet/planning.hpp"
#include "mulenet/scenario.hpp"
#include "mulenet/sensing.hpp"
#include "mulenet/service.hpp"
#include "mulenet/simulation.hpp"

namespace fs = std::filesystem;
using namespace mulenet;

namespace {

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw sim::ScenarioError({path + ": " + e.what()});
  }
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir, std::optional<std::uint64_t> seed,
            std::optional<double> days) {
  auto scenario = sim::load_scenario(scenario_path);
  if (seed) scenario.rng_seed = *seed;
  if (days) scenario.duration_days = *days;
  const auto result = sim::run(scenario);
  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "metrics.json", result.metrics.to_json().dump(2) + "\n");
  write_file(fs::path(out_dir) / "uplink.csv", result.uplink_csv);
  write_file(fs::path(out_dir) / "trace.log", result.trace);
  std::cout << "completeness " << format_fixed(result.metrics.completeness(), 4) << "\n"
            << "uplink_entries " << result.metrics.uplink_entries << "\n"
            << "trace_hash " << std::hex << std::setw(16) << std::setfill('0') << result.metrics.trace_hash
            << std::dec << "\n";
  for (const auto& n : result.metrics.nodes)
    std::cout << "node " << n.id << " generated=" << n.generated << " delivered=" << n.delivered
              << " buffered=" << n.buffered << " dropped=" << n.dropped << " max_buffer=" << n.max_buffer
              << " min_v=" << format_fixed(n.min_voltage, 4) << "\n";
  return 0;
}

int cmd_calibrate(const std::string& path, int folds, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  const auto pairs = sensing::read_pairs_csv(in);
  const auto fit = sensing::fit_cubic(pairs);
  std::cout << sensing::serialize_calibration(fit.model);
  std::cout << "# r_squared " << format_fixed(fit.r_squared, 6) << "\n";
  if (static_cast<int>(pairs.size()) >= folds * 4) {
    const auto cv = sensing::kfold_cv(pairs, folds, seed);
    std::cout << "# cv_mean_abs_deviation_pct " << format_fixed(cv.mean_abs_deviation_percent, 4) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mulenet: battery-free soil sensor network simulator"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out", route_path, pairs_path, host = "127.0.0.1";
  std::optional<std::uint64_t> seed;
  std::optional<double> days;
  long long n_nodes = 0, n_gateways = 0;
  int folds = 10, port = 8080;
  std::uint64_t cv_seed = 1;
  double playback = 0.0;

  auto* run = app.add_subcommand("run", "Run a scenario and write metrics.json, uplink.csv and trace.log");
  run->add_option("scenario", scenario_path)->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--days", days, "Override the duration in days");

  auto* zones = app.add_subcommand("zones", "Print pickup zones");
  zones->add_option("scenario", scenario_path)->required()->check(CLI::ExistingFile);

  auto* whatif = app.add_subcommand("whatif", "Predict contacts for a candidate route");
  whatif->add_option("scenario", scenario_path)->required()->check(CLI::ExistingFile);
  whatif->add_option("route", route_path)->required()->check(CLI::ExistingFile);

  auto* cost = app.add_subcommand("cost", "Deployment cost estimate in USD");
  cost->add_option("--nodes", n_nodes)->required()->check(CLI::NonNegativeNumber);
  cost->add_option("--gateways", n_gateways)->required()->check(CLI::NonNegativeNumber);

  auto* calibrate = app.add_subcommand("calibrate", "Fit the voltage to RAW cubic from a pairs CSV");
  calibrate->add_option("pairs", pairs_path)->required()->check(CLI::ExistingFile);
  calibrate->add_option("--folds", folds)->check(CLI::Range(2, 1000));
  calibrate->add_option("--cv-seed", cv_seed);

  auto* serve = app.add_subcommand("serve", "Serve the query endpoints over HTTP");
  serve->add_option("scenario", scenario_path, "Scenario to load at start")->check(CLI::ExistingFile);
  serve->add_option("--host", host);
  serve->add_option("--port", port);
  serve->add_option("--playback", playback, "Live playback ratio (sim seconds per wall second)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(scenario_path, out_dir, seed, days);
    if (*zones) {
      std::cout << nlohmann::json{{"schema_version", sim::kScenarioSchemaVersion},
                                  {"zones", sim::zones_to_json(sim::compute_pickup_zones(sim::load_scenario(scenario_path)))}}
                       .dump(2)
                << "\n";
      return 0;
    }
    if (*whatif) {
      sim::Simulation s(sim::load_scenario(scenario_path));
      const auto route_doc = read_json_file(route_path);
      const auto route = sim::route_from_json(route_doc);
      std::cout << sim::predictions_to_json(sim::whatif_route(s, route), route_doc.value("schema_version", 1)).dump(2)
                << "\n";
      return 0;
    }
    if (*cost) {
      std::cout << format_fixed(sim::estimate_deployment_cost(n_nodes, n_gateways), 2) << "\n";
      return 0;
    }
    if (*calibrate) return cmd_calibrate(pairs_path, folds, cv_seed);
    if (*serve) {
      service::Service svc;
      if (!scenario_path.empty()) svc.load_session(sim::load_scenario(scenario_path));
      if (playback > 0.0) svc.start_playback(playback);
      std::cerr << "listening on " << host << ":" << port << "\n";
      service::serve_http(svc, host, port);
      return 0;
    }
  } catch (const sim::ScenarioError& e) {
    std::cerr << "invalid input:\n";
    for (const auto& p : e.problems()) std::cerr << "  " << p << "\n";
    return 2;
  } catch (const service::BadRequest& e) {
    std::cerr << "invalid input:\n";
    for (const auto& p : e.problems()) std::cerr << "  " << p << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
