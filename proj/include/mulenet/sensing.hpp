#pragma once

// Galvanic soil-moisture signal model and the voltage -> RAW -> VWC
// calibration chain.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mulenet/common.hpp"

namespace mulenet::sensing {

class SingularFit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Sample {
  double time_s;
  double value;

  friend bool operator==(const Sample&, const Sample&) = default;
};

/// Ordered samples with strictly increasing timestamps.
class TimeSeries {
 public:
  TimeSeries() = default;
  /// Throws std::invalid_argument on a non-increasing timestamp.
  explicit TimeSeries(std::vector<Sample> samples);

  void push_back(double time_s, double value);

  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }
  std::span<const Sample> samples() const { return samples_; }
  auto begin() const { return samples_.begin(); }
  auto end() const { return samples_.end(); }

  std::vector<double> values() const;

  friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

 private:
  std::vector<Sample> samples_;
};

// --- TEROS-12 reference conversion -----------------------------------------

inline constexpr double kTerosSlope = 3.879e-4;
inline constexpr double kTerosIntercept = -0.6956;

/// VWC fraction (m^3/m^3) from a TEROS-12 RAW count. Negative below the dry
/// point; callers that display it clamp.
double teros_raw_to_vwc(double raw, double slope = kTerosSlope,
                        double intercept = kTerosIntercept);
double vwc_to_teros_raw(double vwc_fraction, double slope = kTerosSlope,
                        double intercept = kTerosIntercept);
inline double vwc_percent(double vwc_fraction) { return vwc_fraction * 100.0; }

// --- Voltage -> RAW cubic ---------------------------------------------------

struct CalibrationModel {
  // RAW = a3 V^3 + a2 V^2 + a1 V + a0
  double a3 = -2.34e4;
  double a2 = 4.45e4;
  double a1 = -2.46e4;
  double a0 = 6.09e3;
  double teros_slope = kTerosSlope;
  double teros_intercept = kTerosIntercept;

  friend bool operator==(const CalibrationModel&, const CalibrationModel&) = default;
};

inline constexpr double kMaxCellVoltage = 1.5;

/// Throws std::invalid_argument for v outside [0, 1.5] V.
double voltage_to_raw(double volts, const CalibrationModel& model = {});

/// Full chain: volts -> RAW -> VWC fraction.
double voltage_to_vwc(double volts, const CalibrationModel& model = {});

struct CalibrationPair {
  double voltage_v;
  double raw;
};

struct CubicFit {
  CalibrationModel model;
  double r_squared;
};

/// Ordinary least squares cubic in voltage. Needs >= 4 pairs; throws
/// SingularFit when the design matrix is rank deficient.
CubicFit fit_cubic(std::span<const CalibrationPair> pairs);

/// Series form: pairs voltages[i] with raws[i]; timestamps must match.
CubicFit fit_cubic(const TimeSeries& voltages, const TimeSeries& raws);

/// 1 - SS_res / SS_tot of a model against observed RAW values.
double r_squared(const CalibrationModel& model, std::span<const CalibrationPair> pairs);

struct CrossValidation {
  /// Mean over folds of the per-fold mean |predicted - true| VWC, in
  /// percentage points.
  double mean_abs_deviation_percent;
  double std_abs_deviation_percent;
  std::vector<double> fold_deviation_percent;
  /// fold_of[i] = test fold holding sample i.
  std::vector<int> fold_of;
};

/// Seeded shuffle then contiguous split into k folds, sizes differing by at
/// most one.
std::vector<int> assign_folds(std::size_t n, int k, std::uint64_t seed);

/// Throws std::invalid_argument when k < 2 or k exceeds the sample count.
CrossValidation kfold_cv(std::span<const CalibrationPair> pairs, int k = 10,
                         std::uint64_t seed = 0);

/// Causal trailing mean; the first window-1 outputs average what is
/// available so far. Throws std::invalid_argument for window 0.
TimeSeries rolling_mean(const TimeSeries& series, std::size_t window);

// --- Soil and sensor models ------------------------------------------------

enum class Drainage { Well, Poor };

struct SoilType {
  std::string name;
  double drying_rate_per_hour;  // exponential decay rate of excess VWC
  Drainage drainage;
  double residual_vwc;    // dry floor the soil drains toward
  double saturation_vwc;  // ceiling after watering
  double cell_offset_v = 0.0;  // soil chemistry shift of the galvanic cell

  /// Osco, Catlin, Wyanet or Potting (case sensitive).
  static SoilType preset(std::string_view name);
  static std::vector<SoilType> presets();
};

struct WateringEvent {
  double time_s;
  double added_vwc;
};

/// Closed-form VWC trajectory: exponential decay toward the residual between
/// waterings, step up (clamped at saturation) at each watering.
class SoilTrace {
 public:
  SoilTrace(SoilType soil, std::vector<WateringEvent> events,
            std::optional<double> initial_vwc = std::nullopt);

  double vwc_at(double time_s) const;
  const SoilType& soil() const { return soil_; }

 private:
  SoilType soil_;
  std::vector<WateringEvent> events_;  // sorted by time
  std::vector<double> after_event_;    // VWC immediately after each event
  double initial_;
};

/// Samples SoilTrace on [0, duration] every `step_s` seconds.
TimeSeries simulate_soil_vwc(const SoilType& soil, const std::vector<WateringEvent>& events,
                             double duration_s, double step_s = 1200.0,
                             std::optional<double> initial_vwc = std::nullopt);

enum class ElectrodePair { ZnSS, ZnAl };

std::string_view to_string(ElectrodePair p);
ElectrodePair electrode_pair_from_string(std::string_view s);

/// Logistic open-circuit voltage in VWC plus temperature slope and noise.
struct GalvanicSensorModel {
  ElectrodePair electrode_pair = ElectrodePair::ZnSS;
  double spacing_inches = 1.0;
  double v_dry = 0.41;
  double v_wet = 0.70;
  double midpoint_vwc = 0.20;
  double steepness = 12.0;
  double temp_coeff_v_per_c = 0.0005;
  double reference_temp_c = 20.0;
  double noise_sigma_v = 0.0;

  static GalvanicSensorModel zinc_stainless();
  static GalvanicSensorModel zinc_aluminum();

  /// Noiseless voltage, clamped to [0, 1] V.
  double mean_voltage(double vwc_fraction, const SoilType& soil, double temp_c) const;
  /// mean_voltage plus Gaussian noise drawn from `rng` when noise_sigma_v > 0.
  double voltage(double vwc_fraction, const SoilType& soil, double temp_c, Rng& rng) const;
};

// --- File formats ----------------------------------------------------------

struct ReadingRow {
  double timestamp_s;
  std::uint32_t node_id;
  double voltage_v;
  double temp_c;
  std::string sun_state;

  friend bool operator==(const ReadingRow&, const ReadingRow&) = default;
};

inline constexpr std::string_view kReadingCsvHeader = "timestamp_s,node_id,voltage_v,temp_c,sun_state";
inline constexpr std::string_view kPairsCsvHeader = "voltage_v,raw";

void write_readings_csv(std::ostream& out, std::span<const ReadingRow> rows);
/// Throws std::runtime_error with the offending line number on malformed input.
std::vector<ReadingRow> read_readings_csv(std::istream& in);

std::vector<CalibrationPair> read_pairs_csv(std::istream& in);
void write_pairs_csv(std::ostream& out, std::span<const CalibrationPair> pairs);

/// `key=value` lines with shortest round-trip decimals.
std::string serialize_calibration(const CalibrationModel& model);
CalibrationModel parse_calibration(std::string_view text);

}  // namespace mulenet::sensing
