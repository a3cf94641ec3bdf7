#pragma once

// LoRa link model: Fresnel geometry, range-anchored packet success and
// time-on-air.

#include "mulenet/common.hpp"

namespace mulenet::link {

inline constexpr double kSpeedOfLight = 299'792'458.0;
inline constexpr double kCarrierHz = 915e6;

struct LinkGeometry {
  double wavelength_m = kSpeedOfLight / kCarrierHz;
  double d1_m = 0.0;  // obstruction to antenna 1
  double d2_m = 0.0;  // obstruction to antenna 2
};

/// First Fresnel zone radius sqrt(lambda d1 d2 / (d1 + d2)). Throws
/// std::invalid_argument for negative distances or d1 + d2 == 0.
double fresnel_radius(const LinkGeometry& geom);

struct LinkModel {
  double tx_power_dbm = 2.0;
  double clear_los_range_m = 1000.0;
  double canopy_range_m = 250.0;
  /// Width of the linear success ramp ending at the range; 0 = hard step.
  double rolloff_width_m = 0.0;

  /// Throws std::invalid_argument unless 0 < canopy < clear and the rolloff
  /// is non-negative.
  void validate() const;

  double range_m(bool in_canopy) const { return in_canopy ? canopy_range_m : clear_los_range_m; }
  /// Largest distance at which delivery is certain.
  double guaranteed_range_m(bool in_canopy) const;
};

/// Probability that a single packet gets through.
double success_probability(const LinkModel& model, double distance_m, bool in_canopy);

/// Draws from `rng` only when the probability is strictly between 0 and 1.
bool packet_success(const LinkModel& model, double distance_m, bool in_canopy, Rng& rng);

struct AirtimeParams {
  int spreading_factor = 7;
  int coding_rate_denominator = 5;  // 4/5 .. 4/8
  double bandwidth_hz = 125'000.0;
  int payload_bytes = 9;
  int preamble_symbols = 8;
  bool explicit_header = true;
  bool low_data_rate_optimize = false;
  bool crc = true;

  /// Throws std::invalid_argument on SF outside 7..12, CR outside 5..8, a
  /// non-positive bandwidth or an empty payload.
  void validate() const;
};

/// Payload symbol count (including the 8 fixed symbols).
int payload_symbols(const AirtimeParams& p);

/// Semtech SX127x airtime in milliseconds.
double time_on_air_ms(const AirtimeParams& p);

}  // namespace mulenet::link
