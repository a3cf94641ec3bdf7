#pragma once

// Supercapacitor energy store, solar harvesting and per-cycle consumption.
//
// Units at this boundary: joules for stored energy, millijoules for cycle
// costs, milliwatts for harvest power, kLux for illuminance, minutes for
// duty cycles.

#include <array>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mulenet::energy {

/// Raised when the store cannot pay for the requested cycle.
class NodeDead : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CapacitorState {
 public:
  /// Throws std::invalid_argument unless C > 0, 0 <= v_min < v_max and
  /// 0 <= v_now <= v_max.
  CapacitorState(double capacitance_farads, double v_max_volts, double v_min_volts,
                 double v_now_volts);

  /// 1 F, 5.5 V max, 3.3 V min, fully charged.
  static CapacitorState node_default();

  double capacitance_farads() const { return capacitance_; }
  double v_max_volts() const { return v_max_; }
  double v_min_volts() const { return v_min_; }
  double v_now_volts() const { return v_now_; }

  /// Usable energy when full.
  double capacity_joules() const;

  /// Same capacitor, different terminal voltage (validated).
  CapacitorState with_voltage(double v_now_volts) const;

  /// Voltage at which the usable energy equals `joules` (clamped to
  /// [v_min, v_max]).
  double voltage_for_usable(double joules) const;

  friend bool operator==(const CapacitorState&, const CapacitorState&) = default;

 private:
  double capacitance_;
  double v_max_;
  double v_min_;
  double v_now_;
};

/// 1/2 C (v_now^2 - v_min^2), zero below v_min.
double usable_energy(const CapacitorState& cap);

enum class LightCondition { Dark = 0, Cloudy = 1, Sunny = 2 };

std::string_view to_string(LightCondition c);
LightCondition light_condition_from_string(std::string_view s);

/// Band edges: Dark < cloudy_min <= Cloudy <= cloudy_max < Sunny.
struct LightBands {
  double cloudy_min_klux = 5.0;
  double cloudy_max_klux = 12.0;
};

LightCondition classify_light(double klux, const LightBands& bands = {});

/// Per-wake state sequences through the node FSM.
enum class CyclePath { A = 0, B, C, D, E, F };

inline constexpr std::array<CyclePath, 6> kAllPaths = {CyclePath::A, CyclePath::B, CyclePath::C,
                                                      CyclePath::D, CyclePath::E, CyclePath::F};

char to_char(CyclePath p);
CyclePath cycle_path_from_char(char c);

/// Measured cycle integrals, mJ.
struct CyclePowerTable {
  std::array<double, 6> energy_mj = {429.403, 414.165, 429.403, 47.334, 6.608, 6.608};

  double millijoules(CyclePath p) const { return energy_mj[static_cast<std::size_t>(p)]; }
  double joules(CyclePath p) const { return millijoules(p) * 1e-3; }
  /// Throws std::invalid_argument on a non-positive entry.
  void validate() const;
};

/// Electrical state of the panel for one illuminance value.
struct PanelPoint {
  double current_ma = 0.0;
  double voltage_v = 0.0;
  double power_mw = 0.0;
};

/// Linear ramp between two panel points over a kLux interval, clamped at
/// both ends.
struct BandCurve {
  double klux_lo = 0.0;
  double klux_hi = 0.0;
  PanelPoint at_lo;
  PanelPoint at_hi;

  PanelPoint at(double klux) const;
};

/// Illuminance -> panel electrical response, one curve per light band so the
/// panel signature classifies the same way as the illuminance does.
struct HarvestProfile {
  LightBands bands;
  BandCurve dark;
  BandCurve cloudy;
  BandCurve sunny;
  double leakage_mw = 0.0;  // constant self-discharge

  /// 12 mW and 2 mA at 80 kLux full sun, trickle in diffuse light, nothing in
  /// the dark.
  static HarvestProfile node_default(double full_sun_power_mw = 12.0);

  PanelPoint panel_at(double klux) const;
  double harvest_power_mw(double klux) const { return panel_at(klux).power_mw; }
  double full_sun_power_mw() const { return sunny.at_hi.power_mw; }
  double max_panel_current_ma() const { return sunny.at_hi.current_ma; }

  /// Throws std::invalid_argument if power decreases with illuminance, the
  /// full-sun power leaves [8, 14] mW, or zero light yields current.
  void validate() const;
};

/// Spends the cycle's measured energy. Throws NodeDead if the store holds less
/// than that.
CapacitorState drain_cycle(const CapacitorState& cap, CyclePath path,
                           const CyclePowerTable& table = {});

/// Net harvest (harvest - leakage) over dt; capped at v_max, floored at v_min.
CapacitorState harvest_step(const CapacitorState& cap, const HarvestProfile& profile,
                            double klux, double dt_seconds);

/// Seconds of constant illuminance needed to go from `cap` to full; infinity
/// when the net power is not positive.
double time_to_full(const CapacitorState& cap, const HarvestProfile& profile, double klux);

inline constexpr double kMinDutyCycleMinutes = 0.1 / 60.0;  // 100 ms
inline constexpr double kMaxDutyCycleMinutes = 120.0;       // 2 h

/// Days a full store lasts on path-F wakes alone.
double lifetime_in_darkness(const CapacitorState& cap, const CyclePowerTable& table,
                            double duty_cycle_minutes);

/// Number of whole path-F wakes the store can pay for.
long long dark_cycles_available(const CapacitorState& cap, const CyclePowerTable& table);

/// Mean power over a sequence of (count, path) runs spread across `seconds`.
struct PathRun {
  int count;
  CyclePath path;
};
double average_power_uw(std::initializer_list<PathRun> runs, double seconds,
                        const CyclePowerTable& table = {});

}  // namespace mulenet::energy
