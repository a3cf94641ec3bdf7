#include "mulenet/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mulenet::energy {

CapacitorState::CapacitorState(double capacitance_farads, double v_max_volts, double v_min_volts,
                               double v_now_volts)
    : capacitance_(capacitance_farads), v_max_(v_max_volts), v_min_(v_min_volts), v_now_(v_now_volts) {
  if (!(capacitance_ > 0.0) || !std::isfinite(capacitance_))
    throw std::invalid_argument("capacitance must be positive");
  if (!(v_min_ >= 0.0) || !(v_max_ > v_min_) || !std::isfinite(v_max_))
    throw std::invalid_argument("require 0 <= v_min < v_max");
  if (!(v_now_ >= 0.0) || !(v_now_ <= v_max_))
    throw std::invalid_argument("v_now must lie in [0, v_max]");
}

CapacitorState CapacitorState::node_default() { return {1.0, 5.5, 3.3, 5.5}; }

double CapacitorState::capacity_joules() const {
  return 0.5 * capacitance_ * (v_max_ * v_max_ - v_min_ * v_min_);
}

CapacitorState CapacitorState::with_voltage(double v_now_volts) const {
  return {capacitance_, v_max_, v_min_, v_now_volts};
}

double CapacitorState::voltage_for_usable(double joules) const {
  if (joules <= 0.0) return v_min_;
  if (joules >= capacity_joules()) return v_max_;
  return std::min(v_max_, std::sqrt(2.0 * joules / capacitance_ + v_min_ * v_min_));
}

double usable_energy(const CapacitorState& cap) {
  const double v = cap.v_now_volts();
  const double vmin = cap.v_min_volts();
  if (v <= vmin) return 0.0;
  return 0.5 * cap.capacitance_farads() * (v * v - vmin * vmin);
}

std::string_view to_string(LightCondition c) {
  switch (c) {
    case LightCondition::Dark: return "dark";
    case LightCondition::Cloudy: return "cloudy";
    case LightCondition::Sunny: return "sunny";
  }
  return "?";
}

LightCondition light_condition_from_string(std::string_view s) {
  if (s == "dark") return LightCondition::Dark;
  if (s == "cloudy") return LightCondition::Cloudy;
  if (s == "sunny") return LightCondition::Sunny;
  throw std::invalid_argument("unknown light condition '" + std::string(s) + "'");
}

LightCondition classify_light(double klux, const LightBands& bands) {
  if (klux < bands.cloudy_min_klux) return LightCondition::Dark;
  if (klux <= bands.cloudy_max_klux) return LightCondition::Cloudy;
  return LightCondition::Sunny;
}

char to_char(CyclePath p) { return static_cast<char>('A' + static_cast<int>(p)); }

CyclePath cycle_path_from_char(char c) {
  if (c < 'A' || c > 'F') throw std::invalid_argument(std::string("unknown cycle path '") + c + "'");
  return static_cast<CyclePath>(c - 'A');
}

void CyclePowerTable::validate() const {
  for (double e : energy_mj)
    if (!(e > 0.0) || !std::isfinite(e)) throw std::invalid_argument("cycle energies must be positive");
}

PanelPoint BandCurve::at(double klux) const {
  if (klux_hi <= klux_lo || klux <= klux_lo) return at_lo;
  if (klux >= klux_hi) return at_hi;
  const double f = (klux - klux_lo) / (klux_hi - klux_lo);
  auto lerp = [f](double a, double b) { return a + f * (b - a); };
  return {lerp(at_lo.current_ma, at_hi.current_ma), lerp(at_lo.voltage_v, at_hi.voltage_v),
          lerp(at_lo.power_mw, at_hi.power_mw)};
}

HarvestProfile HarvestProfile::node_default(double full_sun_power_mw) {
  HarvestProfile p;
  // Below the cloudy band the panel neither sources current nor reaches the
  // open-circuit voltage the cloudy signature relies on.
  p.dark = {0.0, 5.0, {0.0, 0.0, 0.0}, {0.0, 0.8, 0.0}};
  // Diffuse light: open-circuit voltage is present, current is a trickle.
  p.cloudy = {5.0, 12.0, {0.0, 4.2, 0.1}, {0.05, 4.5, 0.4}};
  // Direct light: linear up to full sun, saturating at 2 mA.
  p.sunny = {12.0, 80.0, {0.5, 4.6, 0.6}, {2.0, 4.8, full_sun_power_mw}};
  p.validate();
  return p;
}

PanelPoint HarvestProfile::panel_at(double klux) const {
  switch (classify_light(klux, bands)) {
    case LightCondition::Dark: return dark.at(klux);
    case LightCondition::Cloudy: return cloudy.at(klux);
    case LightCondition::Sunny: return sunny.at(klux);
  }
  return {};
}

void HarvestProfile::validate() const {
  if (full_sun_power_mw() < 8.0 || full_sun_power_mw() > 14.0)
    throw std::invalid_argument("full-sun harvest power must lie in [8, 14] mW");
  if (panel_at(0.0).current_ma != 0.0 || panel_at(0.0).power_mw != 0.0)
    throw std::invalid_argument("zero illuminance must give zero current and power");
  if (leakage_mw < 0.0) throw std::invalid_argument("leakage must be non-negative");
  const BandCurve* curves[] = {&dark, &cloudy, &sunny};
  double last = 0.0;
  for (const BandCurve* c : curves) {
    if (c->at_lo.power_mw < last || c->at_hi.power_mw < c->at_lo.power_mw)
      throw std::invalid_argument("harvest power must be non-decreasing in illuminance");
    if (c->at_lo.current_ma < 0.0 || c->at_hi.current_ma < 0.0 || c->at_lo.voltage_v < 0.0 ||
        c->at_hi.voltage_v < 0.0)
      throw std::invalid_argument("panel current and voltage must be non-negative");
    last = c->at_hi.power_mw;
  }
}

CapacitorState drain_cycle(const CapacitorState& cap, CyclePath path, const CyclePowerTable& table) {
  const double remaining = usable_energy(cap) - table.joules(path);
  if (remaining < 0.0)
    throw NodeDead(std::string("insufficient energy for cycle ") + to_char(path));
  return cap.with_voltage(cap.voltage_for_usable(remaining));
}

CapacitorState harvest_step(const CapacitorState& cap, const HarvestProfile& profile, double klux,
                            double dt_seconds) {
  if (!(dt_seconds > 0.0)) throw std::invalid_argument("harvest_step: dt must be positive");
  const double net_w = (profile.harvest_power_mw(klux) - profile.leakage_mw) * 1e-3;
  if (net_w == 0.0) return cap;
  if (net_w < 0.0 && cap.v_now_volts() <= cap.v_min_volts()) return cap;
  if (cap.v_now_volts() < cap.v_min_volts()) {
    // Below the usable floor: fill the unusable part first.
    const double c = cap.capacitance_farads();
    const double v = cap.v_now_volts();
    const double total = 0.5 * c * v * v + net_w * dt_seconds;
    return cap.with_voltage(std::min(cap.v_max_volts(), std::sqrt(2.0 * total / c)));
  }
  const double target = usable_energy(cap) + net_w * dt_seconds;
  return cap.with_voltage(cap.voltage_for_usable(target));
}

double time_to_full(const CapacitorState& cap, const HarvestProfile& profile, double klux) {
  const double net_w = (profile.harvest_power_mw(klux) - profile.leakage_mw) * 1e-3;
  const double missing = cap.capacity_joules() - usable_energy(cap);
  if (missing <= 0.0) return 0.0;
  if (net_w <= 0.0) return std::numeric_limits<double>::infinity();
  return missing / net_w;
}

long long dark_cycles_available(const CapacitorState& cap, const CyclePowerTable& table) {
  return static_cast<long long>(std::floor(usable_energy(cap) / table.joules(CyclePath::F)));
}

double lifetime_in_darkness(const CapacitorState& cap, const CyclePowerTable& table,
                            double duty_cycle_minutes) {
  if (!(duty_cycle_minutes > 0.0)) throw std::invalid_argument("duty cycle must be positive");
  if (duty_cycle_minutes < kMinDutyCycleMinutes * (1.0 - 1e-12) ||
      duty_cycle_minutes > kMaxDutyCycleMinutes)
    throw std::invalid_argument("duty cycle outside the timer's 100 ms .. 2 h range");
  return static_cast<double>(dark_cycles_available(cap, table)) * duty_cycle_minutes / 1440.0;
}

double average_power_uw(std::initializer_list<PathRun> runs, double seconds,
                        const CyclePowerTable& table) {
  if (!(seconds > 0.0)) throw std::invalid_argument("averaging window must be positive");
  double mj = 0.0;
  for (const PathRun& r : runs) mj += r.count * table.millijoules(r.path);
  return mj / seconds * 1e3;
}

}  // namespace mulenet::energy
