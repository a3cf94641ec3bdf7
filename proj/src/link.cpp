#include "mulenet/link.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mulenet::link {

double fresnel_radius(const LinkGeometry& g) {
  if (g.d1_m < 0.0 || g.d2_m < 0.0) throw std::invalid_argument("fresnel_radius: negative distance");
  if (!(g.wavelength_m > 0.0)) throw std::invalid_argument("fresnel_radius: wavelength must be positive");
  const double total = g.d1_m + g.d2_m;
  if (total == 0.0) throw std::invalid_argument("fresnel_radius: d1 + d2 must be positive");
  return std::sqrt(g.wavelength_m * g.d1_m * g.d2_m / total);
}

void LinkModel::validate() const {
  if (!(canopy_range_m > 0.0) || !(clear_los_range_m > canopy_range_m))
    throw std::invalid_argument("link: require 0 < canopy_range < clear_los_range");
  if (!(rolloff_width_m >= 0.0)) throw std::invalid_argument("link: rolloff width must be >= 0");
}

double LinkModel::guaranteed_range_m(bool in_canopy) const {
  return std::max(0.0, range_m(in_canopy) - rolloff_width_m);
}

double success_probability(const LinkModel& model, double distance_m, bool in_canopy) {
  if (distance_m < 0.0) throw std::invalid_argument("packet_success: negative distance");
  const double range = model.range_m(in_canopy);
  if (model.rolloff_width_m <= 0.0) return distance_m <= range ? 1.0 : 0.0;
  const double start = range - model.rolloff_width_m;
  if (distance_m <= start) return 1.0;
  if (distance_m >= range) return 0.0;
  return (range - distance_m) / model.rolloff_width_m;
}

bool packet_success(const LinkModel& model, double distance_m, bool in_canopy, Rng& rng) {
  const double p = success_probability(model, distance_m, in_canopy);
  if (p >= 1.0) return true;
  if (p <= 0.0) return false;
  return uniform01(rng) < p;
}

void AirtimeParams::validate() const {
  if (spreading_factor < 7 || spreading_factor > 12)
    throw std::invalid_argument("spreading factor must be in 7..12");
  if (coding_rate_denominator < 5 || coding_rate_denominator > 8)
    throw std::invalid_argument("coding rate must be 4/5 .. 4/8");
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  if (payload_bytes < 1) throw std::invalid_argument("payload must be at least 1 byte");
  if (preamble_symbols < 0) throw std::invalid_argument("preamble length must be >= 0");
}

int payload_symbols(const AirtimeParams& p) {
  p.validate();
  const int header = p.explicit_header ? 0 : 1;
  const int de = p.low_data_rate_optimize ? 1 : 0;
  const int numerator = 8 * p.payload_bytes - 4 * p.spreading_factor + 28 + (p.crc ? 16 : 0) - 20 * header;
  const int denominator = 4 * (p.spreading_factor - 2 * de);
  // Integer ceiling; a non-positive numerator clamps to zero below.
  const int blocks = numerator > 0 ? (numerator + denominator - 1) / denominator : 0;
  return 8 + std::max(blocks * p.coding_rate_denominator, 0);
}

double time_on_air_ms(const AirtimeParams& p) {
  const double symbol_s = std::ldexp(1.0, p.spreading_factor) / p.bandwidth_hz;
  const double symbols = p.preamble_symbols + 4.25 + payload_symbols(p);
  return symbols * symbol_s * 1e3;
}

}  // namespace mulenet::link
