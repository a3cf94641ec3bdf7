#pragma once

// Independent reference computations the library is checked against. None of
// these call into the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace oracle {

// LoRa airtime written from the modem datasheet symbol formula, kept apart
// from the library's version on purpose.
struct ToaCase {
  int sf;
  int cr;  // denominator 5..8
  double bw;
  int payload;
  bool implicit_header;
  bool ldro;
  double expected_ms;  // frozen reference
};

inline double airtime_ms(int sf, int cr, double bw, int payload, bool implicit_header, bool ldro,
                         int preamble = 8, bool crc = true) {
  const double tsym_ms = std::pow(2.0, sf) / bw * 1000.0;
  const double num = 8.0 * payload - 4.0 * sf + 28.0 + (crc ? 16.0 : 0.0) - (implicit_header ? 20.0 : 0.0);
  const double den = 4.0 * (sf - (ldro ? 2 : 0));
  const double n_payload = 8.0 + std::max(std::ceil(num / den) * cr, 0.0);
  return (preamble + 4.25) * tsym_ms + n_payload * tsym_ms;
}

inline const std::vector<ToaCase>& frozen_toa() {
  static const std::vector<ToaCase> cases = {
      {7, 5, 125e3, 9, false, false, 41.216},   {7, 5, 250e3, 9, false, false, 20.608},
      {12, 5, 125e3, 9, false, false, 991.232}, {12, 5, 125e3, 9, false, true, 991.232},
      {7, 8, 125e3, 50, false, false, 143.616}, {9, 5, 125e3, 1, false, false, 103.424},
      {10, 6, 125e3, 20, true, false, 362.496}, {7, 5, 125e3, 230, false, false, 363.776},
  };
  return cases;
}

// First Fresnel zone from its definition: the radius at which the detour
// through the obstruction point is half a wavelength longer. Solved by
// bisection, so it includes no small-radius approximation.
inline double fresnel_radius_exact(double lambda, double d1, double d2) {
  auto excess = [&](double r) { return std::hypot(d1, r) + std::hypot(d2, r) - (d1 + d2) - lambda / 2.0; };
  double lo = 0.0, hi = d1 + d2;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Classical RK4 on dV/dt = f(V).
inline double rk4(const std::function<double(double)>& f, double v0, double t_end, int steps) {
  const double h = t_end / steps;
  double v = v0;
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(v);
    const double k2 = f(v + 0.5 * h * k1);
    const double k3 = f(v + 0.5 * h * k2);
    const double k4 = f(v + h * k3);
    v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return v;
}

// Brute-force rolling mean: average of the last `window` values.
inline std::vector<double> rolling_mean_naive(const std::vector<double>& xs, std::size_t window) {
  std::vector<double> out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const std::size_t lo = i + 1 >= window ? i + 1 - window : 0;
    double s = 0.0;
    for (std::size_t j = lo; j <= i; ++j) s += xs[j];
    out.push_back(s / static_cast<double>(i - lo + 1));
  }
  return out;
}

// Supercapacitor energy between two voltages, 1/2 C (v1^2 - v2^2).
inline double cap_energy(double c, double v_hi, double v_lo) { return 0.5 * c * (v_hi * v_hi - v_lo * v_lo); }

// Published reference figures.
inline constexpr double kUsableJoules = 9.68;
inline constexpr double kPublishedSunnyDayUw = 179.88;
struct LifetimeRow {
  double duty_minutes;
  double published_days;
};
inline constexpr LifetimeRow kLifetimeRows[] = {{20, 21.81}, {15, 16.27}, {10, 10.75}, {5, 5.22}};

}  // namespace oracle
