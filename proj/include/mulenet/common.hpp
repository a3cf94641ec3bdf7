#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace mulenet {

/// Planar field coordinates in meters.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

double distance(Point a, Point b);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_decimal(double value);

/// Fixed-point rendering with `digits` decimals (no exponent).
std::string format_fixed(double value, int digits);

/// Parses a full string as a double; throws std::invalid_argument otherwise.
double parse_decimal(std::string_view text);

// Deterministic 64-bit mixing used for seeds and phase offsets.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// FNV-1a over bytes, used to fingerprint event traces.
std::uint64_t fnv1a64(std::string_view bytes);

using Rng = std::mt19937_64;

/// Uniform draw in [0, 1) built from the raw engine output so results do not
/// depend on the standard library's distribution implementation.
double uniform01(Rng& rng);

/// Standard normal draw (Box-Muller over uniform01).
double standard_normal(Rng& rng);

}  // namespace mulenet
