#include <gtest/gtest.h>

#include <cmath>

#include "mulenet/link.hpp"
#include "oracles.hpp"

using namespace mulenet;
using namespace mulenet::link;

TEST(Fresnel, MidpointOfOneKilometre) {
  EXPECT_NEAR(fresnel_radius({kSpeedOfLight / kCarrierHz, 500.0, 500.0}), 9.05, 0.01);
}

TEST(Fresnel, AgreesWithExactEllipseOnGrid) {
  const double lambda = kSpeedOfLight / kCarrierHz;
  for (double d1 = 50.0; d1 <= 2000.0; d1 += 150.0)
    for (double d2 = 50.0; d2 <= 2000.0; d2 += 150.0)
      EXPECT_NEAR(fresnel_radius({lambda, d1, d2}) / oracle::fresnel_radius_exact(lambda, d1, d2), 1.0, 1e-2)
          << d1 << "," << d2;
}

TEST(Fresnel, EdgeCases) {
  EXPECT_EQ(fresnel_radius({0.3, 0.0, 100.0}), 0.0);
  EXPECT_THROW(fresnel_radius({0.3, -1.0, 100.0}), std::invalid_argument);
  EXPECT_THROW(fresnel_radius({0.3, 0.0, 0.0}), std::invalid_argument);
}

TEST(Link, HardStepAnchors) {
  const LinkModel m;
  Rng rng(1);
  EXPECT_TRUE(packet_success(m, 900.0, false, rng));
  EXPECT_FALSE(packet_success(m, 1100.0, false, rng));
  EXPECT_TRUE(packet_success(m, 200.0, true, rng));
  EXPECT_FALSE(packet_success(m, 300.0, true, rng));
  EXPECT_TRUE(packet_success(m, 1000.0, false, rng));
  EXPECT_TRUE(packet_success(m, 250.0, true, rng));
}

TEST(Link, HardStepDoesNotConsumeRandomness) {
  const LinkModel m;
  Rng a(9), b(9);
  for (double d : {10.0, 500.0, 2000.0}) packet_success(m, d, false, a);
  EXPECT_EQ(a(), b());
}

TEST(Link, RolloffRampIsMonotone) {
  LinkModel m;
  m.rolloff_width_m = 100.0;
  EXPECT_DOUBLE_EQ(success_probability(m, 900.0, false), 1.0);
  EXPECT_DOUBLE_EQ(success_probability(m, 950.0, false), 0.5);
  EXPECT_DOUBLE_EQ(success_probability(m, 1000.01, false), 0.0);
  EXPECT_DOUBLE_EQ(m.guaranteed_range_m(false), 900.0);
  double prev = 2.0;
  for (double d = 0; d < 1200; d += 5) {
    const double p = success_probability(m, d, false);
    ASSERT_LE(p, prev);
    prev = p;
  }
  Rng rng(1);
  int ok = 0;
  for (int i = 0; i < 20000; ++i) ok += packet_success(m, 950.0, false, rng);
  EXPECT_NEAR(ok / 20000.0, 0.5, 0.02);
}

TEST(Link, Validation) {
  LinkModel m;
  EXPECT_NO_THROW(m.validate());
  m.canopy_range_m = 1200.0;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m = LinkModel{};
  m.rolloff_width_m = -1.0;
  EXPECT_THROW(m.validate(), std::invalid_argument);
}

TEST(Airtime, FrozenReferenceValues) {
  for (const auto& c : oracle::frozen_toa()) {
    AirtimeParams p;
    p.spreading_factor = c.sf;
    p.coding_rate_denominator = c.cr;
    p.bandwidth_hz = c.bw;
    p.payload_bytes = c.payload;
    p.explicit_header = !c.implicit_header;
    p.low_data_rate_optimize = c.ldro;
    EXPECT_NEAR(time_on_air_ms(p), c.expected_ms, 1e-9) << "SF" << c.sf << " PL" << c.payload;
    EXPECT_NEAR(time_on_air_ms(p), oracle::airtime_ms(c.sf, c.cr, c.bw, c.payload, c.implicit_header, c.ldro), 1e-9);
  }
}

TEST(Airtime, AgreesWithOracleAcrossParameterSpace) {
  for (int sf = 7; sf <= 12; ++sf)
    for (int cr = 5; cr <= 8; ++cr)
      for (int pl : {1, 9, 31, 64, 255})
        for (bool ih : {false, true})
          for (bool ldro : {false, true}) {
            AirtimeParams p;
            p.spreading_factor = sf;
            p.coding_rate_denominator = cr;
            p.payload_bytes = pl;
            p.explicit_header = !ih;
            p.low_data_rate_optimize = ldro;
            ASSERT_NEAR(time_on_air_ms(p), oracle::airtime_ms(sf, cr, 125e3, pl, ih, ldro), 1e-9);
          }
}

TEST(Airtime, NineBytePayloadSymbols) {
  AirtimeParams p;
  EXPECT_EQ(payload_symbols(p), 28);
  p.spreading_factor = 12;
  EXPECT_EQ(payload_symbols(p), 18);
}

TEST(Airtime, RejectsInvalidParameters) {
  AirtimeParams p;
  p.spreading_factor = 6;
  EXPECT_THROW(time_on_air_ms(p), std::invalid_argument);
  p = {};
  p.coding_rate_denominator = 9;
  EXPECT_THROW(time_on_air_ms(p), std::invalid_argument);
  p = {};
  p.payload_bytes = 0;
  EXPECT_THROW(time_on_air_ms(p), std::invalid_argument);
}
