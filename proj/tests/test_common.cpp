#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "mulenet/common.hpp"

using namespace mulenet;

TEST(Common, DistanceIsEuclidean) {
  EXPECT_DOUBLE_EQ(distance({0, 0}, {3, 4}), 5.0);
  EXPECT_DOUBLE_EQ(distance({-1, 2}, {-1, 2}), 0.0);
}

TEST(Common, FormatDecimalRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 123456.789, 1e-300, -2.5, 9.68}) {
    EXPECT_EQ(parse_decimal(format_decimal(v)), v) << v;
  }
  EXPECT_EQ(format_decimal(-0.0), "0");
  EXPECT_EQ(format_decimal(0.5), "0.5");
}

TEST(Common, FormatFixedFoldsNegativeZero) {
  EXPECT_EQ(format_fixed(-0.001, 2), "0.00");
  EXPECT_EQ(format_fixed(764.72, 2), "764.72");
  EXPECT_EQ(format_fixed(2.0, 0), "2");
}

TEST(Common, ParseDecimalRejectsGarbage) {
  EXPECT_DOUBLE_EQ(parse_decimal(" +1.5 "), 1.5);
  EXPECT_THROW(parse_decimal("1.5x"), std::invalid_argument);
  EXPECT_THROW(parse_decimal(""), std::invalid_argument);
}

TEST(Common, Fnv1aKnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Common, SplitmixKnownVector) {
  // First output of the reference splitmix64 generator seeded with 0.
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
}

TEST(Common, MixSeedSeparatesStreams) {
  EXPECT_NE(mix_seed(1, 1), mix_seed(1, 2));
  EXPECT_NE(mix_seed(1, 1), mix_seed(2, 1));
  EXPECT_EQ(mix_seed(7, 3), mix_seed(7, 3));
}

TEST(Common, Uniform01InRangeAndReproducible) {
  Rng a(5), b(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = uniform01(a);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_EQ(u, uniform01(b));
  }
}

TEST(Common, StandardNormalMoments) {
  Rng rng(11);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = standard_normal(rng);
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}
