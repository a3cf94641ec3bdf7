#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "mulenet/sensing.hpp"
#include "oracles.hpp"

using namespace mulenet;
using namespace mulenet::sensing;

namespace {

// Noiseless pairs straight off the reference cubic, written out by hand.
std::vector<CalibrationPair> reference_pairs(int n, double lo = 0.2, double hi = 0.9) {
  std::vector<CalibrationPair> out;
  for (int i = 0; i < n; ++i) {
    const double v = lo + (hi - lo) * i / (n - 1);
    out.push_back({v, -2.34e4 * v * v * v + 4.45e4 * v * v - 2.46e4 * v + 6.09e3});
  }
  return out;
}

}  // namespace

TEST(Teros, RawToVwcLine) {
  EXPECT_NEAR(teros_raw_to_vwc(2500.0), 3.879e-4 * 2500.0 - 0.6956, 1e-12);
  EXPECT_NEAR(teros_raw_to_vwc(2500.0), 0.27415, 1e-9);
  EXPECT_NEAR(vwc_to_teros_raw(0.0), 0.6956 / 3.879e-4, 1e-9);
  EXPECT_NEAR(vwc_to_teros_raw(teros_raw_to_vwc(2123.4)), 2123.4, 1e-9);
}

TEST(Calibration, HalfVoltChain) {
  EXPECT_NEAR(voltage_to_raw(0.5), 1990.0, 1e-9);
  const double pct = vwc_percent(voltage_to_vwc(0.5));
  EXPECT_NEAR(pct, (3.879e-4 * 1990.0 - 0.6956) * 100.0, 1e-6);
  EXPECT_NEAR(pct, 7.6321, 1e-6);
}

TEST(Calibration, RejectsVoltageOutsideCellRange) {
  EXPECT_THROW(voltage_to_raw(-0.01), std::invalid_argument);
  EXPECT_THROW(voltage_to_raw(1.51), std::invalid_argument);
  EXPECT_NO_THROW(voltage_to_raw(1.5));
}

TEST(Calibration, FitRecoversReferenceCoefficients) {
  const auto pairs = reference_pairs(40);
  const auto fit = fit_cubic(pairs);
  const CalibrationModel ref;
  EXPECT_NEAR(fit.model.a3 / ref.a3, 1.0, 1e-6);
  EXPECT_NEAR(fit.model.a2 / ref.a2, 1.0, 1e-6);
  EXPECT_NEAR(fit.model.a1 / ref.a1, 1.0, 1e-6);
  EXPECT_NEAR(fit.model.a0 / ref.a0, 1.0, 1e-6);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
}

TEST(Calibration, FitNeedsFourDistinctVoltages) {
  std::vector<CalibrationPair> three = {{0.1, 1}, {0.2, 2}, {0.3, 3}};
  EXPECT_THROW(fit_cubic(three), std::invalid_argument);
  std::vector<CalibrationPair> repeated = {{0.1, 1}, {0.1, 2}, {0.2, 3}, {0.2, 4}, {0.3, 5}};
  EXPECT_THROW(fit_cubic(repeated), SingularFit);
}

TEST(Calibration, FitFromAlignedSeries) {
  const auto pairs = reference_pairs(12);
  TimeSeries v, r;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    v.push_back(i * 1200.0, pairs[i].voltage_v);
    r.push_back(i * 1200.0, pairs[i].raw);
  }
  EXPECT_NEAR(fit_cubic(v, r).model.a0, 6.09e3, 1e-4);
  TimeSeries shifted;
  for (std::size_t i = 0; i < pairs.size(); ++i) shifted.push_back(i * 1200.0 + 1.0, pairs[i].raw);
  EXPECT_THROW(fit_cubic(v, shifted), std::invalid_argument);
}

TEST(Calibration, RSquaredOfConstantModelIsZero) {
  const auto pairs = reference_pairs(10);
  double mean = 0.0;
  for (const auto& p : pairs) mean += p.raw;
  mean /= pairs.size();
  CalibrationModel flat{0, 0, 0, mean};
  EXPECT_NEAR(r_squared(flat, pairs), 0.0, 1e-12);
}

TEST(Folds, EveryIndexInExactlyOneFold) {
  for (std::size_t n : {10u, 23u, 100u}) {
    const auto folds = assign_folds(n, 10, 99);
    ASSERT_EQ(folds.size(), n);
    std::map<int, int> sizes;
    for (int f : folds) {
      ASSERT_GE(f, 0);
      ASSERT_LT(f, 10);
      ++sizes[f];
    }
    ASSERT_EQ(sizes.size(), 10u);
    int lo = 1 << 30, hi = 0;
    for (auto [f, s] : sizes) {
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    EXPECT_LE(hi - lo, 1);
    for (int f = 0; f + 1 < 10; ++f) EXPECT_GE(sizes[f], sizes[f + 1]);
  }
}

TEST(Folds, SeedControlsAssignment) {
  EXPECT_EQ(assign_folds(50, 10, 4), assign_folds(50, 10, 4));
  EXPECT_NE(assign_folds(50, 10, 4), assign_folds(50, 10, 5));
}

TEST(CrossValidation, NoiselessDataHasZeroDeviation) {
  const auto cv = kfold_cv(reference_pairs(60), 10, 1);
  EXPECT_NEAR(cv.mean_abs_deviation_percent, 0.0, 1e-6);
  EXPECT_EQ(cv.fold_deviation_percent.size(), 10u);
}

TEST(CrossValidation, NoisyDataHasPositiveDeviation) {
  auto pairs = reference_pairs(80);
  Rng rng(2);
  for (auto& p : pairs) p.raw += 40.0 * standard_normal(rng);
  const auto cv = kfold_cv(pairs, 10, 1);
  EXPECT_GT(cv.mean_abs_deviation_percent, 0.1);
  EXPECT_LT(cv.mean_abs_deviation_percent, 5.0);
}

TEST(CrossValidation, RejectsBadK) {
  const auto pairs = reference_pairs(20);
  EXPECT_THROW(kfold_cv(pairs, 1), std::invalid_argument);
  EXPECT_THROW(kfold_cv(pairs, 21), std::invalid_argument);
}

TEST(RollingMean, MatchesNaiveAverage) {
  Rng rng(8);
  std::vector<double> xs;
  TimeSeries ts;
  for (int i = 0; i < 500; ++i) {
    xs.push_back(10.0 + standard_normal(rng));
    ts.push_back(i * 1200.0, xs.back());
  }
  const auto naive = oracle::rolling_mean_naive(xs, 72);
  const auto got = rolling_mean(ts, 72);
  ASSERT_EQ(got.size(), xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    EXPECT_NEAR(got[i].value, naive[i], 1e-9);
    EXPECT_EQ(got[i].time_s, ts[i].time_s);
  }
}

TEST(RollingMean, StaysWithinWindowBoundsAndKeepsConstants) {
  TimeSeries c;
  for (int i = 0; i < 300; ++i) c.push_back(i, 0.1);
  for (const auto& s : rolling_mean(c, 7)) ASSERT_EQ(s.value, 0.1);

  Rng rng(4);
  TimeSeries ts;
  for (int i = 0; i < 300; ++i) ts.push_back(i, 1e6 * standard_normal(rng));
  const auto m = rolling_mean(ts, 5);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    double lo = ts[i].value, hi = ts[i].value;
    for (std::size_t j = i >= 4 ? i - 4 : 0; j <= i; ++j) {
      lo = std::min(lo, ts[j].value);
      hi = std::max(hi, ts[j].value);
    }
    ASSERT_GE(m[i].value, lo);
    ASSERT_LE(m[i].value, hi);
  }
  EXPECT_THROW(rolling_mean(ts, 0), std::invalid_argument);
}

TEST(TimeSeries, RequiresIncreasingTimes) {
  TimeSeries ts;
  ts.push_back(1.0, 0.0);
  EXPECT_THROW(ts.push_back(1.0, 0.0), std::invalid_argument);
}

TEST(Soil, DecayMatchesRk4Integration) {
  const auto soil = SoilType::preset("Osco");
  const SoilTrace trace(soil, {}, 0.40);
  const double k = soil.drying_rate_per_hour / 3600.0;
  for (double hours : {1.0, 12.0, 48.0}) {
    const double t = hours * 3600.0;
    const double expected =
        oracle::rk4([&](double v) { return -k * (v - soil.residual_vwc); }, 0.40, t, 2000);
    EXPECT_NEAR(trace.vwc_at(t), expected, 1e-9) << hours;
  }
}

TEST(Soil, WellDrainedSoilsDryFaster) {
  const double day = 86400.0;
  auto drop = [&](const char* name) {
    const auto s = SoilType::preset(name);
    const SoilTrace t(s, {}, s.saturation_vwc);
    return (s.saturation_vwc - t.vwc_at(day)) / (s.saturation_vwc - s.residual_vwc);
  };
  EXPECT_GT(drop("Osco"), drop("Catlin"));
  EXPECT_GT(drop("Wyanet"), drop("Potting"));
  EXPECT_THROW(SoilType::preset("Loam"), std::invalid_argument);
}

TEST(Soil, WateringStepsUpAndClampsAtSaturation) {
  const auto soil = SoilType::preset("Catlin");
  const SoilTrace trace(soil, {{3600.0, 0.1}, {7200.0, 1.0}}, 0.2);
  EXPECT_NEAR(trace.vwc_at(3600.0) - trace.vwc_at(3599.999), 0.1, 1e-6);
  EXPECT_DOUBLE_EQ(trace.vwc_at(7200.0), soil.saturation_vwc);
  const auto series = simulate_soil_vwc(soil, {{3600.0, 0.1}}, 86400.0, 1200.0, 0.2);
  EXPECT_EQ(series.size(), 73u);
}

TEST(Sensor, VoltageRisesWithMoisture) {
  const auto soil = SoilType::preset("Osco");
  for (auto model : {GalvanicSensorModel::zinc_stainless(), GalvanicSensorModel::zinc_aluminum()}) {
    double prev = -1.0;
    for (double vwc = 0.0; vwc <= 0.5; vwc += 0.01) {
      const double v = model.mean_voltage(vwc, soil, 20.0);
      ASSERT_GT(v, prev);
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
      prev = v;
    }
  }
  EXPECT_NEAR(GalvanicSensorModel::zinc_aluminum().mean_voltage(0.32, soil, 20.0), 0.2, 1e-9);
  EXPECT_GT(GalvanicSensorModel::zinc_stainless().mean_voltage(0.32, soil, 20.0), 0.6);
}

TEST(Sensor, NoiseUsesRngOnlyWhenEnabled) {
  const auto soil = SoilType::preset("Osco");
  auto m = GalvanicSensorModel::zinc_stainless();
  Rng a(1), b(1);
  EXPECT_EQ(m.voltage(0.3, soil, 20.0, a), m.mean_voltage(0.3, soil, 20.0));
  EXPECT_EQ(a(), b());
  m.noise_sigma_v = 0.01;
  EXPECT_NE(m.voltage(0.3, soil, 20.0, a), m.mean_voltage(0.3, soil, 20.0));
}

TEST(Files, ReadingsCsvRoundTrip) {
  std::vector<ReadingRow> rows = {{0.0, 1, 0.5123, 21.25, "sunny"}, {1200.0, 2, 0.0, -3.5, "dark"}};
  std::stringstream ss;
  write_readings_csv(ss, rows);
  EXPECT_EQ(read_readings_csv(ss), rows);
  std::stringstream bad(std::string(kReadingCsvHeader) + "\n1,2,x,4,sunny\n");
  EXPECT_THROW(read_readings_csv(bad), std::runtime_error);
}

TEST(Files, PairsCsvRoundTrip) {
  const auto pairs = reference_pairs(5);
  std::stringstream ss;
  write_pairs_csv(ss, pairs);
  const auto back = read_pairs_csv(ss);
  ASSERT_EQ(back.size(), pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(back[i].voltage_v, pairs[i].voltage_v);
    EXPECT_EQ(back[i].raw, pairs[i].raw);
  }
}

TEST(Files, CalibrationTextRoundTrip) {
  CalibrationModel m{1.0 / 3.0, -2.5, 1e-7, 42.0, 4e-4, -0.7};
  EXPECT_EQ(parse_calibration(serialize_calibration(m)), m);
  EXPECT_EQ(parse_calibration("# defaults\n"), CalibrationModel{});
  EXPECT_THROW(parse_calibration("a4=1\n"), std::runtime_error);
}
