#include "mulenet/sensing.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace mulenet::sensing {

TimeSeries::TimeSeries(std::vector<Sample> samples) {
  samples_.reserve(samples.size());
  for (const Sample& s : samples) push_back(s.time_s, s.value);
}

void TimeSeries::push_back(double time_s, double value) {
  if (!samples_.empty() && !(time_s > samples_.back().time_s))
    throw std::invalid_argument("TimeSeries timestamps must be strictly increasing");
  samples_.push_back({time_s, value});
}

std::vector<double> TimeSeries::values() const {
  std::vector<double> out;
  out.reserve(samples_.size());
  for (const Sample& s : samples_) out.push_back(s.value);
  return out;
}

double teros_raw_to_vwc(double raw, double slope, double intercept) {
  return slope * raw + intercept;
}

double vwc_to_teros_raw(double vwc_fraction, double slope, double intercept) {
  return (vwc_fraction - intercept) / slope;
}

double voltage_to_raw(double volts, const CalibrationModel& m) {
  if (!(volts >= 0.0 && volts <= kMaxCellVoltage))
    throw std::invalid_argument("cell voltage outside [0, 1.5] V");
  return ((m.a3 * volts + m.a2) * volts + m.a1) * volts + m.a0;
}

double voltage_to_vwc(double volts, const CalibrationModel& m) {
  return teros_raw_to_vwc(voltage_to_raw(volts, m), m.teros_slope, m.teros_intercept);
}

double r_squared(const CalibrationModel& model, std::span<const CalibrationPair> pairs) {
  if (pairs.empty()) throw std::invalid_argument("r_squared of an empty sample");
  double mean = 0.0;
  for (const auto& p : pairs) mean += p.raw;
  mean /= static_cast<double>(pairs.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (const auto& p : pairs) {
    const double r = p.raw - voltage_to_raw(p.voltage_v, model);
    ss_res += r * r;
    ss_tot += (p.raw - mean) * (p.raw - mean);
  }
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

CubicFit fit_cubic(std::span<const CalibrationPair> pairs) {
  if (pairs.size() < 4) throw std::invalid_argument("fit_cubic needs at least 4 samples");
  const auto n = static_cast<Eigen::Index>(pairs.size());
  Eigen::MatrixXd design(n, 4);
  Eigen::VectorXd target(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = pairs[static_cast<std::size_t>(i)].voltage_v;
    design(i, 0) = v * v * v;
    design(i, 1) = v * v;
    design(i, 2) = v;
    design(i, 3) = 1.0;
    target(i) = pairs[static_cast<std::size_t>(i)].raw;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < 4) throw SingularFit("cubic design matrix is rank deficient");
  const Eigen::Vector4d coef = qr.solve(target);
  CubicFit fit{};
  fit.model.a3 = coef(0);
  fit.model.a2 = coef(1);
  fit.model.a1 = coef(2);
  fit.model.a0 = coef(3);
  fit.r_squared = r_squared(fit.model, pairs);
  return fit;
}

CubicFit fit_cubic(const TimeSeries& voltages, const TimeSeries& raws) {
  if (voltages.size() != raws.size())
    throw std::invalid_argument("fit_cubic: series lengths differ");
  std::vector<CalibrationPair> pairs;
  pairs.reserve(voltages.size());
  for (std::size_t i = 0; i < voltages.size(); ++i) {
    if (voltages[i].time_s != raws[i].time_s)
      throw std::invalid_argument("fit_cubic: series timestamps are not aligned");
    pairs.push_back({voltages[i].value, raws[i].value});
  }
  return fit_cubic(pairs);
}

std::vector<int> assign_folds(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("k-fold needs k >= 2");
  if (static_cast<std::size_t>(k) > n) throw std::invalid_argument("k exceeds the sample count");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

  std::vector<int> fold_of(n);
  const std::size_t base = n / static_cast<std::size_t>(k);
  const std::size_t extra = n % static_cast<std::size_t>(k);
  std::size_t pos = 0;
  for (int f = 0; f < k; ++f) {
    const std::size_t len = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
    for (std::size_t j = 0; j < len; ++j) fold_of[order[pos++]] = f;
  }
  return fold_of;
}

CrossValidation kfold_cv(std::span<const CalibrationPair> pairs, int k, std::uint64_t seed) {
  CrossValidation cv{};
  cv.fold_of = assign_folds(pairs.size(), k, seed);
  std::vector<CalibrationPair> train, test;
  for (int f = 0; f < k; ++f) {
    train.clear();
    test.clear();
    for (std::size_t i = 0; i < pairs.size(); ++i)
      (cv.fold_of[i] == f ? test : train).push_back(pairs[i]);
    const CubicFit fit = fit_cubic(train);
    double dev = 0.0;
    for (const auto& p : test) {
      const double predicted = vwc_percent(voltage_to_vwc(p.voltage_v, fit.model));
      const double truth = vwc_percent(teros_raw_to_vwc(p.raw));
      dev += std::abs(predicted - truth);
    }
    cv.fold_deviation_percent.push_back(dev / static_cast<double>(test.size()));
  }
  const double n = static_cast<double>(k);
  double mean = 0.0;
  for (double d : cv.fold_deviation_percent) mean += d;
  mean /= n;
  double var = 0.0;
  for (double d : cv.fold_deviation_percent) var += (d - mean) * (d - mean);
  cv.mean_abs_deviation_percent = mean;
  cv.std_abs_deviation_percent = std::sqrt(var / n);
  return cv;
}

TimeSeries rolling_mean(const TimeSeries& series, std::size_t window) {
  if (window == 0) throw std::invalid_argument("rolling_mean window must be >= 1");
  TimeSeries out;
  if (series.empty()) return out;

  // Sum deviations from the first sample with Neumaier compensation so long
  // windows neither drift nor perturb constant runs.
  const double ref = series[0].value;
  double sum = 0.0, comp = 0.0;
  auto add = [&](double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  };
  std::deque<std::size_t> maxq, minq;  // monotone index queues over the window

  for (std::size_t i = 0; i < series.size(); ++i) {
    const double v = series[i].value;
    add(v - ref);
    while (!maxq.empty() && series[maxq.back()].value <= v) maxq.pop_back();
    while (!minq.empty() && series[minq.back()].value >= v) minq.pop_back();
    maxq.push_back(i);
    minq.push_back(i);
    if (i >= window) {
      add(-(series[i - window].value - ref));
      if (maxq.front() <= i - window) maxq.pop_front();
      if (minq.front() <= i - window) minq.pop_front();
    }
    const double count = static_cast<double>(std::min(i + 1, window));
    const double mean = ref + (sum + comp) / count;
    out.push_back(series[i].time_s,
                  std::clamp(mean, series[minq.front()].value, series[maxq.front()].value));
  }
  return out;
}

SoilType SoilType::preset(std::string_view name) {
  for (SoilType s : presets())
    if (s.name == name) return s;
  throw std::invalid_argument("unknown soil type '" + std::string(name) + "'");
}

std::vector<SoilType> SoilType::presets() {
  return {
      {"Osco", 0.060, Drainage::Well, 0.10, 0.45},
      {"Wyanet", 0.070, Drainage::Well, 0.08, 0.42},
      {"Catlin", 0.018, Drainage::Poor, 0.16, 0.50},
      {"Potting", 0.015, Drainage::Poor, 0.14, 0.60},
  };
}

SoilTrace::SoilTrace(SoilType soil, std::vector<WateringEvent> events, std::optional<double> initial_vwc)
    : soil_(std::move(soil)), events_(std::move(events)), initial_(initial_vwc.value_or(soil_.residual_vwc)) {
  if (!(soil_.drying_rate_per_hour > 0.0)) throw std::invalid_argument("drying rate must be positive");
  if (!(soil_.residual_vwc >= 0.0 && soil_.residual_vwc <= soil_.saturation_vwc))
    throw std::invalid_argument("residual VWC must lie in [0, saturation]");
  if (initial_ < 0.0 || initial_ > soil_.saturation_vwc)
    throw std::invalid_argument("initial VWC must lie in [0, saturation]");
  std::stable_sort(events_.begin(), events_.end(),
                   [](const WateringEvent& a, const WateringEvent& b) { return a.time_s < b.time_s; });
  double t = 0.0, v = initial_;
  const double rate_s = soil_.drying_rate_per_hour / 3600.0;
  for (const WateringEvent& e : events_) {
    if (e.added_vwc < 0.0) throw std::invalid_argument("watering must add non-negative VWC");
    if (e.time_s > t) v = soil_.residual_vwc + (v - soil_.residual_vwc) * std::exp(-rate_s * (e.time_s - t));
    v = std::min(soil_.saturation_vwc, v + e.added_vwc);
    t = std::max(t, e.time_s);
    after_event_.push_back(v);
  }
}

double SoilTrace::vwc_at(double time_s) const {
  // Last event at or before time_s.
  auto it = std::upper_bound(events_.begin(), events_.end(), time_s,
                             [](double t, const WateringEvent& e) { return t < e.time_s; });
  double t0 = 0.0, v0 = initial_;
  if (it != events_.begin()) {
    const auto idx = static_cast<std::size_t>(std::distance(events_.begin(), it) - 1);
    t0 = std::max(0.0, events_[idx].time_s);
    v0 = after_event_[idx];
  }
  if (time_s <= t0) return v0;
  const double rate_s = soil_.drying_rate_per_hour / 3600.0;
  return soil_.residual_vwc + (v0 - soil_.residual_vwc) * std::exp(-rate_s * (time_s - t0));
}

TimeSeries simulate_soil_vwc(const SoilType& soil, const std::vector<WateringEvent>& events,
                             double duration_s, double step_s, std::optional<double> initial_vwc) {
  if (!(step_s > 0.0) || !(duration_s >= 0.0))
    throw std::invalid_argument("simulate_soil_vwc: bad duration or step");
  const SoilTrace trace(soil, events, initial_vwc);
  TimeSeries out;
  const auto steps = static_cast<long long>(std::floor(duration_s / step_s + 1e-9));
  for (long long i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) * step_s;
    out.push_back(t, trace.vwc_at(t));
  }
  return out;
}

std::string_view to_string(ElectrodePair p) { return p == ElectrodePair::ZnSS ? "ZnSS" : "ZnAl"; }

ElectrodePair electrode_pair_from_string(std::string_view s) {
  if (s == "ZnSS") return ElectrodePair::ZnSS;
  if (s == "ZnAl") return ElectrodePair::ZnAl;
  throw std::invalid_argument("unknown electrode pair '" + std::string(s) + "'");
}

GalvanicSensorModel GalvanicSensorModel::zinc_stainless() { return {}; }

GalvanicSensorModel GalvanicSensorModel::zinc_aluminum() {
  GalvanicSensorModel m;
  m.electrode_pair = ElectrodePair::ZnAl;
  m.v_dry = 0.02;
  // Pin the curve through 0.2 V at 32% VWC.
  const double at_anchor = 1.0 / (1.0 + std::exp(-m.steepness * (0.32 - m.midpoint_vwc)));
  m.v_wet = m.v_dry + (0.2 - m.v_dry) / at_anchor;
  return m;
}

double GalvanicSensorModel::mean_voltage(double vwc_fraction, const SoilType& soil, double temp_c) const {
  const double s = 1.0 / (1.0 + std::exp(-steepness * (vwc_fraction - midpoint_vwc)));
  const double v = v_dry + (v_wet - v_dry) * s + temp_coeff_v_per_c * (temp_c - reference_temp_c) +
                   soil.cell_offset_v;
  return std::clamp(v, 0.0, 1.0);
}

double GalvanicSensorModel::voltage(double vwc_fraction, const SoilType& soil, double temp_c,
                                    Rng& rng) const {
  const double mean = mean_voltage(vwc_fraction, soil, temp_c);
  if (noise_sigma_v <= 0.0) return mean;
  return std::clamp(mean + noise_sigma_v * standard_normal(rng), 0.0, 1.0);
}

}  // namespace mulenet::sensing
