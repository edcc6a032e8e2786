#include "qkd/detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace qkd {

void DetectorOperatingPoint::validate() const {
  if (!(dark_count_prob >= 0.0 && dark_count_prob < 1.0))
    throw std::invalid_argument("dark_count_prob must be in [0,1)");
  if (!(afterpulse_prob >= 0.0 && afterpulse_prob < 1.0))
    throw std::invalid_argument("afterpulse_prob must be in [0,1)");
  if (!(efficiency >= 0.0 && efficiency <= 1.0))
    throw std::invalid_argument("efficiency must be in [0,1]");
  if (!(gate_rate_hz > 0.0))
    throw std::invalid_argument("gate_rate_hz must be positive");
}

void TemperatureModel::validate() const {
  if (!(dark_ref > 0.0)) throw std::invalid_argument("dark_ref must be positive");
  if (!(valid_min_c <= valid_max_c))
    throw std::invalid_argument("invalid temperature range");
  // The linear afterpulse law must stay inside [0,1) over the valid range.
  for (double t : {valid_min_c, valid_max_c}) {
    const double pa = ap_intercept + ap_slope * (t - ref_temp_c);
    if (!(pa >= 0.0 && pa < 1.0))
      throw std::invalid_argument("afterpulse law leaves [0,1) inside valid range");
  }
}

namespace {

void check_range(double temp_c, const TemperatureModel& model) {
  if (temp_c < model.valid_min_c || temp_c > model.valid_max_c)
    throw std::out_of_range("temperature outside model validity range");
}

} // namespace

TemperatureModel default_temperature_model() {
  TemperatureModel m;
  m.dark_ref = 5.9e-5;
  m.dark_gamma = std::log(5.9e-5 / 3.1e-6) / 50.0;
  m.ref_temp_c = 20.0;
  m.ap_intercept = 0.0282;
  m.ap_slope = (0.0282 - 0.0389) / 50.0;
  m.valid_min_c = -30.0;
  m.valid_max_c = 20.0;
  return m;
}

double dark_count_at(double temp_c, const TemperatureModel& model) {
  check_range(temp_c, model);
  return model.dark_ref * std::exp(model.dark_gamma * (temp_c - model.ref_temp_c));
}

double afterpulse_at(double temp_c, const TemperatureModel& model) {
  check_range(temp_c, model);
  const double pa = model.ap_intercept + model.ap_slope * (temp_c - model.ref_temp_c);
  return std::max(pa, 0.0);
}

DetectorOperatingPoint operating_point_at(double temp_c, const TemperatureModel& model,
                                          double efficiency, double gate_rate_hz) {
  DetectorOperatingPoint op;
  op.temperature_c = temp_c;
  op.dark_count_prob = dark_count_at(temp_c, model);
  op.afterpulse_prob = afterpulse_at(temp_c, model);
  op.efficiency = efficiency;
  op.gate_rate_hz = gate_rate_hz;
  op.validate();
  return op;
}

TemperatureModel fit_temperature_model(
    const std::vector<std::tuple<double, double, double>>& samples) {
  double tmin = 0.0, tmax = 0.0;
  bool first = true;
  for (const auto& [t, pd, pa] : samples) {
    (void)pa;
    if (!(pd > 0.0)) throw std::domain_error("fit requires P_d > 0");
    tmin = first ? t : std::min(tmin, t);
    tmax = first ? t : std::max(tmax, t);
    first = false;
  }
  if (samples.size() < 2 || tmin == tmax)
    throw std::invalid_argument("fit requires at least two distinct temperatures");

  // Anchor at the maximum sample temperature so the warm endpoint is
  // coefficient-exact for the two-point case.
  const double tref = tmax;
  const std::size_t n = samples.size();
  double sx = 0.0, sxx = 0.0, sy = 0.0, sxy = 0.0, sa = 0.0, sxa = 0.0;
  for (const auto& [t, pd, pa] : samples) {
    const double x = t - tref;
    const double y = std::log(pd);
    sx += x;
    sxx += x * x;
    sy += y;
    sxy += x * y;
    sa += pa;
    sxa += x * pa;
  }
  const double denom = n * sxx - sx * sx;
  TemperatureModel m;
  m.ref_temp_c = tref;
  m.dark_gamma = (n * sxy - sx * sy) / denom;
  m.dark_ref = std::exp((sy - m.dark_gamma * sx) / n);
  m.ap_slope = (n * sxa - sx * sa) / denom;
  m.ap_intercept = (sa - m.ap_slope * sx) / n;
  m.valid_min_c = tmin;
  m.valid_max_c = tmax;
  m.validate();
  return m;
}

} // namespace qkd
