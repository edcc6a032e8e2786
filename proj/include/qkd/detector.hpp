#pragma once

#include <tuple>
#include <vector>

namespace qkd {

/// Noise state of one gated APD pair at a fixed temperature. Probabilities are
/// per 1 ns gate; afterpulse_prob is the ratio of afterpulse counts to
/// detected photon counts. jitter_s is carried as metadata only.
struct DetectorOperatingPoint {
  double temperature_c = 20.0;
  double dark_count_prob = 5.9e-5;
  double afterpulse_prob = 0.0282;
  double efficiency = 0.25;
  double gate_rate_hz = 1e9;
  double jitter_s = 60e-12;

  void validate() const;
};

/// Exponential dark-count law and linear afterpulse law,
///   P_d(T) = dark_ref * exp(dark_gamma * (T - ref_temp_c))
///   P_a(T) = ap_intercept + ap_slope * (T - ref_temp_c)
/// valid only inside [valid_min_c, valid_max_c].
struct TemperatureModel {
  double dark_ref = 5.9e-5;
  double dark_gamma = 0.0;
  double ref_temp_c = 20.0;
  double ap_intercept = 0.0282;
  double ap_slope = 0.0;
  double valid_min_c = -30.0;
  double valid_max_c = 20.0;

  void validate() const;
};

/// Model fitted through the measured endpoints: P_d from 3.1e-6 at -30 C to
/// 5.9e-5 at 20 C, P_a from 3.89% at -30 C to 2.82% at 20 C, anchored at 20 C.
TemperatureModel default_temperature_model();

double dark_count_at(double temp_c, const TemperatureModel& model);
double afterpulse_at(double temp_c, const TemperatureModel& model);

/// Operating point at temp_c with P_d/P_a from the model and the given
/// efficiency (default 25%) and gate rate.
DetectorOperatingPoint operating_point_at(double temp_c, const TemperatureModel& model,
                                          double efficiency = 0.25,
                                          double gate_rate_hz = 1e9);

/// Least-squares fit of ln(P_d) vs T and P_a vs T. With exactly two distinct
/// temperatures the fit interpolates both points. Reference temperature of the
/// returned model is the max sample temperature; validity covers the sample range.
TemperatureModel fit_temperature_model(
    const std::vector<std::tuple<double, double, double>>& samples);

} // namespace qkd
