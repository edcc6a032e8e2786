#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qkd/finite_key.hpp"
#include "qkd/pulse_sim.hpp"

namespace qkd {

/// Detector parameters that are not part of the temperature model.
struct DetectorBase {
  double efficiency = 0.25;
  double gate_rate_hz = 1e9;
  double jitter_s = 60e-12;
};

struct SweepRow {
  double variable = 0.0;
  double p_d = 0.0;
  double p_a = 0.0;
  double q_signal = 0.0;
  double qber_signal = 0.0;
  double secure_rate_bps = 0.0;
  ZeroKeyReason reason = ZeroKeyReason::none;
};

struct SweepResult {
  std::string variable_name;
  std::vector<SweepRow> rows;
};

struct RelativeChangeRow {
  double distance_km = 0.0;
  double value = 0.0;
  bool defined = false;
};

struct CrossoverResult {
  bool found = false;
  double distance_km = 0.0;
  enum class Diagnostic {
    ok,
    identical_curves,
    cold_always_higher,
    hot_always_higher,
    no_sign_change,
  } diagnostic = Diagnostic::no_sign_change;
};

struct CutoffResult {
  double distance_km = 0.0;
  bool beyond_bracket = false;
};

struct CalibrationResult {
  double e_d = 0.0;
  double achieved_rate_bps = 0.0;
  int iterations = 0;
};

/// Analytic single-point rate: expected counts -> decoy bounds -> key length.
SecureKeyResult secure_rate_point(const ProtocolConfig& protocol, const ChannelConfig& channel,
                                  const DetectorOperatingPoint& op);

/// Monte Carlo single-point rate through the same finite-key chain.
SecureKeyResult secure_rate_point_mc(const ProtocolConfig& protocol,
                                     const ChannelConfig& channel,
                                     const DetectorOperatingPoint& op, const SimConfig& sim);

/// One row per temperature in [t_min, t_max] (step > 0), detector noise from
/// the model. When mc is set, rows are evaluated from Monte Carlo statistics
/// instead of expected counts.
SweepResult sweep_temperature(double t_min_c, double t_max_c, double step_c,
                              const ChannelConfig& channel, const ProtocolConfig& protocol,
                              const TemperatureModel& model, const DetectorBase& det = {},
                              const SimConfig* mc = nullptr);

/// One row per distance in [l_min, l_max] km at fixed temperature. Rows at or
/// beyond long_session_beyond_km switch to long_session_s (the 60-minute
/// long-haul preset).
SweepResult sweep_distance(double l_min_km, double l_max_km, double step_km, double temp_c,
                           const ProtocolConfig& protocol, const TemperatureModel& model,
                           const DetectorBase& det = {},
                           std::optional<double> long_session_beyond_km = std::nullopt,
                           double long_session_s = 3600.0, const SimConfig* mc = nullptr);

/// Rows of (L, (S_hot - S_cold)/S_hot); undefined where S_hot = 0.
std::vector<RelativeChangeRow> relative_change(const SweepResult& sweep_hot,
                                               const SweepResult& sweep_cold);

/// Distance where the warm and cold rate curves cross, bisected to
/// resolution_km after a coarse bracket scan.
CrossoverResult find_crossover(const ProtocolConfig& protocol, const TemperatureModel& model,
                               double t_hot_c = 20.0, double t_cold_c = -30.0,
                               const DetectorBase& det = {}, double l_min_km = 5.0,
                               double l_max_km = 90.0, double resolution_km = 0.1);

/// Largest distance with a positive secure rate, bisected to resolution_km.
/// Throws if the rate is already zero at l_min_km; beyond_bracket is set when
/// the rate is still positive at l_max_km.
CutoffResult find_cutoff(const ProtocolConfig& protocol, const TemperatureModel& model,
                         double temp_c, const DetectorBase& det = {}, double l_min_km = 10.0,
                         double l_max_km = 150.0, double resolution_km = 0.1);

/// Exhaustive scan of candidate operating points; ties break toward higher
/// efficiency. Returns the index into the table and the winning rate.
std::pair<std::size_t, double> optimize_operating_point(
    const std::vector<DetectorOperatingPoint>& table, const ChannelConfig& channel,
    const ProtocolConfig& protocol);

/// 1-D bisection on the intrinsic error e_d so that the analytic finite-key
/// rate at the given channel/operating point matches target_bps.
CalibrationResult calibrate_intrinsic_error(const ProtocolConfig& protocol,
                                            const ChannelConfig& channel,
                                            const DetectorOperatingPoint& op,
                                            double target_bps = 1.26e6, double e_d_max = 0.2,
                                            int iterations = 60);

/// CSV body for a sweep: header row plus one line per row, schema
/// variable,pd,pa,q_signal,qber_signal,secure_rate_bps,reason.
std::string sweep_to_csv(const SweepResult& sweep);

} // namespace qkd
