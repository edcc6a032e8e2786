#pragma once

#include <array>
#include <cstdint>

#include "qkd/detector.hpp"

namespace qkd {

/// Fiber channel: total loss is attenuation_db_per_km * length_km + extra_loss_db.
/// The 0.1 dB default makes the 50 km link come out at 10.1 dB.
struct ChannelConfig {
  double length_km = 50.0;
  double attenuation_db_per_km = 0.2;
  double extra_loss_db = 0.1;

  void validate() const;
};

enum class Intensity : int { signal = 0, decoy = 1, vacuum = 2 };
enum class Basis : int { z = 0, x = 1 };

/// How the statistical deviations fed into the decoy worst-casing are sized:
/// session_pulses uses the total number of pulses sent in the session for
/// every estimate; per_sample uses each estimate's own sample size; none
/// disables deviations (structural/limit checks only).
enum class DeviationPolicy : int { session_pulses = 0, per_sample = 1, none = 2 };

/// Decoy-state efficient-BB84 protocol parameters. Defaults are the
/// three-intensity GHz system settings: signal 0.42 at 98.83%, decoy 0.042 at
/// 0.78%, vacuum 0.0007 at 0.39%, p_z = 15/16, epsilon 1e-10, 20-minute
/// sessions at a 1 GHz clock.
struct ProtocolConfig {
  std::array<double, 3> intensities{0.42, 0.042, 0.0007};
  std::array<double, 3> send_probs{0.9883, 0.0078, 0.0039};
  double p_z = 15.0 / 16.0;
  double epsilon = 1e-10;
  double session_s = 1200.0;
  double clock_hz = 1e9;
  double ec_efficiency_f = 1.16;
  /// Intrinsic optical error per photon click. The default is fixed by the
  /// calibration procedure (see experiments::calibrate_intrinsic_error).
  double intrinsic_error_e_d = kCalibratedErrorRate;
  /// Error weight of afterpulse-triggered clicks. Dark clicks always err with
  /// probability 1/2; afterpulses are assigned this weight instead (see README).
  double afterpulse_error_weight = 0.3;
  DeviationPolicy deviation_policy = DeviationPolicy::session_pulses;

  static constexpr double kCalibratedErrorRate = 0.0341622;

  double p_x() const { return 1.0 - p_z; }
  double mu(Intensity k) const { return intensities[static_cast<int>(k)]; }
  double send_prob(Intensity k) const { return send_probs[static_cast<int>(k)]; }
  void validate() const;
};

/// Per-(intensity, basis) sifted counts. Values are real-valued expectations
/// in the analytic path and exact integers from the Monte Carlo path.
struct CellCounts {
  double sent = 0.0;
  double detected = 0.0;
  double errors = 0.0;
};

struct SessionStatistics {
  std::array<std::array<CellCounts, 2>, 3> cells{};
  double total_pulses = 0.0;
  double session_s = 0.0;

  CellCounts& cell(Intensity k, Basis b) {
    return cells[static_cast<int>(k)][static_cast<int>(b)];
  }
  const CellCounts& cell(Intensity k, Basis b) const {
    return cells[static_cast<int>(k)][static_cast<int>(b)];
  }
  double gain(Intensity k, Basis b) const;
  double qber(Intensity k, Basis b) const;
  void validate() const;
};

/// Channel transmittance 10^(-(alpha*L + extra)/10).
double transmittance(const ChannelConfig& channel);

struct GainResult {
  double q_det = 0.0; ///< per-gate click probability, photons + dark counts
  double q_tot = 0.0; ///< q_det inflated by afterpulses, (1 + P_a) * q_det
};

/// Two-detector gated receiver: Y0 = 1 - (1 - P_d)^2,
/// Q_det = 1 - (1 - Y0) exp(-eta_sys * mu), Q_tot = Q_det (1 + P_a).
GainResult gain_total(double mu, double eta_sys, const DetectorOperatingPoint& op);

/// QBER of a stand-alone intensity:
/// [e0 Y0 + e_d (1 - exp(-eta_sys mu)) + w_ap P_a Q_det] / Q_tot
/// with e0 = 1/2 and w_ap the afterpulse error weight.
double qber(double mu, double eta_sys, const DetectorOperatingPoint& op, double e_d,
            double afterpulse_error_weight);

/// Session-level click model. Afterpulses from every avalanche land uniformly
/// across later gates, so each intensity sees the same steady-state background
///   s_bar = P_a qbar / (1 - P_a (1 - qbar)),   qbar = sum_k p_k Q_det(k),
/// giving the affine per-intensity gains and error rates
///   Q_k = Q_det(k) + s_bar (1 - Q_det(k)),
///   E_k = [e0 Y0 + e_d p_photon(k) + w_ap s_bar] / Q_k.
/// The affine structure keeps the Poissonian decoy expansion exact.
struct SessionClickModel {
  double s_bar = 0.0;
  double y0 = 0.0;
  std::array<double, 3> q_det{};
  std::array<double, 3> q_tot{};
  std::array<double, 3> qber{};
};

SessionClickModel session_click_model(const ProtocolConfig& protocol, double eta_sys,
                                      const DetectorOperatingPoint& op);

/// Expected (real-valued) session statistics for the analytic path:
/// sent(k, b) = clock * session * send_prob(k) * p_b^2, detections and errors
/// from the session click model above.
SessionStatistics expected_session_counts(const ProtocolConfig& protocol,
                                          const ChannelConfig& channel,
                                          const DetectorOperatingPoint& op);

} // namespace qkd
