#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "qkd/link.hpp"

namespace qkd {

/// Split of the total security parameter. The fixed default split is
/// eps_cor = eps/4, eps_pa = eps/4, and eps/2 spread over 12 one-sided
/// Hoeffding applications (six estimated quantities - three Z-basis gains and
/// three X-basis error gains - two sides each), so eps_est_each = eps/24 and
/// the shares sum exactly to eps.
struct EpsilonBudget {
  double epsilon_total = 1e-10;
  double epsilon_cor = 2.5e-11;
  double epsilon_pa = 2.5e-11;
  double epsilon_est_each = 1e-10 / 24.0;

  static constexpr int kEstimationUses = 12;

  static EpsilonBudget from_total(double epsilon_total);
  void validate() const;
};

/// Which confidence-interval corner produced each bound: one sign per
/// worst-cased Z-basis gain (signal, decoy, vacuum).
struct CornerAudit {
  std::array<int, 3> y0_corner{0, 0, 0};
  std::array<int, 3> y1_corner{0, 0, 0};
  bool y0_clamped = false;
  bool y1_clamped = false;
  bool e1_clamped = false;
  bool e1_from_signal = false; ///< which of the two phase-error forms won
};

struct DecoyBounds {
  double y0_lower = 0.0;
  double y1_lower = 0.0;
  double e1_upper = 1.0;
  /// Lower bound on the zero-photon error gain subtracted inside e1_upper,
  /// reconstructed from the vacuum-intensity X-basis error statistics.
  double err0_lower = 0.0;
  std::array<double, 3> gain_delta{0.0, 0.0, 0.0};
  std::array<double, 3> error_gain_delta{0.0, 0.0, 0.0};
  CornerAudit corner_audit;
  bool aborted = false; ///< Y1 lower bound nonpositive after clamping: no key.
};

enum class ZeroKeyReason : int {
  none = 0,
  no_detections = 1,
  y1_nonpositive = 2,
  phase_error_too_high = 3,
  negative_length = 4,
};

const char* zero_key_reason_name(ZeroKeyReason reason);

struct SecureKeyResult {
  double s0_lower = 0.0;
  double s1_lower = 0.0;
  double phase_error_upper = 0.0;
  double ec_leak_bits = 0.0;
  double secure_length_bits = 0.0;
  double secure_rate_bps = 0.0;
  ZeroKeyReason reason = ZeroKeyReason::none;
  // audit
  DecoyBounds bounds;
  double n_z = 0.0;
  double qber_z = 0.0;
  double epsilon_terms_bits = 0.0;
};

/// Binary entropy h(x) = -x log2 x - (1-x) log2(1-x), h(0) = h(1) = 0.
double binary_entropy(double x);

/// Two-sided Hoeffding half-width: sqrt(ln(1/eps) / (2 n)). The true mean lies
/// within observed +- delta except with probability <= 2 eps.
double hoeffding_delta(double n_trials, double eps);

/// Vacuum+weak decoy bounds. Y0 and Y1 lower bounds come from the Z-basis
/// gains worst-cased over the 2^3 Hoeffding corners:
///   Y0L = max(0, (mu_d Qv e^muv - mu_v Qd e^mud) / (mu_d - mu_v))
///   Y1L = mu_s/(mu_s mu_d - mu_d^2) [Qd e^mud - (mu_d/mu_s)^2 Qs e^mus
///                                    - (mu_s^2 - mu_d^2)/mu_s^2 Y0L].
/// The single-photon phase error upper bound uses the X-basis error gains
/// G_k = errors(k, X)/sent(k, X): the zero-photon error mass is bounded from
/// below by the vacuum intensity,
///   err0 = max(0, G_v- e^muv - [Qv+ e^muv - Y0L] / 2),
/// and e1U is the tighter of the decoy and signal forms
///   (G_k+ e^muk - err0) / (Y1L mu_k).
DecoyBounds decoy_bounds(const SessionStatistics& stats, const ProtocolConfig& protocol,
                         const EpsilonBudget& budget);

/// Finite secure key length
///   l = max(0, floor(s0 + s1 (1 - h(phi1)) - leak_EC - log2(2/eps_cor)
///                    - 2 log2(1/eps_pa)))
/// from the Z-basis signal sample; zero-key conditions are reported via
/// reason, not exceptions.
SecureKeyResult secure_key_length(const SessionStatistics& stats, const DecoyBounds& bounds,
                                  const ProtocolConfig& protocol,
                                  const EpsilonBudget& budget);

/// Infinite-key rate from the true session-model yields, for limit checks:
/// R = clock p_s p_z^2 [Q0 + Q1 (1 - h(e1)) - f Q_s h(E_s)] clamped at 0.
double asymptotic_rate(const ProtocolConfig& protocol, const ChannelConfig& channel,
                       const DetectorOperatingPoint& op, double e_d);

} // namespace qkd
