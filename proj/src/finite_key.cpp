#include "qkd/finite_key.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qkd {

EpsilonBudget EpsilonBudget::from_total(double epsilon_total) {
  EpsilonBudget b;
  b.epsilon_total = epsilon_total;
  b.epsilon_cor = epsilon_total / 4.0;
  b.epsilon_pa = epsilon_total / 4.0;
  b.epsilon_est_each = epsilon_total / (2.0 * kEstimationUses);
  b.validate();
  return b;
}

void EpsilonBudget::validate() const {
  if (!(epsilon_total > 0.0 && epsilon_total < 1.0))
    throw std::invalid_argument("epsilon_total must be in (0,1)");
  if (!(epsilon_cor > 0.0 && epsilon_pa > 0.0 && epsilon_est_each > 0.0))
    throw std::invalid_argument("epsilon shares must be positive");
  if (epsilon_cor + epsilon_pa + kEstimationUses * epsilon_est_each >
      epsilon_total * (1.0 + 1e-12))
    throw std::invalid_argument("epsilon shares exceed epsilon_total");
}

const char* zero_key_reason_name(ZeroKeyReason reason) {
  switch (reason) {
    case ZeroKeyReason::none: return "none";
    case ZeroKeyReason::no_detections: return "no_detections";
    case ZeroKeyReason::y1_nonpositive: return "y1_nonpositive";
    case ZeroKeyReason::phase_error_too_high: return "phase_error_too_high";
    case ZeroKeyReason::negative_length: return "negative_length";
  }
  return "unknown";
}

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("binary_entropy: x outside [0,1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double hoeffding_delta(double n_trials, double eps) {
  if (!(n_trials >= 1.0)) throw std::invalid_argument("hoeffding_delta: n_trials < 1");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("hoeffding_delta: eps outside (0,1)");
  return std::sqrt(std::log(1.0 / eps) / (2.0 * n_trials));
}

DecoyBounds decoy_bounds(const SessionStatistics& stats, const ProtocolConfig& protocol,
                         const EpsilonBudget& budget) {
  budget.validate();
  const double mu_s = protocol.mu(Intensity::signal);
  const double mu_d = protocol.mu(Intensity::decoy);
  const double mu_v = protocol.mu(Intensity::vacuum);
  for (Intensity k : {Intensity::signal, Intensity::decoy, Intensity::vacuum}) {
    if (!(stats.cell(k, Basis::z).sent > 0.0) || !(stats.cell(k, Basis::x).sent > 0.0))
      throw std::invalid_argument("decoy_bounds: zero sent count in estimation data");
  }

  double q[3];
  double g_err[3]; // X-basis error gain per sifted pulse
  for (int k = 0; k < 3; ++k) {
    const auto ki = static_cast<Intensity>(k);
    q[k] = stats.gain(ki, Basis::z);
    const CellCounts& x = stats.cell(ki, Basis::x);
    g_err[k] = x.errors / x.sent;
  }

  DecoyBounds out;
  switch (protocol.deviation_policy) {
    case DeviationPolicy::session_pulses: {
      const double d = hoeffding_delta(std::max(stats.total_pulses, 1.0),
                                       budget.epsilon_est_each);
      out.gain_delta = {d, d, d};
      out.error_gain_delta = {d, d, d};
      break;
    }
    case DeviationPolicy::per_sample: {
      for (int k = 0; k < 3; ++k) {
        const auto ki = static_cast<Intensity>(k);
        out.gain_delta[static_cast<std::size_t>(k)] = hoeffding_delta(
            stats.cell(ki, Basis::z).sent, budget.epsilon_est_each);
        out.error_gain_delta[static_cast<std::size_t>(k)] = hoeffding_delta(
            stats.cell(ki, Basis::x).sent, budget.epsilon_est_each);
      }
      break;
    }
    case DeviationPolicy::none:
      break;
  }

  const double ems = std::exp(mu_s);
  const double emd = std::exp(mu_d);
  const double emv = std::exp(mu_v);
  const double y1_pref = mu_s / (mu_s * mu_d - mu_d * mu_d);
  const double y1_y0_coef = (mu_s * mu_s - mu_d * mu_d) / (mu_s * mu_s);

  double best_y0 = 0.0, best_y1 = 0.0;
  bool first = true;
  for (int ss = -1; ss <= 1; ss += 2)
    for (int sd = -1; sd <= 1; sd += 2)
      for (int sv = -1; sv <= 1; sv += 2) {
        const double qs = q[0] + ss * out.gain_delta[0];
        const double qd = q[1] + sd * out.gain_delta[1];
        const double qv = q[2] + sv * out.gain_delta[2];
        const double y0_raw = (mu_d * qv * emv - mu_v * qd * emd) / (mu_d - mu_v);
        const double y0 = std::max(0.0, y0_raw);
        const double y1 = y1_pref * (qd * emd - (mu_d * mu_d) / (mu_s * mu_s) * qs * ems -
                                     y1_y0_coef * y0);
        if (first || y0 < best_y0) {
          best_y0 = y0;
          out.corner_audit.y0_corner = {ss, sd, sv};
          out.corner_audit.y0_clamped = (y0_raw < 0.0);
        }
        if (first || y1 < best_y1) {
          best_y1 = y1;
          out.corner_audit.y1_corner = {ss, sd, sv};
        }
        first = false;
      }

  out.y0_lower = best_y0;
  out.y1_lower = best_y1;
  if (out.y1_lower <= 0.0) {
    out.y1_lower = 0.0;
    out.corner_audit.y1_clamped = true;
    out.aborted = true;
    out.e1_upper = 1.0;
    out.corner_audit.e1_clamped = true;
    return out;
  }
  out.y1_lower = std::min(out.y1_lower, 1.0);

  // zero-photon error gain from the vacuum intensity: everything above the
  // n = 0 term is at most half of the bounded nonvacuum click mass
  const double g_v_low = std::max(0.0, g_err[2] - out.error_gain_delta[2]);
  out.err0_lower =
      std::max(0.0, g_v_low * emv -
                        0.5 * ((q[2] + out.gain_delta[2]) * emv - out.y0_lower));

  const double e1_decoy =
      ((g_err[1] + out.error_gain_delta[1]) * emd - out.err0_lower) /
      (out.y1_lower * mu_d);
  const double e1_signal =
      ((g_err[0] + out.error_gain_delta[0]) * ems - out.err0_lower) /
      (out.y1_lower * mu_s);
  double e1 = std::min(e1_decoy, e1_signal);
  out.corner_audit.e1_from_signal = e1_signal < e1_decoy;
  if (e1 < 0.0 || e1 > 1.0) {
    e1 = std::clamp(e1, 0.0, 1.0);
    out.corner_audit.e1_clamped = true;
  }
  out.e1_upper = e1;
  return out;
}

SecureKeyResult secure_key_length(const SessionStatistics& stats, const DecoyBounds& bounds,
                                  const ProtocolConfig& protocol,
                                  const EpsilonBudget& budget) {
  budget.validate();
  SecureKeyResult r;
  r.bounds = bounds;
  const CellCounts& sig_z = stats.cell(Intensity::signal, Basis::z);
  r.n_z = sig_z.detected;
  r.qber_z = stats.qber(Intensity::signal, Basis::z);
  const double mu_s = protocol.mu(Intensity::signal);
  r.s0_lower = sig_z.sent * std::exp(-mu_s) * bounds.y0_lower;
  r.s1_lower = sig_z.sent * mu_s * std::exp(-mu_s) * bounds.y1_lower;
  r.phase_error_upper = bounds.e1_upper;
  r.ec_leak_bits = protocol.ec_efficiency_f * r.n_z * binary_entropy(r.qber_z);
  r.epsilon_terms_bits =
      std::log2(2.0 / budget.epsilon_cor) + 2.0 * std::log2(1.0 / budget.epsilon_pa);
  r.secure_length_bits = 0.0;
  r.secure_rate_bps = 0.0;

  if (!(r.n_z > 0.0)) {
    r.reason = ZeroKeyReason::no_detections;
    return r;
  }
  if (bounds.aborted || !(bounds.y1_lower > 0.0)) {
    r.reason = ZeroKeyReason::y1_nonpositive;
    return r;
  }
  if (r.phase_error_upper >= 0.5) {
    r.reason = ZeroKeyReason::phase_error_too_high;
    return r;
  }
  const double ell = r.s0_lower + r.s1_lower * (1.0 - binary_entropy(r.phase_error_upper)) -
                     r.ec_leak_bits - r.epsilon_terms_bits;
  if (ell <= 0.0) {
    r.reason = ZeroKeyReason::negative_length;
    return r;
  }
  r.secure_length_bits = std::floor(ell);
  r.secure_rate_bps = r.secure_length_bits / stats.session_s;
  return r;
}

double asymptotic_rate(const ProtocolConfig& protocol, const ChannelConfig& channel,
                       const DetectorOperatingPoint& op, double e_d) {
  const double eta_sys = transmittance(channel) * op.efficiency;
  ProtocolConfig p = protocol;
  p.intrinsic_error_e_d = e_d;
  const SessionClickModel m = session_click_model(p, eta_sys, op);
  const double mu_s = protocol.mu(Intensity::signal);
  const double y1_det = 1.0 - (1.0 - m.y0) * (1.0 - eta_sys);
  const double y0_eff = m.y0 + m.s_bar * (1.0 - m.y0);
  const double y1_eff = y1_det + m.s_bar * (1.0 - y1_det);
  const double q0 = std::exp(-mu_s) * y0_eff;
  const double q1 = mu_s * std::exp(-mu_s) * y1_eff;
  const double err1 = 0.5 * m.y0 + e_d * eta_sys +
                      protocol.afterpulse_error_weight * m.s_bar;
  const double e1 = y1_eff > 0.0 ? std::clamp(err1 / y1_eff, 0.0, 1.0) : 0.0;
  const double q_s = m.q_tot[0];
  const double leak = q_s > 0.0 ? protocol.ec_efficiency_f * q_s *
                                      binary_entropy(std::min(m.qber[0], 1.0))
                                : 0.0;
  const double per_pulse = q0 + q1 * (1.0 - binary_entropy(e1)) - leak;
  const double pz2 = protocol.p_z * protocol.p_z;
  return std::max(0.0, protocol.clock_hz * protocol.send_prob(Intensity::signal) * pz2 *
                           per_pulse);
}

} // namespace qkd
