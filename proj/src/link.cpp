#include "qkd/link.hpp"

#include <cmath>
#include <stdexcept>

namespace qkd {

void ChannelConfig::validate() const {
  if (!(length_km >= 0.0)) throw std::invalid_argument("length_km must be >= 0");
  if (!(attenuation_db_per_km >= 0.0))
    throw std::invalid_argument("attenuation_db_per_km must be >= 0");
  if (!(extra_loss_db >= 0.0)) throw std::invalid_argument("extra_loss_db must be >= 0");
}

void ProtocolConfig::validate() const {
  const double psum = send_probs[0] + send_probs[1] + send_probs[2];
  if (std::abs(psum - 1.0) > 1e-6)
    throw std::invalid_argument("send_probs must sum to 1 within 1e-6");
  for (double p : send_probs)
    if (!(p > 0.0)) throw std::invalid_argument("send_probs must be positive");
  if (!(intensities[0] > intensities[1] && intensities[1] > intensities[2] &&
        intensities[2] >= 0.0))
    throw std::invalid_argument("intensities must satisfy mu_s > mu_d > mu_v >= 0");
  if (!(p_z > 0.0 && p_z < 1.0)) throw std::invalid_argument("p_z must be in (0,1)");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("epsilon must be in (0,1)");
  if (!(session_s > 0.0)) throw std::invalid_argument("session_s must be positive");
  if (!(clock_hz > 0.0)) throw std::invalid_argument("clock_hz must be positive");
  if (!(ec_efficiency_f >= 1.0))
    throw std::invalid_argument("ec_efficiency_f must be >= 1");
  if (!(intrinsic_error_e_d >= 0.0 && intrinsic_error_e_d <= 0.5))
    throw std::invalid_argument("intrinsic_error_e_d must be in [0, 0.5]");
  if (!(afterpulse_error_weight >= 0.0 && afterpulse_error_weight <= 0.5))
    throw std::invalid_argument("afterpulse_error_weight must be in [0, 0.5]");
}

double SessionStatistics::gain(Intensity k, Basis b) const {
  const CellCounts& c = cell(k, b);
  return c.sent > 0.0 ? c.detected / c.sent : 0.0;
}

double SessionStatistics::qber(Intensity k, Basis b) const {
  const CellCounts& c = cell(k, b);
  return c.detected > 0.0 ? c.errors / c.detected : 0.0;
}

void SessionStatistics::validate() const {
  for (const auto& per_basis : cells)
    for (const CellCounts& c : per_basis) {
      if (!(c.sent >= 0.0 && c.detected >= 0.0 && c.errors >= 0.0))
        throw std::invalid_argument("session counts must be nonnegative");
      if (c.errors > c.detected || c.detected > c.sent)
        throw std::invalid_argument("session counts must satisfy errors <= detected <= sent");
    }
}

double transmittance(const ChannelConfig& channel) {
  channel.validate();
  const double loss_db =
      channel.attenuation_db_per_km * channel.length_km + channel.extra_loss_db;
  return std::pow(10.0, -loss_db / 10.0);
}

GainResult gain_total(double mu, double eta_sys, const DetectorOperatingPoint& op) {
  const double y0 = 1.0 - (1.0 - op.dark_count_prob) * (1.0 - op.dark_count_prob);
  const double q_det = 1.0 - (1.0 - y0) * std::exp(-eta_sys * mu);
  return {q_det, q_det * (1.0 + op.afterpulse_prob)};
}

double qber(double mu, double eta_sys, const DetectorOperatingPoint& op, double e_d,
            double afterpulse_error_weight) {
  const GainResult g = gain_total(mu, eta_sys, op);
  if (!(g.q_tot > 0.0)) throw std::domain_error("qber undefined: Q_tot is zero");
  const double y0 = 1.0 - (1.0 - op.dark_count_prob) * (1.0 - op.dark_count_prob);
  const double photon = 1.0 - std::exp(-eta_sys * mu);
  const double num = 0.5 * y0 + e_d * photon +
                     afterpulse_error_weight * op.afterpulse_prob * g.q_det;
  return num / g.q_tot;
}

SessionClickModel session_click_model(const ProtocolConfig& protocol, double eta_sys,
                                      const DetectorOperatingPoint& op) {
  SessionClickModel m;
  const double pd = op.dark_count_prob;
  const double pa = op.afterpulse_prob;
  m.y0 = 1.0 - (1.0 - pd) * (1.0 - pd);
  double q_bar = 0.0;
  for (int k = 0; k < 3; ++k) {
    m.q_det[static_cast<std::size_t>(k)] =
        1.0 - (1.0 - m.y0) *
                  std::exp(-eta_sys * protocol.intensities[static_cast<std::size_t>(k)]);
    q_bar += protocol.send_probs[static_cast<std::size_t>(k)] *
             m.q_det[static_cast<std::size_t>(k)];
  }
  m.s_bar = pa * q_bar / (1.0 - pa * (1.0 - q_bar));
  for (int k = 0; k < 3; ++k) {
    const double q_det = m.q_det[static_cast<std::size_t>(k)];
    const double q_tot = q_det + m.s_bar * (1.0 - q_det);
    const double photon =
        1.0 - std::exp(-eta_sys * protocol.intensities[static_cast<std::size_t>(k)]);
    m.q_tot[static_cast<std::size_t>(k)] = q_tot;
    m.qber[static_cast<std::size_t>(k)] =
        q_tot > 0.0 ? (0.5 * m.y0 + protocol.intrinsic_error_e_d * photon +
                       protocol.afterpulse_error_weight * m.s_bar) /
                          q_tot
                    : 0.0;
  }
  return m;
}

SessionStatistics expected_session_counts(const ProtocolConfig& protocol,
                                          const ChannelConfig& channel,
                                          const DetectorOperatingPoint& op) {
  protocol.validate();
  channel.validate();
  op.validate();
  const double eta_sys = transmittance(channel) * op.efficiency;
  const SessionClickModel model = session_click_model(protocol, eta_sys, op);
  SessionStatistics stats;
  stats.total_pulses = protocol.clock_hz * protocol.session_s;
  stats.session_s = protocol.session_s;
  const double basis_sq[2] = {protocol.p_z * protocol.p_z,
                              protocol.p_x() * protocol.p_x()};
  for (Intensity k : {Intensity::signal, Intensity::decoy, Intensity::vacuum}) {
    const double sent_k = stats.total_pulses * protocol.send_prob(k);
    const std::size_t ki = static_cast<std::size_t>(k);
    for (Basis b : {Basis::z, Basis::x}) {
      CellCounts& c = stats.cell(k, b);
      c.sent = sent_k * basis_sq[static_cast<int>(b)];
      c.detected = c.sent * model.q_tot[ki];
      c.errors = c.detected * std::min(model.qber[ki], 1.0);
    }
  }
  stats.validate();
  return stats;
}

} // namespace qkd
