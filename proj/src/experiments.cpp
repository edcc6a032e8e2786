#include "qkd/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace qkd {

namespace {

DetectorOperatingPoint op_from_model(double temp_c, const TemperatureModel& model,
                                     const DetectorBase& det) {
  DetectorOperatingPoint op =
      operating_point_at(temp_c, model, det.efficiency, det.gate_rate_hz);
  op.jitter_s = det.jitter_s;
  return op;
}

SweepRow row_for(double variable, const ProtocolConfig& protocol,
                 const ChannelConfig& channel, const DetectorOperatingPoint& op,
                 const SimConfig* mc) {
  const SessionStatistics stats = mc ? simulate_qkd_session(protocol, channel, op, *mc)
                                     : expected_session_counts(protocol, channel, op);
  const EpsilonBudget budget = EpsilonBudget::from_total(protocol.epsilon);
  const DecoyBounds bounds = decoy_bounds(stats, protocol, budget);
  const SecureKeyResult key = secure_key_length(stats, bounds, protocol, budget);
  SweepRow row;
  row.variable = variable;
  row.p_d = op.dark_count_prob;
  row.p_a = op.afterpulse_prob;
  row.q_signal = stats.gain(Intensity::signal, Basis::z);
  row.qber_signal = stats.qber(Intensity::signal, Basis::z);
  row.secure_rate_bps = key.secure_rate_bps;
  row.reason = key.reason;
  return row;
}

double rate_at_distance(double l_km, double temp_c, const ProtocolConfig& protocol,
                        const TemperatureModel& model, const DetectorBase& det) {
  ChannelConfig channel;
  channel.length_km = l_km;
  return secure_rate_point(protocol, channel, op_from_model(temp_c, model, det))
      .secure_rate_bps;
}

} // namespace

SecureKeyResult secure_rate_point(const ProtocolConfig& protocol, const ChannelConfig& channel,
                                  const DetectorOperatingPoint& op) {
  const SessionStatistics stats = expected_session_counts(protocol, channel, op);
  const EpsilonBudget budget = EpsilonBudget::from_total(protocol.epsilon);
  const DecoyBounds bounds = decoy_bounds(stats, protocol, budget);
  return secure_key_length(stats, bounds, protocol, budget);
}

SecureKeyResult secure_rate_point_mc(const ProtocolConfig& protocol,
                                     const ChannelConfig& channel,
                                     const DetectorOperatingPoint& op, const SimConfig& sim) {
  const SessionStatistics stats = simulate_qkd_session(protocol, channel, op, sim);
  const EpsilonBudget budget = EpsilonBudget::from_total(protocol.epsilon);
  const DecoyBounds bounds = decoy_bounds(stats, protocol, budget);
  return secure_key_length(stats, bounds, protocol, budget);
}

SweepResult sweep_temperature(double t_min_c, double t_max_c, double step_c,
                              const ChannelConfig& channel, const ProtocolConfig& protocol,
                              const TemperatureModel& model, const DetectorBase& det,
                              const SimConfig* mc) {
  if (!(step_c > 0.0)) throw std::invalid_argument("step must be positive");
  if (t_min_c > t_max_c) throw std::invalid_argument("empty temperature range");
  SweepResult out;
  out.variable_name = "temperature_c";
  for (std::size_t i = 0;; ++i) {
    const double t = t_min_c + static_cast<double>(i) * step_c;
    if (t > t_max_c + 1e-9) break;
    out.rows.push_back(row_for(t, protocol, channel, op_from_model(t, model, det), mc));
  }
  return out;
}

SweepResult sweep_distance(double l_min_km, double l_max_km, double step_km, double temp_c,
                           const ProtocolConfig& protocol, const TemperatureModel& model,
                           const DetectorBase& det,
                           std::optional<double> long_session_beyond_km,
                           double long_session_s, const SimConfig* mc) {
  if (!(step_km > 0.0)) throw std::invalid_argument("step must be positive");
  if (l_min_km > l_max_km || l_min_km < 0.0)
    throw std::invalid_argument("invalid distance range");
  const DetectorOperatingPoint op = op_from_model(temp_c, model, det);
  SweepResult out;
  out.variable_name = "length_km";
  for (std::size_t i = 0;; ++i) {
    const double l = l_min_km + static_cast<double>(i) * step_km;
    if (l > l_max_km + 1e-9) break;
    ChannelConfig channel;
    channel.length_km = l;
    ProtocolConfig p = protocol;
    if (long_session_beyond_km && l >= *long_session_beyond_km - 1e-9)
      p.session_s = long_session_s;
    out.rows.push_back(row_for(l, p, channel, op, mc));
  }
  return out;
}

std::vector<RelativeChangeRow> relative_change(const SweepResult& sweep_hot,
                                               const SweepResult& sweep_cold) {
  if (sweep_hot.rows.size() != sweep_cold.rows.size())
    throw std::invalid_argument("relative_change: sweep grids differ in length");
  std::vector<RelativeChangeRow> rows;
  rows.reserve(sweep_hot.rows.size());
  for (std::size_t i = 0; i < sweep_hot.rows.size(); ++i) {
    const SweepRow& h = sweep_hot.rows[i];
    const SweepRow& c = sweep_cold.rows[i];
    if (std::abs(h.variable - c.variable) > 1e-9)
      throw std::invalid_argument("relative_change: sweep grids misaligned");
    RelativeChangeRow r;
    r.distance_km = h.variable;
    if (h.secure_rate_bps > 0.0) {
      r.value = (h.secure_rate_bps - c.secure_rate_bps) / h.secure_rate_bps;
      r.defined = true;
    }
    rows.push_back(r);
  }
  return rows;
}

CrossoverResult find_crossover(const ProtocolConfig& protocol, const TemperatureModel& model,
                               double t_hot_c, double t_cold_c, const DetectorBase& det,
                               double l_min_km, double l_max_km, double resolution_km) {
  auto diff = [&](double l) {
    return rate_at_distance(l, t_hot_c, protocol, model, det) -
           rate_at_distance(l, t_cold_c, protocol, model, det);
  };
  const double coarse_step = 2.5;
  CrossoverResult out;
  double prev_l = l_min_km;
  double prev_d = diff(prev_l);
  bool any_pos = prev_d > 0.0, any_neg = prev_d < 0.0;
  double lo = 0.0, hi = 0.0, d_lo = 0.0;
  bool bracketed = false;
  for (double l = l_min_km + coarse_step; l <= l_max_km + 1e-9; l += coarse_step) {
    const double d = diff(l);
    any_pos = any_pos || d > 0.0;
    any_neg = any_neg || d < 0.0;
    if (!bracketed && prev_d != 0.0 && d != 0.0 && (prev_d > 0.0) != (d > 0.0)) {
      lo = prev_l;
      hi = l;
      d_lo = prev_d;
      bracketed = true;
    }
    prev_l = l;
    prev_d = d;
  }
  if (!bracketed) {
    if (!any_pos && !any_neg)
      out.diagnostic = CrossoverResult::Diagnostic::identical_curves;
    else if (any_neg && !any_pos)
      out.diagnostic = CrossoverResult::Diagnostic::cold_always_higher;
    else if (any_pos && !any_neg)
      out.diagnostic = CrossoverResult::Diagnostic::hot_always_higher;
    else
      out.diagnostic = CrossoverResult::Diagnostic::no_sign_change;
    return out;
  }
  while (hi - lo > resolution_km) {
    const double mid = 0.5 * (lo + hi);
    const double d = diff(mid);
    if (d == 0.0 || (d > 0.0) == (d_lo > 0.0)) {
      lo = mid;
      if (d != 0.0) d_lo = d;
    } else {
      hi = mid;
    }
  }
  out.found = true;
  out.distance_km = 0.5 * (lo + hi);
  out.diagnostic = CrossoverResult::Diagnostic::ok;
  return out;
}

CutoffResult find_cutoff(const ProtocolConfig& protocol, const TemperatureModel& model,
                         double temp_c, const DetectorBase& det, double l_min_km,
                         double l_max_km, double resolution_km) {
  auto rate = [&](double l) { return rate_at_distance(l, temp_c, protocol, model, det); };
  if (!(rate(l_min_km) > 0.0))
    throw std::runtime_error("find_cutoff: rate already zero at bracket start");
  CutoffResult out;
  if (rate(l_max_km) > 0.0) {
    out.distance_km = l_max_km;
    out.beyond_bracket = true;
    return out;
  }
  double lo = l_min_km, hi = l_max_km;
  while (hi - lo > resolution_km) {
    const double mid = 0.5 * (lo + hi);
    if (rate(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  out.distance_km = 0.5 * (lo + hi);
  return out;
}

std::pair<std::size_t, double> optimize_operating_point(
    const std::vector<DetectorOperatingPoint>& table, const ChannelConfig& channel,
    const ProtocolConfig& protocol) {
  if (table.empty()) throw std::invalid_argument("empty operating-point table");
  std::size_t best = 0;
  double best_rate = -1.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const double r = secure_rate_point(protocol, channel, table[i]).secure_rate_bps;
    if (r > best_rate ||
        (r == best_rate && table[i].efficiency > table[best].efficiency)) {
      best = i;
      best_rate = r;
    }
  }
  return {best, best_rate};
}

CalibrationResult calibrate_intrinsic_error(const ProtocolConfig& protocol,
                                            const ChannelConfig& channel,
                                            const DetectorOperatingPoint& op,
                                            double target_bps, double e_d_max,
                                            int iterations) {
  auto rate = [&](double e_d) {
    ProtocolConfig p = protocol;
    p.intrinsic_error_e_d = e_d;
    return secure_rate_point(p, channel, op).secure_rate_bps;
  };
  // the rate is monotone decreasing in e_d
  double lo = 0.0, hi = e_d_max;
  CalibrationResult out;
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (rate(mid) > target_bps)
      lo = mid;
    else
      hi = mid;
    ++out.iterations;
  }
  out.e_d = 0.5 * (lo + hi);
  out.achieved_rate_bps = rate(out.e_d);
  return out;
}

std::string sweep_to_csv(const SweepResult& sweep) {
  // fixed schema; the independent variable's meaning is named in the
  // provenance header written by the CLI
  std::string csv = "variable,pd,pa,q_signal,qber_signal,secure_rate_bps,reason\n";
  char line[256];
  for (const SweepRow& r : sweep.rows) {
    std::snprintf(line, sizeof line, "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%s\n", r.variable,
                  r.p_d, r.p_a, r.q_signal, r.qber_signal, r.secure_rate_bps,
                  r.reason == ZeroKeyReason::none ? "" : zero_key_reason_name(r.reason));
    csv += line;
  }
  return csv;
}

} // namespace qkd
