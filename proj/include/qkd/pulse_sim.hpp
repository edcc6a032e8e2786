#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qkd/link.hpp"

namespace qkd {

/// Gate-level Monte Carlo configuration. Results are a pure function of
/// (seed, block_size, n_gates) and the physics inputs; blocks are independent
/// and merged by summation, so thread count and scheduling never change the
/// output. The afterpulse kernel a(k) = A exp(-k dt / tau) is carried as a
/// single exponentially decaying state, normalized so its total mass is P_a.
struct SimConfig {
  std::uint64_t n_gates = 100000000;
  std::uint64_t seed = 42;
  std::uint32_t block_size = 1u << 20;
  std::uint32_t illumination_period = 64;
  double mu_per_pulse = 0.1;
  double ap_time_constant_s = 5e-8;
  std::optional<double> saturation_cap_hz;

  void validate() const;
};

/// Detections per gate position within the illumination cycle, plus a
/// laser-off run of equal length for the dark-count estimate.
struct GateHistogram {
  std::vector<std::uint64_t> counts_by_phase;
  std::uint64_t total_gates = 0;
  std::uint64_t dark_run_counts = 0;

  void validate() const;
};

struct CharacterizationEstimate {
  double p_d_hat = 0.0;
  double p_a_hat = 0.0;
  double eta_hat = 0.0;
  double p_d_sigma = 0.0;
  double p_a_sigma = 0.0;
  double eta_sigma = 0.0;
};

/// Pulsed-laser characterization run: every illumination_period-th gate sees a
/// weak pulse of mean mu_per_pulse photons against a single gated APD with
/// dark probability P_d and the afterpulse kernel. n_threads = 0 picks
/// hardware concurrency.
GateHistogram simulate_characterization_run(const SimConfig& sim,
                                            const DetectorOperatingPoint& op,
                                            int n_threads = 0);

/// Standard histogram extraction: dark rate from the laser-off run, photon
/// clicks from the illuminated bin after dark subtraction, afterpulse counts
/// from the remaining bins scaled by period/(period-1), and
/// eta = -ln(1 - photon_rate)/mu.
CharacterizationEstimate estimate_characterization(const GateHistogram& hist, double mu);

/// Full gate-level decoy-BB84 session against the two-detector receiver:
/// intensity and both basis choices drawn per gate, clicks from the combined
/// photon/dark/afterpulse trigger, per-click errors from the trigger
/// decomposition, sifted counts aggregated per (intensity, basis).
SessionStatistics simulate_qkd_session(const ProtocolConfig& protocol,
                                       const ChannelConfig& channel,
                                       const DetectorOperatingPoint& op,
                                       const SimConfig& sim, int n_threads = 0);

} // namespace qkd
