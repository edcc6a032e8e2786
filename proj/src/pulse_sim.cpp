#include "qkd/pulse_sim.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "qkd/simd/philox.hpp"

namespace qkd {

namespace {

constexpr std::size_t kChunkGates = 4096;

int resolve_threads(int n_threads) {
  if (n_threads > 0) return n_threads;
  if (const char* env = std::getenv("QKDSIM_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

std::uint64_t u32_threshold(double p) {
  if (p <= 0.0) return 0;
  if (p >= 1.0) return std::uint64_t{1} << 32;
  return static_cast<std::uint64_t>(std::llround(p * 4294967296.0));
}

struct ApKernel {
  double decay = 0.0; ///< exp(-dt / tau)
  double feed = 0.0;  ///< mass added per avalanche, P_a (1 - decay) / decay

  ApKernel(double pa, double tau_s, double gate_rate_hz) {
    decay = std::exp(-1.0 / (tau_s * gate_rate_hz));
    feed = decay > 0.0 ? pa * (1.0 - decay) / decay : 0.0;
  }
};

struct SessionTally {
  std::array<std::array<std::array<std::uint64_t, 3>, 2>, 3> cells{}; // [k][b][sent,det,err]

  void add(const SessionTally& o) {
    for (int k = 0; k < 3; ++k)
      for (int b = 0; b < 2; ++b)
        for (int f = 0; f < 3; ++f) cells[k][b][f] += o.cells[k][b][f];
  }
};

struct HistTally {
  std::vector<std::uint64_t> hist;
  std::uint64_t dark = 0;

  explicit HistTally(std::size_t period) : hist(period, 0) {}
  void add(const HistTally& o) {
    for (std::size_t i = 0; i < hist.size(); ++i) hist[i] += o.hist[i];
    dark += o.dark;
  }
};

// Runs fn(block_index, gate0, n_gates_in_block, tally) over all blocks on a
// dynamic worker pool. Tallies are integer sums, so the merge is independent
// of which thread processed which block.
template <typename Tally, typename Fn>
void run_blocks(const SimConfig& sim, int n_threads, Tally& total, Fn&& fn) {
  const std::uint64_t n_blocks =
      (sim.n_gates + sim.block_size - 1) / sim.block_size;
  const int workers =
      static_cast<int>(std::min<std::uint64_t>(resolve_threads(n_threads), n_blocks));
  std::atomic<std::uint64_t> next{0};
  std::vector<Tally> partial(static_cast<std::size_t>(workers), total);
  auto work = [&](int w) {
    for (;;) {
      const std::uint64_t b = next.fetch_add(1, std::memory_order_relaxed);
      if (b >= n_blocks) break;
      const std::uint64_t gate0 = b * sim.block_size;
      const std::uint64_t len = std::min<std::uint64_t>(sim.block_size, sim.n_gates - gate0);
      fn(b, gate0, len, partial[static_cast<std::size_t>(w)]);
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (const Tally& p : partial) total.add(p);
}

} // namespace

void SimConfig::validate() const {
  if (n_gates < 1) throw std::invalid_argument("n_gates must be >= 1");
  if (illumination_period < 1)
    throw std::invalid_argument("illumination_period must be >= 1");
  if (!(ap_time_constant_s > 0.0))
    throw std::invalid_argument("ap_time_constant_s must be positive");
  if (block_size < 1) throw std::invalid_argument("block_size must be >= 1");
  if (!(mu_per_pulse >= 0.0)) throw std::invalid_argument("mu_per_pulse must be >= 0");
  if (saturation_cap_hz && !(*saturation_cap_hz > 0.0))
    throw std::invalid_argument("saturation_cap_hz must be positive when set");
}

void GateHistogram::validate() const {
  std::uint64_t sum = 0;
  for (std::uint64_t c : counts_by_phase) sum += c;
  if (sum > total_gates)
    throw std::invalid_argument("histogram counts exceed total gates");
}

GateHistogram simulate_characterization_run(const SimConfig& sim,
                                            const DetectorOperatingPoint& op,
                                            int n_threads) {
  sim.validate();
  op.validate();
  const std::uint32_t period = sim.illumination_period;
  const double pd = op.dark_count_prob; // single APD under test
  const double p_photon = 1.0 - std::exp(-sim.mu_per_pulse * op.efficiency);
  const ApKernel kernel(op.afterpulse_prob, sim.ap_time_constant_s, op.gate_rate_hz);
  const double cap_per_block =
      sim.saturation_cap_hz ? *sim.saturation_cap_hz * sim.block_size / op.gate_rate_hz
                            : 0.0;

  HistTally total(period);
  run_blocks(sim, n_threads, total,
             [&](std::uint64_t, std::uint64_t gate0, std::uint64_t len, HistTally& tally) {
    std::vector<std::uint32_t> words(4 * kChunkGates);
    std::vector<double> uniforms(2 * kChunkGates);
    // illuminated run (tag 0) and laser-off run (tag 1)
    for (int run = 0; run < 2; ++run) {
      double pending = 0.0;
      std::uint64_t clicks_in_block = 0;
      const std::uint64_t cap =
          sim.saturation_cap_hz ? static_cast<std::uint64_t>(cap_per_block)
                                : ~std::uint64_t{0};
      for (std::uint64_t off = 0; off < len; off += kChunkGates) {
        const std::uint64_t n = std::min<std::uint64_t>(kChunkGates, len - off);
        simd::philox_fill(sim.seed, gate0 + off, static_cast<std::uint32_t>(run), n,
                          words.data());
        simd::u01_fill(words.data(), 2 * n, uniforms.data());
        for (std::uint64_t j = 0; j < n; ++j) {
          const std::uint64_t gate = gate0 + off + j;
          const bool lit = run == 0 && (gate % period) == 0;
          const double base = (1.0 - pd) * (lit ? 1.0 - p_photon : 1.0);
          const double p_click = 1.0 - base * (1.0 - pending);
          const bool click = uniforms[2 * j] < p_click;
          if (click) {
            if (clicks_in_block < cap) {
              if (run == 0)
                ++tally.hist[static_cast<std::size_t>(gate % period)];
              else
                ++tally.dark;
            }
            ++clicks_in_block;
          }
          pending = kernel.decay * (pending + (click ? kernel.feed : 0.0));
        }
      }
    }
  });

  GateHistogram out;
  out.counts_by_phase = std::move(total.hist);
  out.total_gates = sim.n_gates;
  out.dark_run_counts = total.dark;
  out.validate();
  return out;
}

CharacterizationEstimate estimate_characterization(const GateHistogram& hist, double mu) {
  if (hist.total_gates == 0) throw std::invalid_argument("empty histogram");
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
  const std::size_t period = hist.counts_by_phase.size();
  if (period < 2)
    throw std::invalid_argument("need >= 2 phase bins to separate afterpulses");

  // exact number of gates that fell in each phase bin
  auto gates_in_bin = [&](std::size_t b) -> double {
    if (b >= hist.total_gates) return 0.0;
    return static_cast<double>((hist.total_gates - 1 - b) / period + 1);
  };

  const double total = static_cast<double>(hist.total_gates);
  const double p_d_hat = static_cast<double>(hist.dark_run_counts) / total;
  const double n0 = gates_in_bin(0);
  const double photon_clicks = static_cast<double>(hist.counts_by_phase[0]) - p_d_hat * n0;
  if (!(photon_clicks > 0.0))
    throw std::runtime_error("no photon signal above the dark level");

  double afterpulse_clicks = 0.0;
  for (std::size_t b = 1; b < period; ++b)
    afterpulse_clicks += static_cast<double>(hist.counts_by_phase[b]) - p_d_hat * gates_in_bin(b);
  const double period_scale =
      static_cast<double>(period) / static_cast<double>(period - 1);

  CharacterizationEstimate est;
  est.p_d_hat = p_d_hat;
  est.p_a_hat = std::max(0.0, afterpulse_clicks * period_scale / photon_clicks);
  const double photon_rate = photon_clicks / n0;
  if (!(photon_rate < 1.0)) throw std::runtime_error("illuminated bin saturated");
  est.eta_hat = -std::log(1.0 - photon_rate) / mu;

  // binomial uncertainties, delta method for the derived quantities
  est.p_d_sigma = std::sqrt(std::max(p_d_hat * (1.0 - p_d_hat), 1.0 / total) / total);
  const double p0 = static_cast<double>(hist.counts_by_phase[0]) / n0;
  const double var_p0 = std::max(p0 * (1.0 - p0), 1.0 / n0) / n0;
  const double var_photon_rate = var_p0 + est.p_d_sigma * est.p_d_sigma;
  est.eta_sigma = std::sqrt(var_photon_rate) / ((1.0 - photon_rate) * mu);
  double var_ap = 0.0;
  for (std::size_t b = 1; b < period; ++b) {
    const double nb = gates_in_bin(b);
    const double pb = static_cast<double>(hist.counts_by_phase[b]) / nb;
    var_ap += nb * std::max(pb * (1.0 - pb), 1.0 / nb);
  }
  var_ap += (total - n0) * (total - n0) / total * est.p_d_sigma * est.p_d_sigma;
  const double sigma_ap_counts = std::sqrt(var_ap);
  est.p_a_sigma = period_scale *
                  std::sqrt(sigma_ap_counts * sigma_ap_counts / (photon_clicks * photon_clicks) +
                            afterpulse_clicks * afterpulse_clicks * var_photon_rate * n0 * n0 /
                                (photon_clicks * photon_clicks * photon_clicks * photon_clicks));
  return est;
}

SessionStatistics simulate_qkd_session(const ProtocolConfig& protocol,
                                       const ChannelConfig& channel,
                                       const DetectorOperatingPoint& op,
                                       const SimConfig& sim, int n_threads) {
  protocol.validate();
  channel.validate();
  op.validate();
  sim.validate();

  const double eta_sys = transmittance(channel) * op.efficiency;
  const double y0 = 1.0 - (1.0 - op.dark_count_prob) * (1.0 - op.dark_count_prob);
  double p_photon[3];
  double base[3]; // (1 - y0)(1 - p_photon)
  for (int k = 0; k < 3; ++k) {
    p_photon[k] = 1.0 - std::exp(-protocol.intensities[static_cast<std::size_t>(k)] * eta_sys);
    base[k] = (1.0 - y0) * (1.0 - p_photon[k]);
  }
  const std::uint64_t thr_s = u32_threshold(protocol.send_probs[0]);
  const std::uint64_t thr_sd = u32_threshold(protocol.send_probs[0] + protocol.send_probs[1]);
  const std::uint64_t thr_z = u32_threshold(protocol.p_z);
  const double e_d = protocol.intrinsic_error_e_d;
  const double w_ap = protocol.afterpulse_error_weight;
  const ApKernel kernel(op.afterpulse_prob, sim.ap_time_constant_s, op.gate_rate_hz);
  const std::uint64_t cap =
      sim.saturation_cap_hz
          ? static_cast<std::uint64_t>(*sim.saturation_cap_hz * sim.block_size / op.gate_rate_hz)
          : ~std::uint64_t{0};

  SessionTally total;
  run_blocks(sim, n_threads, total,
             [&](std::uint64_t, std::uint64_t gate0, std::uint64_t len, SessionTally& tally) {
    std::vector<std::uint32_t> words(8 * kChunkGates);
    std::vector<double> uniforms(4 * kChunkGates);
    double pending = 0.0;
    std::uint64_t clicks_in_block = 0;
    for (std::uint64_t off = 0; off < len; off += kChunkGates) {
      const std::uint64_t n = std::min<std::uint64_t>(kChunkGates, len - off);
      simd::philox_fill(sim.seed, 2 * (gate0 + off), 0, 2 * n, words.data());
      simd::u01_fill(words.data(), 4 * n, uniforms.data());
      for (std::uint64_t j = 0; j < n; ++j) {
        const std::uint32_t* w = words.data() + 8 * j;
        const int k = static_cast<std::uint64_t>(w[0]) < thr_s
                          ? 0
                          : (static_cast<std::uint64_t>(w[0]) < thr_sd ? 1 : 2);
        const bool alice_z = static_cast<std::uint64_t>(w[1]) < thr_z;
        const bool bob_z = static_cast<std::uint64_t>(w[2]) < thr_z;
        const double p_click = 1.0 - base[k] * (1.0 - pending);
        const bool click = uniforms[4 * j + 2] < p_click;
        if (alice_z == bob_z) {
          auto& cell = tally.cells[static_cast<std::size_t>(k)][alice_z ? 0 : 1];
          ++cell[0];
          if (click && clicks_in_block < cap) {
            ++cell[1];
            const double err_mass = 0.5 * y0 + e_d * p_photon[k] + w_ap * pending;
            if (uniforms[4 * j + 3] * p_click < err_mass) ++cell[2];
          }
        }
        if (click) ++clicks_in_block;
        pending = kernel.decay * (pending + (click ? kernel.feed : 0.0));
      }
    }
  });

  SessionStatistics stats;
  stats.total_pulses = static_cast<double>(sim.n_gates);
  stats.session_s = static_cast<double>(sim.n_gates) / protocol.clock_hz;
  for (int k = 0; k < 3; ++k)
    for (int b = 0; b < 2; ++b) {
      CellCounts& c = stats.cells[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)];
      c.sent = static_cast<double>(total.cells[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)][0]);
      c.detected = static_cast<double>(total.cells[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)][1]);
      c.errors = static_cast<double>(total.cells[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)][2]);
    }
  stats.validate();
  return stats;
}

} // namespace qkd
