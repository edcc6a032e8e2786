#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qkd/config.hpp"
#include "qkd/simd/philox.hpp"

namespace {

using nlohmann::json;
using namespace qkd;

json artifact_shell(const RunConfig& config, const std::string& command) {
  json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["command"] = command;
  j["config"] = effective_config_json(config);
  return j;
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << body;
}

void write_json(const std::string& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

std::string csv_with_provenance(const RunConfig& config, const std::string& command,
                                const std::string& body) {
  std::string head = "# ";
  head += kToolName;
  head += " ";
  head += kToolVersion;
  head += " ";
  head += command;
  head += "\n# config ";
  head += effective_config_json(config).dump();
  head += "\n";
  return head + body;
}

json key_result_json(const SecureKeyResult& key) {
  return json{
      {"secure_length_bits", key.secure_length_bits},
      {"secure_rate_bps", key.secure_rate_bps},
      {"reason", zero_key_reason_name(key.reason)},
      {"s0_lower", key.s0_lower},
      {"s1_lower", key.s1_lower},
      {"phase_error_upper", key.phase_error_upper},
      {"ec_leak_bits", key.ec_leak_bits},
      {"epsilon_terms_bits", key.epsilon_terms_bits},
      {"n_z", key.n_z},
      {"qber_z", key.qber_z},
      {"y0_lower", key.bounds.y0_lower},
      {"y1_lower", key.bounds.y1_lower},
      {"e1_upper", key.bounds.e1_upper},
      {"err0_lower", key.bounds.err0_lower},
      {"gain_delta", key.bounds.gain_delta},
      {"error_gain_delta", key.bounds.error_gain_delta},
      {"corner_y0", key.bounds.corner_audit.y0_corner},
      {"corner_y1", key.bounds.corner_audit.y1_corner},
      {"e1_from_signal_form", key.bounds.corner_audit.e1_from_signal},
  };
}

json stats_json(const SessionStatistics& stats) {
  static const char* kIntensity[3] = {"signal", "decoy", "vacuum"};
  static const char* kBasis[2] = {"z", "x"};
  json cells = json::object();
  for (int k = 0; k < 3; ++k)
    for (int b = 0; b < 2; ++b) {
      const CellCounts& c = stats.cells[k][b];
      cells[std::string(kIntensity[k]) + "_" + kBasis[b]] = {
          {"sent", c.sent},
          {"detected", c.detected},
          {"errors", c.errors},
          {"gain", c.sent > 0 ? c.detected / c.sent : 0.0},
          {"qber", c.detected > 0 ? c.errors / c.detected : 0.0},
      };
    }
  return json{{"cells", cells},
              {"total_pulses", stats.total_pulses},
              {"session_s", stats.session_s}};
}

std::vector<DetectorOperatingPoint> default_optimize_table(const RunConfig& config) {
  if (!config.operating_points.empty()) return config.operating_points;
  // illustrative long-haul trade-off table: nominal point plus a low-bias
  // point trading efficiency for dark counts
  DetectorOperatingPoint nominal;
  nominal.temperature_c = 20.0;
  nominal.dark_count_prob = 5.9e-5;
  nominal.afterpulse_prob = 0.028;
  nominal.efficiency = 0.25;
  DetectorOperatingPoint lowbias = nominal;
  lowbias.dark_count_prob = 1.2e-5;
  lowbias.efficiency = 0.15;
  return {nominal, lowbias};
}

int run(int argc, char** argv) {
  CLI::App app{"Gated-APD decoy-state BB84 rate simulator"};
  app.require_subcommand(1);
  app.fallthrough(); // let subcommands hand --config back to the main app
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (defaults when omitted)");

  // rate
  auto* rate_cmd = app.add_subcommand("rate", "finite-key secure rate at one point");
  double rate_distance = 50.0, rate_temp = 20.0;
  std::optional<double> rate_session, rate_ed;
  std::string rate_out = "rate.json";
  rate_cmd->add_option("--distance-km", rate_distance, "fiber length");
  rate_cmd->add_option("--temp-c", rate_temp, "detector temperature");
  rate_cmd->add_option("--session-s", rate_session, "session duration override");
  rate_cmd->add_option("--ed", rate_ed, "intrinsic error override");
  rate_cmd->add_option("--out", rate_out, "output JSON path");

  // sweep-temp
  auto* st_cmd = app.add_subcommand("sweep-temp", "rate vs detector temperature");
  double st_min = -30.0, st_max = 20.0, st_step = 1.0, st_distance = 50.0;
  std::string st_out = "sweep_temp.csv";
  st_cmd->add_option("--tmin", st_min, "sweep start, C");
  st_cmd->add_option("--tmax", st_max, "sweep end, C");
  st_cmd->add_option("--step", st_step, "step, C");
  st_cmd->add_option("--distance-km", st_distance, "fiber length");
  st_cmd->add_option("--out", st_out, "output CSV path");

  // sweep-distance
  auto* sd_cmd = app.add_subcommand("sweep-distance", "rate vs fiber length");
  double sd_min = 10.0, sd_max = 100.0, sd_step = 1.0, sd_temp = 20.0;
  std::optional<double> sd_session60_beyond;
  bool sd_mc = false;
  std::string sd_out = "sweep_distance.csv";
  sd_cmd->add_option("--lmin", sd_min, "sweep start, km");
  sd_cmd->add_option("--lmax", sd_max, "sweep end, km");
  sd_cmd->add_option("--step", sd_step, "step, km");
  sd_cmd->add_option("--temp-c", sd_temp, "detector temperature");
  sd_cmd->add_option("--session60-beyond-km", sd_session60_beyond,
                     "switch to 60-minute sessions at and beyond this length");
  sd_cmd->add_flag("--monte-carlo", sd_mc, "evaluate rows by Monte Carlo (sim config)");
  sd_cmd->add_option("--out", sd_out, "output CSV path");

  // crossover
  auto* xo_cmd = app.add_subcommand("crossover", "warm/cold rate curve crossing");
  double xo_hot = 20.0, xo_cold = -30.0, xo_lmin = 5.0, xo_lmax = 90.0;
  std::string xo_out = "crossover.json";
  xo_cmd->add_option("--t-hot", xo_hot, "warm temperature, C");
  xo_cmd->add_option("--t-cold", xo_cold, "cold temperature, C");
  xo_cmd->add_option("--lmin", xo_lmin, "bracket start, km");
  xo_cmd->add_option("--lmax", xo_lmax, "bracket end, km");
  xo_cmd->add_option("--out", xo_out, "output JSON path");

  // cutoff
  auto* co_cmd = app.add_subcommand("cutoff", "largest length with positive rate");
  double co_temp = 20.0, co_lmin = 10.0, co_lmax = 150.0;
  std::string co_out = "cutoff.json";
  co_cmd->add_option("--temp-c", co_temp, "detector temperature");
  co_cmd->add_option("--lmin", co_lmin, "bracket start, km");
  co_cmd->add_option("--lmax", co_lmax, "bracket end, km");
  co_cmd->add_option("--out", co_out, "output JSON path");

  // optimize
  auto* opt_cmd = app.add_subcommand("optimize", "best operating point from a table");
  double opt_distance = 100.0;
  std::optional<double> opt_session;
  std::string opt_out = "optimize.json";
  opt_cmd->add_option("--distance-km", opt_distance, "fiber length");
  opt_cmd->add_option("--session-s", opt_session, "session duration override");
  opt_cmd->add_option("--out", opt_out, "output JSON path");

  // characterize
  auto* ch_cmd = app.add_subcommand("characterize", "simulated detector characterization");
  std::optional<std::uint64_t> ch_gates, ch_seed;
  double ch_temp = 20.0;
  std::string ch_out_csv = "characterize_hist.csv";
  std::string ch_out_json = "characterize_estimate.json";
  ch_cmd->add_option("--gates", ch_gates, "number of gates");
  ch_cmd->add_option("--seed", ch_seed, "RNG seed");
  ch_cmd->add_option("--temp-c", ch_temp, "detector temperature");
  ch_cmd->add_option("--out-csv", ch_out_csv, "histogram CSV path");
  ch_cmd->add_option("--out-json", ch_out_json, "estimate JSON path");

  // mc-session
  auto* mc_cmd = app.add_subcommand("mc-session", "Monte Carlo QKD session");
  std::optional<std::uint64_t> mc_gates, mc_seed;
  double mc_distance = 50.0, mc_temp = 20.0;
  bool mc_with_key = false;
  std::string mc_out = "mc_session.json";
  mc_cmd->add_option("--gates", mc_gates, "number of gates");
  mc_cmd->add_option("--seed", mc_seed, "RNG seed");
  mc_cmd->add_option("--distance-km", mc_distance, "fiber length");
  mc_cmd->add_option("--temp-c", mc_temp, "detector temperature");
  mc_cmd->add_flag("--with-key", mc_with_key, "also run the finite-key analysis");
  mc_cmd->add_option("--out", mc_out, "output JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e); // --help
    app.exit(e);
    return 2;
  }

  RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
  config.validate();

  auto op_at_temp = [&](double temp_c) {
    DetectorOperatingPoint op =
        operating_point_at(temp_c, config.temperature_model, config.detector.efficiency,
                           config.detector.gate_rate_hz);
    op.jitter_s = config.detector.jitter_s;
    return op;
  };

  if (rate_cmd->parsed()) {
    if (rate_session) config.protocol.session_s = *rate_session;
    if (rate_ed) config.protocol.intrinsic_error_e_d = *rate_ed;
    config.channel.length_km = rate_distance;
    config.validate();
    const SecureKeyResult key =
        secure_rate_point(config.protocol, config.channel, op_at_temp(rate_temp));
    json j = artifact_shell(config, "rate");
    j["result"] = key_result_json(key);
    j["result"]["distance_km"] = rate_distance;
    j["result"]["temp_c"] = rate_temp;
    write_json(rate_out, j);
    std::printf("rate: %.6g bit/s at %.4g km, %.4g C (%s) -> %s\n", key.secure_rate_bps,
                rate_distance, rate_temp, zero_key_reason_name(key.reason), rate_out.c_str());
  } else if (st_cmd->parsed()) {
    config.channel.length_km = st_distance;
    config.validate();
    const SweepResult sweep =
        sweep_temperature(st_min, st_max, st_step, config.channel, config.protocol,
                          config.temperature_model, config.detector);
    write_text(st_out, csv_with_provenance(config, "sweep-temp variable=" + sweep.variable_name,
                                           sweep_to_csv(sweep)));
    std::printf("sweep-temp: %zu rows over [%.4g, %.4g] C at %.4g km -> %s\n",
                sweep.rows.size(), st_min, st_max, st_distance, st_out.c_str());
  } else if (sd_cmd->parsed()) {
    const SweepResult sweep = sweep_distance(
        sd_min, sd_max, sd_step, sd_temp, config.protocol, config.temperature_model,
        config.detector, sd_session60_beyond, 3600.0, sd_mc ? &config.sim : nullptr);
    write_text(sd_out,
               csv_with_provenance(config, "sweep-distance variable=" + sweep.variable_name,
                                   sweep_to_csv(sweep)));
    std::printf("sweep-distance: %zu rows over [%.4g, %.4g] km at %.4g C -> %s\n",
                sweep.rows.size(), sd_min, sd_max, sd_temp, sd_out.c_str());
  } else if (xo_cmd->parsed()) {
    const CrossoverResult xo =
        find_crossover(config.protocol, config.temperature_model, xo_hot, xo_cold,
                       config.detector, xo_lmin, xo_lmax);
    json j = artifact_shell(config, "crossover");
    const char* diag = xo.diagnostic == CrossoverResult::Diagnostic::ok ? "ok"
                       : xo.diagnostic == CrossoverResult::Diagnostic::identical_curves
                           ? "identical_curves"
                       : xo.diagnostic == CrossoverResult::Diagnostic::cold_always_higher
                           ? "cold_always_higher"
                       : xo.diagnostic == CrossoverResult::Diagnostic::hot_always_higher
                           ? "hot_always_higher"
                           : "no_sign_change";
    j["result"] = {{"found", xo.found}, {"distance_km", xo.distance_km}, {"diagnostic", diag}};
    write_json(xo_out, j);
    if (xo.found)
      std::printf("crossover: %.2f km -> %s\n", xo.distance_km, xo_out.c_str());
    else
      std::printf("crossover: not found (%s) -> %s\n", diag, xo_out.c_str());
  } else if (co_cmd->parsed()) {
    const CutoffResult co = find_cutoff(config.protocol, config.temperature_model, co_temp,
                                        config.detector, co_lmin, co_lmax);
    json j = artifact_shell(config, "cutoff");
    j["result"] = {{"distance_km", co.distance_km},
                   {"beyond_bracket", co.beyond_bracket},
                   {"temp_c", co_temp}};
    write_json(co_out, j);
    std::printf("cutoff: %s%.2f km at %.4g C -> %s\n", co.beyond_bracket ? ">" : "",
                co.distance_km, co_temp, co_out.c_str());
  } else if (opt_cmd->parsed()) {
    if (opt_session) config.protocol.session_s = *opt_session;
    config.channel.length_km = opt_distance;
    config.validate();
    const std::vector<DetectorOperatingPoint> table = default_optimize_table(config);
    const auto [best, rate] =
        optimize_operating_point(table, config.channel, config.protocol);
    json j = artifact_shell(config, "optimize");
    j["result"] = {{"best_index", best},
                   {"secure_rate_bps", rate},
                   {"efficiency", table[best].efficiency},
                   {"dark_count_prob", table[best].dark_count_prob},
                   {"afterpulse_prob", table[best].afterpulse_prob}};
    write_json(opt_out, j);
    std::printf("optimize: entry %zu (eta=%.3g, pd=%.3g) at %.6g bit/s -> %s\n", best,
                table[best].efficiency, table[best].dark_count_prob, rate, opt_out.c_str());
  } else if (ch_cmd->parsed()) {
    if (ch_gates) config.sim.n_gates = *ch_gates;
    if (ch_seed) config.sim.seed = *ch_seed;
    config.validate();
    const DetectorOperatingPoint op = op_at_temp(ch_temp);
    const GateHistogram hist = simulate_characterization_run(config.sim, op);
    const CharacterizationEstimate est =
        estimate_characterization(hist, config.sim.mu_per_pulse);
    std::string csv = "phase_index,counts\n";
    char line[64];
    for (std::size_t i = 0; i < hist.counts_by_phase.size(); ++i) {
      std::snprintf(line, sizeof line, "%zu,%llu\n", i,
                    static_cast<unsigned long long>(hist.counts_by_phase[i]));
      csv += line;
    }
    write_text(ch_out_csv, csv_with_provenance(config, "characterize", csv));
    json j = artifact_shell(config, "characterize");
    j["result"] = {{"p_d_hat", est.p_d_hat},     {"p_d_sigma", est.p_d_sigma},
                   {"p_a_hat", est.p_a_hat},     {"p_a_sigma", est.p_a_sigma},
                   {"eta_hat", est.eta_hat},     {"eta_sigma", est.eta_sigma},
                   {"dark_run_counts", hist.dark_run_counts},
                   {"total_gates", hist.total_gates}};
    write_json(ch_out_json, j);
    std::printf("characterize: p_d=%.4g p_a=%.4g eta=%.4g -> %s, %s\n", est.p_d_hat,
                est.p_a_hat, est.eta_hat, ch_out_csv.c_str(), ch_out_json.c_str());
  } else if (mc_cmd->parsed()) {
    if (mc_gates) config.sim.n_gates = *mc_gates;
    if (mc_seed) config.sim.seed = *mc_seed;
    config.channel.length_km = mc_distance;
    config.validate();
    const DetectorOperatingPoint op = op_at_temp(mc_temp);
    const SessionStatistics stats =
        simulate_qkd_session(config.protocol, config.channel, op, config.sim);
    json j = artifact_shell(config, "mc-session");
    j["result"] = stats_json(stats);
    if (mc_with_key) {
      const EpsilonBudget budget = EpsilonBudget::from_total(config.protocol.epsilon);
      const DecoyBounds bounds = decoy_bounds(stats, config.protocol, budget);
      j["result"]["key"] = key_result_json(secure_key_length(stats, bounds, config.protocol, budget));
    }
    write_json(mc_out, j);
    std::printf("mc-session: %llu gates, seed %llu, simd %s -> %s\n",
                static_cast<unsigned long long>(config.sim.n_gates),
                static_cast<unsigned long long>(config.sim.seed),
                qkd::simd::level_name(qkd::simd::active_level()), mc_out.c_str());
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const qkd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
