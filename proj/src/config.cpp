#include "qkd/config.hpp"

#include <fstream>
#include <set>

namespace qkd {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& scope,
                  const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(scope + " must be a JSON object");
  std::string unknown;
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) unknown += (unknown.empty() ? "" : ", ") + scope + it.key();
  if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
}

double num(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(std::string("config key ") + key + " must be a number");
  return v.get<double>();
}

std::uint64_t unum(const json& obj, const char* key, std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned() && !v.is_number_integer())
    throw ConfigError(std::string("config key ") + key + " must be an integer");
  return v.get<std::uint64_t>();
}

std::array<double, 3> triple(const json& obj, const char* key, std::array<double, 3> fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != 3)
    throw ConfigError(std::string("config key ") + key + " must be an array of 3 numbers");
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

void parse_protocol(const json& j, ProtocolConfig& p) {
  require_keys(j, "protocol.",
               {"intensities", "send_probs", "p_z", "epsilon", "session_s", "clock_hz",
                "ec_efficiency_f", "intrinsic_error_e_d", "afterpulse_error_weight",
                "deviation_policy"});
  p.intensities = triple(j, "intensities", p.intensities);
  p.send_probs = triple(j, "send_probs", p.send_probs);
  p.p_z = num(j, "p_z", p.p_z);
  p.epsilon = num(j, "epsilon", p.epsilon);
  p.session_s = num(j, "session_s", p.session_s);
  p.clock_hz = num(j, "clock_hz", p.clock_hz);
  p.ec_efficiency_f = num(j, "ec_efficiency_f", p.ec_efficiency_f);
  p.intrinsic_error_e_d = num(j, "intrinsic_error_e_d", p.intrinsic_error_e_d);
  p.afterpulse_error_weight = num(j, "afterpulse_error_weight", p.afterpulse_error_weight);
  if (j.contains("deviation_policy"))
    p.deviation_policy = deviation_policy_from_name(j.at("deviation_policy").get<std::string>());
}

void parse_channel(const json& j, ChannelConfig& c) {
  require_keys(j, "channel.", {"length_km", "attenuation_db_per_km", "extra_loss_db"});
  c.length_km = num(j, "length_km", c.length_km);
  c.attenuation_db_per_km = num(j, "attenuation_db_per_km", c.attenuation_db_per_km);
  c.extra_loss_db = num(j, "extra_loss_db", c.extra_loss_db);
}

void parse_temperature_model(const json& j, TemperatureModel& m) {
  require_keys(j, "temperature_model.",
               {"dark_ref", "dark_gamma_per_k", "ref_temp_c", "ap_intercept", "ap_slope_per_k",
                "valid_min_c", "valid_max_c"});
  m.dark_ref = num(j, "dark_ref", m.dark_ref);
  m.dark_gamma = num(j, "dark_gamma_per_k", m.dark_gamma);
  m.ref_temp_c = num(j, "ref_temp_c", m.ref_temp_c);
  m.ap_intercept = num(j, "ap_intercept", m.ap_intercept);
  m.ap_slope = num(j, "ap_slope_per_k", m.ap_slope);
  m.valid_min_c = num(j, "valid_min_c", m.valid_min_c);
  m.valid_max_c = num(j, "valid_max_c", m.valid_max_c);
}

void parse_detector(const json& j, DetectorBase& d) {
  require_keys(j, "detector.", {"efficiency", "gate_rate_hz", "jitter_s"});
  d.efficiency = num(j, "efficiency", d.efficiency);
  d.gate_rate_hz = num(j, "gate_rate_hz", d.gate_rate_hz);
  d.jitter_s = num(j, "jitter_s", d.jitter_s);
}

void parse_sim(const json& j, SimConfig& s) {
  require_keys(j, "sim.",
               {"n_gates", "seed", "block_size", "illumination_period", "mu_per_pulse",
                "ap_time_constant_s", "saturation_cap_hz"});
  s.n_gates = unum(j, "n_gates", s.n_gates);
  s.seed = unum(j, "seed", s.seed);
  s.block_size = static_cast<std::uint32_t>(unum(j, "block_size", s.block_size));
  s.illumination_period =
      static_cast<std::uint32_t>(unum(j, "illumination_period", s.illumination_period));
  s.mu_per_pulse = num(j, "mu_per_pulse", s.mu_per_pulse);
  s.ap_time_constant_s = num(j, "ap_time_constant_s", s.ap_time_constant_s);
  if (j.contains("saturation_cap_hz")) {
    const json& v = j.at("saturation_cap_hz");
    if (v.is_null())
      s.saturation_cap_hz.reset();
    else
      s.saturation_cap_hz = v.get<double>();
  }
}

DetectorOperatingPoint parse_operating_point(const json& j) {
  require_keys(j, "operating_points[].",
               {"temperature_c", "dark_count_prob", "afterpulse_prob", "efficiency",
                "gate_rate_hz", "jitter_s"});
  DetectorOperatingPoint op;
  op.temperature_c = num(j, "temperature_c", op.temperature_c);
  op.dark_count_prob = num(j, "dark_count_prob", op.dark_count_prob);
  op.afterpulse_prob = num(j, "afterpulse_prob", op.afterpulse_prob);
  op.efficiency = num(j, "efficiency", op.efficiency);
  op.gate_rate_hz = num(j, "gate_rate_hz", op.gate_rate_hz);
  op.jitter_s = num(j, "jitter_s", op.jitter_s);
  return op;
}

} // namespace

const char* deviation_policy_name(DeviationPolicy policy) {
  switch (policy) {
    case DeviationPolicy::session_pulses: return "session_pulses";
    case DeviationPolicy::per_sample: return "per_sample";
    case DeviationPolicy::none: return "none";
  }
  return "unknown";
}

DeviationPolicy deviation_policy_from_name(const std::string& name) {
  if (name == "session_pulses") return DeviationPolicy::session_pulses;
  if (name == "per_sample") return DeviationPolicy::per_sample;
  if (name == "none") return DeviationPolicy::none;
  throw ConfigError("deviation_policy must be session_pulses, per_sample or none");
}

void RunConfig::validate() const {
  try {
    protocol.validate();
    channel.validate();
    temperature_model.validate();
    sim.validate();
    DetectorOperatingPoint probe;
    probe.efficiency = detector.efficiency;
    probe.gate_rate_hz = detector.gate_rate_hz;
    probe.validate();
    for (const DetectorOperatingPoint& op : operating_points) op.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
}

RunConfig parse_config(const nlohmann::json& j) {
  RunConfig config;
  require_keys(j, "",
               {"protocol", "channel", "temperature_model", "detector", "sim",
                "operating_points"});
  if (j.contains("protocol")) parse_protocol(j.at("protocol"), config.protocol);
  if (j.contains("channel")) parse_channel(j.at("channel"), config.channel);
  if (j.contains("temperature_model"))
    parse_temperature_model(j.at("temperature_model"), config.temperature_model);
  if (j.contains("detector")) parse_detector(j.at("detector"), config.detector);
  if (j.contains("sim")) parse_sim(j.at("sim"), config.sim);
  if (j.contains("operating_points")) {
    const json& arr = j.at("operating_points");
    if (!arr.is_array()) throw ConfigError("operating_points must be an array");
    for (const json& item : arr)
      config.operating_points.push_back(parse_operating_point(item));
  }
  config.validate();
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse failure: " + std::string(e.what()));
  }
  return parse_config(j);
}

nlohmann::json effective_config_json(const RunConfig& config) {
  nlohmann::json j;
  j["protocol"] = {
      {"intensities", config.protocol.intensities},
      {"send_probs", config.protocol.send_probs},
      {"p_z", config.protocol.p_z},
      {"epsilon", config.protocol.epsilon},
      {"session_s", config.protocol.session_s},
      {"clock_hz", config.protocol.clock_hz},
      {"ec_efficiency_f", config.protocol.ec_efficiency_f},
      {"intrinsic_error_e_d", config.protocol.intrinsic_error_e_d},
      {"afterpulse_error_weight", config.protocol.afterpulse_error_weight},
      {"deviation_policy", deviation_policy_name(config.protocol.deviation_policy)},
  };
  j["channel"] = {
      {"length_km", config.channel.length_km},
      {"attenuation_db_per_km", config.channel.attenuation_db_per_km},
      {"extra_loss_db", config.channel.extra_loss_db},
  };
  j["temperature_model"] = {
      {"dark_ref", config.temperature_model.dark_ref},
      {"dark_gamma_per_k", config.temperature_model.dark_gamma},
      {"ref_temp_c", config.temperature_model.ref_temp_c},
      {"ap_intercept", config.temperature_model.ap_intercept},
      {"ap_slope_per_k", config.temperature_model.ap_slope},
      {"valid_min_c", config.temperature_model.valid_min_c},
      {"valid_max_c", config.temperature_model.valid_max_c},
  };
  j["detector"] = {
      {"efficiency", config.detector.efficiency},
      {"gate_rate_hz", config.detector.gate_rate_hz},
      {"jitter_s", config.detector.jitter_s},
  };
  j["sim"] = {
      {"n_gates", config.sim.n_gates},
      {"seed", config.sim.seed},
      {"block_size", config.sim.block_size},
      {"illumination_period", config.sim.illumination_period},
      {"mu_per_pulse", config.sim.mu_per_pulse},
      {"ap_time_constant_s", config.sim.ap_time_constant_s},
      {"saturation_cap_hz", config.sim.saturation_cap_hz
                                ? nlohmann::json(*config.sim.saturation_cap_hz)
                                : nlohmann::json(nullptr)},
  };
  j["operating_points"] = nlohmann::json::array();
  for (const DetectorOperatingPoint& op : config.operating_points)
    j["operating_points"].push_back({
        {"temperature_c", op.temperature_c},
        {"dark_count_prob", op.dark_count_prob},
        {"afterpulse_prob", op.afterpulse_prob},
        {"efficiency", op.efficiency},
        {"gate_rate_hz", op.gate_rate_hz},
        {"jitter_s", op.jitter_s},
    });
  return j;
}

} // namespace qkd
