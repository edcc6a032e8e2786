#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "qkd/experiments.hpp"

#include <json.hpp>

namespace qkd {

inline constexpr const char* kToolName = "qkdsim";
inline constexpr const char* kToolVersion = "0.1.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Merged run configuration. Defaults are the full paper parameter set; a
/// config file only needs the fields it overrides. Unknown keys are rejected.
struct RunConfig {
  ProtocolConfig protocol;
  ChannelConfig channel;
  TemperatureModel temperature_model = default_temperature_model();
  DetectorBase detector;
  SimConfig sim;
  std::vector<DetectorOperatingPoint> operating_points;

  void validate() const;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const nlohmann::json& j);

/// Full effective-configuration echo embedded into every output artifact.
nlohmann::json effective_config_json(const RunConfig& config);

const char* deviation_policy_name(DeviationPolicy policy);
DeviationPolicy deviation_policy_from_name(const std::string& name);

} // namespace qkd
