#pragma once

// Mission description: environment, noise, beacon script and fleet. Stored
// as JSON; `mission1` and `mission6` ship as built-in presets.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "owtt/behaviors.hpp"
#include "owtt/filter.hpp"
#include "owtt/world.hpp"

namespace owtt::mission {

inline constexpr int kSchemaVersion = 1;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operator action on the beacon side. Used both for scripted events and
/// for commands arriving over the bridge, so both paths share one code path.
struct Command {
  enum class Type { SetMode, SetBeaconTarget, SetSource, Pause, Resume, SetTimeScale };
  Type type = Type::SetMode;
  /// Whole second at which the command takes effect; unset = next tick.
  std::optional<double> at_time;
  int mode = 0;
  double x = 0.0;
  double y = 0.0;
  std::optional<double> speed;
  std::string source;  // boat | lbl_east | lbl_west
  double time_scale = 1.0;
};

const char* to_string(Command::Type t);

struct VehicleConfig {
  std::string name;
  Eigen::Vector2d start = Eigen::Vector2d::Zero();
  double start_depth_m = 2.5;
  double start_heading_deg = 0.0;
  double speed_scale = 1.0;
  /// Unset: drawn from N(0, heading_bias_sigma_deg) per vehicle.
  std::optional<double> heading_bias_deg;
  double heading_noise_deg = 2.0;
  double heading_tau_s = 60.0;
  double clock_drift_rate = 1e-9;
  behaviors::ModeMap modes;
};

struct ReceiverConfig {
  double array_edge_m = 0.08;
  double azimuth_bias_amplitude_deg = 5.0;
  /// CSV bias table applied by the receiver; empty for none.
  std::string bias_table_path;
  double conical_resolution_deg = 0.25;
  double detection_threshold = ranging::kDefaultDetectionThreshold;
  std::size_t consistency_bound = ranging::kConsistencyBound;
};

struct MissionConfig {
  int schema_version = kSchemaVersion;
  std::string name = "custom";
  double duration_s = 600.0;
  std::uint64_t seed = 1;
  double sample_rate = ranging::kDefaultSampleRate;
  std::size_t n_samples = ranging::kDefaultCaptureSamples;
  world::EnvModel environment;
  world::ClockModel clock;
  world::BeaconState beacon;
  world::LblSetup lbl;
  filter::FilterConfig filter;
  ReceiverConfig receiver;
  world::VehicleLimits limits;
  behaviors::Cruise cruise;
  double heading_bias_sigma_deg = 2.0;
  std::vector<Command> script;
  /// When set, the beacon only follows commands from the bridge.
  bool external_control = false;
  std::vector<VehicleConfig> fleet;
  bool dump_ranges = false;

  /// Throws ConfigError on any inconsistency.
  void validate() const;
};

nlohmann::json to_json(const MissionConfig& config);
/// Throws ConfigError with the offending key on malformed input.
MissionConfig from_json(const nlohmann::json& j);
MissionConfig load_config(const std::string& path);

nlohmann::json command_to_json(const Command& c);
Command command_from_json(const nlohmann::json& j);

std::vector<std::string> preset_names();
/// Throws ConfigError for an unknown name.
MissionConfig preset(const std::string& name);

/// Preset name or path to a JSON file.
MissionConfig resolve_config(const std::string& name_or_path);

}  // namespace owtt::mission
