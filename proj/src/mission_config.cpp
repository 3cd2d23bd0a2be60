#include "owtt/mission_config.hpp"

#include <fstream>
#include <set>

namespace owtt::mission {
namespace {

using nlohmann::json;

json vec2(const Eigen::Vector2d& v) { return json::array({v.x(), v.y()}); }

Eigen::Vector2d read_vec2(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(key + ": expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

// Typed lookup with a default, reporting the full key path on type errors.
template <typename T>
T get_or(const json& obj, const std::string& path, const char* key, const T& fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + "." + key + ": wrong type");
  }
}

template <typename T>
T require(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) throw ConfigError(path + "." + key + ": missing");
  return get_or<T>(obj, path, key, T{});
}

const json& section(const json& j, const char* key) {
  static const json empty = json::object();
  if (!j.contains(key)) return empty;
  if (!j.at(key).is_object()) throw ConfigError(std::string(key) + ": expected an object");
  return j.at(key);
}

json behavior_to_json(const behaviors::BehaviorSpec& spec) {
  using namespace behaviors;
  json j;
  j["behavior"] = behavior_name(spec);
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (!std::is_same_v<T, Abort>) {
          j["offset_x_m"] = s.offset.x();
          j["offset_y_m"] = s.offset.y();
        }
        if constexpr (std::is_same_v<T, Loiter>) {
          j["radius_m"] = s.radius_m;
          j["direction"] = s.direction == Turn::CCW ? "ccw" : "cw";
        } else if constexpr (std::is_same_v<T, Trackline>) {
          j["heading_deg"] = s.heading_deg;
          j["length_m"] = s.length_m;
          j["buffer_m"] = s.buffer_m;
        } else if constexpr (std::is_same_v<T, OffsetFollow>) {
          j["buffer_radius_m"] = s.buffer_radius_m;
          j["depth_ceiling_m"] = s.depth_ceiling_m;
        } else if constexpr (std::is_same_v<T, ReturnSurface>) {
          j["length_m"] = s.length_m;
          j["heading_deg"] = s.heading_deg;
        }
      },
      spec);
  return j;
}

behaviors::BehaviorSpec behavior_from_json(const json& j, const std::string& path) {
  using namespace behaviors;
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  const auto kind = require<std::string>(j, path, "behavior");
  const Eigen::Vector2d offset{get_or(j, path, "offset_x_m", 0.0), get_or(j, path, "offset_y_m", 0.0)};
  if (kind == "loiter") {
    const auto dir = get_or<std::string>(j, path, "direction", "ccw");
    if (dir != "ccw" && dir != "cw") throw ConfigError(path + ".direction: expected ccw or cw");
    return Loiter{offset, require<double>(j, path, "radius_m"), dir == "ccw" ? Turn::CCW : Turn::CW};
  }
  if (kind == "trackline") {
    return Trackline{offset, require<double>(j, path, "heading_deg"), require<double>(j, path, "length_m"),
                     require<double>(j, path, "buffer_m")};
  }
  if (kind == "offset_follow") {
    return OffsetFollow{offset, require<double>(j, path, "buffer_radius_m"), require<double>(j, path, "depth_ceiling_m")};
  }
  if (kind == "return_surface") {
    return ReturnSurface{offset, require<double>(j, path, "length_m"), require<double>(j, path, "heading_deg")};
  }
  if (kind == "abort") return Abort{};
  throw ConfigError(path + ".behavior: unknown behavior '" + kind + "'");
}

behaviors::ModeMap table_modes(const behaviors::BehaviorSpec& m1, const behaviors::BehaviorSpec& m2,
                               const behaviors::BehaviorSpec& m3) {
  return {{1, m1}, {2, m2}, {3, m3}, {4, behaviors::Abort{}}};
}

Command at(double t, Command c) {
  c.at_time = t;
  return c;
}

Command set_mode(int mode) {
  Command c;
  c.type = Command::Type::SetMode;
  c.mode = mode;
  return c;
}

Command set_target(double x, double y, double speed) {
  Command c;
  c.type = Command::Type::SetBeaconTarget;
  c.x = x;
  c.y = y;
  c.speed = speed;
  return c;
}

Command set_source(const std::string& source) {
  Command c;
  c.type = Command::Type::SetSource;
  c.source = source;
  return c;
}

MissionConfig base_config() {
  MissionConfig c;
  c.environment.current = {0.03, -0.02};
  c.environment.wall_enabled = true;
  c.environment.wall_y_m = 10.0;
  c.environment.wall_reflection = 0.3;
  return c;
}

VehicleConfig vehicle(const std::string& name, Eigen::Vector2d start, double heading, double speed_scale,
                      double heading_bias, behaviors::ModeMap modes) {
  VehicleConfig v;
  v.name = name;
  v.start = start;
  v.start_heading_deg = heading;
  v.speed_scale = speed_scale;
  v.heading_bias_deg = heading_bias;
  v.modes = std::move(modes);
  return v;
}

// Beacon tracks follow the mission narratives; waypoints and timings are
// approximations of the described motion.
MissionConfig mission1() {
  using namespace behaviors;
  MissionConfig c = base_config();
  c.name = "mission1";
  c.duration_s = 3500.0;
  c.seed = 1;
  c.beacon.position = {110.0, -70.0};
  c.beacon.target = c.beacon.position;
  c.script = {
      at(0, set_mode(1)),
      at(300, set_target(-40.0, -150.0, 0.116)),
      at(1770, set_mode(2)),
      at(1800, set_target(60.0, -100.0, 0.2)),
      at(2600, set_target(100.0, -75.0, 0.2)),
      at(3150, set_source("lbl_east")),
      at(3150, set_mode(3)),
  };
  const ReturnSurface ret_p{{0.0, -5.0}, 150.0, 340.0};
  const ReturnSurface ret_q{{2.2, -2.2}, 150.0, 300.0};
  const ReturnSurface ret_w{{-2.2, 2.2}, 150.0, 20.0};
  c.fleet = {
      vehicle("Platypus", {110.0, -88.0}, 90.0, 1.03, 1.5,
              table_modes(Loiter{{0, 0}, 18.0, Turn::CCW}, Loiter{{7.5, -26.0}, 18.0, Turn::CCW}, ret_p)),
      vehicle("Quokka", {110.0, -106.0}, 90.0, 0.97, -2.0,
              table_modes(Loiter{{0, 0}, 36.0, Turn::CCW}, Loiter{{-7.5, 26.0}, 18.0, Turn::CCW}, ret_q)),
      vehicle("Wombat", {110.0, -118.0}, 90.0, 1.02, 2.5,
              table_modes(Loiter{{0, 0}, 48.0, Turn::CCW}, Loiter{{22.5, -78.0}, 18.0, Turn::CCW}, ret_w)),
  };
  return c;
}

MissionConfig mission6() {
  using namespace behaviors;
  MissionConfig c = base_config();
  c.name = "mission6";
  c.duration_s = 3360.0;
  c.seed = 6;
  c.beacon.position = {110.0, -70.0};
  c.beacon.target = c.beacon.position;
  c.script = {
      at(0, set_mode(1)),
      at(560, set_target(35.0, -100.0, 0.3)),
      at(1150, set_target(-40.0, -125.0, 0.3)),
      at(1970, set_mode(2)),
      at(2090, set_target(-40.0, -71.0, 0.5)),
      at(2350, set_target(0.0, -50.0, 0.5)),
      at(2600, set_target(25.0, -85.0, 0.5)),
      at(2850, set_target(-10.0, -105.0, 0.5)),
      at(3200, set_source("lbl_east")),
      at(3200, set_mode(3)),
  };
  const ReturnSurface ret_p{{0.0, -5.0}, 150.0, 340.0};
  const ReturnSurface ret_q{{2.2, -2.2}, 150.0, 300.0};
  const ReturnSurface ret_w{{-2.2, 2.2}, 150.0, 20.0};
  c.fleet = {
      vehicle("Platypus", {100.0, -80.0}, 160.0, 1.03, 1.5,
              table_modes(Trackline{{-14.1, -5.1}, 160.0, 120.0, 14.0}, OffsetFollow{{7.5, -26.0}, 15.0, 1.0}, ret_p)),
      vehicle("Quokka", {125.0, -70.0}, 160.0, 0.97, -2.0,
              table_modes(Trackline{{18.8, 6.8}, 160.0, 120.0, 14.0}, OffsetFollow{{-7.5, 26.0}, 15.0, 1.0}, ret_q)),
      vehicle("Wombat", {75.0, -85.0}, 160.0, 1.02, 2.5,
              table_modes(Trackline{{-37.6, -13.7}, 160.0, 120.0, 14.0}, OffsetFollow{{22.5, -78.0}, 15.0, 1.0},
                          ret_w)),
  };
  return c;
}

}  // namespace

const char* to_string(Command::Type t) {
  switch (t) {
    case Command::Type::SetMode: return "set_mode";
    case Command::Type::SetBeaconTarget: return "set_beacon_target";
    case Command::Type::SetSource: return "set_source";
    case Command::Type::Pause: return "pause";
    case Command::Type::Resume: return "resume";
    case Command::Type::SetTimeScale: return "set_time_scale";
  }
  return "unknown";
}

json command_to_json(const Command& c) {
  json j;
  j["command"] = to_string(c.type);
  if (c.at_time) j["at_time"] = *c.at_time;
  switch (c.type) {
    case Command::Type::SetMode: j["mode"] = c.mode; break;
    case Command::Type::SetBeaconTarget:
      j["x"] = c.x;
      j["y"] = c.y;
      if (c.speed) j["speed"] = *c.speed;
      break;
    case Command::Type::SetSource: j["source"] = c.source; break;
    case Command::Type::SetTimeScale: j["scale"] = c.time_scale; break;
    default: break;
  }
  return j;
}

Command command_from_json(const json& j) {
  const std::string path = "command";
  if (!j.is_object()) throw ConfigError("command: expected an object");
  const auto name = require<std::string>(j, path, "command");
  Command c;
  if (j.contains("at_time")) {
    const double t = get_or(j, path, "at_time", 0.0);
    if (t < 0.0) throw ConfigError("command.at_time: must be non-negative");
    c.at_time = t;
  }
  if (name == "set_mode") {
    c.type = Command::Type::SetMode;
    c.mode = require<int>(j, path, "mode");
    if (c.mode < 0 || c.mode > 4) throw ConfigError("command.mode: expected 0..4");
  } else if (name == "set_beacon_target") {
    c.type = Command::Type::SetBeaconTarget;
    c.x = require<double>(j, path, "x");
    c.y = require<double>(j, path, "y");
    if (j.contains("speed")) {
      c.speed = get_or(j, path, "speed", 0.0);
      if (!(*c.speed > 0.0)) throw ConfigError("command.speed: must be positive");
    }
  } else if (name == "set_source") {
    c.type = Command::Type::SetSource;
    c.source = require<std::string>(j, path, "source");
    if (c.source != "boat" && c.source != "lbl_east" && c.source != "lbl_west") {
      throw ConfigError("command.source: expected boat, lbl_east or lbl_west");
    }
  } else if (name == "pause") {
    c.type = Command::Type::Pause;
  } else if (name == "resume") {
    c.type = Command::Type::Resume;
  } else if (name == "set_time_scale") {
    c.type = Command::Type::SetTimeScale;
    c.time_scale = require<double>(j, path, "scale");
    if (!(c.time_scale > 0.0)) throw ConfigError("command.scale: must be positive");
  } else {
    throw ConfigError("command: unknown command '" + name + "'");
  }
  return c;
}

void MissionConfig::validate() const {
  if (schema_version != kSchemaVersion) {
    throw ConfigError("schema_version " + std::to_string(schema_version) + " is not supported");
  }
  if (duration_s < 0.0) throw ConfigError("duration_s must be non-negative");
  if (!(sample_rate > 0.0) || n_samples == 0) throw ConfigError("sample_rate and n_samples must be positive");
  try {
    environment.validate();
    filter.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(receiver.conical_resolution_deg > 0.0)) throw ConfigError("receiver.conical_resolution_deg must be positive");
  if (!(receiver.detection_threshold > 0.0)) throw ConfigError("receiver.detection_threshold must be positive");
  if (!(receiver.array_edge_m > 0.0)) throw ConfigError("receiver.array_edge_m must be positive");
  if ((lbl.east - lbl.west).norm() <= 0.0) throw ConfigError("lbl beacons coincide");
  if (fleet.empty()) throw ConfigError("fleet is empty");
  std::set<std::string> names;
  std::set<int> used_modes;
  for (const auto& cmd : script) {
    if (!cmd.at_time) throw ConfigError("script entries need a time");
    if (cmd.type == Command::Type::SetMode && cmd.mode > 0) used_modes.insert(cmd.mode);
  }
  for (const auto& v : fleet) {
    if (v.name.empty() || !names.insert(v.name).second) throw ConfigError("vehicle names must be unique and non-empty");
    if (v.start_depth_m < 0.0) throw ConfigError(v.name + ": start depth must be non-negative");
    try {
      behaviors::validate(v.modes);
    } catch (const behaviors::BehaviorError& e) {
      throw ConfigError(v.name + ": " + e.what());
    }
    for (int m : used_modes) {
      if (!v.modes.count(m)) throw ConfigError(v.name + ": mode " + std::to_string(m) + " is scripted but not defined");
    }
  }
}

json to_json(const MissionConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["name"] = c.name;
  j["duration_s"] = c.duration_s;
  j["seed"] = c.seed;
  j["sample_rate"] = c.sample_rate;
  j["n_samples"] = c.n_samples;
  const auto& e = c.environment;
  j["environment"] = {{"sound_speed", e.sound_speed},
                      {"water_depth_m", e.water_depth_m},
                      {"surface_reflection", e.surface_reflection},
                      {"bottom_reflection", e.bottom_reflection},
                      {"wall", {{"enabled", e.wall_enabled}, {"y_m", e.wall_y_m}, {"reflection", e.wall_reflection}}},
                      {"source_level", e.source_level},
                      {"noise_sigma", e.noise_sigma},
                      {"current", vec2(e.current)}};
  j["clock"] = {{"drift_rate", c.clock.drift_rate}, {"trigger_jitter_s", c.clock.trigger_jitter_s}};
  const auto& b = c.beacon;
  j["beacon"] = {{"start", vec2(b.position)},     {"depth_m", b.depth_m},
                 {"speed", b.speed},              {"max_speed", b.max_speed},
                 {"jitter_sigma_s", b.jitter_sigma_s}, {"jitter_max_s", b.jitter_max_s}};
  j["lbl"] = {{"east", vec2(c.lbl.east)}, {"west", vec2(c.lbl.west)}, {"range_sigma_m", c.lbl.range_sigma_m}};
  const auto& f = c.filter;
  j["filter"] = {{"n_particles", f.n_particles},     {"sigma_sog", f.sigma_sog},
                 {"sigma_heading_deg", f.sigma_heading_deg}, {"sigma_beacon_m", f.sigma_beacon_m},
                 {"reinit_count", f.reinit_count},   {"converged_sigma_m", f.converged_sigma_m}};
  const auto& r = c.receiver;
  j["receiver"] = {{"array_edge_m", r.array_edge_m},
                   {"azimuth_bias_amplitude_deg", r.azimuth_bias_amplitude_deg},
                   {"bias_table", r.bias_table_path},
                   {"conical_resolution_deg", r.conical_resolution_deg},
                   {"detection_threshold", r.detection_threshold},
                   {"consistency_bound", r.consistency_bound}};
  const auto& l = c.limits;
  j["vehicle_limits"] = {{"max_turn_rate_dps", l.max_turn_rate_dps},   {"max_depth_rate", l.max_depth_rate},
                         {"rpm_time_constant_s", l.rpm_time_constant_s}, {"buoyant_ascent", l.buoyant_ascent},
                         {"max_pitch_deg", l.max_pitch_deg},           {"surface_depth_m", l.surface_depth_m}};
  const auto& k = c.cruise;
  j["cruise"] = {{"speed", k.speed},
                 {"depth_m", k.depth_m},
                 {"lookahead_m", k.lookahead_m},
                 {"loiter_correction_m", k.loiter_correction_m},
                 {"follow_arrive_m", k.follow_arrive_m},
                 {"surface_radius_m", k.surface_radius_m},
                 {"recenter_m", k.recenter_m},
                 {"hold_s", k.hold_s},
                 {"deploy_hold_s", k.deploy_hold_s}};
  j["heading_bias_sigma_deg"] = c.heading_bias_sigma_deg;
  j["external_control"] = c.external_control;
  j["dump_ranges"] = c.dump_ranges;
  j["script"] = json::array();
  for (const auto& cmd : c.script) j["script"].push_back(command_to_json(cmd));
  j["fleet"] = json::array();
  for (const auto& v : c.fleet) {
    json jv = {{"name", v.name},
               {"start", vec2(v.start)},
               {"depth_m", v.start_depth_m},
               {"heading_deg", v.start_heading_deg},
               {"speed_scale", v.speed_scale},
               {"heading_noise_deg", v.heading_noise_deg},
               {"heading_tau_s", v.heading_tau_s},
               {"clock_drift_rate", v.clock_drift_rate}};
    if (v.heading_bias_deg) jv["heading_bias_deg"] = *v.heading_bias_deg;
    jv["modes"] = json::object();
    for (const auto& [mode, spec] : v.modes) jv["modes"][std::to_string(mode)] = behavior_to_json(spec);
    j["fleet"].push_back(jv);
  }
  return j;
}

MissionConfig from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  MissionConfig c;
  const std::string root = "config";
  c.schema_version = require<int>(j, root, "schema_version");
  c.name = get_or<std::string>(j, root, "name", c.name);
  c.duration_s = get_or(j, root, "duration_s", c.duration_s);
  c.seed = get_or<std::uint64_t>(j, root, "seed", c.seed);
  c.sample_rate = get_or(j, root, "sample_rate", c.sample_rate);
  c.n_samples = get_or<std::size_t>(j, root, "n_samples", c.n_samples);

  const auto& je = section(j, "environment");
  auto& e = c.environment;
  e.sound_speed = get_or(je, "environment", "sound_speed", e.sound_speed);
  e.water_depth_m = get_or(je, "environment", "water_depth_m", e.water_depth_m);
  e.surface_reflection = get_or(je, "environment", "surface_reflection", e.surface_reflection);
  e.bottom_reflection = get_or(je, "environment", "bottom_reflection", e.bottom_reflection);
  const auto& jw = section(je, "wall");
  e.wall_enabled = get_or(jw, "environment.wall", "enabled", e.wall_enabled);
  e.wall_y_m = get_or(jw, "environment.wall", "y_m", e.wall_y_m);
  e.wall_reflection = get_or(jw, "environment.wall", "reflection", e.wall_reflection);
  e.source_level = get_or(je, "environment", "source_level", e.source_level);
  e.noise_sigma = get_or(je, "environment", "noise_sigma", e.noise_sigma);
  if (je.contains("current")) e.current = read_vec2(je.at("current"), "environment.current");

  const auto& jc = section(j, "clock");
  c.clock.drift_rate = get_or(jc, "clock", "drift_rate", c.clock.drift_rate);
  c.clock.trigger_jitter_s = get_or(jc, "clock", "trigger_jitter_s", c.clock.trigger_jitter_s);

  const auto& jb = section(j, "beacon");
  auto& b = c.beacon;
  if (jb.contains("start")) b.position = read_vec2(jb.at("start"), "beacon.start");
  b.target = b.position;
  b.depth_m = get_or(jb, "beacon", "depth_m", b.depth_m);
  b.speed = get_or(jb, "beacon", "speed", b.speed);
  b.max_speed = get_or(jb, "beacon", "max_speed", b.max_speed);
  b.jitter_sigma_s = get_or(jb, "beacon", "jitter_sigma_s", b.jitter_sigma_s);
  b.jitter_max_s = get_or(jb, "beacon", "jitter_max_s", b.jitter_max_s);

  const auto& jl = section(j, "lbl");
  if (jl.contains("east")) c.lbl.east = read_vec2(jl.at("east"), "lbl.east");
  if (jl.contains("west")) c.lbl.west = read_vec2(jl.at("west"), "lbl.west");
  c.lbl.range_sigma_m = get_or(jl, "lbl", "range_sigma_m", c.lbl.range_sigma_m);

  const auto& jf = section(j, "filter");
  auto& f = c.filter;
  f.n_particles = get_or<std::size_t>(jf, "filter", "n_particles", f.n_particles);
  f.sigma_sog = get_or(jf, "filter", "sigma_sog", f.sigma_sog);
  f.sigma_heading_deg = get_or(jf, "filter", "sigma_heading_deg", f.sigma_heading_deg);
  f.sigma_beacon_m = get_or(jf, "filter", "sigma_beacon_m", f.sigma_beacon_m);
  f.reinit_count = get_or<std::size_t>(jf, "filter", "reinit_count", f.reinit_count);
  f.converged_sigma_m = get_or(jf, "filter", "converged_sigma_m", f.converged_sigma_m);
  f.beacon_depth_m = b.depth_m;
  f.max_range_m = static_cast<double>(c.n_samples) * e.sound_speed / c.sample_rate;

  const auto& jr = section(j, "receiver");
  auto& r = c.receiver;
  r.array_edge_m = get_or(jr, "receiver", "array_edge_m", r.array_edge_m);
  r.azimuth_bias_amplitude_deg = get_or(jr, "receiver", "azimuth_bias_amplitude_deg", r.azimuth_bias_amplitude_deg);
  r.bias_table_path = get_or<std::string>(jr, "receiver", "bias_table", r.bias_table_path);
  r.conical_resolution_deg = get_or(jr, "receiver", "conical_resolution_deg", r.conical_resolution_deg);
  r.detection_threshold = get_or(jr, "receiver", "detection_threshold", r.detection_threshold);
  r.consistency_bound = get_or<std::size_t>(jr, "receiver", "consistency_bound", r.consistency_bound);

  const auto& jv = section(j, "vehicle_limits");
  auto& l = c.limits;
  l.max_turn_rate_dps = get_or(jv, "vehicle_limits", "max_turn_rate_dps", l.max_turn_rate_dps);
  l.max_depth_rate = get_or(jv, "vehicle_limits", "max_depth_rate", l.max_depth_rate);
  l.rpm_time_constant_s = get_or(jv, "vehicle_limits", "rpm_time_constant_s", l.rpm_time_constant_s);
  l.buoyant_ascent = get_or(jv, "vehicle_limits", "buoyant_ascent", l.buoyant_ascent);
  l.max_pitch_deg = get_or(jv, "vehicle_limits", "max_pitch_deg", l.max_pitch_deg);
  l.surface_depth_m = get_or(jv, "vehicle_limits", "surface_depth_m", l.surface_depth_m);

  const auto& jk = section(j, "cruise");
  auto& k = c.cruise;
  k.speed = get_or(jk, "cruise", "speed", k.speed);
  k.depth_m = get_or(jk, "cruise", "depth_m", k.depth_m);
  k.lookahead_m = get_or(jk, "cruise", "lookahead_m", k.lookahead_m);
  k.loiter_correction_m = get_or(jk, "cruise", "loiter_correction_m", k.loiter_correction_m);
  k.follow_arrive_m = get_or(jk, "cruise", "follow_arrive_m", k.follow_arrive_m);
  k.surface_radius_m = get_or(jk, "cruise", "surface_radius_m", k.surface_radius_m);
  k.recenter_m = get_or(jk, "cruise", "recenter_m", k.recenter_m);
  k.hold_s = get_or(jk, "cruise", "hold_s", k.hold_s);
  k.deploy_hold_s = get_or(jk, "cruise", "deploy_hold_s", k.deploy_hold_s);

  c.heading_bias_sigma_deg = get_or(j, root, "heading_bias_sigma_deg", c.heading_bias_sigma_deg);
  c.external_control = get_or(j, root, "external_control", c.external_control);
  c.dump_ranges = get_or(j, root, "dump_ranges", c.dump_ranges);

  if (j.contains("script")) {
    if (!j.at("script").is_array()) throw ConfigError("script: expected an array");
    for (const auto& jc2 : j.at("script")) c.script.push_back(command_from_json(jc2));
  }
  if (!j.contains("fleet") || !j.at("fleet").is_array()) throw ConfigError("fleet: expected an array");
  for (std::size_t i = 0; i < j.at("fleet").size(); ++i) {
    const auto& jv2 = j.at("fleet")[i];
    const std::string path = "fleet[" + std::to_string(i) + "]";
    if (!jv2.is_object()) throw ConfigError(path + ": expected an object");
    VehicleConfig v;
    v.name = require<std::string>(jv2, path, "name");
    if (jv2.contains("start")) v.start = read_vec2(jv2.at("start"), path + ".start");
    v.start_depth_m = get_or(jv2, path, "depth_m", v.start_depth_m);
    v.start_heading_deg = get_or(jv2, path, "heading_deg", v.start_heading_deg);
    v.speed_scale = get_or(jv2, path, "speed_scale", v.speed_scale);
    if (jv2.contains("heading_bias_deg")) v.heading_bias_deg = get_or(jv2, path, "heading_bias_deg", 0.0);
    v.heading_noise_deg = get_or(jv2, path, "heading_noise_deg", v.heading_noise_deg);
    v.heading_tau_s = get_or(jv2, path, "heading_tau_s", v.heading_tau_s);
    v.clock_drift_rate = get_or(jv2, path, "clock_drift_rate", v.clock_drift_rate);
    if (!jv2.contains("modes") || !jv2.at("modes").is_object()) throw ConfigError(path + ".modes: expected an object");
    for (const auto& [key, spec] : jv2.at("modes").items()) {
      int mode = 0;
      try {
        mode = std::stoi(key);
      } catch (const std::exception&) {
        throw ConfigError(path + ".modes: key '" + key + "' is not a mode number");
      }
      v.modes.emplace(mode, behavior_from_json(spec, path + ".modes." + key));
    }
    c.fleet.push_back(std::move(v));
  }
  c.validate();
  return c;
}

MissionConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return from_json(j);
}

std::vector<std::string> preset_names() { return {"mission1", "mission6"}; }

MissionConfig preset(const std::string& name) {
  MissionConfig c;
  if (name == "mission1") {
    c = mission1();
  } else if (name == "mission6") {
    c = mission6();
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  c.validate();
  return c;
}

MissionConfig resolve_config(const std::string& name_or_path) {
  for (const auto& p : preset_names()) {
    if (p == name_or_path) return preset(p);
  }
  return load_config(name_or_path);
}

}  // namespace owtt::mission
