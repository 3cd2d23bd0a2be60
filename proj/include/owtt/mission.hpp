#pragma once

// Mission loop. Time advances in whole seconds: each tick applies due
// commands, synthesises one capture per vehicle, steps the 10 Hz dynamics
// over the following second, runs the filter and behaviors and emits one
// log record.

#include <deque>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "owtt/mission_config.hpp"

namespace owtt::mission {

inline constexpr int kLogSchemaVersion = 1;

/// Why a second produced no acoustic update.
enum class Cause { Ok, BeaconOff, Surfaced, NoDetection, Inconsistent, OutOfRange };
const char* to_string(Cause c);

enum class Source { Boat, LblEast, LblWest };
const char* to_string(Source s);

struct VehicleRecord {
  std::string name;
  Eigen::Vector2d truth = Eigen::Vector2d::Zero();
  double depth_m = 0.0;
  double heading_deg = 0.0;           // true compass heading
  double heading_measured_deg = 0.0;  // compass sensor
  Eigen::Vector2d est_rel = Eigen::Vector2d::Zero();  // beacon in the VCF
  Eigen::Vector2d est_abs = Eigen::Vector2d::Zero();  // source position - est_rel
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
  bool converged = false;
  bool valid = false;  // this second's reception updated the filter
  Cause cause = Cause::Ok;
  std::optional<int> mode;  // confirmed mode
  std::optional<double> mode_time;
  std::string behavior;
  world::Setpoints setpoints;
  Eigen::Vector2d dr = Eigen::Vector2d::Zero();
  std::optional<Eigen::Vector2d> lbl;
  std::optional<double> range_mle;
  double distance_m = 0.0;  // distance travelled through the water so far
};

struct BeaconRecord {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();  // towed beacon
  int mode = 0;
  Source source = Source::Boat;
  Eigen::Vector2d source_position = Eigen::Vector2d::Zero();
};

struct TickRecord {
  double t = 0.0;
  BeaconRecord beacon;
  /// Beacon-side commands applied at the start of this second.
  std::vector<Command> events;
  std::vector<VehicleRecord> vehicles;
};

nlohmann::json to_json(const TickRecord& r);
/// Throws ConfigError for a malformed record.
TickRecord tick_from_json(const nlohmann::json& j);

/// Thread-safe bounded queue of operator commands; the loop drains it at
/// tick boundaries.
class CommandQueue {
 public:
  explicit CommandQueue(std::size_t capacity = 256) : capacity_(capacity) {}
  /// False when full (the command is dropped).
  bool push(Command c);
  std::vector<Command> drain();

 private:
  std::size_t capacity_;
  std::mutex mutex_;
  std::deque<Command> items_;
};

class Mission {
 public:
  /// Throws ConfigError for an invalid config.
  explicit Mission(MissionConfig config);
  ~Mission();
  Mission(const Mission&) = delete;
  Mission& operator=(const Mission&) = delete;

  const MissionConfig& config() const;
  double time() const;
  bool finished() const;
  bool paused() const;
  double time_scale() const;

  /// Queued until its at_time (or the next tick when unset).
  void submit(const Command& c);
  /// Advances one second and returns the record stamped at the new time.
  TickRecord step();

  /// Writes each valid range distribution to <dir>/<vehicle>.owrd.
  void enable_range_dumps(const std::string& dir);

  nlohmann::json header() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct RunOptions {
  /// Directory for range dumps (one file per vehicle) when enabled.
  std::string dump_dir;
  /// Called after every tick, e.g. to publish snapshots.
  std::function<void(const TickRecord&, const Mission&)> on_tick;
  /// Polled before every tick for bridge commands.
  CommandQueue* commands = nullptr;
  /// Pace the loop against the wall clock (live operation).
  bool realtime = false;
};

struct RunSummary {
  std::size_t ticks = 0;
  double wall_seconds = 0.0;
};

/// Runs the mission to completion, writing the JSON-lines log to `log`.
RunSummary run_mission(const MissionConfig& config, std::ostream& log, const RunOptions& options = {});

/// Reads a JSON-lines log. Throws ConfigError for malformed input.
struct MissionLog {
  nlohmann::json header;
  std::vector<TickRecord> ticks;
};
MissionLog read_log(std::istream& in);
MissionLog read_log_file(const std::string& path);

}  // namespace owtt::mission
