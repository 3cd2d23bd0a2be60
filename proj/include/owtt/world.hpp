#pragma once

// Ground-truth simulator: vehicle and beacon kinematics, the acoustic channel
// down to raw array samples, clocks, LBL fixes and dead reckoning.

#include <Eigen/Core>
#include <cmath>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "owtt/doa.hpp"
#include "owtt/geometry.hpp"
#include "owtt/ranging.hpp"
#include "owtt/waveforms.hpp"

namespace owtt::world {

using Rng = std::mt19937_64;

/// Independent generator for (seed, stream, index), so adding a vehicle or
/// a noise source does not disturb the others.
Rng make_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

inline constexpr double kRpmToSpeed = 1.25e-3;  // m/s per RPM

struct EnvModel {
  double sound_speed = ranging::kDefaultSoundSpeed;
  double water_depth_m = 5.3;
  double surface_reflection = -0.9;
  double bottom_reflection = 0.0;
  bool wall_enabled = false;
  /// Vertical wall along y = wall_y_m (LLF), reflecting from the south.
  double wall_y_m = 10.0;
  double wall_reflection = 0.3;
  /// Received amplitude at 1 m; direct path amplitude is source_level / r.
  double source_level = 100.0;
  double noise_sigma = 1.0;
  /// Water current (east, north), m/s.
  Eigen::Vector2d current = Eigen::Vector2d::Zero();

  void validate() const;
};

struct ClockModel {
  double drift_rate = 1e-9;      // s/s
  double initial_offset_s = 0.0;
  double trigger_jitter_s = 80e-12;

  /// Receiver clock error at true time t.
  double offset_at(double t) const { return initial_offset_s + drift_rate * t; }
};

/// Receiver-side distortion of the arrival direction: the apparent
/// azimuth is true + amplitude * cos(2 az) * (0.75 + 0.25 cos(2 az)),
/// strongest fore and aft.
struct AzimuthBiasModel {
  double amplitude_deg = 0.0;
  double bias_at(double body_azimuth_deg) const;
};

/// One broadcast source (the towed beacon or a fixed transponder).
struct BeaconState {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  double depth_m = 1.0;
  int mode = 0;  // 0 = silent
  Eigen::Vector2d target = Eigen::Vector2d::Zero();
  double speed = 0.5;
  double max_speed = 1.5;
  /// Transmit-time jitter, Gaussian truncated at jitter_max_s.
  double jitter_sigma_s = 0.33e-3;
  double jitter_max_s = 1e-3;

  bool active() const { return mode >= 1 && mode <= 4; }
};

/// Moves toward the target at min(speed, max_speed).
void step_beacon(BeaconState& beacon, double dt);

/// Draw of the transmit jitter.
double draw_jitter(const BeaconState& beacon, Rng& rng);

struct Setpoints {
  double heading_deg = 0.0;  // compass
  double speed = 0.0;        // m/s
  double depth_m = 0.0;
  bool thruster_active = false;
  bool surfaced = false;
};

struct VehicleLimits {
  double max_turn_rate_dps = 10.0;
  double max_depth_rate = 0.3;
  double rpm_time_constant_s = 2.0;
  double buoyant_ascent = 0.03;
  double max_pitch_deg = 30.0;
  double surface_depth_m = 0.2;
};

struct VehicleTruth {
  std::string name;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();  // LLF east/north
  double depth_m = 2.5;
  double heading_deg = 0.0;  // compass
  double pitch_deg = 0.0;    // positive nose down
  double roll_deg = 0.0;
  double rpm = 0.0;
  double depth_rate = 0.0;
  /// Actual speed through water relative to the RPM map (1 = exact).
  double speed_scale = 1.0;

  double sog() const;
  bool surfaced(const VehicleLimits& limits) const { return depth_m <= limits.surface_depth_m; }
  /// ENU-yaw attitude for frame rotations.
  geometry::EulerAttitude attitude() const;
};

/// sog = RPM * 1.25e-3 * cos(pitch)
double sog_from_rpm(double rpm, double pitch_deg);

/// Slews heading, depth and RPM toward the setpoints and integrates
/// position, adding the water current. Throws std::invalid_argument for
/// dt <= 0.
void step_vehicle(VehicleTruth& truth, const Setpoints& setpoints, double dt, const VehicleLimits& limits,
                  const EnvModel& env);

/// Compass sensor: constant bias plus first-order Gauss-Markov noise.
class HeadingSensor {
 public:
  HeadingSensor(double bias_deg, double sigma_deg, double tau_s, Rng rng);
  /// Advances the noise by dt and returns the measured compass heading.
  double measure(double true_heading_deg, double dt);
  double bias_deg() const { return bias_; }

 private:
  double bias_;
  double sigma_;
  double tau_;
  double state_ = 0.0;
  Rng rng_;
};

/// Receiver array mounted on a vehicle.
struct ReceiverModel {
  doa::ArrayGeometry geometry = doa::ArrayGeometry::pyramid();
  std::size_t n_samples = ranging::kDefaultCaptureSamples;
  double sample_rate = ranging::kDefaultSampleRate;
  AzimuthBiasModel azimuth_bias;
};

struct PathArrival {
  double length_m = 0.0;
  double amplitude = 0.0;
  Eigen::Vector3d direction_llf = Eigen::Vector3d::Zero();  // unit, toward the (image) source
};

/// Direct path plus image sources for the surface, bottom and wall.
std::vector<PathArrival> propagation_paths(const Eigen::Vector3d& source_llf, const Eigen::Vector3d& receiver_llf,
                                           const EnvModel& env);

struct ReceptionTruth {
  double transmit_time = 0.0;  // true time
  double trigger_time = 0.0;   // true time the capture started
  double direct_range_m = 0.0;
  doa::Direction direct_bff{};
};

/// Synthesises the capture triggered at the receiver's whole second
/// `second` for a broadcast of `waveform` sent at second + jitter.
/// Signal outside the capture window is simply absent, so out-of-range
/// geometry yields a noise-only recording.
ranging::ElementRecording synthesize_reception(const Eigen::Vector3d& source_llf, const waveforms::Waveform* waveform,
                                               double jitter_s, const VehicleTruth& vehicle, long second,
                                               const EnvModel& env, const ClockModel& clock,
                                               const ReceiverModel& receiver, Rng& rng,
                                               ReceptionTruth* truth = nullptr);

struct LblSetup {
  Eigen::Vector2d east{17.05, 1.78};
  Eigen::Vector2d west{-60.56, -34.97};
  /// Per-range noise; 3.9 / sqrt(2) gives a 3.9 m fix scatter.
  double range_sigma_m = 3.9 / std::sqrt(2.0);

  double baseline() const { return (east - west).norm(); }
};

enum class LblStatus { Ok, Degenerate, NoFix };

struct LblFix {
  LblStatus status = LblStatus::NoFix;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
};

/// Circle intersection of horizontal ranges to the east and west beacons,
/// taking the solution south of the baseline. Tangent circles give a
/// Degenerate fix on the baseline; disjoint or nested circles give NoFix.
/// Throws std::invalid_argument for coincident beacons.
LblFix lbl_fix(double range_east_m, double range_west_m, const LblSetup& setup);

struct DrStep {
  double sog = 0.0;
  double heading_deg = 0.0;
  double dt = 0.0;
};

/// Integrates measured speed along measured heading.
std::vector<Eigen::Vector2d> dead_reckon(std::span<const DrStep> history, const Eigen::Vector2d& start);

}  // namespace owtt::world
