#pragma once

// Beacon-relative autonomy. Every behavior sees only its own vehicle's
// estimate of where the beacon is (x_b^vcf) and its own sensors; there is no
// inter-vehicle input anywhere, coordination comes from the per-vehicle
// parameters alone.

#include <Eigen/Core>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

#include "owtt/world.hpp"

namespace owtt::behaviors {

using world::Setpoints;

class BehaviorError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Turn { CW, CCW };

struct Loiter {
  Eigen::Vector2d offset = Eigen::Vector2d::Zero();
  double radius_m = 18.0;
  Turn direction = Turn::CCW;
};

struct Trackline {
  Eigen::Vector2d offset = Eigen::Vector2d::Zero();
  double heading_deg = 0.0;
  double length_m = 120.0;
  double buffer_m = 14.0;
};

struct OffsetFollow {
  Eigen::Vector2d offset = Eigen::Vector2d::Zero();
  double buffer_radius_m = 15.0;
  double depth_ceiling_m = 1.0;
};

struct ReturnSurface {
  Eigen::Vector2d offset = Eigen::Vector2d::Zero();
  double length_m = 150.0;
  double heading_deg = 0.0;
};

struct Abort {};

using BehaviorSpec = std::variant<Loiter, Trackline, OffsetFollow, ReturnSurface, Abort>;
using ModeMap = std::map<int, BehaviorSpec>;

/// Throws BehaviorError for non-positive radius, length or buffers.
void validate(const BehaviorSpec& spec);
/// Validates every entry and requires mode ids in 1..4.
void validate(const ModeMap& map);
std::string behavior_name(const BehaviorSpec& spec);

struct Cruise {
  double speed = 1.0;
  double depth_m = 2.5;
  double lookahead_m = 10.0;
  /// Distance over which the loiter radial correction reaches 45 degrees.
  double loiter_correction_m = 10.0;
  /// Offset-follow stops thrusting within this distance of the offset point.
  double follow_arrive_m = 7.5;
  /// Return line is complete within this distance of its end.
  double surface_radius_m = 2.0;
  /// Trackline recentering ends when the cross-track error falls below this.
  double recenter_m = 1.0;
  /// Unconverged estimate: previous setpoints held this long.
  double hold_s = 30.0;
  /// Before the first converged estimate the deploy setpoints are held this long.
  double deploy_hold_s = 120.0;
};

Setpoints drive(double heading_deg, const Cruise& cruise);
Setpoints thruster_off(double heading_deg, double depth_m);

/// `rel_beacon` is the beacon position in the VCF (x-y); the vehicle sits at
/// -rel_beacon in the beacon-centred frame.
Setpoints loiter_setpoint(const Eigen::Vector2d& rel_beacon, const Loiter& spec, double current_heading_deg,
                          const Cruise& cruise = {});

struct TracklineState {
  int sense = 0;  // +1 along heading, -1 against, 0 not started
  bool recentering = false;
};

struct TracklineGeometry {
  Eigen::Vector2d center;
  Eigen::Vector2d start;  // center - L/2 along heading
  Eigen::Vector2d end;    // center + L/2 along heading
};

TracklineGeometry trackline_geometry(const Trackline& spec);

Setpoints trackline_setpoint(const Eigen::Vector2d& rel_beacon, const Trackline& spec, TracklineState& state,
                             const Cruise& cruise = {});

struct OffsetFollowState {
  bool sprinting = true;
};

Setpoints offset_follow_setpoint(const Eigen::Vector2d& rel_beacon, double vehicle_depth_m, double current_heading_deg,
                                 const OffsetFollow& spec, OffsetFollowState& state, const Cruise& cruise = {});

struct ReturnState {
  bool finished = false;
};

/// Start of the return line; its end is the offset point.
Eigen::Vector2d return_line_start(const ReturnSurface& spec);

Eigen::Vector2d nearest_point_on_segment(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b);

Setpoints return_surface_setpoint(const Eigen::Vector2d& rel_beacon, double current_heading_deg,
                                  const ReturnSurface& spec, ReturnState& state, const Cruise& cruise = {});

Setpoints abort_setpoint(double current_heading_deg);

/// Per-vehicle behavior state carried between ticks.
struct BehaviorMemory {
  std::optional<int> active_mode;
  TracklineState trackline;
  OffsetFollowState follow;
  ReturnState ret;
  Setpoints last;
  Setpoints deploy;
  double last_valid_time = 0.0;
  bool ever_converged = false;
};

struct DispatchInput {
  std::optional<int> confirmed_mode;
  bool estimate_valid = false;
  Eigen::Vector2d rel_beacon = Eigen::Vector2d::Zero();
  double heading_deg = 0.0;  // measured compass heading
  double depth_m = 0.0;
  double time_s = 0.0;
};

/// Routes to the behavior of the confirmed mode. No confirmed mode gives
/// thruster off; an unconverged estimate holds the previous setpoints for
/// `hold_s` (or the deploy setpoints for `deploy_hold_s` before the first
/// convergence), then thruster off. Throws BehaviorError when the confirmed
/// mode is absent from the map.
Setpoints dispatch(const DispatchInput& input, const ModeMap& map, BehaviorMemory& memory, const Cruise& cruise = {});

}  // namespace owtt::behaviors
