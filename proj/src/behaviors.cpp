#include "owtt/behaviors.hpp"

#include <algorithm>
#include <cmath>

#include "owtt/geometry.hpp"

namespace owtt::behaviors {
namespace {

using geometry::compass_heading_of;
using geometry::compass_unit;

Eigen::Vector2d rotate(const Eigen::Vector2d& v, double angle_rad) {
  const double c = std::cos(angle_rad);
  const double s = std::sin(angle_rad);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

Setpoints toward(const Eigen::Vector2d& v, double current_heading_deg, const Cruise& cruise) {
  if (v.norm() < 1e-9) return drive(current_heading_deg, cruise);
  return drive(compass_heading_of(v), cruise);
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw BehaviorError(std::string(what) + " must be positive");
}

}  // namespace

void validate(const BehaviorSpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Loiter>) {
          require_positive(s.radius_m, "loiter radius");
        } else if constexpr (std::is_same_v<T, Trackline>) {
          require_positive(s.length_m, "trackline length");
          require_positive(s.buffer_m, "trackline buffer");
        } else if constexpr (std::is_same_v<T, OffsetFollow>) {
          require_positive(s.buffer_radius_m, "offset-follow buffer radius");
          if (s.depth_ceiling_m < 0.0) throw BehaviorError("depth ceiling must be non-negative");
        } else if constexpr (std::is_same_v<T, ReturnSurface>) {
          require_positive(s.length_m, "return line length");
        }
      },
      spec);
}

void validate(const ModeMap& map) {
  for (const auto& [mode, spec] : map) {
    if (mode < 1 || mode > 4) throw BehaviorError("mode id out of range 1..4: " + std::to_string(mode));
    validate(spec);
  }
}

std::string behavior_name(const BehaviorSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Loiter>) return "loiter";
        if constexpr (std::is_same_v<T, Trackline>) return "trackline";
        if constexpr (std::is_same_v<T, OffsetFollow>) return "offset_follow";
        if constexpr (std::is_same_v<T, ReturnSurface>) return "return_surface";
        return "abort";
      },
      spec);
}

Setpoints drive(double heading_deg, const Cruise& cruise) {
  return {geometry::wrap_360(heading_deg), cruise.speed, cruise.depth_m, true, false};
}

Setpoints thruster_off(double heading_deg, double depth_m) {
  return {geometry::wrap_360(heading_deg), 0.0, depth_m, false, false};
}

Setpoints loiter_setpoint(const Eigen::Vector2d& rel_beacon, const Loiter& spec, double current_heading_deg,
                          const Cruise& cruise) {
  const Eigen::Vector2d to_center = spec.offset + rel_beacon;
  const double rho = to_center.norm();
  const double sense = spec.direction == Turn::CCW ? 1.0 : -1.0;
  if (rho < 1e-6) return drive(current_heading_deg, cruise);
  const Eigen::Vector2d inward = to_center / rho;
  if (rho >= spec.radius_m) {
    // Aim at the tangent point on the side that joins the circle in the
    // commanded sense.
    const double alpha = std::asin(spec.radius_m / rho);
    return drive(compass_heading_of(rotate(inward, -sense * alpha)), cruise);
  }
  const Eigen::Vector2d outward = -inward;
  const Eigen::Vector2d tangent = rotate(outward, sense * geometry::kPi / 2.0);
  const Eigen::Vector2d v = tangent + ((spec.radius_m - rho) / cruise.loiter_correction_m) * outward;
  return drive(compass_heading_of(v), cruise);
}

TracklineGeometry trackline_geometry(const Trackline& spec) {
  const Eigen::Vector2d e = compass_unit(spec.heading_deg);
  return {spec.offset, spec.offset - 0.5 * spec.length_m * e, spec.offset + 0.5 * spec.length_m * e};
}

Setpoints trackline_setpoint(const Eigen::Vector2d& rel_beacon, const Trackline& spec, TracklineState& state,
                             const Cruise& cruise) {
  const Eigen::Vector2d p = -rel_beacon;
  const Eigen::Vector2d e = compass_unit(spec.heading_deg);
  const Eigen::Vector2d n{e.y(), -e.x()};
  const double along = (p - spec.offset).dot(e);
  const double cross = (p - spec.offset).dot(n);
  const double half = 0.5 * spec.length_m;

  if (state.sense == 0) state.sense = along > 0.0 ? -1 : 1;
  if (state.sense * along >= half) {
    state.sense = -state.sense;
    state.recentering = true;
  }
  if (std::abs(cross) > spec.buffer_m) state.recentering = true;
  if (state.recentering && std::abs(cross) < cruise.recenter_m) state.recentering = false;

  if (!state.recentering) return drive(compass_heading_of(state.sense * e), cruise);
  const Eigen::Vector2d aim = spec.offset + (along + state.sense * cruise.lookahead_m) * e;
  return drive(compass_heading_of(aim - p), cruise);
}

Setpoints offset_follow_setpoint(const Eigen::Vector2d& rel_beacon, double vehicle_depth_m, double current_heading_deg,
                                 const OffsetFollow& spec, OffsetFollowState& state, const Cruise& cruise) {
  const Eigen::Vector2d to_target = spec.offset + rel_beacon;
  const double d = to_target.norm();
  if (state.sprinting) {
    if (d < cruise.follow_arrive_m && vehicle_depth_m >= cruise.depth_m - 0.3) state.sprinting = false;
  } else if (d > spec.buffer_radius_m || vehicle_depth_m < spec.depth_ceiling_m) {
    state.sprinting = true;
  }
  if (!state.sprinting) return thruster_off(current_heading_deg, cruise.depth_m);
  return toward(to_target, current_heading_deg, cruise);
}

Eigen::Vector2d return_line_start(const ReturnSurface& spec) {
  return spec.offset - spec.length_m * compass_unit(spec.heading_deg);
}

Eigen::Vector2d nearest_point_on_segment(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return a;
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return a + t * ab;
}

Setpoints return_surface_setpoint(const Eigen::Vector2d& rel_beacon, double current_heading_deg,
                                  const ReturnSurface& spec, ReturnState& state, const Cruise& cruise) {
  const Eigen::Vector2d p = -rel_beacon;
  const Eigen::Vector2d end = spec.offset;
  if (state.finished || (end - p).norm() <= cruise.surface_radius_m) {
    state.finished = true;
    return abort_setpoint(current_heading_deg);
  }
  const Eigen::Vector2d start = return_line_start(spec);
  const Eigen::Vector2d e = compass_unit(spec.heading_deg);
  const Eigen::Vector2d foot = nearest_point_on_segment(p, start, end);
  const double along = (foot - start).dot(e);
  const Eigen::Vector2d aim = start + std::min(spec.length_m, along + cruise.lookahead_m) * e;
  return toward(aim - p, current_heading_deg, cruise);
}

Setpoints abort_setpoint(double current_heading_deg) {
  return {geometry::wrap_360(current_heading_deg), 0.0, 0.0, false, true};
}

Setpoints dispatch(const DispatchInput& input, const ModeMap& map, BehaviorMemory& memory, const Cruise& cruise) {
  if (!input.confirmed_mode) {
    memory.active_mode.reset();
    memory.last = thruster_off(input.heading_deg, input.depth_m);
    return memory.last;
  }
  const int mode = *input.confirmed_mode;
  const auto it = map.find(mode);
  if (it == map.end()) throw BehaviorError("no behavior for mode " + std::to_string(mode));
  if (memory.active_mode != mode) {
    memory.active_mode = mode;
    memory.trackline = {};
    memory.follow = {};
    memory.ret = {};
  }
  const BehaviorSpec& spec = it->second;
  if (std::holds_alternative<Abort>(spec)) return memory.last = abort_setpoint(input.heading_deg);
  if (memory.ret.finished) return memory.last = abort_setpoint(input.heading_deg);

  if (!input.estimate_valid) {
    if (!memory.ever_converged) {
      if (input.time_s <= cruise.deploy_hold_s) return memory.deploy;
      return thruster_off(input.heading_deg, cruise.depth_m);
    }
    if (input.time_s - memory.last_valid_time <= cruise.hold_s) return memory.last;
    return thruster_off(input.heading_deg, cruise.depth_m);
  }

  memory.ever_converged = true;
  memory.last_valid_time = input.time_s;
  const Eigen::Vector2d& rel = input.rel_beacon;
  memory.last = std::visit(
      [&](const auto& s) -> Setpoints {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Loiter>) return loiter_setpoint(rel, s, input.heading_deg, cruise);
        if constexpr (std::is_same_v<T, Trackline>) return trackline_setpoint(rel, s, memory.trackline, cruise);
        if constexpr (std::is_same_v<T, OffsetFollow>) {
          return offset_follow_setpoint(rel, input.depth_m, input.heading_deg, s, memory.follow, cruise);
        }
        if constexpr (std::is_same_v<T, ReturnSurface>) {
          return return_surface_setpoint(rel, input.heading_deg, s, memory.ret, cruise);
        }
        return abort_setpoint(input.heading_deg);
      },
      spec);
  return memory.last;
}

}  // namespace owtt::behaviors
