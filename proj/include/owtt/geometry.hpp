#pragma once

// Reference frames used by the navigation stack.
//
//   LLF  local-level frame, East-North-Up, fixed to the operating area.
//   VCF  vehicle-carried frame, East-North-Up axes centred on the vehicle.
//   BFF  body-fixed frame, x forward, y port, z up.
//
// Attitude yaw is measured in the ENU sense (0 = East, counter-clockwise).
// Vehicle sensors and behaviours speak compass headings (0 = North,
// clockwise); use compass_to_enu_yaw() at that boundary.

#include <Eigen/Dense>
#include <stdexcept>

namespace owtt::geometry {

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps to [0, 360).
double wrap_360(double deg);
/// Wraps to [-180, 180).
double wrap_180(double deg);

double compass_to_enu_yaw(double heading_deg);
double enu_yaw_to_compass(double yaw_deg);
/// Unit (east, north) vector for a compass heading.
Eigen::Vector2d compass_unit(double heading_deg);
/// Compass heading of an (east, north) vector, in [0, 360).
double compass_heading_of(const Eigen::Vector2d& v);

class FrameError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Roll, pitch and ENU yaw in degrees, held in canonical ranges:
/// roll and yaw in [-180, 180), pitch in [-90, 90].
class EulerAttitude {
 public:
  EulerAttitude() = default;
  EulerAttitude(double roll_deg, double pitch_deg, double yaw_deg);

  double roll_deg() const { return roll_; }
  double pitch_deg() const { return pitch_; }
  double yaw_deg() const { return yaw_; }

 private:
  double roll_ = 0.0;
  double pitch_ = 0.0;
  double yaw_ = 0.0;
};

enum class Frame { LLF, VCF, BFF };

const char* to_string(Frame f);

/// A position tagged with the frame it is expressed in. Arithmetic is only
/// defined between positions carrying the same tag.
class FramePosition {
 public:
  FramePosition(Frame frame, const Eigen::Vector3d& coords) : frame_(frame), coords_(coords) {}
  FramePosition(Frame frame, double x, double y, double z) : frame_(frame), coords_(x, y, z) {}

  Frame frame() const { return frame_; }
  const Eigen::Vector3d& coords() const { return coords_; }
  double x() const { return coords_.x(); }
  double y() const { return coords_.y(); }
  double z() const { return coords_.z(); }

  FramePosition operator+(const FramePosition& other) const;
  FramePosition operator-(const FramePosition& other) const;

 private:
  Frame frame_;
  Eigen::Vector3d coords_;
};

/// Range, inclination (from +z) and azimuth (from +x towards +y) in the BFF.
struct SphericalBFF {
  double range_m = 0.0;
  double inclination_deg = 0.0;
  double azimuth_deg = 0.0;
};

/// R = Rz(yaw) Ry(pitch) Rx(roll). Columns are the BFF axes expressed in the
/// VCF, so a VCF vector v has BFF coordinates R^T v.
Eigen::Matrix3d rotation_vcf_to_bff(const EulerAttitude& attitude);

Eigen::Vector3d vcf_to_bff(const Eigen::Vector3d& v, const EulerAttitude& attitude);
Eigen::Vector3d bff_to_vcf(const Eigen::Vector3d& v, const EulerAttitude& attitude);

FramePosition spherical_to_cartesian(const SphericalBFF& s);

/// Throws FrameError for a non-BFF input and std::domain_error at r == 0,
/// where the angles are undefined. Azimuth is returned in [0, 360).
SphericalBFF cartesian_to_spherical(const FramePosition& p);

/// Unit direction (towards the source) for an inclination/azimuth pair.
Eigen::Vector3d direction_vector(double inclination_deg, double azimuth_deg);

/// x_v^llf = x_b^llf - x_b^vcf
FramePosition auv_position_llf(const FramePosition& beacon_llf, const FramePosition& beacon_vcf_estimate);

/// Beacon pinned at the LLF x-y origin at its known depth.
FramePosition beacon_centric_llf(double beacon_depth_m);

}  // namespace owtt::geometry
