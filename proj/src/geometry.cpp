#include "owtt/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace owtt::geometry {

double wrap_360(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0.0) w += 360.0;
  if (w >= 360.0) w -= 360.0;
  return w;
}

double wrap_180(double deg) {
  double w = wrap_360(deg + 180.0) - 180.0;
  return w;
}

double compass_to_enu_yaw(double heading_deg) { return wrap_180(90.0 - heading_deg); }

double enu_yaw_to_compass(double yaw_deg) { return wrap_360(90.0 - yaw_deg); }

Eigen::Vector2d compass_unit(double heading_deg) {
  const double h = deg2rad(heading_deg);
  return {std::sin(h), std::cos(h)};
}

double compass_heading_of(const Eigen::Vector2d& v) {
  return wrap_360(rad2deg(std::atan2(v.x(), v.y())));
}

EulerAttitude::EulerAttitude(double roll_deg, double pitch_deg, double yaw_deg) {
  double pitch = wrap_180(pitch_deg);
  double roll = roll_deg;
  double yaw = yaw_deg;
  // Pitch beyond +-90 is the same orientation flipped through the pole.
  if (pitch > 90.0) {
    pitch = 180.0 - pitch;
    roll += 180.0;
    yaw += 180.0;
  } else if (pitch < -90.0) {
    pitch = -180.0 - pitch;
    roll += 180.0;
    yaw += 180.0;
  }
  roll_ = wrap_180(roll);
  pitch_ = pitch;
  yaw_ = wrap_180(yaw);
}

const char* to_string(Frame f) {
  switch (f) {
    case Frame::LLF: return "LLF";
    case Frame::VCF: return "VCF";
    case Frame::BFF: return "BFF";
  }
  return "?";
}

FramePosition FramePosition::operator+(const FramePosition& other) const {
  if (frame_ != other.frame_) {
    throw FrameError(std::string("cannot add ") + to_string(other.frame_) + " to " + to_string(frame_));
  }
  return {frame_, coords_ + other.coords_};
}

FramePosition FramePosition::operator-(const FramePosition& other) const {
  if (frame_ != other.frame_) {
    throw FrameError(std::string("cannot subtract ") + to_string(other.frame_) + " from " +
                     to_string(frame_));
  }
  return {frame_, coords_ - other.coords_};
}

Eigen::Matrix3d rotation_vcf_to_bff(const EulerAttitude& attitude) {
  const double a = deg2rad(attitude.yaw_deg());
  const double b = deg2rad(attitude.pitch_deg());
  const double g = deg2rad(attitude.roll_deg());
  Eigen::Matrix3d rz;
  rz << std::cos(a), -std::sin(a), 0.0,
        std::sin(a), std::cos(a), 0.0,
        0.0, 0.0, 1.0;
  Eigen::Matrix3d ry;
  ry << std::cos(b), 0.0, std::sin(b),
        0.0, 1.0, 0.0,
        -std::sin(b), 0.0, std::cos(b);
  Eigen::Matrix3d rx;
  rx << 1.0, 0.0, 0.0,
        0.0, std::cos(g), -std::sin(g),
        0.0, std::sin(g), std::cos(g);
  return rz * ry * rx;
}

Eigen::Vector3d vcf_to_bff(const Eigen::Vector3d& v, const EulerAttitude& attitude) {
  return rotation_vcf_to_bff(attitude).transpose() * v;
}

Eigen::Vector3d bff_to_vcf(const Eigen::Vector3d& v, const EulerAttitude& attitude) {
  return rotation_vcf_to_bff(attitude) * v;
}

Eigen::Vector3d direction_vector(double inclination_deg, double azimuth_deg) {
  const double th = deg2rad(inclination_deg);
  const double ph = deg2rad(azimuth_deg);
  return {std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
}

FramePosition spherical_to_cartesian(const SphericalBFF& s) {
  return {Frame::BFF, s.range_m * direction_vector(s.inclination_deg, s.azimuth_deg)};
}

SphericalBFF cartesian_to_spherical(const FramePosition& p) {
  if (p.frame() != Frame::BFF) {
    throw FrameError(std::string("spherical coordinates are defined in the BFF, got ") +
                     to_string(p.frame()));
  }
  const double r = p.coords().norm();
  if (r == 0.0) throw std::domain_error("angles undefined at zero range");
  SphericalBFF s;
  s.range_m = r;
  s.inclination_deg = rad2deg(std::acos(std::clamp(p.z() / r, -1.0, 1.0)));
  s.azimuth_deg = wrap_360(rad2deg(std::atan2(p.y(), p.x())));
  return s;
}

FramePosition auv_position_llf(const FramePosition& beacon_llf, const FramePosition& beacon_vcf_estimate) {
  if (beacon_llf.frame() != Frame::LLF || beacon_vcf_estimate.frame() != Frame::VCF) {
    throw FrameError("auv_position_llf expects an LLF beacon position and a VCF estimate");
  }
  return {Frame::LLF, beacon_llf.coords() - beacon_vcf_estimate.coords()};
}

FramePosition beacon_centric_llf(double beacon_depth_m) {
  if (beacon_depth_m < 0.0) throw std::invalid_argument("beacon depth must be non-negative");
  return {Frame::LLF, 0.0, 0.0, -beacon_depth_m};
}

}  // namespace owtt::geometry
