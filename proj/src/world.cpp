#include "owtt/world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace owtt::world {
namespace {

using geometry::deg2rad;
using geometry::rad2deg;

}  // namespace

Rng make_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index)};
  return Rng(seq);
}

void EnvModel::validate() const {
  if (!(sound_speed > 0.0)) throw std::invalid_argument("sound speed must be positive");
  if (!(water_depth_m > 0.0)) throw std::invalid_argument("water depth must be positive");
  for (double r : {surface_reflection, bottom_reflection, wall_reflection}) {
    if (std::abs(r) > 1.0) throw std::invalid_argument("reflection coefficients must satisfy |r| <= 1");
  }
  if (noise_sigma < 0.0) throw std::invalid_argument("noise sigma must be non-negative");
  if (source_level < 0.0) throw std::invalid_argument("source level must be non-negative");
}

double AzimuthBiasModel::bias_at(double body_azimuth_deg) const {
  const double c2 = std::cos(2.0 * deg2rad(body_azimuth_deg));
  return amplitude_deg * c2 * (0.75 + 0.25 * c2);
}

void step_beacon(BeaconState& beacon, double dt) {
  const Eigen::Vector2d diff = beacon.target - beacon.position;
  const double dist = diff.norm();
  const double step = std::min(beacon.speed, beacon.max_speed) * dt;
  if (dist <= step || dist == 0.0) {
    beacon.position = beacon.target;
  } else {
    beacon.position += diff * (step / dist);
  }
}

double draw_jitter(const BeaconState& beacon, Rng& rng) {
  if (beacon.jitter_sigma_s <= 0.0) return 0.0;
  std::normal_distribution<double> n(0.0, beacon.jitter_sigma_s);
  for (;;) {
    const double j = n(rng);
    if (std::abs(j) < beacon.jitter_max_s) return j;
  }
}

double sog_from_rpm(double rpm, double pitch_deg) { return rpm * kRpmToSpeed * std::cos(deg2rad(pitch_deg)); }

double VehicleTruth::sog() const { return sog_from_rpm(rpm, pitch_deg); }

geometry::EulerAttitude VehicleTruth::attitude() const {
  return {roll_deg, pitch_deg, geometry::compass_to_enu_yaw(heading_deg)};
}

void step_vehicle(VehicleTruth& truth, const Setpoints& setpoints, double dt, const VehicleLimits& limits,
                  const EnvModel& env) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_vehicle needs dt > 0");
  const bool thrust = setpoints.thruster_active && setpoints.speed > 0.0;

  const double rpm_target = thrust ? setpoints.speed / kRpmToSpeed : 0.0;
  truth.rpm += (rpm_target - truth.rpm) * (1.0 - std::exp(-dt / limits.rpm_time_constant_s));
  const double through_water = truth.rpm * kRpmToSpeed;

  // Control surfaces need flow over them: turn and dive authority scale with speed.
  const double authority = std::clamp(through_water / 0.5, 0.0, 1.0);
  const double turn = geometry::wrap_180(setpoints.heading_deg - truth.heading_deg);
  const double max_turn = limits.max_turn_rate_dps * dt * authority;
  truth.heading_deg = geometry::wrap_360(truth.heading_deg + std::clamp(turn, -max_turn, max_turn));

  if (thrust) {
    const double want = std::clamp((setpoints.depth_m - truth.depth_m) / 2.0, -limits.max_depth_rate,
                                   limits.max_depth_rate);
    truth.depth_rate = want * authority + (1.0 - authority) * -limits.buoyant_ascent;
  } else {
    truth.depth_rate = -limits.buoyant_ascent;
  }
  truth.depth_m = std::max(0.0, truth.depth_m + truth.depth_rate * dt);
  if (truth.depth_m == 0.0) truth.depth_rate = 0.0;

  if (through_water > 1e-3) {
    truth.pitch_deg = std::clamp(rad2deg(std::atan2(truth.depth_rate, through_water)), -limits.max_pitch_deg,
                                 limits.max_pitch_deg);
  } else {
    truth.pitch_deg = 0.0;
  }

  const double speed = truth.sog() * truth.speed_scale;
  truth.position += (speed * geometry::compass_unit(truth.heading_deg) + env.current) * dt;
}

HeadingSensor::HeadingSensor(double bias_deg, double sigma_deg, double tau_s, Rng rng)
    : bias_(bias_deg), sigma_(sigma_deg), tau_(tau_s), rng_(std::move(rng)) {
  if (sigma_ < 0.0 || !(tau_ > 0.0)) throw std::invalid_argument("invalid heading sensor parameters");
  state_ = sigma_ * std::normal_distribution<double>(0.0, 1.0)(rng_);
}

double HeadingSensor::measure(double true_heading_deg, double dt) {
  const double a = std::exp(-dt / tau_);
  state_ = a * state_ + sigma_ * std::sqrt(1.0 - a * a) * std::normal_distribution<double>(0.0, 1.0)(rng_);
  return geometry::wrap_360(true_heading_deg + bias_ + state_);
}

std::vector<PathArrival> propagation_paths(const Eigen::Vector3d& source_llf, const Eigen::Vector3d& receiver_llf,
                                           const EnvModel& env) {
  std::vector<PathArrival> out;
  auto add = [&](const Eigen::Vector3d& image, double coefficient) {
    const Eigen::Vector3d d = image - receiver_llf;
    const double len = d.norm();
    if (len <= 0.0) return;
    out.push_back({len, env.source_level * coefficient / len, d / len});
  };
  add(source_llf, 1.0);
  if (env.surface_reflection != 0.0) add({source_llf.x(), source_llf.y(), -source_llf.z()}, env.surface_reflection);
  if (env.bottom_reflection != 0.0) {
    add({source_llf.x(), source_llf.y(), -2.0 * env.water_depth_m - source_llf.z()}, env.bottom_reflection);
  }
  if (env.wall_enabled && env.wall_reflection != 0.0 && source_llf.y() < env.wall_y_m &&
      receiver_llf.y() < env.wall_y_m) {
    add({source_llf.x(), 2.0 * env.wall_y_m - source_llf.y(), source_llf.z()}, env.wall_reflection);
  }
  return out;
}

ranging::ElementRecording synthesize_reception(const Eigen::Vector3d& source_llf, const waveforms::Waveform* waveform,
                                               double jitter_s, const VehicleTruth& vehicle, long second,
                                               const EnvModel& env, const ClockModel& clock,
                                               const ReceiverModel& receiver, Rng& rng, ReceptionTruth* truth) {
  const std::size_t n = receiver.n_samples;
  const double fs = receiver.sample_rate;
  ranging::ElementRecording rec;
  rec.sample_rate = fs;
  rec.trigger_epoch = static_cast<double>(second);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (auto& ch : rec.channels) {
    ch.resize(n);
    for (double& v : ch) v = env.noise_sigma * n01(rng);
  }

  const double t_second = static_cast<double>(second);
  const double trigger = t_second - clock.offset_at(t_second) + clock.trigger_jitter_s * n01(rng);
  const double transmit = t_second + jitter_s;
  const Eigen::Vector3d rx{vehicle.position.x(), vehicle.position.y(), -vehicle.depth_m};
  const Eigen::Matrix3d to_bff = geometry::rotation_vcf_to_bff(vehicle.attitude()).transpose();

  if (truth) {
    truth->transmit_time = transmit;
    truth->trigger_time = trigger;
    const Eigen::Vector3d d = source_llf - rx;
    truth->direct_range_m = d.norm();
    const Eigen::Vector3d b = to_bff * d;
    const auto sph = geometry::cartesian_to_spherical(geometry::FramePosition(geometry::Frame::BFF, b));
    truth->direct_bff = {sph.inclination_deg, sph.azimuth_deg};
  }
  if (!waveform) return rec;
  if (waveform->sample_rate() != fs) throw std::invalid_argument("waveform and receiver sample rates differ");

  const double duration = waveform->duration();
  for (const auto& path : propagation_paths(source_llf, rx, env)) {
    const Eigen::Vector3d b = to_bff * path.direction_llf;
    const double inc = rad2deg(std::acos(std::clamp(b.z(), -1.0, 1.0)));
    double az = geometry::wrap_360(rad2deg(std::atan2(b.y(), b.x())));
    az += receiver.azimuth_bias.bias_at(az);
    const auto tau = doa::plane_wave_delays(receiver.geometry, inc, az, env.sound_speed);
    const double arrival = transmit + path.length_m / env.sound_speed;
    for (std::size_t e = 0; e < ranging::kElements && e < tau.size(); ++e) {
      const double start = (arrival + tau[e] - trigger) * fs;
      const double first = std::max(0.0, std::ceil(start));
      const double last = std::min(static_cast<double>(n) - 1.0, std::floor(start + duration * fs));
      if (last < first) continue;
      auto& ch = rec.channels[e];
      for (auto k = static_cast<std::size_t>(first); k <= static_cast<std::size_t>(last); ++k) {
        ch[k] += path.amplitude * waveform->evaluate((static_cast<double>(k) - start) / fs);
      }
    }
  }
  return rec;
}

LblFix lbl_fix(double range_east_m, double range_west_m, const LblSetup& setup) {
  const Eigen::Vector2d base = setup.west - setup.east;
  const double d = base.norm();
  if (d <= 0.0) throw std::invalid_argument("LBL beacons coincide");
  LblFix fix;
  const double r1 = range_east_m;
  const double r2 = range_west_m;
  const double tol = 1e-9 * std::max({1.0, r1, r2, d});
  if (r1 < 0.0 || r2 < 0.0 || r1 + r2 < d - tol || std::abs(r1 - r2) > d + tol) return fix;
  const Eigen::Vector2d u = base / d;
  Eigen::Vector2d nrm{-u.y(), u.x()};
  if (nrm.y() > 0.0) nrm = -nrm;  // point south
  const double a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
  const double h2 = r1 * r1 - a * a;
  if (h2 <= 1e-6) {
    fix.status = LblStatus::Degenerate;
    fix.position = setup.east + a * u;
    return fix;
  }
  fix.status = LblStatus::Ok;
  fix.position = setup.east + a * u + std::sqrt(h2) * nrm;
  return fix;
}

std::vector<Eigen::Vector2d> dead_reckon(std::span<const DrStep> history, const Eigen::Vector2d& start) {
  std::vector<Eigen::Vector2d> out;
  out.reserve(history.size() + 1);
  Eigen::Vector2d p = start;
  out.push_back(p);
  for (const auto& s : history) {
    p += s.sog * s.dt * geometry::compass_unit(s.heading_deg);
    out.push_back(p);
  }
  return out;
}

}  // namespace owtt::world
