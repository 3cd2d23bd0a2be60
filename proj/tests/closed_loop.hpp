#pragma once

// Noiseless closed loop for behavior checks: the vehicle sees the true
// beacon offset, decides once per second and moves at 10 Hz.

#include <functional>
#include <vector>

#include "owtt/behaviors.hpp"
#include "owtt/world.hpp"

namespace closed_loop {

struct Sample {
  double t = 0.0;
  Eigen::Vector2d position;
  double depth_m = 0.0;
  owtt::world::Setpoints setpoints;
};

struct Loop {
  owtt::world::VehicleTruth vehicle;
  Eigen::Vector2d beacon = Eigen::Vector2d::Zero();
  owtt::world::VehicleLimits limits;
  owtt::world::EnvModel env = [] {
    owtt::world::EnvModel e;
    e.current = Eigen::Vector2d::Zero();
    return e;
  }();
  owtt::behaviors::Cruise cruise;
  double t = 0.0;

  /// Runs `seconds` with `decide(rel_beacon, vehicle)` called at each whole
  /// second; returns one sample per second.
  std::vector<Sample> run(double seconds,
                          const std::function<owtt::world::Setpoints(const Eigen::Vector2d&,
                                                                     const owtt::world::VehicleTruth&)>& decide) {
    std::vector<Sample> out;
    const int n = static_cast<int>(seconds);
    for (int s = 0; s < n; ++s) {
      const Eigen::Vector2d rel = beacon - vehicle.position;
      const auto sp = decide(rel, vehicle);
      for (int k = 0; k < 10; ++k) owtt::world::step_vehicle(vehicle, sp, 0.1, limits, env);
      t += 1.0;
      out.push_back({t, vehicle.position, vehicle.depth_m, sp});
    }
    return out;
  }
};

}  // namespace closed_loop
