#include "doctest.h"

#include <cmath>

#include "closed_loop.hpp"
#include "owtt/behaviors.hpp"
#include "owtt/geometry.hpp"

using namespace owtt::behaviors;
using owtt::geometry::compass_heading_of;
using owtt::geometry::wrap_180;

namespace {

double heading_error(double a, double b) { return std::abs(wrap_180(a - b)); }

owtt::world::VehicleTruth vehicle_at(const Eigen::Vector2d& p, double heading, double depth = 2.5) {
  owtt::world::VehicleTruth v;
  v.position = p;
  v.heading_deg = heading;
  v.depth_m = depth;
  return v;
}

}  // namespace

TEST_CASE("loiter on the circle follows the tangent") {
  const Loiter spec{{0, 0}, 18.0, Turn::CCW};
  // Vehicle 18 m east of the beacon: counter-clockwise tangent points north.
  auto sp = loiter_setpoint({-18.0, 0.0}, spec, 200.0);
  CHECK(heading_error(sp.heading_deg, 0.0) < 1e-9);
  CHECK(sp.thruster_active);
  CHECK(sp.speed == 1.0);
  CHECK(sp.depth_m == 2.5);
  sp = loiter_setpoint({-18.0, 0.0}, Loiter{{0, 0}, 18.0, Turn::CW}, 200.0);
  CHECK(heading_error(sp.heading_deg, 180.0) < 1e-9);
}

TEST_CASE("loiter at the centre keeps the current heading") {
  const auto sp = loiter_setpoint({-5.0, 3.0}, Loiter{{5.0, -3.0}, 18.0, Turn::CCW}, 123.0);
  CHECK(sp.heading_deg == doctest::Approx(123.0));
}

TEST_CASE("loiter far outside heads for the joining tangent point") {
  const Loiter spec{{10, -20}, 36.0, Turn::CCW};
  for (const Eigen::Vector2d p : {Eigen::Vector2d(150, -20), Eigen::Vector2d(-80, 60), Eigen::Vector2d(10, -170)}) {
    const Eigen::Vector2d c = spec.offset;
    const Eigen::Vector2d d = c - p;
    const double rho = d.norm();
    const double half = std::asin(spec.radius_m / rho);
    // Both tangent points; keep the one where travel matches the CCW tangent.
    double best = 0.0;
    for (double s : {-1.0, 1.0}) {
      const double ang = std::atan2(d.y(), d.x()) + s * half;
      const double len = std::sqrt(rho * rho - spec.radius_m * spec.radius_m);
      const Eigen::Vector2d q = p + len * Eigen::Vector2d(std::cos(ang), std::sin(ang));
      const Eigen::Vector2d radial = (q - c).normalized();
      const Eigen::Vector2d ccw{-radial.y(), radial.x()};
      if ((q - p).normalized().dot(ccw) > 0.0) best = compass_heading_of(q - p);
    }
    const auto sp = loiter_setpoint(-p, spec, 0.0);
    CHECK(heading_error(sp.heading_deg, best) < 5.0);
  }
}

TEST_CASE("trackline geometry from the preset parameters") {
  const Trackline spec{{-14.1, -5.1}, 160.0, 120.0, 14.0};
  const auto g = trackline_geometry(spec);
  const Eigen::Vector2d e = owtt::geometry::compass_unit(160.0);
  CHECK((g.start - (spec.offset - 60.0 * e)).norm() < 1e-12);
  CHECK((g.end - (spec.offset + 60.0 * e)).norm() < 1e-12);
  CHECK((g.end - g.start).norm() == doctest::Approx(120.0));
}

TEST_CASE("trackline on the line follows the line") {
  const Trackline spec{{0, 0}, 160.0, 120.0, 14.0};
  TracklineState st;
  const Eigen::Vector2d e = owtt::geometry::compass_unit(160.0);
  // Nearer the start, so the first leg runs along the heading.
  const Eigen::Vector2d p = -20.0 * e;
  auto sp = trackline_setpoint(-p, spec, st);
  CHECK(heading_error(sp.heading_deg, 160.0) < 1e-9);
  CHECK(st.sense == 1);
  // Past the end the sense flips.
  sp = trackline_setpoint(-(61.0 * e), spec, st);
  CHECK(st.sense == -1);
  CHECK(std::cos(owtt::geometry::deg2rad(sp.heading_deg - 340.0)) > 0.5);
}

TEST_CASE("trackline recentres from outside the buffer") {
  const Trackline spec{{0, 0}, 90.0, 120.0, 14.0};  // east-west line through the beacon
  closed_loop::Loop loop;
  loop.vehicle = vehicle_at({-40.0, 20.0}, 90.0);
  TracklineState st;
  const auto sp0 = trackline_setpoint(loop.beacon - loop.vehicle.position, spec, st);
  CHECK(sp0.heading_deg > 90.0);  // turned toward the line (south of east)
  CHECK(sp0.heading_deg < 180.0);
  const auto trace = loop.run(60, [&](const Eigen::Vector2d& rel, const auto&) {
    return trackline_setpoint(rel, spec, st);
  });
  double prev = 20.0;
  bool monotone = true;
  for (const auto& s : trace) {
    const double cross = std::abs(s.position.y());
    if (prev > 1.0 && cross > prev + 1e-9) monotone = false;
    prev = cross;
  }
  CHECK(monotone);
  CHECK(std::abs(trace.back().position.y()) < 1.0);
}

TEST_CASE("offset follow sprint and drift") {
  const OffsetFollow spec{{7.5, -26.0}, 15.0, 1.0};
  OffsetFollowState st;
  // At the offset point, at depth.
  auto sp = offset_follow_setpoint(-spec.offset, 2.5, 0.0, spec, st);
  CHECK_FALSE(sp.thruster_active);
  CHECK_FALSE(st.sprinting);
  // Floated above the ceiling.
  sp = offset_follow_setpoint(-spec.offset, 0.8, 0.0, spec, st);
  CHECK(sp.thruster_active);
  CHECK(sp.depth_m == 2.5);
  // Back on station at depth, then the beacon jumps 54 m north.
  sp = offset_follow_setpoint(-spec.offset, 2.5, 0.0, spec, st);
  CHECK_FALSE(sp.thruster_active);
  sp = offset_follow_setpoint(-spec.offset + Eigen::Vector2d(0.0, 54.0), 2.5, 0.0, spec, st);
  CHECK(sp.thruster_active);
  CHECK(heading_error(sp.heading_deg, 0.0) < 1e-9);
}

TEST_CASE("return line entry and surfacing") {
  const ReturnSurface spec{{2.2, -2.2}, 150.0, 300.0};
  const Eigen::Vector2d start = return_line_start(spec);
  CHECK((spec.offset - start).norm() == doctest::Approx(150.0));
  CHECK(compass_heading_of(spec.offset - start) == doctest::Approx(300.0));

  ReturnState st;
  auto sp = return_surface_setpoint(-spec.offset, 10.0, spec, st);
  CHECK(sp.surfaced);
  CHECK_FALSE(sp.thruster_active);
  CHECK(st.finished);

  // Abeam the midpoint: the foot is the perpendicular projection.
  const Eigen::Vector2d mid = 0.5 * (start + spec.offset);
  const Eigen::Vector2d e = (spec.offset - start).normalized();
  const Eigen::Vector2d nrm{-e.y(), e.x()};
  const Eigen::Vector2d p = mid + 30.0 * nrm;
  CHECK((nearest_point_on_segment(p, start, spec.offset) - mid).norm() < 1e-9);
  CHECK((nearest_point_on_segment(start - 5.0 * e, start, spec.offset) - start).norm() < 1e-12);
  ReturnState fresh;
  sp = return_surface_setpoint(-p, 0.0, spec, fresh);
  CHECK(sp.thruster_active);
  CHECK_FALSE(fresh.finished);
}

TEST_CASE("dispatch") {
  ModeMap map{{1, Loiter{{0, 0}, 18.0, Turn::CCW}},
              {2, Loiter{{7.5, -26.0}, 18.0, Turn::CCW}},
              {3, ReturnSurface{{0, -5}, 150.0, 340.0}},
              {4, Abort{}}};
  BehaviorMemory mem;
  mem.deploy = drive(90.0, Cruise{});
  DispatchInput in;
  in.heading_deg = 45.0;
  in.depth_m = 2.5;

  SUBCASE("no mode means thruster off") {
    const auto sp = dispatch(in, map, mem);
    CHECK_FALSE(sp.thruster_active);
    CHECK_FALSE(sp.surfaced);
  }
  SUBCASE("mode 1 runs the loiter") {
    in.confirmed_mode = 1;
    in.estimate_valid = true;
    in.rel_beacon = {-18.0, 0.0};
    const auto sp = dispatch(in, map, mem);
    CHECK(behavior_name(map.at(1)) == "loiter");
    CHECK(sp.heading_deg == doctest::Approx(loiter_setpoint(in.rel_beacon, std::get<Loiter>(map.at(1)), 45.0).heading_deg));
  }
  SUBCASE("abort floats to the surface") {
    in.confirmed_mode = 4;
    const auto sp = dispatch(in, map, mem);
    CHECK(sp.surfaced);
    CHECK_FALSE(sp.thruster_active);
    CHECK(sp.depth_m == 0.0);
  }
  SUBCASE("unknown mode is an error") {
    map.erase(2);
    in.confirmed_mode = 2;
    CHECK_THROWS_AS(dispatch(in, map, mem), BehaviorError);
  }
  SUBCASE("hold policy") {
    in.confirmed_mode = 1;
    in.time_s = 60.0;
    CHECK(dispatch(in, map, mem).heading_deg == 90.0);  // deploy setpoints
    in.time_s = 121.0;
    CHECK_FALSE(dispatch(in, map, mem).thruster_active);

    in.estimate_valid = true;
    in.rel_beacon = {-18.0, 0.0};
    in.time_s = 200.0;
    const auto live = dispatch(in, map, mem);
    in.estimate_valid = false;
    in.time_s = 229.0;
    CHECK(dispatch(in, map, mem).heading_deg == live.heading_deg);
    CHECK(dispatch(in, map, mem).thruster_active);
    in.time_s = 231.0;
    CHECK_FALSE(dispatch(in, map, mem).thruster_active);
  }
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(validate(BehaviorSpec{Loiter{{0, 0}, 0.0, Turn::CCW}}), BehaviorError);
  CHECK_THROWS_AS(validate(BehaviorSpec{Trackline{{0, 0}, 0.0, 120.0, -1.0}}), BehaviorError);
  CHECK_THROWS_AS(validate(BehaviorSpec{OffsetFollow{{0, 0}, 0.0, 1.0}}), BehaviorError);
  CHECK_THROWS_AS(validate(BehaviorSpec{ReturnSurface{{0, 0}, 0.0, 0.0}}), BehaviorError);
  CHECK_THROWS_AS(validate(ModeMap{{5, Abort{}}}), BehaviorError);
  CHECK_NOTHROW(validate(ModeMap{{1, Abort{}}, {4, Loiter{}}}));
}

TEST_CASE("concentric loiters keep vehicles apart") {
  const std::vector<double> radii{18.0, 36.0, 48.0};
  std::vector<closed_loop::Loop> loops(3);
  const std::vector<Eigen::Vector2d> starts{{0, -25}, {0, -40}, {0, -55}};
  std::vector<std::vector<closed_loop::Sample>> traces;
  for (int i = 0; i < 3; ++i) {
    loops[i].vehicle = vehicle_at(starts[i], 90.0);
    const Loiter spec{{0, 0}, radii[i], Turn::CCW};
    traces.push_back(loops[i].run(900, [&](const Eigen::Vector2d& rel, const auto& v) {
      return loiter_setpoint(rel, spec, v.heading_deg);
    }));
  }
  double min_sep = 1e9;
  for (std::size_t k = 400; k < 900; ++k) {
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) min_sep = std::min(min_sep, (traces[i][k].position - traces[j][k].position).norm());
  }
  CHECK(min_sep >= 10.0);
}
