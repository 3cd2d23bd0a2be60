#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "owtt/ranging.hpp"
#include "owtt/world.hpp"

using namespace owtt::world;
using owtt::ranging::ReceptionProcessor;

namespace {

constexpr double kFs = 37500.0;
constexpr double kC = 1481.0;

EnvModel quiet() {
  EnvModel e;
  e.noise_sigma = 0.0;
  e.surface_reflection = 0.0;
  e.bottom_reflection = 0.0;
  e.wall_enabled = false;
  return e;
}

ClockModel perfect_clock() {
  ClockModel c;
  c.drift_rate = 0.0;
  c.trigger_jitter_s = 0.0;
  return c;
}

VehicleTruth at(double east, double north, double depth, double heading = 0.0) {
  VehicleTruth v;
  v.position = {east, north};
  v.depth_m = depth;
  v.heading_deg = heading;
  return v;
}

struct Peak {
  std::size_t bin;
  double value;
};

std::vector<double> combined(const owtt::ranging::ElementRecording& rec, int mode = 1) {
  static const auto bank = owtt::waveforms::default_template_bank(kFs);
  static const ReceptionProcessor proc(bank, 8000);
  return proc.analyze(rec).responses.at(mode).combined;
}

}  // namespace

TEST_CASE("speed from RPM") {
  CHECK(sog_from_rpm(800, 0) == doctest::Approx(1.0));
  CHECK(sog_from_rpm(800, 60) == doctest::Approx(0.5));
  auto v = at(0, 0, 2);
  v.rpm = 400;
  CHECK(v.sog() == doctest::Approx(0.5));
}

// A heading of 45 degrees puts three of the five elements at the array
// centre's delay for a northern source, so the combined peak has no tie.
TEST_CASE("direct path lands on the range bin") {
  const auto bank = owtt::waveforms::default_template_bank(kFs);
  const ReceiverModel rx;
  Rng rng(1);
  ReceptionTruth truth;
  const auto rec = synthesize_reception({0, 0, -1}, &bank.at(1), 0.0, at(0, -74.05, 1, 45), 0, quiet(), perfect_clock(),
                                        rx, rng, &truth);
  CHECK(truth.direct_range_m == doctest::Approx(74.05));
  const auto c = combined(rec);
  CHECK(owtt::ranging::argmax_abs(c) == 1875);
}

TEST_CASE("surface image gives a second peak") {
  const auto bank = owtt::waveforms::default_template_bank(kFs);
  auto env = quiet();
  env.surface_reflection = -0.9;
  Rng rng(2);
  const auto rec = synthesize_reception({0, 0, -1}, &bank.at(1), 0.0, at(0, -10, 5), 0, env, perfect_clock(),
                                        ReceiverModel{}, rng);
  const auto c = combined(rec);
  // Image-source path lengths computed independently.
  const double direct = std::sqrt(100.0 + 16.0);
  const double image = std::sqrt(100.0 + 36.0);
  const auto bin = [](double r) { return static_cast<std::size_t>(std::lround(r / kC * kFs)); };
  auto local_peak = [&](std::size_t center) {
    Peak p{center, 0.0};
    for (std::size_t k = center - 3; k <= center + 3; ++k) {
      if (c[k] > p.value) p = {k, c[k]};
    }
    return p;
  };
  const auto p1 = local_peak(bin(direct));
  const auto p2 = local_peak(bin(image));
  const double top = *std::max_element(c.begin(), c.end());
  CHECK(p1.value == doctest::Approx(top));
  CHECK(p2.value > 0.2 * top);
  // Both are true local maxima, separated by a dip.
  CHECK(p1.bin != p2.bin);
  CHECK(std::abs(static_cast<long>(p1.bin) - static_cast<long>(bin(direct))) <= 1);
  // The steeper image arrival spreads over the array by up to two samples.
  CHECK(std::abs(static_cast<long>(p2.bin) - static_cast<long>(bin(image))) <= 2);
  const double dip = *std::min_element(c.begin() + p1.bin, c.begin() + p2.bin);
  CHECK(dip < 0.5 * p2.value);

  const auto paths = propagation_paths({0, 0, -1}, {0, -10, -5}, env);
  REQUIRE(paths.size() == 2);
  CHECK(paths[1].length_m == doctest::Approx(image));
  CHECK(paths[1].amplitude == doctest::Approx(-0.9 * env.source_level / image));
}

TEST_CASE("wall image only when enabled and both ends are south of it") {
  auto env = quiet();
  env.wall_enabled = true;
  CHECK(propagation_paths({0, 0, -1}, {0, -30, -2}, env).size() == 2);
  CHECK(propagation_paths({0, 20, -1}, {0, -30, -2}, env).size() == 1);
  env.wall_enabled = false;
  CHECK(propagation_paths({0, 0, -1}, {0, -30, -2}, env).size() == 1);
}

TEST_CASE("clock offset shifts the peak") {
  const auto bank = owtt::waveforms::default_template_bank(kFs);
  Rng rng(3);
  auto clock = perfect_clock();
  const auto base = owtt::ranging::argmax_abs(combined(
      synthesize_reception({0, 0, -1}, &bank.at(1), 0.0, at(0, -50, 1, 45), 10, quiet(), clock, ReceiverModel{}, rng)));
  clock.initial_offset_s = 50e-6;
  const auto shifted = owtt::ranging::argmax_abs(combined(
      synthesize_reception({0, 0, -1}, &bank.at(1), 0.0, at(0, -50, 1, 45), 10, quiet(), clock, ReceiverModel{}, rng)));
  CHECK(static_cast<long>(shifted) - static_cast<long>(base) == std::lround(50e-6 * kFs));

  // The same offset reached through drift.
  clock.initial_offset_s = 0.0;
  clock.drift_rate = 50e-6 / 1000.0;
  const auto drifted = owtt::ranging::argmax_abs(combined(
      synthesize_reception({0, 0, -1}, &bank.at(1), 0.0, at(0, -50, 1, 45), 1000, quiet(), clock, ReceiverModel{}, rng)));
  CHECK(drifted == shifted);
}

TEST_CASE("spherical spreading") {
  const auto bank = owtt::waveforms::default_template_bank(kFs);
  Rng rng(4);
  auto peak = [&](double r) {
    const auto rec = synthesize_reception({0, 0, -1}, &bank.at(2), 0.0, at(0, -r, 1), 0, quiet(), perfect_clock(),
                                          ReceiverModel{}, rng);
    double m = 0.0;
    for (double v : rec.channels[0]) m = std::max(m, std::abs(v));
    return m;
  };
  CHECK(peak(40.0) / peak(20.0) == doctest::Approx(0.5).epsilon(0.01));
  CHECK(peak(120.0) / peak(60.0) == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("out of range yields a noise-only capture") {
  const auto bank = owtt::waveforms::default_template_bank(kFs);
  auto env = quiet();
  env.noise_sigma = 1.0;
  Rng rng(5);
  const auto rec =
      synthesize_reception({0, 0, -1}, &bank.at(1), 0.0, at(0, -400, 2), 0, env, perfect_clock(), ReceiverModel{}, rng);
  const ReceptionProcessor proc(bank, 8000);
  CHECK_FALSE(proc.analyze(rec).winner.has_value());
  const auto silent =
      synthesize_reception({0, 0, -1}, nullptr, 0.0, at(0, -40, 2), 0, quiet(), perfect_clock(), ReceiverModel{}, rng);
  for (const auto& ch : silent.channels)
    for (double v : ch) CHECK(v == 0.0);
}

TEST_CASE("synthesis is deterministic per stream") {
  const auto bank = owtt::waveforms::default_template_bank(kFs);
  EnvModel env;
  auto make = [&](std::uint64_t idx) {
    auto rng = make_stream(42, 7, idx);
    return synthesize_reception({0, 0, -1}, &bank.at(3), 0.2e-3, at(10, -60, 2, 33), 5, env, ClockModel{},
                                ReceiverModel{}, rng);
  };
  const auto a = make(0);
  const auto b = make(0);
  const auto c = make(1);
  CHECK(a.channels == b.channels);
  CHECK(a.channels != c.channels);
}

TEST_CASE("truth direction in the body frame") {
  const auto bank = owtt::waveforms::default_template_bank(kFs);
  Rng rng(6);
  ReceptionTruth truth;
  // Heading north, beacon due east and level: starboard, azimuth 270.
  synthesize_reception({30, 0, -2}, &bank.at(1), 0.0, at(0, 0, 2, 0), 0, quiet(), perfect_clock(), ReceiverModel{},
                       rng, &truth);
  CHECK(truth.direct_bff.inclination_deg == doctest::Approx(90.0));
  CHECK(truth.direct_bff.azimuth_deg == doctest::Approx(270.0));
}

TEST_CASE("azimuth bias model") {
  AzimuthBiasModel m{5.0};
  CHECK(m.bias_at(0.0) == doctest::Approx(5.0));
  CHECK(m.bias_at(180.0) == doctest::Approx(5.0));
  CHECK(m.bias_at(90.0) == doctest::Approx(-2.5));
  CHECK(AzimuthBiasModel{}.bias_at(10.0) == 0.0);
}

TEST_CASE("vehicle kinematics") {
  VehicleLimits lim;
  const auto env = quiet();
  SUBCASE("thruster off holds position and floats up") {
    auto v = at(5, 5, 2.5);
    Setpoints off;
    off.depth_m = 2.5;
    for (int i = 0; i < 100; ++i) step_vehicle(v, off, 0.1, lim, env);
    CHECK((v.position - Eigen::Vector2d(5, 5)).norm() < 1e-12);
    CHECK(v.depth_m < 2.5);
    CHECK(v.depth_m > 2.5 - 0.3 * 10.0 * lim.buoyant_ascent / 0.03);
  }
  SUBCASE("driving converges on the setpoints") {
    auto v = at(0, 0, 2.5, 0);
    Setpoints sp;
    sp.heading_deg = 90;
    sp.speed = 1.0;
    sp.depth_m = 2.5;
    sp.thruster_active = true;
    for (int i = 0; i < 600; ++i) step_vehicle(v, sp, 0.1, lim, env);
    CHECK(v.heading_deg == doctest::Approx(90.0));
    CHECK(v.sog() == doctest::Approx(1.0).epsilon(0.01));
    CHECK(v.position.x() > 40.0);
    CHECK(v.depth_m == doctest::Approx(2.5).epsilon(0.01));
  }
  SUBCASE("current carries the vehicle") {
    auto e = env;
    e.current = {0.1, 0.0};
    auto v = at(0, 0, 2.5);
    for (int i = 0; i < 100; ++i) step_vehicle(v, Setpoints{}, 0.1, lim, e);
    CHECK(v.position.x() == doctest::Approx(1.0));
  }
  auto v = at(0, 0, 1);
  CHECK_THROWS(step_vehicle(v, Setpoints{}, 0.0, lim, env));
}

TEST_CASE("beacon steering and jitter") {
  BeaconState b;
  b.target = {100.0, 0.0};
  b.speed = 5.0;
  b.max_speed = 1.5;
  step_beacon(b, 10.0);
  CHECK(b.position.x() == doctest::Approx(15.0));
  step_beacon(b, 100.0);
  CHECK(b.position.x() == doctest::Approx(100.0));

  Rng rng(7);
  double sum2 = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double j = draw_jitter(b, rng);
    CHECK(std::abs(j) <= b.jitter_max_s);
    sum2 += j * j;
  }
  CHECK(std::sqrt(sum2 / n) == doctest::Approx(0.33e-3).epsilon(0.05));
}

TEST_CASE("heading sensor") {
  HeadingSensor s(2.0, 0.0, 60.0, make_stream(1, 2));
  CHECK(s.measure(359.0, 0.1) == doctest::Approx(1.0));
  HeadingSensor noisy(0.0, 3.0, 10.0, make_stream(1, 3));
  double sum2 = 0.0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const double e = owtt::geometry::wrap_180(noisy.measure(100.0, 1.0) - 100.0);
    sum2 += e * e;
  }
  CHECK(std::sqrt(sum2 / n) == doctest::Approx(3.0).epsilon(0.1));
}

TEST_CASE("LBL fixes") {
  const LblSetup setup;
  CHECK(setup.baseline() == doctest::Approx(85.87).epsilon(1e-4));
  Rng rng(8);
  std::uniform_real_distribution<double> u(-150.0, 150.0);
  std::uniform_real_distribution<double> us(-150.0, 0.0);
  const Eigen::Vector2d mid = 0.5 * (setup.east + setup.west);
  int done = 0;
  double worst = 0.0;
  while (done < 1000) {
    const Eigen::Vector2d p{mid.x() + u(rng), mid.y() + us(rng)};
    // South of the baseline.
    const Eigen::Vector2d b = setup.west - setup.east;
    const double side = b.x() * (p.y() - setup.east.y()) - b.y() * (p.x() - setup.east.x());
    if (side <= 1.0 || (p - mid).norm() > 150.0) continue;
    const auto f = lbl_fix((p - setup.east).norm(), (p - setup.west).norm(), setup);
    REQUIRE(f.status == LblStatus::Ok);
    worst = std::max(worst, (f.position - p).norm());
    ++done;
  }
  CHECK(worst < 1e-6);

  const Eigen::Vector2d on = setup.east + 0.3 * (setup.west - setup.east);
  const auto tangent = lbl_fix((on - setup.east).norm(), (on - setup.west).norm(), setup);
  CHECK(tangent.status == LblStatus::Degenerate);
  CHECK((tangent.position - on).norm() < 1e-6);

  CHECK(lbl_fix(40.0, 40.0, setup).status == LblStatus::NoFix);
  CHECK(lbl_fix(200.0, 10.0, setup).status == LblStatus::NoFix);
  LblSetup same;
  same.west = same.east;
  CHECK_THROWS(lbl_fix(1.0, 1.0, same));
}

TEST_CASE("dead reckoning") {
  const std::vector<DrStep> still(100, DrStep{0.0, 45.0, 1.0});
  const auto t0 = dead_reckon(still, {3, 4});
  for (const auto& p : t0) CHECK((p - Eigen::Vector2d(3, 4)).norm() == 0.0);

  const std::vector<DrStep> biased(600, DrStep{1.0, 3.0, 1.0});
  const auto t = dead_reckon(biased, {0, 0});
  const Eigen::Vector2d truth{0.0, 600.0};
  CHECK((t.back() - truth).norm() == doctest::Approx(600.0 * std::sin(owtt::geometry::deg2rad(3.0))).epsilon(0.01));
}

TEST_CASE("generator streams are independent") {
  auto a = make_stream(1, 1, 0);
  auto b = make_stream(1, 1, 1);
  auto c = make_stream(1, 2, 0);
  auto a2 = make_stream(1, 1, 0);
  const auto x = a();
  CHECK(x == a2());
  CHECK(x != b());
  CHECK(x != c());
}
