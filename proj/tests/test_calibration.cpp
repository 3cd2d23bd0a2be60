#include "doctest.h"

#include <cmath>
#include <random>

#include "owtt/calibration.hpp"
#include "owtt/geometry.hpp"

using namespace owtt;
using namespace owtt::calibration;

TEST_CASE("bias fit recovers a known sinusoidal bias") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> az(0.0, 360.0);
  std::normal_distribution<double> noise(0.0, 2.0);
  const auto bias = [](double a) { return 5.0 * std::sin(geometry::deg2rad(2.0 * a)); };
  std::vector<CalibrationSample> samples;
  for (int i = 0; i < 20000; ++i) {
    CalibrationSample s;
    s.expected_azimuth_deg = az(rng);
    s.raw_azimuth_deg = geometry::wrap_360(s.expected_azimuth_deg + bias(s.expected_azimuth_deg) + noise(rng));
    s.detected = true;
    samples.push_back(s);
  }
  // Missed captures never enter the fit.
  CalibrationSample missed;
  missed.raw_azimuth_deg = 5.0;
  missed.expected_azimuth_deg = 90.0;
  samples.push_back(missed);

  const auto table = fit_bias_table(samples, 10.0);
  REQUIRE(table.rows().size() == 36);
  for (const auto& [a, b] : table.rows()) {
    // Bins are in raw azimuth: invert raw = e + bias(e) for the bin centre.
    double e = a;
    for (int k = 0; k < 50; ++k) e = a - bias(e);
    CHECK(std::abs(b - bias(e)) < 0.3);
  }
  CHECK_THROWS_AS(fit_bias_table(samples, 0.0), doa::DoaError);
  CHECK(fit_bias_table({}, 10.0).empty());
}

TEST_CASE("bias fit wraps residuals across north") {
  std::vector<CalibrationSample> s(2);
  s[0].raw_azimuth_deg = 2.0;
  s[0].expected_azimuth_deg = 358.0;  // +4 through north
  s[1].raw_azimuth_deg = 3.0;
  s[1].expected_azimuth_deg = 359.0;
  for (auto& x : s) x.detected = true;
  const auto t = fit_bias_table(s, 10.0);
  REQUIRE(t.rows().size() == 1);
  CHECK(t.rows()[0].first == doctest::Approx(5.0));
  CHECK(t.rows()[0].second == doctest::Approx(4.0));
}

TEST_CASE("applying the fitted table removes the mean bias") {
  const auto config = mission::preset("mission1");
  CalibrationOptions opt;
  opt.turns = 1;
  const auto first = run_calibration(config, opt);
  REQUIRE(first.samples.size() > 200);
  CHECK(first.missed < first.samples.size() / 10);
  CHECK_FALSE(first.table.empty());

  opt.seed = 2;
  const auto second = run_calibration(config, opt, first.table);
  CHECK(std::abs(second.residual_mean_bias_deg) < 1.0);
  CHECK(second.range_p68_m < 1.0);
}
