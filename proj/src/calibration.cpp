#include "owtt/calibration.hpp"

#include <cmath>
#include <map>

#include "owtt/geometry.hpp"
#include "owtt/ranging.hpp"
#include "owtt/stats.hpp"
#include "owtt/waveforms.hpp"
#include "owtt/world.hpp"

namespace owtt::calibration {
namespace {

using geometry::deg2rad;
using geometry::rad2deg;

double bff_azimuth(const Eigen::Vector3d& llf_direction, const geometry::EulerAttitude& att) {
  const Eigen::Vector3d b = geometry::rotation_vcf_to_bff(att).transpose() * llf_direction;
  return geometry::wrap_360(rad2deg(std::atan2(b.y(), b.x())));
}

}  // namespace

doa::AzimuthBiasTable fit_bias_table(const std::vector<CalibrationSample>& samples, double bin_width_deg) {
  if (!(bin_width_deg > 0.0) || bin_width_deg > 360.0) throw doa::DoaError("bin width must be in (0, 360]");
  const auto bins = static_cast<int>(std::round(360.0 / bin_width_deg));
  std::map<int, std::pair<double, double>> sums;  // sin, cos of the residual
  for (const auto& s : samples) {
    if (!s.detected) continue;
    const int b = static_cast<int>(std::floor(geometry::wrap_360(s.raw_azimuth_deg) / bin_width_deg)) % bins;
    const double r = deg2rad(geometry::wrap_180(s.raw_azimuth_deg - s.expected_azimuth_deg));
    sums[b].first += std::sin(r);
    sums[b].second += std::cos(r);
  }
  std::vector<std::pair<double, double>> rows;
  for (const auto& [b, sc] : sums) {
    rows.emplace_back((b + 0.5) * bin_width_deg, rad2deg(std::atan2(sc.first, sc.second)));
  }
  if (rows.empty()) return {};
  return doa::AzimuthBiasTable(std::move(rows));
}

CalibrationResult run_calibration(const mission::MissionConfig& config, const CalibrationOptions& options,
                                  const doa::AzimuthBiasTable& applied) {
  config.validate();
  const auto bank = waveforms::default_template_bank(config.sample_rate);
  const ranging::ReceptionProcessor processor(bank, config.n_samples,
                                              {config.receiver.detection_threshold, config.receiver.consistency_bound});
  world::ReceiverModel receiver;
  receiver.geometry = doa::ArrayGeometry::pyramid(config.receiver.array_edge_m);
  receiver.n_samples = config.n_samples;
  receiver.sample_rate = config.sample_rate;
  receiver.azimuth_bias.amplitude_deg = config.receiver.azimuth_bias_amplitude_deg;

  constexpr int kMode = 1;
  const auto& chirp = bank.at(kMode);
  const auto [lo, hi] = chirp.band();
  const doa::SpdBeamformer spd(receiver.geometry,
                               doa::FrequencyBand::from_range(lo, hi, processor.fft_len(), config.sample_rate),
                               doa::ConicalGrid(config.receiver.conical_resolution_deg),
                               config.environment.sound_speed);
  const auto grid = doa::direction_grid(options.inclination_step_deg, options.azimuth_step_deg);

  auto env = config.environment;
  if (options.noise_sigma) env.noise_sigma = *options.noise_sigma;

  world::BeaconState beacon = config.beacon;
  beacon.position = Eigen::Vector2d::Zero();
  beacon.mode = kMode;
  const Eigen::Vector3d source{0.0, 0.0, -beacon.depth_m};

  auto noise_rng = world::make_stream(options.seed, 1);
  auto jitter_rng = world::make_stream(options.seed, 2);
  auto heading_rng = world::make_stream(options.seed, 3);
  std::normal_distribution<double> heading_noise(0.0, options.heading_sigma_deg);

  CalibrationResult result;
  long second = 0;
  for (double r : options.ranges_m) {
    const double dz = options.vehicle_depth_m - beacon.depth_m;
    if (!(r > std::abs(dz))) throw mission::ConfigError("calibration range must exceed the depth difference");
    world::VehicleTruth vehicle;
    vehicle.name = "calibration";
    vehicle.position = {0.0, -std::sqrt(r * r - dz * dz)};
    vehicle.depth_m = options.vehicle_depth_m;
    const Eigen::Vector3d rx{vehicle.position.x(), vehicle.position.y(), -vehicle.depth_m};
    const Eigen::Vector3d to_source = (source - rx).normalized();
    const auto n = static_cast<long>(std::round(360.0 * options.turns / options.rotation_rate_dps));
    for (long i = 0; i < n; ++i, ++second) {
      vehicle.heading_deg = geometry::wrap_360(options.rotation_rate_dps * static_cast<double>(i));
      const double jitter = world::draw_jitter(beacon, jitter_rng);
      world::ReceptionTruth truth;
      const auto rec = world::synthesize_reception(source, &chirp, jitter, vehicle, second, env,
                                                   config.clock, receiver, noise_rng, &truth);
      const auto analysis = processor.analyze(rec);
      const double measured_heading = vehicle.heading_deg + heading_noise(heading_rng);

      CalibrationSample s;
      s.true_range_m = truth.direct_range_m;
      s.expected_azimuth_deg = bff_azimuth(to_source, {0.0, 0.0, geometry::compass_to_enu_yaw(measured_heading)});
      const auto it = analysis.responses.find(kMode);
      if (analysis.winner != kMode || it == analysis.responses.end() || !it->second.consistent) {
        ++result.missed;
        result.samples.push_back(s);
        continue;
      }
      const auto dist =
          ranging::normalize_to_range(it->second.combined, config.environment.sound_speed, config.sample_rate);
      s.range_mle_m = dist.mle_range();
      const auto powers = spd.evaluate(spd.pair_responses(analysis.spectra), grid);
      std::size_t best = 0;
      for (std::size_t k = 1; k < powers.size(); ++k) {
        if (powers[k] > powers[best]) best = k;
      }
      s.raw_azimuth_deg = grid[best].azimuth_deg;
      s.corrected_azimuth_deg = doa::correct_azimuth(s.raw_azimuth_deg, applied);
      s.detected = true;
      result.samples.push_back(s);
    }
  }

  std::vector<double> range_err;
  std::vector<double> raw_err;
  std::vector<double> cor_err;
  double signed_sum = 0.0;
  for (const auto& s : result.samples) {
    if (!s.detected) continue;
    range_err.push_back(std::abs(s.range_mle_m - s.true_range_m));
    raw_err.push_back(std::abs(geometry::wrap_180(s.raw_azimuth_deg - s.expected_azimuth_deg)));
    const double c = geometry::wrap_180(s.corrected_azimuth_deg - s.expected_azimuth_deg);
    cor_err.push_back(std::abs(c));
    signed_sum += c;
  }
  if (range_err.empty()) throw stats::StatsError("calibration detected no broadcasts");
  result.range_p68_m = stats::percentile(range_err, 68.0);
  result.azimuth_raw_p68_deg = stats::percentile(raw_err, 68.0);
  result.azimuth_corrected_p68_deg = stats::percentile(cor_err, 68.0);
  result.residual_mean_bias_deg = signed_sum / static_cast<double>(cor_err.size());
  result.table = fit_bias_table(result.samples, options.bin_width_deg);
  return result;
}

}  // namespace owtt::calibration
