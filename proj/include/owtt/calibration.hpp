#pragma once

// Simulated rotational calibration: the vehicle holds station at a fixed
// range from the beacon and spins in place while every capture is reduced
// to range and azimuth maxima. Azimuth residuals, binned by measured
// azimuth, become the bias lookup table.

#include <cstdint>
#include <optional>
#include <vector>

#include "owtt/doa.hpp"
#include "owtt/mission_config.hpp"

namespace owtt::calibration {

struct CalibrationOptions {
  std::vector<double> ranges_m{30.0, 57.0};
  double vehicle_depth_m = 2.0;
  double rotation_rate_dps = 3.0;
  /// Full turns per range.
  int turns = 2;
  /// Heading sensor noise during the run (white at the capture rate).
  double heading_sigma_deg = 3.0;
  /// Ambient noise for the run, replacing the config value. The default
  /// matches the SNR of a tank calibration at these ranges.
  std::optional<double> noise_sigma = 8.0;
  double bin_width_deg = 10.0;
  /// Search grid for the azimuth maximum.
  double inclination_step_deg = 2.0;
  double azimuth_step_deg = 1.0;
  std::uint64_t seed = 1;
};

struct CalibrationSample {
  double true_range_m = 0.0;
  double range_mle_m = 0.0;
  double expected_azimuth_deg = 0.0;  // from the measured heading
  double raw_azimuth_deg = 0.0;
  double corrected_azimuth_deg = 0.0;
  bool detected = false;
};

struct CalibrationResult {
  std::vector<CalibrationSample> samples;
  /// Table fitted to raw azimuths (bins of measured azimuth).
  doa::AzimuthBiasTable table;
  double range_p68_m = 0.0;
  double azimuth_raw_p68_deg = 0.0;
  double azimuth_corrected_p68_deg = 0.0;
  /// Mean signed corrected azimuth error.
  double residual_mean_bias_deg = 0.0;
  std::size_t missed = 0;
};

/// Runs the rotation with `applied` used for the corrected azimuths. The
/// receiver and environment come from `config`.
CalibrationResult run_calibration(const mission::MissionConfig& config, const CalibrationOptions& options,
                                  const doa::AzimuthBiasTable& applied = {});

/// Circular-mean bias of (raw - expected) per bin of raw azimuth; empty bins
/// are omitted.
doa::AzimuthBiasTable fit_bias_table(const std::vector<CalibrationSample>& samples, double bin_width_deg);

}  // namespace owtt::calibration
