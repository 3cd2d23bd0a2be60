#pragma once

// Offline analysis of mission logs: navigation error statistics against
// truth or the LBL fixes, dead-reckoning drift, mode latencies and the
// replay report.

#include <Eigen/Core>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "owtt/mission.hpp"

namespace owtt::stats {

class StatsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ErrorStats {
  std::size_t count = 0;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  double sigma_major = 0.0;
  double sigma_minor = 0.0;
  double sigma_x = 0.0;
  double sigma_y = 0.0;
  double p68 = 0.0;  // 68th percentile of the 2-norm error
  double p95 = 0.0;
};

/// Linear-interpolated empirical percentile, q in [0, 100]. Throws
/// StatsError for an empty input.
double percentile(std::vector<double> values, double q);

/// Gaussian fit (sample covariance and its eigenvalues) plus percentiles of
/// the 2-norm. Throws StatsError for fewer than two errors.
ErrorStats error_stats(std::span<const Eigen::Vector2d> errors);

enum class Reference { Truth, Lbl };
Reference reference_from_string(const std::string& s);

struct MissionStats {
  std::map<std::string, ErrorStats> per_vehicle;
  ErrorStats combined;
};

/// Error = estimate - reference on converged rows (LBL reference: rows
/// with a fix). Vehicles with fewer than two rows are left out; throws
/// StatsError when the fleet as a whole has fewer than two.
MissionStats compute_error_stats(const mission::MissionLog& log, Reference ref);

/// 2-norm errors used by compute_error_stats, per vehicle.
std::map<std::string, std::vector<double>> error_norms(const mission::MissionLog& log, Reference ref);

struct DrSummary {
  double terminal_error = 0.0;
  double max_error = 0.0;
  double distance = 0.0;
  double ratio() const { return distance > 0.0 ? terminal_error / distance : 0.0; }
};

std::map<std::string, DrSummary> dead_reckoning_summary(const mission::MissionLog& log);

struct ModeSwitch {
  double time = 0.0;  // second at which the beacon changed mode
  int mode = 0;
  /// Confirmation time minus switch time; unset if never confirmed.
  std::map<std::string, std::optional<double>> latency;
};

/// One entry per commanded change to a transmitting mode.
std::vector<ModeSwitch> mode_latencies(const mission::MissionLog& log);

struct Footprint {
  double along_m = 0.0;  // extent along the given heading
  double across_m = 0.0;
  std::size_t samples = 0;
};

/// Extent of the true positions of all vehicles while running `behavior`,
/// measured along and across a compass heading.
Footprint behavior_footprint(const mission::MissionLog& log, const std::string& behavior, double heading_deg);

nlohmann::json to_json(const ErrorStats& s);
nlohmann::json to_json(const MissionStats& s);

/// Writes trajectories.csv, cdf_truth.csv, cdf_lbl.csv, dr_divergence.csv
/// and report.json into `out_dir`; returns the report. Throws StatsError
/// when the log carries no beacon track.
nlohmann::json replay_validation(const mission::MissionLog& log, const std::string& out_dir);

}  // namespace owtt::stats
