#pragma once

// Factored particle filter tracking the beacon position in the vehicle-carried
// frame. The acoustic update weighs a range copy and an angle copy of the
// particle set separately, sorts both by weight and recombines them rank by
// rank, which lets a good range hypothesis meet a good bearing hypothesis
// even when no single particle held both.

#include <Eigen/Core>
#include <deque>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "owtt/doa.hpp"
#include "owtt/geometry.hpp"
#include "owtt/ranging.hpp"

namespace owtt::filter {

using Rng = std::mt19937_64;

class FilterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct FilterConfig {
  std::size_t n_particles = 500;
  double sigma_sog = 0.1;          // m/s
  double sigma_heading_deg = 3.0;  // deg
  double sigma_beacon_m = 0.5;     // per 1 s step
  std::size_t reinit_count = 50;
  double max_range_m = 8000 * ranging::kDefaultSoundSpeed / ranging::kDefaultSampleRate;
  double beacon_depth_m = 1.0;
  double converged_sigma_m = 15.0;

  /// Throws FilterError unless 0 <= k < N, N > 0 and every sigma >= 0.
  void validate() const;
};

struct PrimaryParticles {
  std::vector<Eigen::Vector3d> positions;  // x_b^vcf
  std::vector<double> weights;

  std::size_t size() const { return positions.size(); }
};

struct RangeParticles {
  std::vector<double> ranges;
  std::vector<double> weights;
};

struct AngleParticles {
  std::vector<doa::Direction> directions;
  std::vector<double> weights;
};

struct StateEstimate {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
  double sigma_major = 0.0;
  double sigma_minor = 0.0;
  bool converged = false;
};

/// Beamformer power at each BFF direction, aligned with the input.
using AngleEvaluator = std::function<std::vector<double>(std::span<const doa::Direction>)>;

/// Equal weights; radius uniform on [0, max_range], direction uniform on the
/// sphere.
PrimaryParticles initialize(const FilterConfig& config, Rng& rng);

/// Constant-velocity step. `heading_deg` is a compass heading; `dz_vehicle`
/// is the change of the vehicle's LLF height (up positive) over dt. Throws
/// FilterError for dt <= 0.
void predict(PrimaryParticles& particles, double sog, double heading_deg, double dz_vehicle, double dt,
             const FilterConfig& config, Rng& rng);

/// Normalises in place. Returns false (and sets uniform weights) when the
/// weights sum to zero or contain a non-finite value.
bool normalize(std::vector<double>& weights);

/// Stable ascending sort by weight (ties keep original order). Returns the
/// permutation applied.
std::vector<std::size_t> ascending_order(const std::vector<double>& weights);

/// Redraws the k lowest-weight entries of each set uniformly over its
/// domain. Sets must already be sorted ascending. Redrawn entries keep
/// their weights; callers re-weight them.
void reinit_lowest(RangeParticles& range_set, AngleParticles& angle_set, std::size_t k, const FilterConfig& config,
                   Rng& rng);

struct UpdateOutcome {
  bool degenerate = false;
};

/// Factored acoustic update. `attitude_rx` is the receiver attitude at the
/// time of the range peak.
UpdateOutcome update_acoustic(PrimaryParticles& particles, const ranging::RangeDistribution& range_dist,
                              const AngleEvaluator& angle_eval, const geometry::EulerAttitude& attitude_rx,
                              const FilterConfig& config, Rng& rng);

/// Rank pairing of two ascending-sorted sets into BFF positions rotated back
/// to the VCF, weights = normalised products.
PrimaryParticles recombine(const RangeParticles& range_set, const AngleParticles& angle_set,
                           const geometry::EulerAttitude& attitude_rx, bool* degenerate = nullptr);

void resample_systematic(PrimaryParticles& particles, Rng& rng);

/// Weighted mean and reliability-weighted covariance over x-y; z from the
/// beacon and vehicle depths.
StateEstimate estimate(const PrimaryParticles& particles, double beacon_depth_m, double vehicle_depth_m,
                       double converged_sigma_m = 15.0);

/// Rolling attitude history.
class AttitudeBuffer {
 public:
  explicit AttitudeBuffer(double span_s = 2.0) : span_(span_s) {}

  /// Throws FilterError if t is earlier than the newest entry.
  void push(double t, const geometry::EulerAttitude& attitude);
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  void clear() { entries_.clear(); }

  /// Entry nearest to t, earlier entry on a tie. Throws FilterError when
  /// empty.
  geometry::EulerAttitude at(double t) const;

 private:
  double span_;
  std::deque<std::pair<double, geometry::EulerAttitude>> entries_;
};

geometry::EulerAttitude attitude_at_peak(const AttitudeBuffer& buffer, double peak_time);

/// One vehicle's filter with its own generator.
class ParticleFilter {
 public:
  ParticleFilter(FilterConfig config, std::uint64_t seed);

  void reset();
  void predict(double sog, double heading_deg, double dz_vehicle, double dt);
  UpdateOutcome update(const ranging::RangeDistribution& range_dist, const AngleEvaluator& angle_eval,
                       const geometry::EulerAttitude& attitude_rx);
  StateEstimate estimate(double vehicle_depth_m) const;

  const PrimaryParticles& particles() const { return particles_; }
  const FilterConfig& config() const { return config_; }
  Rng& rng() { return rng_; }

 private:
  FilterConfig config_;
  Rng rng_;
  PrimaryParticles particles_;
};

}  // namespace owtt::filter
