#include "owtt/filter.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace owtt::filter {
namespace {

using geometry::deg2rad;
using geometry::rad2deg;

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

doa::Direction random_direction(Rng& rng) {
  const double inc = rad2deg(std::acos(1.0 - 2.0 * uniform01(rng)));
  const double az = 360.0 * uniform01(rng);
  return {inc, az >= 360.0 ? 0.0 : az};
}

doa::Direction direction_of(const Eigen::Vector3d& bff) {
  const double r = bff.norm();
  if (r == 0.0) return {0.0, 0.0};
  const double inc = rad2deg(std::acos(std::clamp(bff.z() / r, -1.0, 1.0)));
  return {inc, geometry::wrap_360(rad2deg(std::atan2(bff.y(), bff.x())))};
}

template <typename T>
void permute(std::vector<T>& v, const std::vector<std::size_t>& order) {
  std::vector<T> out;
  out.reserve(v.size());
  for (std::size_t i : order) out.push_back(v[i]);
  v = std::move(out);
}

std::vector<double> range_likelihood(const ranging::RangeDistribution& dist, std::span<const double> ranges) {
  std::vector<double> out;
  out.reserve(ranges.size());
  for (double r : ranges) out.push_back(dist.at(r));
  return out;
}

// Weights of the redrawn entries: uniform prior times the likelihood at the
// new location.
void reweight_redrawn(std::vector<double>& weights, const std::vector<double>& likelihood, std::size_t k,
                      std::size_t n) {
  const double prior = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < k; ++i) weights[i] = prior * std::max(0.0, likelihood[i]);
}

}  // namespace

void FilterConfig::validate() const {
  if (n_particles == 0) throw FilterError("particle count must be positive");
  if (reinit_count >= n_particles) throw FilterError("reinit count must be below the particle count");
  if (sigma_sog < 0.0 || sigma_heading_deg < 0.0 || sigma_beacon_m < 0.0) {
    throw FilterError("noise sigmas must be non-negative");
  }
  if (!(max_range_m > 0.0)) throw FilterError("max range must be positive");
  if (beacon_depth_m < 0.0) throw FilterError("beacon depth must be non-negative");
}

PrimaryParticles initialize(const FilterConfig& config, Rng& rng) {
  config.validate();
  PrimaryParticles p;
  p.positions.reserve(config.n_particles);
  for (std::size_t i = 0; i < config.n_particles; ++i) {
    const double r = config.max_range_m * uniform01(rng);
    const auto d = random_direction(rng);
    p.positions.push_back(r * doa::unit_direction(d.inclination_deg, d.azimuth_deg));
  }
  p.weights.assign(config.n_particles, 1.0 / static_cast<double>(config.n_particles));
  return p;
}

void predict(PrimaryParticles& particles, double sog, double heading_deg, double dz_vehicle, double dt,
             const FilterConfig& config, Rng& rng) {
  if (!(dt > 0.0)) throw FilterError("predict needs dt > 0");
  std::normal_distribution<double> n01(0.0, 1.0);
  const double beacon_sigma = config.sigma_beacon_m * std::sqrt(dt);
  for (auto& p : particles.positions) {
    const double v = sog + config.sigma_sog * n01(rng);
    const double h = deg2rad(heading_deg + config.sigma_heading_deg * n01(rng));
    p.x() -= v * dt * std::sin(h);
    p.y() -= v * dt * std::cos(h);
    p.z() -= dz_vehicle;
    p.x() += beacon_sigma * n01(rng);
    p.y() += beacon_sigma * n01(rng);
  }
}

bool normalize(std::vector<double>& weights) {
  double sum = 0.0;
  bool finite = true;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) finite = false;
    sum += w;
  }
  if (!finite || !(sum > 0.0) || !std::isfinite(sum)) {
    std::fill(weights.begin(), weights.end(), weights.empty() ? 0.0 : 1.0 / static_cast<double>(weights.size()));
    return false;
  }
  for (double& w : weights) w /= sum;
  return true;
}

std::vector<std::size_t> ascending_order(const std::vector<double>& weights) {
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return weights[a] < weights[b]; });
  return order;
}

void reinit_lowest(RangeParticles& range_set, AngleParticles& angle_set, std::size_t k, const FilterConfig& config,
                   Rng& rng) {
  const std::size_t kr = std::min(k, range_set.ranges.size());
  for (std::size_t i = 0; i < kr; ++i) range_set.ranges[i] = config.max_range_m * uniform01(rng);
  const std::size_t ka = std::min(k, angle_set.directions.size());
  for (std::size_t i = 0; i < ka; ++i) angle_set.directions[i] = random_direction(rng);
}

PrimaryParticles recombine(const RangeParticles& range_set, const AngleParticles& angle_set,
                           const geometry::EulerAttitude& attitude_rx, bool* degenerate) {
  if (range_set.ranges.size() != angle_set.directions.size()) throw FilterError("duplicate sets differ in size");
  const std::size_t n = range_set.ranges.size();
  const Eigen::Matrix3d rot = geometry::rotation_vcf_to_bff(attitude_rx);
  PrimaryParticles out;
  out.positions.reserve(n);
  out.weights.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& d = angle_set.directions[i];
    const Eigen::Vector3d bff = range_set.ranges[i] * doa::unit_direction(d.inclination_deg, d.azimuth_deg);
    out.positions.push_back(rot * bff);
    out.weights.push_back(range_set.weights[i] * angle_set.weights[i]);
  }
  const bool ok = normalize(out.weights);
  if (degenerate) *degenerate = !ok;
  return out;
}

UpdateOutcome update_acoustic(PrimaryParticles& particles, const ranging::RangeDistribution& range_dist,
                              const AngleEvaluator& angle_eval, const geometry::EulerAttitude& attitude_rx,
                              const FilterConfig& config, Rng& rng) {
  const std::size_t n = particles.size();
  if (n == 0) throw FilterError("empty particle set");
  UpdateOutcome outcome;

  RangeParticles rs;
  AngleParticles as;
  rs.ranges.reserve(n);
  as.directions.reserve(n);
  const Eigen::Matrix3d to_bff = geometry::rotation_vcf_to_bff(attitude_rx).transpose();
  for (const auto& p : particles.positions) {
    const Eigen::Vector3d bff = to_bff * p;
    rs.ranges.push_back(bff.norm());
    as.directions.push_back(direction_of(bff));
  }

  const auto rl = range_likelihood(range_dist, rs.ranges);
  const auto al = angle_eval(as.directions);
  if (al.size() != n) throw FilterError("angle evaluator returned the wrong number of powers");
  rs.weights.resize(n);
  as.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    rs.weights[i] = particles.weights[i] * rl[i];
    as.weights[i] = particles.weights[i] * al[i];
  }
  // Lowest entries are chosen on the unnormalised weights so the redrawn
  // entries, weighted by prior times likelihood, share the same scale.
  auto ro = ascending_order(rs.weights);
  permute(rs.ranges, ro);
  permute(rs.weights, ro);
  auto ao = ascending_order(as.weights);
  permute(as.directions, ao);
  permute(as.weights, ao);

  const std::size_t k = std::min(config.reinit_count, n - 1);
  if (k > 0) {
    reinit_lowest(rs, as, k, config, rng);
    reweight_redrawn(rs.weights, range_likelihood(range_dist, std::span(rs.ranges).first(k)), k, n);
    reweight_redrawn(as.weights, angle_eval(std::span(as.directions).first(k)), k, n);
  }
  if (!normalize(rs.weights)) outcome.degenerate = true;
  if (!normalize(as.weights)) outcome.degenerate = true;
  ro = ascending_order(rs.weights);
  permute(rs.ranges, ro);
  permute(rs.weights, ro);
  ao = ascending_order(as.weights);
  permute(as.directions, ao);
  permute(as.weights, ao);

  bool degenerate = false;
  particles = recombine(rs, as, attitude_rx, &degenerate);
  outcome.degenerate = outcome.degenerate || degenerate;
  return outcome;
}

void resample_systematic(PrimaryParticles& particles, Rng& rng) {
  const std::size_t n = particles.size();
  if (n == 0) return;
  const double step = 1.0 / static_cast<double>(n);
  const double u0 = step * uniform01(rng);
  PrimaryParticles out;
  out.positions.reserve(n);
  double cumulative = particles.weights[0];
  std::size_t i = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double u = u0 + step * static_cast<double>(j);
    while (u >= cumulative && i + 1 < n) cumulative += particles.weights[++i];
    out.positions.push_back(particles.positions[i]);
  }
  out.weights.assign(n, step);
  particles = std::move(out);
}

StateEstimate estimate(const PrimaryParticles& particles, double beacon_depth_m, double vehicle_depth_m,
                       double converged_sigma_m) {
  StateEstimate est;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  double sum_w2 = 0.0;
  for (std::size_t i = 0; i < particles.size(); ++i) {
    mean += particles.weights[i] * particles.positions[i].head<2>();
    sum_w2 += particles.weights[i] * particles.weights[i];
  }
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < particles.size(); ++i) {
    const Eigen::Vector2d d = particles.positions[i].head<2>() - mean;
    cov += particles.weights[i] * d * d.transpose();
  }
  const double denom = 1.0 - sum_w2;
  if (denom > 1e-12) cov /= denom;
  est.mean = {mean.x(), mean.y(), -beacon_depth_m + vehicle_depth_m};
  est.covariance = 0.5 * (cov + cov.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(est.covariance);
  const auto ev = eig.eigenvalues();
  est.sigma_minor = std::sqrt(std::max(0.0, ev(0)));
  est.sigma_major = std::sqrt(std::max(0.0, ev(1)));
  est.converged = particles.size() > 1 && est.sigma_major <= converged_sigma_m;
  return est;
}

void AttitudeBuffer::push(double t, const geometry::EulerAttitude& attitude) {
  if (!entries_.empty() && t < entries_.back().first) throw FilterError("attitude timestamps must be monotone");
  entries_.emplace_back(t, attitude);
  while (entries_.size() > 1 && entries_.front().first < t - span_) entries_.pop_front();
}

geometry::EulerAttitude AttitudeBuffer::at(double t) const {
  if (entries_.empty()) throw FilterError("attitude buffer is empty");
  std::size_t best = 0;
  double best_dt = std::abs(entries_[0].first - t);
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    const double d = std::abs(entries_[i].first - t);
    if (d < best_dt) {
      best_dt = d;
      best = i;
    }
  }
  return entries_[best].second;
}

geometry::EulerAttitude attitude_at_peak(const AttitudeBuffer& buffer, double peak_time) { return buffer.at(peak_time); }

ParticleFilter::ParticleFilter(FilterConfig config, std::uint64_t seed) : config_(config), rng_(seed) {
  config_.validate();
  reset();
}

void ParticleFilter::reset() { particles_ = initialize(config_, rng_); }

void ParticleFilter::predict(double sog, double heading_deg, double dz_vehicle, double dt) {
  filter::predict(particles_, sog, heading_deg, dz_vehicle, dt, config_, rng_);
}

UpdateOutcome ParticleFilter::update(const ranging::RangeDistribution& range_dist, const AngleEvaluator& angle_eval,
                                     const geometry::EulerAttitude& attitude_rx) {
  const auto outcome = update_acoustic(particles_, range_dist, angle_eval, attitude_rx, config_, rng_);
  resample_systematic(particles_, rng_);
  return outcome;
}

StateEstimate ParticleFilter::estimate(double vehicle_depth_m) const {
  return filter::estimate(particles_, config_.beacon_depth_m, vehicle_depth_m, config_.converged_sigma_m);
}

}  // namespace owtt::filter
