#pragma once

// Direction of arrival. Conventional (delay-and-sum) wideband beamforming
// over (inclination, azimuth) is kept as the reference; the production path
// decomposes the array into element pairs, beamforms each pair over a 1D
// conical angle and sums the pair powers at the requested directions.

#include <Eigen/Core>
#include <complex>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace owtt::doa {

using Complex = std::complex<double>;

class DoaError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ArrayGeometry {
  std::vector<Eigen::Vector3d> positions;
  std::string description;

  std::size_t size() const { return positions.size(); }

  /// Five elements on a square pyramid with the given edge length: four base
  /// corners and an apex above the base centre, shifted so the element
  /// centroid is at the origin.
  static ArrayGeometry pyramid(double edge_m = 0.08);
  /// Throws DoaError for an empty list or coincident elements.
  static ArrayGeometry custom(std::vector<Eigen::Vector3d> positions, std::string description);

  /// Unique unordered element pairs (i < j) in lexicographic order.
  std::vector<std::pair<std::size_t, std::size_t>> pairs() const;
};

/// Selection of FFT bins used for wideband beamforming.
struct FrequencyBand {
  std::vector<std::size_t> bins;
  std::vector<double> omegas;  // rad/s, aligned with bins
  double resolution_hz = 0.0;
  std::size_t fft_len = 0;
  double sample_rate = 0.0;

  std::size_t size() const { return bins.size(); }

  /// Every `stride`-th bin of an fft_len transform whose centre frequency
  /// lies in [f_lo, f_hi]. Throws DoaError if that selects nothing.
  static FrequencyBand from_range(double f_lo, double f_hi, std::size_t fft_len, double sample_rate,
                                  std::size_t stride = 1);
};

/// Uniform conical-angle grid over [0, 180] degrees.
class ConicalGrid {
 public:
  explicit ConicalGrid(double resolution_deg = 0.25);

  double resolution() const { return resolution_; }
  std::size_t size() const { return count_; }
  double angle(std::size_t i) const { return resolution_ * static_cast<double>(i); }
  /// Nearest grid index to acos(cos_zeta); exact ties go to the smaller angle.
  std::size_t nearest(double cos_zeta) const;

 private:
  double resolution_;
  std::size_t count_;
};

struct Direction {
  double inclination_deg = 0.0;
  double azimuth_deg = 0.0;
};

struct AngleResponse {
  std::vector<Direction> directions;
  std::vector<double> powers;

  std::size_t argmax() const;
};

/// Unit vector in BFF pointing from the array towards a source at
/// (inclination, azimuth).
Eigen::Vector3d unit_direction(double inclination_deg, double azimuth_deg);

/// Great-circle separation of two directions in degrees.
double great_circle_deg(const Direction& a, const Direction& b);

/// Regular (inclination, azimuth) grid: inclination 0..180 inclusive,
/// azimuth 0..360 exclusive.
std::vector<Direction> direction_grid(double inclination_step_deg, double azimuth_step_deg);

/// Arrival-time offsets of a plane wave from (inclination, azimuth) at each
/// element relative to the origin. Throws DoaError for c <= 0.
std::vector<double> plane_wave_delays(const ArrayGeometry& geometry, double inclination_deg, double azimuth_deg,
                                      double sound_speed);

/// Wideband delay-and-sum power, averaged over the band's frequencies.
AngleResponse cbf_power(std::span<const std::vector<Complex>> spectra, const ArrayGeometry& geometry,
                        std::span<const Direction> directions, const FrequencyBand& band, double sound_speed);

/// Pair-decomposition beamformer. Steering tables hold one relative phase
/// per (conical angle, frequency) and are shared between pairs with the
/// same separation.
class SpdBeamformer {
 public:
  SpdBeamformer(ArrayGeometry geometry, FrequencyBand band, ConicalGrid conical, double sound_speed);

  const ArrayGeometry& geometry() const { return geometry_; }
  const FrequencyBand& band() const { return band_; }
  const ConicalGrid& conical() const { return conical_; }
  std::size_t pair_count() const { return pairs_.size(); }

  /// Per-pair band-averaged power over the conical grid (pair_count rows).
  std::vector<std::vector<double>> pair_responses(std::span<const std::vector<Complex>> spectra) const;

  /// Sums precomputed pair responses at the requested directions.
  std::vector<double> evaluate(const std::vector<std::vector<double>>& pair_responses,
                               std::span<const Direction> directions) const;

  /// Steering entries required: pairs x conical angles x frequencies.
  std::size_t steering_entry_count() const;

 private:
  struct Pair {
    std::size_t i;
    std::size_t j;
    Eigen::Vector3d axis;
    std::size_t table;
  };
  struct Table {
    double separation;
    std::vector<float> cos_part;
    std::vector<float> sin_part;
  };

  ArrayGeometry geometry_;
  FrequencyBand band_;
  ConicalGrid conical_;
  double sound_speed_;
  std::vector<Pair> pairs_;
  std::vector<std::shared_ptr<const Table>> tables_;
};

/// Steering entries a full conventional beamformer would precompute.
std::size_t cbf_steering_entry_count(std::size_t n_inclination, std::size_t n_azimuth, std::size_t n_elements,
                                     std::size_t n_frequencies);

AngleResponse spd_beamform(std::span<const std::vector<Complex>> spectra, const ArrayGeometry& geometry,
                           std::span<const Direction> eval_directions, const FrequencyBand& band,
                           const ConicalGrid& conical, double sound_speed);

std::vector<double> evaluate_at_particles(std::span<const std::vector<Complex>> spectra,
                                          const ArrayGeometry& geometry,
                                          std::span<const Direction> particle_directions,
                                          const FrequencyBand& band, const ConicalGrid& conical,
                                          double sound_speed);

/// Periodic azimuth bias lookup, indexed by measured azimuth.
class AzimuthBiasTable {
 public:
  AzimuthBiasTable() = default;
  /// Rows (azimuth_deg, bias_deg); azimuths are wrapped and sorted. Throws
  /// DoaError on duplicate azimuths.
  explicit AzimuthBiasTable(std::vector<std::pair<double, double>> rows);

  static AzimuthBiasTable zero() { return {}; }
  static AzimuthBiasTable constant(double bias_deg);
  /// CSV with header `azimuth_deg,bias_deg`.
  static AzimuthBiasTable load_csv(const std::string& path);
  void save_csv(const std::string& path) const;

  const std::vector<std::pair<double, double>>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }

  /// Linear interpolation with periodic wrap; zero for an empty table.
  double bias_at(double measured_azimuth_deg) const;
  /// Measured azimuth that corrects back to `azimuth_deg`, i.e. the inverse
  /// of correct_azimuth (fixed-point iteration).
  double measured_for(double azimuth_deg) const;

 private:
  std::vector<std::pair<double, double>> rows_;
};

/// raw - bias(raw), wrapped to [0, 360).
double correct_azimuth(double raw_azimuth_deg, const AzimuthBiasTable& table);

}  // namespace owtt::doa
