#include "owtt/doa.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>

#include "owtt/geometry.hpp"

namespace owtt::doa {
namespace {

using geometry::deg2rad;
using geometry::rad2deg;

using TableKey = std::tuple<double, std::size_t, double, std::size_t, std::size_t, std::size_t, double, double>;

// Steering tables depend only on separation, band and grid, so they are
// shared across beamformer instances (one per vehicle and mode).
class TableCache {
 public:
  template <typename Build>
  auto get(const TableKey& key, Build build) {
    std::lock_guard lock(mutex_);
    auto it = tables_.find(key);
    if (it != tables_.end()) return it->second;
    auto t = build();
    tables_.emplace(key, t);
    return t;
  }

 private:
  std::mutex mutex_;
  std::map<TableKey, std::shared_ptr<const void>> tables_;
};

TableCache& table_cache() {
  static TableCache c;
  return c;
}

void check_spectra(std::span<const std::vector<Complex>> spectra, const ArrayGeometry& geometry,
                   const FrequencyBand& band) {
  if (band.bins.empty()) throw DoaError("empty frequency band");
  if (spectra.size() != geometry.size()) throw DoaError("one spectrum per element required");
  const std::size_t need = band.bins.back() + 1;
  for (const auto& s : spectra) {
    if (s.size() < need) throw DoaError("spectrum shorter than the band requires");
  }
}

}  // namespace

ArrayGeometry ArrayGeometry::pyramid(double edge_m) {
  if (!(edge_m > 0.0)) throw DoaError("pyramid edge must be positive");
  const double h = edge_m / std::sqrt(2.0);
  const double a = 0.5 * edge_m;
  std::vector<Eigen::Vector3d> p = {
      {a, a, 0.0}, {-a, a, 0.0}, {-a, -a, 0.0}, {a, -a, 0.0}, {0.0, 0.0, h},
  };
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& v : p) centroid += v;
  centroid /= static_cast<double>(p.size());
  for (auto& v : p) v -= centroid;
  return custom(std::move(p), "pyramid " + std::to_string(edge_m) + " m");
}

ArrayGeometry ArrayGeometry::custom(std::vector<Eigen::Vector3d> positions, std::string description) {
  if (positions.empty()) throw DoaError("array needs at least one element");
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (std::size_t j = i + 1; j < positions.size(); ++j) {
      if ((positions[i] - positions[j]).norm() <= 0.0) throw DoaError("coincident array elements");
    }
  }
  return ArrayGeometry{std::move(positions), std::move(description)};
}

std::vector<std::pair<std::size_t, std::size_t>> ArrayGeometry::pairs() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (std::size_t j = i + 1; j < positions.size(); ++j) out.emplace_back(i, j);
  }
  return out;
}

FrequencyBand FrequencyBand::from_range(double f_lo, double f_hi, std::size_t fft_len, double sample_rate,
                                        std::size_t stride) {
  if (fft_len == 0 || !(sample_rate > 0.0) || stride == 0) throw DoaError("invalid band parameters");
  if (f_lo > f_hi) std::swap(f_lo, f_hi);
  FrequencyBand b;
  b.fft_len = fft_len;
  b.sample_rate = sample_rate;
  b.resolution_hz = sample_rate / static_cast<double>(fft_len);
  const auto first = static_cast<std::size_t>(std::ceil(f_lo / b.resolution_hz));
  const std::size_t last = std::min(fft_len / 2, static_cast<std::size_t>(std::floor(f_hi / b.resolution_hz)));
  for (std::size_t k = first; k <= last; k += stride) {
    b.bins.push_back(k);
    b.omegas.push_back(2.0 * geometry::kPi * b.resolution_hz * static_cast<double>(k));
  }
  if (b.bins.empty()) throw DoaError("frequency range selects no FFT bins");
  return b;
}

ConicalGrid::ConicalGrid(double resolution_deg) : resolution_(resolution_deg) {
  if (!(resolution_deg > 0.0) || resolution_deg > 180.0) throw DoaError("conical resolution must be in (0, 180]");
  count_ = static_cast<std::size_t>(std::llround(180.0 / resolution_deg)) + 1;
}

std::size_t ConicalGrid::nearest(double cos_zeta) const {
  const double zeta = rad2deg(std::acos(std::clamp(cos_zeta, -1.0, 1.0)));
  const double x = std::ceil(zeta / resolution_ - 0.5);
  if (!(x > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(x), count_ - 1);
}

std::size_t AngleResponse::argmax() const {
  if (powers.empty()) throw DoaError("empty angle response");
  return static_cast<std::size_t>(std::max_element(powers.begin(), powers.end()) - powers.begin());
}

Eigen::Vector3d unit_direction(double inclination_deg, double azimuth_deg) {
  const double t = deg2rad(inclination_deg);
  const double p = deg2rad(azimuth_deg);
  return {std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), std::cos(t)};
}

double great_circle_deg(const Direction& a, const Direction& b) {
  const double d = unit_direction(a.inclination_deg, a.azimuth_deg).dot(unit_direction(b.inclination_deg, b.azimuth_deg));
  return rad2deg(std::acos(std::clamp(d, -1.0, 1.0)));
}

std::vector<Direction> direction_grid(double inclination_step_deg, double azimuth_step_deg) {
  if (!(inclination_step_deg > 0.0) || !(azimuth_step_deg > 0.0)) throw DoaError("grid steps must be positive");
  const auto n_inc = static_cast<std::size_t>(std::llround(180.0 / inclination_step_deg)) + 1;
  const auto n_az = static_cast<std::size_t>(std::llround(360.0 / azimuth_step_deg));
  std::vector<Direction> out;
  out.reserve(n_inc * n_az);
  for (std::size_t i = 0; i < n_inc; ++i) {
    for (std::size_t j = 0; j < n_az; ++j) {
      out.push_back({inclination_step_deg * static_cast<double>(i), azimuth_step_deg * static_cast<double>(j)});
    }
  }
  return out;
}

std::vector<double> plane_wave_delays(const ArrayGeometry& geometry, double inclination_deg, double azimuth_deg,
                                      double sound_speed) {
  if (!(sound_speed > 0.0)) throw DoaError("sound speed must be positive");
  const Eigen::Vector3d a = -unit_direction(inclination_deg, azimuth_deg);
  std::vector<double> tau;
  tau.reserve(geometry.size());
  for (const auto& p : geometry.positions) tau.push_back(a.dot(p) / sound_speed);
  return tau;
}

AngleResponse cbf_power(std::span<const std::vector<Complex>> spectra, const ArrayGeometry& geometry,
                        std::span<const Direction> directions, const FrequencyBand& band, double sound_speed) {
  check_spectra(spectra, geometry, band);
  AngleResponse out;
  out.directions.assign(directions.begin(), directions.end());
  out.powers.reserve(directions.size());
  const double inv_m = 1.0 / static_cast<double>(band.size());
  for (const auto& d : directions) {
    const auto tau = plane_wave_delays(geometry, d.inclination_deg, d.azimuth_deg, sound_speed);
    double power = 0.0;
    for (std::size_t k = 0; k < band.size(); ++k) {
      Complex y{0.0, 0.0};
      for (std::size_t i = 0; i < geometry.size(); ++i) {
        y += std::polar(1.0, band.omegas[k] * tau[i]) * spectra[i][band.bins[k]];
      }
      power += std::norm(y);
    }
    out.powers.push_back(power * inv_m);
  }
  return out;
}

SpdBeamformer::SpdBeamformer(ArrayGeometry geometry, FrequencyBand band, ConicalGrid conical, double sound_speed)
    : geometry_(std::move(geometry)), band_(std::move(band)), conical_(conical), sound_speed_(sound_speed) {
  if (!(sound_speed_ > 0.0)) throw DoaError("sound speed must be positive");
  if (band_.bins.empty()) throw DoaError("empty frequency band");
  const std::size_t m = band_.size();
  const std::size_t nz = conical_.size();
  for (const auto& [i, j] : geometry_.pairs()) {
    const Eigen::Vector3d diff = geometry_.positions[j] - geometry_.positions[i];
    const double sep = diff.norm();
    // Separations agree to well below a micron for symmetric arrays; round so
    // floating-point noise does not split shared tables.
    const double sep_key = std::round(sep * 1e9) / 1e9;
    const TableKey key{sep_key, band_.fft_len, band_.sample_rate, band_.bins.front(), band_.bins.back(), m,
                       conical_.resolution(), sound_speed_};
    auto shared = table_cache().get(key, [&]() -> std::shared_ptr<const void> {
      auto t = std::make_shared<Table>();
      t->separation = sep_key;
      t->cos_part.resize(nz * m);
      t->sin_part.resize(nz * m);
      for (std::size_t z = 0; z < nz; ++z) {
        const double lag = sep_key * std::cos(deg2rad(conical_.angle(z))) / sound_speed_;
        for (std::size_t k = 0; k < m; ++k) {
          const double ph = band_.omegas[k] * lag;
          t->cos_part[z * m + k] = static_cast<float>(std::cos(ph));
          t->sin_part[z * m + k] = static_cast<float>(std::sin(ph));
        }
      }
      return t;
    });
    auto table = std::static_pointer_cast<const Table>(shared);
    std::size_t idx = tables_.size();
    for (std::size_t t = 0; t < tables_.size(); ++t) {
      if (tables_[t] == table) idx = t;
    }
    if (idx == tables_.size()) tables_.push_back(table);
    pairs_.push_back({i, j, diff / sep, idx});
  }
}

std::vector<std::vector<double>> SpdBeamformer::pair_responses(std::span<const std::vector<Complex>> spectra) const {
  check_spectra(spectra, geometry_, band_);
  const std::size_t m = band_.size();
  const std::size_t nz = conical_.size();
  const double inv_m = 1.0 / static_cast<double>(m);
  std::vector<std::vector<double>> out;
  out.reserve(pairs_.size());
  std::vector<float> cr(m), ci(m);
  for (const auto& pr : pairs_) {
    // |H X_i + X_j|^2 = |X_i|^2 + |X_j|^2 + 2 Re(H X_i conj(X_j)) for |H| = 1.
    double base = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const Complex xi = spectra[pr.i][band_.bins[k]];
      const Complex xj = spectra[pr.j][band_.bins[k]];
      const Complex c = xi * std::conj(xj);
      cr[k] = static_cast<float>(c.real());
      ci[k] = static_cast<float>(c.imag());
      base += std::norm(xi) + std::norm(xj);
    }
    const Table& t = *tables_[pr.table];
    std::vector<double> resp(nz);
    for (std::size_t z = 0; z < nz; ++z) {
      const float* cp = t.cos_part.data() + z * m;
      const float* sp = t.sin_part.data() + z * m;
      float acc = 0.0f;
      for (std::size_t k = 0; k < m; ++k) acc += cp[k] * cr[k] - sp[k] * ci[k];
      resp[z] = std::max(0.0, (base + 2.0 * static_cast<double>(acc)) * inv_m);
    }
    out.push_back(std::move(resp));
  }
  return out;
}

std::vector<double> SpdBeamformer::evaluate(const std::vector<std::vector<double>>& pair_responses,
                                            std::span<const Direction> directions) const {
  if (pair_responses.size() != pairs_.size()) throw DoaError("pair response count mismatch");
  std::vector<double> out;
  out.reserve(directions.size());
  for (const auto& d : directions) {
    const Eigen::Vector3d u = unit_direction(d.inclination_deg, d.azimuth_deg);
    double p = 0.0;
    for (std::size_t q = 0; q < pairs_.size(); ++q) p += pair_responses[q][conical_.nearest(u.dot(pairs_[q].axis))];
    out.push_back(p);
  }
  return out;
}

std::size_t SpdBeamformer::steering_entry_count() const {
  return pairs_.size() * conical_.size() * band_.size();
}

std::size_t cbf_steering_entry_count(std::size_t n_inclination, std::size_t n_azimuth, std::size_t n_elements,
                                     std::size_t n_frequencies) {
  return n_inclination * n_azimuth * n_elements * n_frequencies;
}

AngleResponse spd_beamform(std::span<const std::vector<Complex>> spectra, const ArrayGeometry& geometry,
                           std::span<const Direction> eval_directions, const FrequencyBand& band,
                           const ConicalGrid& conical, double sound_speed) {
  if (eval_directions.empty()) throw DoaError("no evaluation directions");
  const SpdBeamformer bf(geometry, band, conical, sound_speed);
  AngleResponse out;
  out.directions.assign(eval_directions.begin(), eval_directions.end());
  out.powers = bf.evaluate(bf.pair_responses(spectra), eval_directions);
  return out;
}

std::vector<double> evaluate_at_particles(std::span<const std::vector<Complex>> spectra,
                                          const ArrayGeometry& geometry,
                                          std::span<const Direction> particle_directions,
                                          const FrequencyBand& band, const ConicalGrid& conical,
                                          double sound_speed) {
  return spd_beamform(spectra, geometry, particle_directions, band, conical, sound_speed).powers;
}

AzimuthBiasTable::AzimuthBiasTable(std::vector<std::pair<double, double>> rows) : rows_(std::move(rows)) {
  for (auto& r : rows_) r.first = geometry::wrap_360(r.first);
  std::sort(rows_.begin(), rows_.end());
  for (std::size_t i = 1; i < rows_.size(); ++i) {
    if (rows_[i].first == rows_[i - 1].first) throw DoaError("duplicate azimuth in bias table");
  }
}

AzimuthBiasTable AzimuthBiasTable::constant(double bias_deg) {
  return AzimuthBiasTable({{0.0, bias_deg}});
}

AzimuthBiasTable AzimuthBiasTable::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DoaError("cannot open bias table " + path);
  std::vector<std::pair<double, double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.rfind("azimuth", 0) == 0) continue;
    std::istringstream ss(line);
    std::string a, b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b)) {
      throw DoaError(path + ":" + std::to_string(line_no) + ": expected azimuth_deg,bias_deg");
    }
    try {
      rows.emplace_back(std::stod(a), std::stod(b));
    } catch (const std::exception&) {
      throw DoaError(path + ":" + std::to_string(line_no) + ": not a number");
    }
  }
  return AzimuthBiasTable(std::move(rows));
}

void AzimuthBiasTable::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DoaError("cannot write bias table " + path);
  out << "azimuth_deg,bias_deg\n";
  out.precision(10);
  for (const auto& [az, b] : rows_) out << az << ',' << b << '\n';
}

double AzimuthBiasTable::bias_at(double measured_azimuth_deg) const {
  if (rows_.empty()) return 0.0;
  if (rows_.size() == 1) return rows_[0].second;
  const double az = geometry::wrap_360(measured_azimuth_deg);
  auto hi = std::upper_bound(rows_.begin(), rows_.end(), az,
                             [](double v, const std::pair<double, double>& r) { return v < r.first; });
  // Interval wraps through 360 when az lies before the first or after the last row.
  const auto& upper = hi == rows_.end() ? rows_.front() : *hi;
  const auto& lower = hi == rows_.begin() ? rows_.back() : *std::prev(hi);
  double x0 = lower.first;
  double x1 = upper.first;
  double x = az;
  if (x1 <= x0) x1 += 360.0;
  if (x < x0) x += 360.0;
  const double f = (x - x0) / (x1 - x0);
  return lower.second + f * (upper.second - lower.second);
}

double AzimuthBiasTable::measured_for(double azimuth_deg) const {
  double m = azimuth_deg;
  for (int it = 0; it < 50; ++it) {
    const double next = azimuth_deg + bias_at(m);
    if (std::abs(geometry::wrap_180(next - m)) < 1e-9) return geometry::wrap_360(next);
    m = next;
  }
  return geometry::wrap_360(m);
}

double correct_azimuth(double raw_azimuth_deg, const AzimuthBiasTable& table) {
  return geometry::wrap_360(raw_azimuth_deg - table.bias_at(raw_azimuth_deg));
}

}  // namespace owtt::doa
