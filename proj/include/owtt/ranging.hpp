#pragma once

// Range measurement: PHAT-whitened matched filtering of each array element,
// pairwise combination across elements and normalisation into a
// unit-energy pseudo-distribution over range. Also hosts the mode
// identification that picks the broadcast replica with the largest response.

#include <array>
#include <complex>
#include <cstdint>
#include <deque>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "owtt/waveforms.hpp"

namespace owtt::ranging {

using Complex = std::complex<double>;

inline constexpr std::size_t kElements = 5;
inline constexpr std::size_t kDefaultCaptureSamples = 8000;
inline constexpr double kDefaultSampleRate = 37500.0;
inline constexpr double kDefaultSoundSpeed = 1481.0;
/// Arg-maxima of all elements must lie within this many samples (inclusive).
inline constexpr std::size_t kConsistencyBound = 15;
/// A replica counts as detected when the combined response peak exceeds
/// this multiple of the combined response median.
inline constexpr double kDefaultDetectionThreshold = 16.0;

class RangingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One PPS-triggered capture, x_i[n] for the five array elements.
struct ElementRecording {
  std::array<std::vector<double>, kElements> channels;
  double sample_rate = kDefaultSampleRate;
  /// Whole-second PPS instant that started the capture.
  double trigger_epoch = 0.0;

  std::size_t n_samples() const { return channels[0].size(); }
  /// Throws RangingError unless every channel has `expected` samples.
  void validate(std::size_t expected) const;
};

/// Unit-energy pseudo-distribution over range bins of width c/F_s.
class RangeDistribution {
 public:
  /// Weights must be non-negative with sum of squares 1.
  RangeDistribution(std::vector<double> weights, double bin_width_m);

  std::span<const double> weights() const { return weights_; }
  double bin_width() const { return bin_width_; }
  double max_range() const { return bin_width_ * static_cast<double>(weights_.size()); }
  std::size_t size() const { return weights_.size(); }

  double range_of_bin(std::size_t n) const { return bin_width_ * static_cast<double>(n); }
  /// Nearest bin, clamped to [0, size-1].
  std::size_t nearest_bin(double range_m) const;
  /// Weight at the nearest bin.
  double at(double range_m) const { return weights_[nearest_bin(range_m)]; }
  std::size_t argmax() const;
  double mle_range() const { return range_of_bin(argmax()); }

 private:
  std::vector<double> weights_;
  double bin_width_;
};

/// X / |X| bin-wise; zero bins stay zero.
std::vector<Complex> phat_whiten(std::span<const Complex> spectrum);

/// Linear correlation of the PHAT-whitened channel with the template,
/// y[n] = sum_k xhat[k] s[k - n], for n in [0, channel.size()). Computed in
/// the frequency domain with an FFT of length next_pow2(n + template).
/// Throws RangingError on a sample-rate mismatch.
std::vector<double> matched_filter(std::span<const double> channel, double channel_sample_rate,
                                   const waveforms::Waveform& tmpl);

/// True iff max - min of the per-element arg-maxima is <= bound.
bool consistency_check(std::span<const std::size_t> argmaxima, std::size_t bound = kConsistencyBound);

/// yhat[n] = sum over unordered pairs i<j of |y_i[n]| |y_j[n]|.
/// Throws RangingError on unequal lengths.
std::vector<double> combine_elements(std::span<const std::vector<double>> per_element);

/// Normalises to unit energy; bin n maps to range (c / F_s) n.
/// Throws RangingError for an all-zero or negative input.
RangeDistribution normalize_to_range(std::span<const double> combined, double sound_speed, double sample_rate);

std::size_t argmax_abs(std::span<const double> v);

struct DetectionConfig {
  double threshold = kDefaultDetectionThreshold;
  std::size_t consistency_bound = kConsistencyBound;
};

/// Rolling mode-identification state owned by one vehicle pipeline.
/// `confirmed` latches a mode once the last three winners agree; a null
/// entry (no detection) breaks any streak but leaves the latch alone.
struct ModeDecision {
  static constexpr std::size_t kStreak = 3;
  static constexpr std::size_t kHistoryLength = 8;

  std::deque<std::optional<int>> history;
  std::optional<int> confirmed;
  std::map<int, double> peak_scores;

  void push(std::optional<int> winner);
};

/// Response of one replica across the array.
struct ModeResponse {
  std::vector<double> combined;
  std::array<std::size_t, kElements> element_argmax{};
  double peak = 0.0;
  double median = 0.0;
  bool detected = false;
  bool consistent = false;
};

/// Everything downstream stages need from one capture.
struct ReceptionAnalysis {
  std::size_t fft_len = 0;
  /// Raw (un-whitened) element spectra, fft_len/2 + 1 bins each.
  std::vector<std::vector<Complex>> spectra;
  std::map<int, ModeResponse> responses;
  /// Replica with the largest detected peak, if any.
  std::optional<int> winner;
};

/// Runs the matched-filter bank over a capture, transforming each channel
/// once and reusing the spectra across replicas and for beamforming.
class ReceptionProcessor {
 public:
  ReceptionProcessor(const waveforms::TemplateBank& bank, std::size_t n_samples, DetectionConfig config = {});

  std::size_t fft_len() const { return fft_len_; }
  std::size_t n_samples() const { return n_samples_; }
  const DetectionConfig& config() const { return config_; }

  ReceptionAnalysis analyze(const ElementRecording& recording) const;

 private:
  std::size_t n_samples_;
  std::size_t fft_len_;
  double sample_rate_;
  DetectionConfig config_;
  std::map<int, std::vector<Complex>> template_spectra_;
};

/// Matched-filters the capture against every replica, appends the winner (or
/// a null entry when nothing clears the threshold) and updates the latch.
ModeDecision identify_mode(const ElementRecording& recording, const waveforms::TemplateBank& bank,
                           ModeDecision decision, const DetectionConfig& config = {});

/// Applies the decision rule to an already computed analysis.
void update_decision(const ReceptionAnalysis& analysis, ModeDecision& decision);

/// Binary dump of float32 rows: header {magic "OWRD", u32 version, f32 F_s,
/// f32 c, u32 n_bins} followed by n_bins float32 values per row.
class RowDumpWriter {
 public:
  RowDumpWriter(const std::string& path, double sample_rate, double sound_speed, std::uint32_t n_bins);
  void write_row(std::span<const double> row);

 private:
  std::ofstream out_;
  std::uint32_t n_bins_;
};

struct RowDump {
  float sample_rate = 0.0f;
  float sound_speed = 0.0f;
  std::uint32_t n_bins = 0;
  std::vector<std::vector<float>> rows;
};

RowDump read_row_dump(const std::string& path);

}  // namespace owtt::ranging
