#pragma once

// Broadcast waveforms and the per-mode template bank.

#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace owtt::waveforms {

class WaveformError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Fraction of a chirp's length covered by the Tukey cosine ramps (both
/// ends together).
inline constexpr double kTukeyRampFraction = 0.1;

/// A sampled, peak-normalised linear FM chirp. Besides its samples the
/// waveform can be evaluated in continuous time, which the channel
/// simulator uses to place arrivals at fractional-sample delays.
class Waveform {
 public:
  double sample_rate() const { return sample_rate_; }
  double f_start() const { return f_start_; }
  double f_end() const { return f_end_; }
  double duration() const { return duration_; }
  std::span<const double> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }

  /// (lower, upper) frequency of the sweep in Hz.
  std::pair<double, double> band() const;
  bool is_upsweep() const { return f_end_ >= f_start_; }

  /// Continuous-time value at t seconds after the chirp start; zero outside
  /// [0, duration).
  double evaluate(double t) const;
  double instantaneous_frequency(double t) const;
  double energy() const;

  friend Waveform synth_lfm_chirp(double, double, double, double);

 private:
  double raw(double t) const;

  double f_start_ = 0.0;
  double f_end_ = 0.0;
  double duration_ = 0.0;
  double sample_rate_ = 0.0;
  double scale_ = 1.0;
  std::vector<double> samples_;
};

/// Tukey-windowed LFM chirp sweeping f_start -> f_end, phase zero at t = 0.
/// Throws WaveformError on a Nyquist violation or a non-positive duration.
Waveform synth_lfm_chirp(double f_start, double f_end, double duration, double sample_rate);

struct ChirpSpec {
  int mode = 0;
  double f_start = 0.0;
  double f_end = 0.0;
  double duration = 0.0;
};

/// The four command chirps: 7-9, 10-8, 8-6 and 9-11 kHz, 20 ms each.
std::vector<ChirpSpec> default_chirp_specs();

/// Ordered mode-id (1..4) -> waveform, plus optional named auxiliary
/// entries (e.g. the LBL beacon signals). All entries share a sample rate.
class TemplateBank {
 public:
  const Waveform& at(int mode) const;
  bool contains(int mode) const { return modes_.count(mode) != 0; }
  const std::map<int, Waveform>& modes() const { return modes_; }
  std::size_t size() const { return modes_.size(); }
  double sample_rate() const { return sample_rate_; }

  void add_auxiliary(const std::string& name, Waveform w);
  const std::map<std::string, Waveform>& auxiliary() const { return aux_; }

  friend TemplateBank build_template_bank(std::span<const ChirpSpec>, double);

 private:
  double sample_rate_ = 0.0;
  std::map<int, Waveform> modes_;
  std::map<std::string, Waveform> aux_;
};

/// Maximum tolerated band overlap, as a fraction of the narrower band, for
/// two chirps sweeping in the same direction (they are only separable in
/// frequency) and in opposite directions (the sweep sense separates them).
inline constexpr double kMaxSameSweepOverlap = 0.1;
inline constexpr double kMaxOppositeSweepOverlap = 0.5;

/// Throws WaveformError for an empty spec list, duplicate or out-of-range
/// mode ids, or band overlap beyond the tolerances above.
TemplateBank build_template_bank(std::span<const ChirpSpec> specs, double sample_rate);

TemplateBank default_template_bank(double sample_rate);

}  // namespace owtt::waveforms
