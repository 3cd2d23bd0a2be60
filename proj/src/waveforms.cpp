#include "owtt/waveforms.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace owtt::waveforms {
namespace {

constexpr double kTwoPi = 6.283185307179586476925;

double tukey(double t, double duration) {
  const double ramp = 0.5 * kTukeyRampFraction * duration;
  if (t < 0.0 || t >= duration) return 0.0;
  if (ramp <= 0.0) return 1.0;
  if (t < ramp) return 0.5 * (1.0 - std::cos(kTwoPi * 0.5 * t / ramp));
  if (t > duration - ramp) return 0.5 * (1.0 - std::cos(kTwoPi * 0.5 * (duration - t) / ramp));
  return 1.0;
}

double overlap_hz(std::pair<double, double> a, std::pair<double, double> b) {
  return std::max(0.0, std::min(a.second, b.second) - std::max(a.first, b.first));
}

}  // namespace

std::pair<double, double> Waveform::band() const {
  return {std::min(f_start_, f_end_), std::max(f_start_, f_end_)};
}

double Waveform::raw(double t) const {
  if (t < 0.0 || t >= duration_) return 0.0;
  const double rate = (f_end_ - f_start_) / duration_;
  const double phase = kTwoPi * (f_start_ * t + 0.5 * rate * t * t);
  return tukey(t, duration_) * std::sin(phase);
}

double Waveform::evaluate(double t) const { return scale_ * raw(t); }

double Waveform::instantaneous_frequency(double t) const {
  return f_start_ + (f_end_ - f_start_) * (t / duration_);
}

double Waveform::energy() const {
  double e = 0.0;
  for (double s : samples_) e += s * s;
  return e;
}

Waveform synth_lfm_chirp(double f_start, double f_end, double duration, double sample_rate) {
  if (!(sample_rate > 0.0)) throw WaveformError("sample rate must be positive");
  if (!(duration > 0.0)) throw WaveformError("chirp duration must be positive");
  const double nyquist = 0.5 * sample_rate;
  if (!(f_start > 0.0) || !(f_end > 0.0) || f_start >= nyquist || f_end >= nyquist) {
    throw WaveformError("chirp frequencies must lie in (0, sample_rate/2)");
  }
  Waveform w;
  w.f_start_ = f_start;
  w.f_end_ = f_end;
  w.duration_ = duration;
  w.sample_rate_ = sample_rate;
  const auto n = static_cast<std::size_t>(std::llround(duration * sample_rate));
  if (n == 0) throw WaveformError("chirp shorter than one sample");
  w.samples_.resize(n);
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w.samples_[i] = w.raw(static_cast<double>(i) / sample_rate);
    peak = std::max(peak, std::abs(w.samples_[i]));
  }
  if (peak == 0.0) throw WaveformError("chirp has no energy at this sample rate");
  w.scale_ = 1.0 / peak;
  for (double& s : w.samples_) s *= w.scale_;
  return w;
}

std::vector<ChirpSpec> default_chirp_specs() {
  return {
      {1, 7000.0, 9000.0, 0.020},
      {2, 10000.0, 8000.0, 0.020},
      {3, 8000.0, 6000.0, 0.020},
      {4, 9000.0, 11000.0, 0.020},
  };
}

const Waveform& TemplateBank::at(int mode) const {
  auto it = modes_.find(mode);
  if (it == modes_.end()) throw WaveformError("no template for mode " + std::to_string(mode));
  return it->second;
}

void TemplateBank::add_auxiliary(const std::string& name, Waveform w) {
  if (w.sample_rate() != sample_rate_) throw WaveformError("auxiliary template sample rate mismatch");
  aux_.insert_or_assign(name, std::move(w));
}

TemplateBank build_template_bank(std::span<const ChirpSpec> specs, double sample_rate) {
  if (specs.empty()) throw WaveformError("template bank needs at least one chirp");
  std::set<int> seen;
  for (const auto& s : specs) {
    if (s.mode < 1 || s.mode > 4) throw WaveformError("mode id out of range 1..4: " + std::to_string(s.mode));
    if (!seen.insert(s.mode).second) throw WaveformError("duplicate mode id " + std::to_string(s.mode));
  }
  TemplateBank bank;
  bank.sample_rate_ = sample_rate;
  for (const auto& s : specs) {
    bank.modes_.emplace(s.mode, synth_lfm_chirp(s.f_start, s.f_end, s.duration, sample_rate));
  }
  for (auto a = bank.modes_.begin(); a != bank.modes_.end(); ++a) {
    for (auto b = std::next(a); b != bank.modes_.end(); ++b) {
      const auto ba = a->second.band();
      const auto bb = b->second.band();
      const double narrower = std::min(ba.second - ba.first, bb.second - bb.first);
      const double ov = overlap_hz(ba, bb);
      const bool same_sense = a->second.is_upsweep() == b->second.is_upsweep();
      const bool identical = ba == bb && same_sense;
      const double limit = (same_sense ? kMaxSameSweepOverlap : kMaxOppositeSweepOverlap) * narrower;
      if (identical || ov > limit + 1e-9) {
        throw WaveformError("modes " + std::to_string(a->first) + " and " + std::to_string(b->first) +
                            " overlap beyond tolerance");
      }
    }
  }
  return bank;
}

TemplateBank default_template_bank(double sample_rate) {
  const auto specs = default_chirp_specs();
  return build_template_bank(specs, sample_rate);
}

}  // namespace owtt::waveforms
