#include "owtt/ranging.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "owtt/fft.hpp"

namespace owtt::ranging {
namespace {

constexpr char kDumpMagic[4] = {'O', 'W', 'R', 'D'};
constexpr std::uint32_t kDumpVersion = 1;

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

// IFFT of whitened * conj(template), truncated to the non-negative lags.
std::vector<double> correlate(std::span<const Complex> whitened, std::span<const Complex> template_spectrum,
                              std::size_t fft_len, std::size_t n_out) {
  std::vector<Complex> prod(whitened.size());
  for (std::size_t k = 0; k < prod.size(); ++k) prod[k] = whitened[k] * std::conj(template_spectrum[k]);
  auto y = dsp::irfft(prod, fft_len);
  y.resize(n_out);
  return y;
}

}  // namespace

void ElementRecording::validate(std::size_t expected) const {
  for (const auto& ch : channels) {
    if (ch.size() != expected) {
      throw RangingError("recording channel has " + std::to_string(ch.size()) + " samples, expected " +
                         std::to_string(expected));
    }
  }
}

RangeDistribution::RangeDistribution(std::vector<double> weights, double bin_width_m)
    : weights_(std::move(weights)), bin_width_(bin_width_m) {
  if (weights_.empty()) throw RangingError("empty range distribution");
  if (!(bin_width_ > 0.0)) throw RangingError("range bin width must be positive");
}

std::size_t RangeDistribution::nearest_bin(double range_m) const {
  const double idx = std::round(range_m / bin_width_);
  if (!(idx > 0.0)) return 0;
  const auto last = static_cast<double>(weights_.size() - 1);
  return static_cast<std::size_t>(std::min(idx, last));
}

std::size_t RangeDistribution::argmax() const {
  return static_cast<std::size_t>(std::max_element(weights_.begin(), weights_.end()) - weights_.begin());
}

std::vector<Complex> phat_whiten(std::span<const Complex> spectrum) {
  std::vector<Complex> out(spectrum.size());
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    const double mag = std::abs(spectrum[k]);
    out[k] = mag > 0.0 ? spectrum[k] / mag : Complex{0.0, 0.0};
  }
  return out;
}

std::vector<double> matched_filter(std::span<const double> channel, double channel_sample_rate,
                                   const waveforms::Waveform& tmpl) {
  if (channel_sample_rate != tmpl.sample_rate()) {
    throw RangingError("channel and template sample rates differ");
  }
  if (channel.empty()) return {};
  const std::size_t fft_len = dsp::next_pow2(channel.size() + tmpl.size());
  const auto whitened = phat_whiten(dsp::rfft(channel, fft_len));
  const auto s = dsp::rfft(tmpl.samples(), fft_len);
  return correlate(whitened, s, fft_len, channel.size());
}

bool consistency_check(std::span<const std::size_t> argmaxima, std::size_t bound) {
  if (argmaxima.empty()) return false;
  const auto [lo, hi] = std::minmax_element(argmaxima.begin(), argmaxima.end());
  return *hi - *lo <= bound;
}

std::vector<double> combine_elements(std::span<const std::vector<double>> per_element) {
  if (per_element.empty()) return {};
  const std::size_t n = per_element[0].size();
  for (const auto& y : per_element) {
    if (y.size() != n) throw RangingError("element correlation lengths differ");
  }
  // sum_{i<j} a_i a_j = ((sum a)^2 - sum a^2) / 2 would lose precision for
  // small products; the explicit pair loop is cheap at five elements.
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < per_element.size(); ++i) {
    for (std::size_t j = i + 1; j < per_element.size(); ++j) {
      const auto& a = per_element[i];
      const auto& b = per_element[j];
      for (std::size_t k = 0; k < n; ++k) out[k] += std::abs(a[k]) * std::abs(b[k]);
    }
  }
  return out;
}

RangeDistribution normalize_to_range(std::span<const double> combined, double sound_speed, double sample_rate) {
  if (!(sound_speed > 0.0) || !(sample_rate > 0.0)) throw RangingError("sound speed and sample rate must be positive");
  double energy = 0.0;
  for (double v : combined) {
    if (v < 0.0) throw RangingError("combined response must be non-negative");
    energy += v * v;
  }
  if (!(energy > 0.0)) throw RangingError("combined response is all zero");
  const double norm = std::sqrt(energy);
  std::vector<double> w(combined.begin(), combined.end());
  for (double& v : w) v /= norm;
  return RangeDistribution(std::move(w), sound_speed / sample_rate);
}

std::size_t argmax_abs(std::span<const double> v) {
  std::size_t best = 0;
  double best_val = -1.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > best_val) {
      best_val = a;
      best = i;
    }
  }
  return best;
}

void ModeDecision::push(std::optional<int> winner) {
  history.push_back(winner);
  while (history.size() > kHistoryLength) history.pop_front();
  if (history.size() < kStreak) return;
  const auto tail = history.end() - static_cast<std::ptrdiff_t>(kStreak);
  if (!tail->has_value()) return;
  if (std::all_of(tail, history.end(), [&](const auto& h) { return h == *tail; })) confirmed = *tail;
}

ReceptionProcessor::ReceptionProcessor(const waveforms::TemplateBank& bank, std::size_t n_samples,
                                       DetectionConfig config)
    : n_samples_(n_samples), sample_rate_(bank.sample_rate()), config_(config) {
  if (bank.size() == 0) throw RangingError("template bank is empty");
  std::size_t longest = 0;
  for (const auto& [mode, w] : bank.modes()) longest = std::max(longest, w.size());
  fft_len_ = dsp::next_pow2(n_samples_ + longest);
  for (const auto& [mode, w] : bank.modes()) template_spectra_.emplace(mode, dsp::rfft(w.samples(), fft_len_));
}

ReceptionAnalysis ReceptionProcessor::analyze(const ElementRecording& recording) const {
  recording.validate(n_samples_);
  if (recording.sample_rate != sample_rate_) throw RangingError("recording and template bank sample rates differ");

  ReceptionAnalysis out;
  out.fft_len = fft_len_;
  std::vector<std::vector<Complex>> whitened;
  whitened.reserve(kElements);
  for (const auto& ch : recording.channels) {
    out.spectra.push_back(dsp::rfft(ch, fft_len_));
    whitened.push_back(phat_whiten(out.spectra.back()));
  }

  double best_peak = 0.0;
  for (const auto& [mode, s] : template_spectra_) {
    std::vector<std::vector<double>> per_element;
    per_element.reserve(kElements);
    ModeResponse resp;
    for (std::size_t i = 0; i < kElements; ++i) {
      per_element.push_back(correlate(whitened[i], s, fft_len_, n_samples_));
      resp.element_argmax[i] = argmax_abs(per_element.back());
    }
    resp.combined = combine_elements(per_element);
    resp.peak = resp.combined.empty() ? 0.0 : *std::max_element(resp.combined.begin(), resp.combined.end());
    resp.median = median_of(resp.combined);
    resp.detected = resp.peak > 0.0 && resp.peak > config_.threshold * resp.median;
    resp.consistent = consistency_check(resp.element_argmax, config_.consistency_bound);
    if (resp.detected && resp.peak > best_peak) {
      best_peak = resp.peak;
      out.winner = mode;
    }
    out.responses.emplace(mode, std::move(resp));
  }
  return out;
}

void update_decision(const ReceptionAnalysis& analysis, ModeDecision& decision) {
  decision.peak_scores.clear();
  for (const auto& [mode, r] : analysis.responses) decision.peak_scores[mode] = r.peak;
  decision.push(analysis.winner);
}

ModeDecision identify_mode(const ElementRecording& recording, const waveforms::TemplateBank& bank,
                           ModeDecision decision, const DetectionConfig& config) {
  const ReceptionProcessor proc(bank, recording.n_samples(), config);
  update_decision(proc.analyze(recording), decision);
  return decision;
}

RowDumpWriter::RowDumpWriter(const std::string& path, double sample_rate, double sound_speed, std::uint32_t n_bins)
    : out_(path, std::ios::binary), n_bins_(n_bins) {
  if (!out_) throw std::runtime_error("cannot open dump file " + path);
  const float fs = static_cast<float>(sample_rate);
  const float c = static_cast<float>(sound_speed);
  out_.write(kDumpMagic, 4);
  out_.write(reinterpret_cast<const char*>(&kDumpVersion), sizeof kDumpVersion);
  out_.write(reinterpret_cast<const char*>(&fs), sizeof fs);
  out_.write(reinterpret_cast<const char*>(&c), sizeof c);
  out_.write(reinterpret_cast<const char*>(&n_bins_), sizeof n_bins_);
}

void RowDumpWriter::write_row(std::span<const double> row) {
  if (row.size() != n_bins_) throw std::invalid_argument("dump row length mismatch");
  std::vector<float> f(row.begin(), row.end());
  out_.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(float)));
}

RowDump read_row_dump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dump file " + path);
  char magic[4];
  std::uint32_t version = 0;
  RowDump d;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&d.sample_rate), sizeof d.sample_rate);
  in.read(reinterpret_cast<char*>(&d.sound_speed), sizeof d.sound_speed);
  in.read(reinterpret_cast<char*>(&d.n_bins), sizeof d.n_bins);
  if (!in || std::memcmp(magic, kDumpMagic, 4) != 0 || version != kDumpVersion) {
    throw std::runtime_error("not a range dump: " + path);
  }
  std::vector<float> row(d.n_bins);
  while (in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)))) {
    d.rows.push_back(row);
  }
  return d;
}

}  // namespace owtt::ranging
