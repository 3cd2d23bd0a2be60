#include "doctest.h"

#include <numeric>
#include <set>

#include "owtt/fft.hpp"
#include "owtt/waveforms.hpp"

using namespace owtt::waveforms;

namespace {

constexpr double kFs = 37500.0;

double out_of_band_fraction(const Waveform& w) {
  const std::size_t n = 1 << 16;
  const auto spec = owtt::dsp::rfft(w.samples(), n);
  const auto [lo, hi] = w.band();
  double in = 0.0, total = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double f = static_cast<double>(k) * kFs / static_cast<double>(n);
    const double p = std::norm(spec[k]);
    total += p;
    if (f >= lo && f <= hi) in += p;
  }
  return 1.0 - in / total;
}

}  // namespace

TEST_CASE("mode 1 chirp length and sweep") {
  const auto w = synth_lfm_chirp(7000, 9000, 0.020, kFs);
  CHECK(w.size() == 750);
  CHECK(w.is_upsweep());
  CHECK(w.instantaneous_frequency(0.010) == doctest::Approx(8000.0));
  CHECK(w.instantaneous_frequency(0.0) == doctest::Approx(7000.0));
  CHECK(w.evaluate(0.0) == doctest::Approx(0.0));  // phase zero, window ramp at zero
  CHECK(w.evaluate(-1e-3) == 0.0);
  CHECK(w.evaluate(0.021) == 0.0);
}

TEST_CASE("zero sweep gives a pure tone") {
  const auto w = synth_lfm_chirp(5000, 5000, 0.020, kFs);
  CHECK(w.instantaneous_frequency(0.003) == doctest::Approx(5000.0));
  CHECK(w.instantaneous_frequency(0.017) == doctest::Approx(5000.0));
  const auto spec = owtt::dsp::rfft(w.samples(), 1 << 15);
  std::size_t best = 0;
  for (std::size_t k = 1; k < spec.size(); ++k) {
    if (std::abs(spec[k]) > std::abs(spec[best])) best = k;
  }
  CHECK(static_cast<double>(best) * kFs / (1 << 15) == doctest::Approx(5000.0).epsilon(0.002));
}

TEST_CASE("chirp synthesis rejects bad parameters") {
  CHECK_THROWS_AS(synth_lfm_chirp(7000, 20000, 0.02, kFs), WaveformError);
  CHECK_THROWS_AS(synth_lfm_chirp(7000, 9000, 0.0, kFs), WaveformError);
}

TEST_CASE("default bank carries the four command chirps") {
  const auto bank = default_template_bank(kFs);
  REQUIRE(bank.size() == 4);
  const std::map<int, std::pair<double, double>> bands{{1, {7000, 9000}}, {2, {8000, 10000}},
                                                       {3, {6000, 8000}}, {4, {9000, 11000}}};
  for (const auto& [mode, band] : bands) {
    CHECK(bank.at(mode).band() == band);
    CHECK(bank.at(mode).size() == 750);
  }
  CHECK(bank.at(1).is_upsweep());
  CHECK_FALSE(bank.at(2).is_upsweep());
  CHECK_FALSE(bank.at(3).is_upsweep());
  CHECK(bank.at(4).is_upsweep());
  CHECK_THROWS(bank.at(5));
}

TEST_CASE("singleton bank and duplicate modes") {
  const std::vector<ChirpSpec> one{{1, 7000, 9000, 0.02}};
  CHECK(build_template_bank(one, kFs).size() == 1);
  const std::vector<ChirpSpec> dup{{1, 7000, 9000, 0.02}, {1, 3000, 4000, 0.02}};
  CHECK_THROWS_AS(build_template_bank(dup, kFs), WaveformError);
  CHECK_THROWS_AS(build_template_bank(std::vector<ChirpSpec>{}, kFs), WaveformError);
  const std::vector<ChirpSpec> bad_id{{7, 7000, 9000, 0.02}};
  CHECK_THROWS_AS(build_template_bank(bad_id, kFs), WaveformError);
  const std::vector<ChirpSpec> overlap{{1, 7000, 9000, 0.02}, {2, 7500, 9500, 0.02}};
  CHECK_THROWS_AS(build_template_bank(overlap, kFs), WaveformError);
}

TEST_CASE("time reversal preserves energy") {
  for (const auto& spec : default_chirp_specs()) {
    const auto w = synth_lfm_chirp(spec.f_start, spec.f_end, spec.duration, kFs);
    std::vector<double> rev(w.samples().rbegin(), w.samples().rend());
    const double e = std::inner_product(rev.begin(), rev.end(), rev.begin(), 0.0);
    CHECK(e == doctest::Approx(w.energy()).epsilon(1e-12));
  }
}

TEST_CASE("energy stays inside the chirp band") {
  const auto bank = default_template_bank(kFs);
  for (const auto& [mode, w] : bank.modes()) {
    CAPTURE(mode);
    CHECK(out_of_band_fraction(w) < 0.05);
  }
}

TEST_CASE("bank lookup is one to one") {
  const auto bank = default_template_bank(kFs);
  std::set<const double*> seen;
  for (const auto& [mode, w] : bank.modes()) seen.insert(w.samples().data());
  CHECK(seen.size() == bank.size());
}
