#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <random>

#include "owtt/fft.hpp"
#include "owtt/ranging.hpp"

using namespace owtt::ranging;
using owtt::waveforms::default_template_bank;
using owtt::waveforms::Waveform;

namespace {

constexpr double kFs = kDefaultSampleRate;

std::vector<double> delayed(const Waveform& w, std::size_t delay, std::size_t n) {
  std::vector<double> x(n, 0.0);
  for (std::size_t k = 0; k < w.size() && delay + k < n; ++k) x[delay + k] = w.samples()[k];
  return x;
}

ElementRecording recording_of(const Waveform& w, std::size_t delay, double noise, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  ElementRecording r;
  for (auto& ch : r.channels) {
    ch = delayed(w, delay, kDefaultCaptureSamples);
    for (double& v : ch) v += noise * n01(rng);
  }
  return r;
}

// Correlation straight from the definition, after whitening in the
// frequency domain of the same length.
std::vector<double> brute_correlation(const std::vector<double>& x, const Waveform& w) {
  const std::size_t len = owtt::dsp::next_pow2(x.size() + w.size());
  const auto white = phat_whiten(owtt::dsp::rfft(x, len));
  const auto xh = owtt::dsp::irfft(white, len);
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t n = 0; n < x.size(); ++n) {
    double acc = 0.0;
    for (std::size_t m = 0; m < w.size(); ++m) acc += xh[n + m] * w.samples()[m];
    y[n] = acc;
  }
  return y;
}

}  // namespace

TEST_CASE("PHAT normalises magnitude and keeps phase") {
  const std::vector<Complex> x{{3, 4}, {0, 0}, {-2, 0.5}};
  const auto y = phat_whiten(x);
  CHECK(y[0].real() == doctest::Approx(0.6));
  CHECK(y[0].imag() == doctest::Approx(0.8));
  CHECK(y[1] == Complex{0, 0});

  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  std::vector<Complex> r(512);
  for (auto& v : r) v = {n01(rng), n01(rng)};
  const auto w = phat_whiten(r);
  const auto ww = phat_whiten(w);
  for (std::size_t k = 0; k < r.size(); ++k) {
    CHECK(std::abs(std::arg(w[k]) - std::arg(r[k])) < 1e-12);
    CHECK(std::abs(ww[k] - w[k]) < 1e-12);
  }
}

TEST_CASE("matched filter peaks at the template delay") {
  const auto bank = default_template_bank(kFs);
  const auto& w = bank.at(1);
  const auto y = matched_filter(delayed(w, 1875, 8000), kFs, w);
  CHECK(y.size() == 8000);
  CHECK(argmax_abs(y) == 1875);
  CHECK(argmax_abs(matched_filter(delayed(w, 0, 8000), kFs, w)) == 0);
  CHECK_THROWS_AS(matched_filter(delayed(w, 0, 8000), 48000.0, w), RangingError);
}

TEST_CASE("matched filter agrees with the direct correlation") {
  const auto bank = default_template_bank(kFs);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  for (int mode : {1, 2}) {
    const auto& w = bank.at(mode);
    auto x = delayed(w, 300 + 17 * mode, 1500);
    for (double& v : x) v += 0.2 * n01(rng);
    const auto fast = matched_filter(x, kFs, w);
    const auto slow = brute_correlation(x, w);
    double worst = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) worst = std::max(worst, std::abs(fast[n] - slow[n]));
    CHECK(worst < 1e-9);
    CHECK(argmax_abs(fast) == argmax_abs(slow));
  }
}

TEST_CASE("circular delay shifts the correlation peak") {
  const auto bank = default_template_bank(kFs);
  const auto& w = bank.at(4);
  const auto base = delayed(w, 1000, 8000);
  const auto p0 = argmax_abs(matched_filter(base, kFs, w));
  for (std::size_t d : {1, 13, 250, 4000}) {
    std::vector<double> shifted(base.size());
    for (std::size_t k = 0; k < base.size(); ++k) shifted[(k + d) % base.size()] = base[k];
    CHECK(argmax_abs(matched_filter(shifted, kFs, w)) == p0 + d);
  }
}

TEST_CASE("consistency bound is inclusive") {
  CHECK(consistency_check(std::vector<std::size_t>{100, 105, 110, 112, 114}));
  CHECK_FALSE(consistency_check(std::vector<std::size_t>{100, 104, 108, 112, 116}));
  CHECK(consistency_check(std::vector<std::size_t>{100, 100, 100, 100, 115}));
}

TEST_CASE("pairwise element combination") {
  std::vector<std::vector<double>> ys(5, std::vector<double>(50, 0.0));
  for (auto& y : ys) y[20] = 1.0;
  auto c = combine_elements(ys);
  CHECK(c[20] == doctest::Approx(10.0));
  CHECK(argmax_abs(c) == 20);

  ys[2][20] = 0.0;
  c = combine_elements(ys);
  CHECK(c[20] == doctest::Approx(6.0));

  std::vector<std::vector<double>> zeros(5, std::vector<double>(10, 0.0));
  for (double v : combine_elements(zeros)) CHECK(v == 0.0);

  std::vector<std::vector<double>> bad(5, std::vector<double>(10, 0.0));
  bad[3].resize(9);
  CHECK_THROWS_AS(combine_elements(bad), RangingError);
}

TEST_CASE("combination ignores element order and sign") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n01;
  std::vector<std::vector<double>> ys(5, std::vector<double>(64));
  for (auto& y : ys)
    for (double& v : y) v = n01(rng);
  const auto ref = combine_elements(ys);
  // Direct pair sum as the oracle.
  for (std::size_t n = 0; n < 64; ++n) {
    double s = 0.0;
    for (int i = 0; i < 5; ++i)
      for (int j = i + 1; j < 5; ++j) s += std::abs(ys[i][n]) * std::abs(ys[j][n]);
    CHECK(ref[n] == doctest::Approx(s).epsilon(1e-12));
  }
  std::vector<int> perm{0, 1, 2, 3, 4};
  while (std::next_permutation(perm.begin(), perm.end())) {
    std::vector<std::vector<double>> p;
    for (int i : perm) p.push_back(ys[i]);
    const auto c = combine_elements(p);
    for (std::size_t n = 0; n < 64; ++n) REQUIRE(c[n] == doctest::Approx(ref[n]).epsilon(1e-12));
  }
}

TEST_CASE("range normalisation") {
  std::vector<double> c(8000, 1.0);
  auto d = normalize_to_range(c, 1481.0, 37500.0);
  CHECK(d.max_range() == doctest::Approx(315.95).epsilon(1e-4));
  CHECK(d.range_of_bin(1875) == doctest::Approx(74.05));
  CHECK(d.nearest_bin(74.05) == 1875);
  CHECK(d.nearest_bin(-5.0) == 0);
  CHECK(d.nearest_bin(1e6) == 7999);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int t = 0; t < 50; ++t) {
    for (double& v : c) v = u(rng);
    d = normalize_to_range(c, 1481.0, 37500.0);
    double s = 0.0;
    for (double w : d.weights()) s += w * w;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK_THROWS_AS(normalize_to_range(std::vector<double>(10, 0.0), 1481.0, 37500.0), RangingError);
  CHECK_THROWS_AS(normalize_to_range(std::vector<double>{1.0, -1.0}, 1481.0, 37500.0), RangingError);
}

TEST_CASE("noise alone does not clear the detection threshold") {
  const auto bank = default_template_bank(kFs);
  const ReceptionProcessor proc(bank, kDefaultCaptureSamples);
  std::mt19937_64 rng(21);
  int detections = 0;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    ElementRecording r;
    std::normal_distribution<double> n01;
    for (auto& ch : r.channels) {
      ch.resize(kDefaultCaptureSamples);
      for (double& v : ch) v = n01(rng);
    }
    const auto a = proc.analyze(r);
    if (a.winner) ++detections;
    for (const auto& [mode, resp] : a.responses) worst = std::max(worst, resp.peak / resp.median);
  }
  CHECK(detections == 0);
  CHECK(worst < proc.config().threshold);
}

TEST_CASE("mode identification") {
  const auto bank = default_template_bank(kFs);
  std::mt19937_64 rng(4);

  SUBCASE("three successive winners confirm") {
    ModeDecision d;
    for (int i = 0; i < 3; ++i) {
      CHECK_FALSE(d.confirmed.has_value());
      d = identify_mode(recording_of(bank.at(1), 900 + 40 * i, 0.0, rng), bank, d);
    }
    REQUIRE(d.confirmed.has_value());
    CHECK(*d.confirmed == 1);
  }

  SUBCASE("broken streak leaves nothing confirmed") {
    ModeDecision d;
    d.push(1);
    d.push(1);
    d.push(2);
    CHECK_FALSE(d.confirmed.has_value());
    d.push(std::nullopt);
    d.push(2);
    d.push(2);
    CHECK_FALSE(d.confirmed.has_value());
    d.push(2);
    CHECK(d.confirmed == 2);
  }

  SUBCASE("noiseless mode 3 wins against the full bank") {
    const auto rec = recording_of(bank.at(3), 2500, 0.0, rng);
    std::map<int, double> peaks;
    for (const auto& [mode, w] : bank.modes()) {
      std::vector<std::vector<double>> ys;
      for (const auto& ch : rec.channels) ys.push_back(matched_filter(ch, kFs, w));
      const auto c = combine_elements(ys);
      peaks[mode] = *std::max_element(c.begin(), c.end());
    }
    for (const auto& [mode, p] : peaks) {
      if (mode != 3) CHECK(peaks[3] > p);
    }
    const auto d = identify_mode(rec, bank, {});
    REQUIRE(d.history.size() == 1);
    CHECK(d.history.back() == 3);
  }
}

TEST_CASE("no mode confusion over many delays") {
  const auto bank = default_template_bank(kFs);
  const ReceptionProcessor proc(bank, kDefaultCaptureSamples);
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::size_t> delay(0, kDefaultCaptureSamples - 751);
  int errors = 0;
  for (int mode = 1; mode <= 4; ++mode) {
    for (int t = 0; t < 100; ++t) {
      const auto a = proc.analyze(recording_of(bank.at(mode), delay(rng), 0.0, rng));
      if (a.winner != mode) ++errors;
    }
  }
  CHECK(errors == 0);
}

TEST_CASE("recording validation") {
  ElementRecording r;
  for (auto& ch : r.channels) ch.assign(100, 0.0);
  CHECK_NOTHROW(r.validate(100));
  r.channels[4].resize(99);
  CHECK_THROWS_AS(r.validate(100), RangingError);
}

TEST_CASE("range dump round trip") {
  const auto path = (std::filesystem::temp_directory_path() / "owtt_test_rows.owrd").string();
  {
    RowDumpWriter w(path, kFs, 1481.0, 4);
    w.write_row(std::vector<double>{0.5, 0.5, 0.5, 0.5});
    w.write_row(std::vector<double>{1.0, 0.0, 0.0, 0.0});
    CHECK_THROWS(w.write_row(std::vector<double>{1.0}));
  }
  const auto d = read_row_dump(path);
  CHECK(d.sample_rate == doctest::Approx(kFs));
  CHECK(d.sound_speed == doctest::Approx(1481.0));
  CHECK(d.n_bins == 4);
  REQUIRE(d.rows.size() == 2);
  CHECK(d.rows[1][0] == 1.0f);
  std::filesystem::remove(path);
}
