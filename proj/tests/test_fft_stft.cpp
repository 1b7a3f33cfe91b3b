// Copyright (c) 2026 the faultvit authors
// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "faultvit/errors.hpp"
#include "faultvit/fft.hpp"
#include "faultvit/rng.hpp"
#include "faultvit/stft.hpp"
#include "oracles.hpp"

using namespace faultvit;

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

std::vector<std::complex<double>> random_frame(std::size_t n, Rng& rng) {
  std::vector<std::complex<double>> x(n);
  for (auto& v : x) v = {rng.normal(), rng.normal()};
  return x;
}

double max_abs_diff(const std::vector<std::complex<double>>& a,
                    const std::vector<std::complex<double>>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace

TEST_CASE("fft of zeros is zero", "[fft]") {
  const auto X = fft_real(std::vector<double>(64, 0.0));
  for (const auto& v : X) REQUIRE(std::abs(v) == 0.0);
}

TEST_CASE("fft rejects non power of two lengths", "[fft]") {
  std::vector<std::complex<double>> x(12, {1.0, 0.0});
  CHECK_THROWS_AS(fft_inplace(x), NotPowerOfTwo);
  CHECK_THROWS_AS(fft_real(std::vector<double>(0)), NotPowerOfTwo);
}

TEST_CASE("on-bin cosine concentrates in two bins", "[fft]") {
  const std::size_t n = 64;
  std::vector<double> x(n);
  for (std::size_t m = 0; m < n; ++m)
    x[m] = std::cos(kTwoPi * 3.0 * static_cast<double>(m) /
                    static_cast<double>(n));
  const auto X = fft_real(x);
  CHECK(std::abs(std::abs(X[3]) - 32.0) < 1e-9);
  CHECK(std::abs(std::abs(X[61]) - 32.0) < 1e-9);
  for (std::size_t k = 0; k < n; ++k) {
    if (k == 3 || k == 61) continue;
    REQUIRE(std::abs(X[k]) < 1e-9);
  }
}

TEST_CASE("fft matches the quadratic DFT for sizes 2..256", "[fft]") {
  Rng rng(11);
  for (std::size_t n = 2; n <= 256; n <<= 1) {
    const auto x = random_frame(n, rng);
    const double d = max_abs_diff(fft(x), testutil::naive_dft(x));
    INFO("n = " << n);
    REQUIRE(d < 1e-9);
  }
}

TEST_CASE("fft is linear", "[fft]") {
  Rng rng(12);
  const std::size_t n = 128;
  const auto x = random_frame(n, rng);
  const auto y = random_frame(n, rng);
  const double a = 1.7, b = -0.3;
  std::vector<std::complex<double>> mix(n);
  for (std::size_t i = 0; i < n; ++i) mix[i] = a * x[i] + b * y[i];
  const auto Xm = fft(mix);
  const auto Xx = fft(x);
  const auto Xy = fft(y);
  for (std::size_t i = 0; i < n; ++i)
    REQUIRE(std::abs(Xm[i] - (a * Xx[i] + b * Xy[i])) < 1e-9);
}

TEST_CASE("hann window is periodic, rect is flat", "[stft]") {
  const auto hann = make_window(Window::Hann, 8);
  CHECK(hann[0] == 0.0);
  CHECK(std::abs(hann[4] - 1.0) < 1e-15);
  CHECK(std::abs(hann[2] - 0.5) < 1e-15);
  // periodic form: w[m] != w[len-m] symmetry point shifted, no trailing zero
  CHECK(hann[7] > 0.0);
  const auto rect = make_window(Window::Rect, 5);
  for (double v : rect) REQUIRE(v == 1.0);
}

TEST_CASE("window name parsing", "[stft]") {
  CHECK(window_from_string("hann") == Window::Hann);
  CHECK(window_from_string("rect") == Window::Rect);
  CHECK_THROWS_AS(window_from_string("hamming"), InvalidParams);
}

TEST_CASE("stft frame and bin counts follow the formula", "[stft]") {
  std::vector<double> x(2048, 0.0);
  const auto spec = stft(x, 12000.0, Window::Hann, 128, 32, 128);
  CHECK(spec.frames == 61);
  CHECK(spec.bins == 65);
  CHECK(spec.frame_times.size() == 61);
  CHECK(spec.bin_freqs.size() == 65);
  CHECK(spec.mags.size() == 61 * 65);
  for (double m : spec.mags) REQUIRE(m == 0.0);
  // bin spacing = fs / nfft
  CHECK(std::abs(spec.bin_freqs[1] - 12000.0 / 128.0) < 1e-9);
  CHECK(std::abs(spec.frame_times[1] - 32.0 / 12000.0) < 1e-12);
}

TEST_CASE("stft rejects bad parameters", "[stft]") {
  std::vector<double> x(256, 0.0);
  CHECK_THROWS_AS(stft(x, 12000.0, Window::Hann, 0, 32, 128), InvalidParams);
  CHECK_THROWS_AS(stft(x, 12000.0, Window::Hann, 128, 0, 128), InvalidParams);
  CHECK_THROWS_AS(stft(x, 12000.0, Window::Hann, 256, 32, 128), InvalidParams);
  CHECK_THROWS_AS(stft(x, 12000.0, Window::Hann, 128, 32, 96), NotPowerOfTwo);
  std::vector<double> tiny(100, 0.0);
  CHECK_THROWS_AS(stft(tiny, 12000.0, Window::Hann, 128, 32, 128),
                  SignalTooShort);
}

TEST_CASE("on-bin tone dominates its column in every frame", "[stft]") {
  const double fs = 12000.0;
  const std::size_t nfft = 128, k = 11;
  const double f = fs * static_cast<double>(k) / static_cast<double>(nfft);
  std::vector<double> x(2048);
  for (std::size_t n = 0; n < x.size(); ++n)
    x[n] = std::sin(kTwoPi * f * static_cast<double>(n) / fs);
  const auto spec = stft(x, fs, Window::Rect, nfft, 32, nfft);
  for (std::size_t fr = 0; fr < spec.frames; ++fr) {
    std::size_t best = 0;
    for (std::size_t b = 1; b < spec.bins; ++b)
      if (spec.at(fr, b) > spec.at(fr, best)) best = b;
    REQUIRE(best == k);
  }
}

TEST_CASE("per-frame parseval holds through the fft", "[stft]") {
  Rng rng(13);
  const std::size_t window_len = 96, nfft = 128;
  const auto win = make_window(Window::Hann, window_len);
  std::vector<double> frame(nfft, 0.0);
  for (std::size_t i = 0; i < window_len; ++i) frame[i] = win[i] * rng.normal();
  double time_energy = 0.0;
  for (double v : frame) time_energy += v * v;
  const auto X = fft_real(frame);
  double freq_energy = 0.0;
  for (const auto& v : X) freq_energy += std::norm(v);
  freq_energy /= static_cast<double>(nfft);
  REQUIRE(std::abs(time_energy - freq_energy) <= 1e-10 * time_energy);
}

TEST_CASE("bilinear resize keeps constants constant", "[stft]") {
  const std::vector<double> src(7 * 9, 3.25);
  const auto dst = bilinear_resize(src, 7, 9, 13, 5);
  for (double v : dst) REQUIRE(std::abs(v - 3.25) < 1e-12);
}

TEST_CASE("bilinear resize is identity at matching dims", "[stft]") {
  Rng rng(14);
  std::vector<double> src(6 * 8);
  for (double& v : src) v = rng.normal();
  const auto dst = bilinear_resize(src, 6, 8, 6, 8);
  for (std::size_t i = 0; i < src.size(); ++i) REQUIRE(dst[i] == src[i]);
}

TEST_CASE("to_image standardizes and resizes", "[stft]") {
  Rng rng(15);
  std::vector<double> x(2048);
  for (double& v : x) v = rng.normal();
  const auto spec = stft(x, 12000.0, Window::Hann, 128, 32, 128);
  REQUIRE(spec.frames == 61);
  REQUIRE(spec.bins == 65);
  const auto img = to_image(spec, 56, 56, 1e-8);
  CHECK(img.h == 56);
  CHECK(img.w == 56);
  CHECK(img.c == 1);
  double mean = 0.0;
  for (double v : img.pixels) mean += v;
  mean /= static_cast<double>(img.pixels.size());
  double var = 0.0;
  for (double v : img.pixels) var += (v - mean) * (v - mean);
  var /= static_cast<double>(img.pixels.size());
  CHECK(std::abs(mean) < 1e-9);
  CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-6);
}

TEST_CASE("to_image of a constant spectrogram is all zero", "[stft]") {
  Spectrogram spec;
  spec.frames = 4;
  spec.bins = 5;
  spec.mags.assign(20, 2.5);
  const auto img = to_image(spec, 8, 8, 1e-8);
  for (double v : img.pixels) REQUIRE(v == 0.0);
}

TEST_CASE("to_image identity dims equals standardized log mags", "[stft]") {
  Spectrogram spec;
  spec.frames = 3;
  spec.bins = 4;
  spec.mags = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  const double eps = 1e-8;
  const auto img = to_image(spec, 3, 4, eps);
  std::vector<double> expect(12);
  double mean = 0.0;
  for (std::size_t i = 0; i < 12; ++i) {
    expect[i] = std::log(spec.mags[i] + eps);
    mean += expect[i];
  }
  mean /= 12.0;
  double var = 0.0;
  for (double v : expect) var += (v - mean) * (v - mean);
  var /= 12.0;
  const double istd = 1.0 / std::sqrt(var);
  for (std::size_t i = 0; i < 12; ++i)
    REQUIRE(std::abs(img.pixels[i] - (expect[i] - mean) * istd) < 1e-12);
}

TEST_CASE("to_image rejects degenerate grids", "[stft]") {
  Spectrogram spec;
  spec.frames = 1;
  spec.bins = 5;
  spec.mags.assign(5, 1.0);
  CHECK_THROWS_AS(to_image(spec, 8, 8, 1e-8), DegenerateSpectrogram);
  spec.frames = 4;
  spec.bins = 4;
  spec.mags.assign(16, 1.0);
  CHECK_THROWS_AS(to_image(spec, 1, 8, 1e-8), InvalidParams);
}

TEST_CASE("tfimage round-trips through its binary format", "[stft]") {
  const auto dir = testutil::fresh_dir("tfimage");
  TFImage img;
  img.h = 3;
  img.w = 4;
  img.c = 1;
  Rng rng(16);
  img.pixels.resize(12);
  for (double& v : img.pixels) v = rng.normal();
  const auto path = dir / "img.tfi";
  write_tfimage(img, path);
  const TFImage back = read_tfimage(path);
  REQUIRE(back.h == img.h);
  REQUIRE(back.w == img.w);
  REQUIRE(back.c == img.c);
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    REQUIRE(back.pixels[i] == img.pixels[i]);
}

TEST_CASE("truncated tfimage file is rejected", "[stft]") {
  const auto dir = testutil::fresh_dir("tfimage_bad");
  testutil::write_bytes(dir / "short.tfi", std::string(8, '\0'));
  CHECK_THROWS_AS(read_tfimage(dir / "short.tfi"), MalformedHeader);
}

TEST_CASE("pgm export writes a P5 header", "[stft]") {
  const auto dir = testutil::fresh_dir("pgm");
  TFImage img;
  img.h = 2;
  img.w = 3;
  img.c = 1;
  img.pixels = {0, 1, 2, 3, 4, 5};
  write_pgm(img, dir / "img.pgm");
  const std::string bytes = testutil::read_bytes(dir / "img.pgm");
  CHECK(bytes.rfind("P5\n3 2\n255\n", 0) == 0);
  CHECK(bytes.size() == std::string("P5\n3 2\n255\n").size() + 6);
}
