// Copyright (c) 2026 the faultvit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "faultvit/bytes.hpp"
#include "faultvit/errors.hpp"
#include "faultvit/fft.hpp"

namespace faultvit {

enum class Window { Hann, Rect };

inline Window window_from_string(const std::string& s) {
  if (s == "hann" || s == "Hann") return Window::Hann;
  if (s == "rect" || s == "Rect") return Window::Rect;
  throw InvalidParams("unknown window: " + s);
}

// Periodic Hann: w[m] = 0.5 - 0.5*cos(2*pi*m/len).
inline std::vector<double> make_window(Window w, std::size_t len) {
  std::vector<double> out(len, 1.0);
  if (w == Window::Hann) {
    constexpr double two_pi = 2.0 * 3.14159265358979323846;
    for (std::size_t m = 0; m < len; ++m)
      out[m] = 0.5 - 0.5 * std::cos(two_pi * static_cast<double>(m) /
                                    static_cast<double>(len));
  }
  return out;
}

// One-sided magnitude grid, frames x bins with bins = nfft/2 + 1.
struct Spectrogram {
  std::vector<double> mags;  // row-major [frames x bins]
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<double> frame_times;  // seconds, frame start
  std::vector<double> bin_freqs;    // Hz
  std::size_t window_len = 0, hop = 0, nfft = 0;

  double at(std::size_t f, std::size_t b) const { return mags[f * bins + b]; }
  double& at(std::size_t f, std::size_t b) { return mags[f * bins + b]; }
};

inline Spectrogram stft(std::span<const double> samples, double sample_rate,
                        Window window, std::size_t window_len, std::size_t hop,
                        std::size_t nfft) {
  if (!is_power_of_two(nfft))
    throw NotPowerOfTwo("stft nfft must be a power of two, got " +
                        std::to_string(nfft));
  if (window_len == 0 || hop == 0 || window_len > nfft)
    throw InvalidParams("stft requires 1 <= window_len <= nfft and hop >= 1");
  if (samples.size() < window_len)
    throw SignalTooShort("signal length " + std::to_string(samples.size()) +
                         " < window_len " + std::to_string(window_len));

  Spectrogram s;
  s.window_len = window_len;
  s.hop = hop;
  s.nfft = nfft;
  s.frames = (samples.size() - window_len) / hop + 1;
  s.bins = nfft / 2 + 1;
  s.mags.resize(s.frames * s.bins);
  s.frame_times.resize(s.frames);
  s.bin_freqs.resize(s.bins);
  for (std::size_t b = 0; b < s.bins; ++b)
    s.bin_freqs[b] = sample_rate * static_cast<double>(b) /
                     static_cast<double>(nfft);

  const std::vector<double> win = make_window(window, window_len);
  std::vector<std::complex<double>> frame(nfft);
  for (std::size_t f = 0; f < s.frames; ++f) {
    const std::size_t start = f * hop;
    s.frame_times[f] = static_cast<double>(start) / sample_rate;
    for (std::size_t m = 0; m < window_len; ++m)
      frame[m] = samples[start + m] * win[m];
    for (std::size_t m = window_len; m < nfft; ++m) frame[m] = 0.0;
    fft_inplace(frame);
    for (std::size_t b = 0; b < s.bins; ++b) s.at(f, b) = std::abs(frame[b]);
  }
  return s;
}

// Normalized time-frequency image, row-major [h x w x c].
struct TFImage {
  std::size_t h = 0, w = 0, c = 1;
  std::vector<double> pixels;

  double at(std::size_t y, std::size_t x, std::size_t ch = 0) const {
    return pixels[(y * w + x) * c + ch];
  }
  double& at(std::size_t y, std::size_t x, std::size_t ch = 0) {
    return pixels[(y * w + x) * c + ch];
  }
};

// Corner-aligned bilinear resize of a single-channel grid:
// src coordinate of output (i, j) is (i*(sh-1)/(dh-1), j*(sw-1)/(dw-1)).
inline std::vector<double> bilinear_resize(const std::vector<double>& src,
                                           std::size_t sh, std::size_t sw,
                                           std::size_t dh, std::size_t dw) {
  std::vector<double> dst(dh * dw);
  const double ys = dh > 1 ? static_cast<double>(sh - 1) / static_cast<double>(dh - 1) : 0.0;
  const double xs = dw > 1 ? static_cast<double>(sw - 1) / static_cast<double>(dw - 1) : 0.0;
  for (std::size_t i = 0; i < dh; ++i) {
    const double y = static_cast<double>(i) * ys;
    std::size_t y0 = static_cast<std::size_t>(y);
    double fy = y - static_cast<double>(y0);
    if (y0 + 1 >= sh) {
      y0 = sh - 1;
      fy = 0.0;
    }
    const std::size_t y1 = y0 + 1 < sh ? y0 + 1 : y0;
    for (std::size_t j = 0; j < dw; ++j) {
      const double x = static_cast<double>(j) * xs;
      std::size_t x0 = static_cast<std::size_t>(x);
      double fx = x - static_cast<double>(x0);
      if (x0 + 1 >= sw) {
        x0 = sw - 1;
        fx = 0.0;
      }
      const std::size_t x1 = x0 + 1 < sw ? x0 + 1 : x0;
      const double a = src[y0 * sw + x0];
      const double b = src[y0 * sw + x1];
      const double c = src[y1 * sw + x0];
      const double d = src[y1 * sw + x1];
      // incremental blend: exact where fx/fy are zero, and a constant
      // neighborhood stays bit-identical so flat spectrograms survive the
      // later variance checks
      dst[i * dw + j] =
          a + fy * (c - a) + fx * (b - a) + fy * fx * (a + d - b - c);
    }
  }
  return dst;
}

// log(mags + eps) -> bilinear resize -> standardize to mean 0, population
// std 1. A constant source maps to the all-zero image.
inline TFImage to_image(const Spectrogram& spec, std::size_t out_h,
                        std::size_t out_w, double log_eps) {
  if (spec.frames < 2 || spec.bins < 2)
    throw DegenerateSpectrogram("spectrogram is " + std::to_string(spec.frames) +
                                "x" + std::to_string(spec.bins) +
                                "; need at least 2x2");
  if (out_h < 2 || out_w < 2)
    throw InvalidParams("image dims must be >= 2");

  std::vector<double> grid(spec.mags.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    grid[i] = std::log(spec.mags[i] + log_eps);

  TFImage img;
  img.h = out_h;
  img.w = out_w;
  img.c = 1;
  img.pixels = bilinear_resize(grid, spec.frames, spec.bins, out_h, out_w);

  const std::size_t n = img.pixels.size();
  double mean = 0.0;
  for (double v : img.pixels) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : img.pixels) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  const auto [mn, mx] = std::minmax_element(img.pixels.begin(), img.pixels.end());
  if (*mn == *mx || var == 0.0) {
    std::fill(img.pixels.begin(), img.pixels.end(), 0.0);
  } else {
    const double inv_std = 1.0 / std::sqrt(var);
    for (double& v : img.pixels) v = (v - mean) * inv_std;
  }
  return img;
}

// --- binary image format: H, W, C as uint32 LE, then row-major float64 ---

inline void write_tfimage(const TFImage& img, const std::filesystem::path& path) {
  std::string out;
  out.reserve(12 + img.pixels.size() * 8);
  detail::put_u32_le(out, static_cast<std::uint32_t>(img.h));
  detail::put_u32_le(out, static_cast<std::uint32_t>(img.w));
  detail::put_u32_le(out, static_cast<std::uint32_t>(img.c));
  for (double v : img.pixels) detail::put_f64_le(out, v);
  detail::write_file_bytes(path, out);
}

inline TFImage read_tfimage(const std::filesystem::path& path) {
  const std::string bytes = detail::read_file_bytes(path);
  if (bytes.size() < 12)
    throw MalformedHeader("image file too short: " + path.string());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  TFImage img;
  img.h = detail::get_u32_le(p);
  img.w = detail::get_u32_le(p + 4);
  img.c = detail::get_u32_le(p + 8);
  const std::size_t n = img.h * img.w * img.c;
  if (bytes.size() != 12 + n * 8)
    throw MalformedHeader("image payload size mismatch: " + path.string());
  img.pixels.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    img.pixels[i] = detail::get_f64_le(p + 12 + i * 8);
  return img;
}

// 8-bit binary PGM, min-max scaled; for eyeballing spectrograms.
inline void write_pgm(const std::vector<double>& grid, std::size_t h,
                      std::size_t w, const std::filesystem::path& path) {
  const auto [mn, mx] = std::minmax_element(grid.begin(), grid.end());
  const double lo = *mn, span = *mx - *mn;
  std::string out = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  out.reserve(out.size() + h * w);
  for (std::size_t i = 0; i < h * w; ++i) {
    const double v = span > 0 ? (grid[i] - lo) / span : 0.0;
    out.push_back(static_cast<char>(static_cast<int>(v * 255.0 + 0.5)));
  }
  detail::write_file_bytes(path, out);
}

inline void write_pgm(const TFImage& img, const std::filesystem::path& path) {
  write_pgm(img.pixels, img.h, img.w, path);
}

}  // namespace faultvit
