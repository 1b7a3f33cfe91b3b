// Copyright (c) 2026 the faultvit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "faultvit/errors.hpp"

namespace faultvit {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 Cooley-Tukey, decimation in time.
// Computes X[k] = sum_m x[m] * exp(-2*pi*i*k*m/n) in place; n = a.size()
// must be a power of two. Twiddles come from a per-call std::polar table,
// not from repeated multiplication, so there is no accumulated drift.
inline void fft_inplace(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  if (!is_power_of_two(n))
    throw NotPowerOfTwo("fft length must be a power of two, got " +
                        std::to_string(n));
  if (n == 1) return;

  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  std::vector<std::complex<double>> tw(n / 2);
  constexpr double two_pi = 2.0 * 3.14159265358979323846;
  for (std::size_t k = 0; k < n / 2; ++k)
    tw[k] = std::polar(1.0, -two_pi * static_cast<double>(k) /
                                static_cast<double>(n));

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t step = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> w = tw[k * step];
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = w * a[i + k + len / 2];
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
}

inline std::vector<std::complex<double>> fft(
    std::vector<std::complex<double>> frame) {
  fft_inplace(frame);
  return frame;
}

inline std::vector<std::complex<double>> fft_real(
    const std::vector<double>& frame) {
  std::vector<std::complex<double>> a(frame.size());
  for (std::size_t i = 0; i < frame.size(); ++i) a[i] = frame[i];
  fft_inplace(a);
  return a;
}

}  // namespace faultvit
