#pragma once

// Iterative radix-2 FFT, sized for short analysis frames.

#include <complex>
#include <stdexcept>
#include <vector>

#include "emorec/util.hpp"

namespace emorec {

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// In-place complex FFT; a.size() must be a power of two.
inline void fft_radix2(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  if (!is_power_of_two(static_cast<int>(n)))
    throw std::invalid_argument("fft_radix2: size must be a power of two");
  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * kPi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

// |FFT|^2 of a real frame zero-padded to fft_size; bins 0..fft_size/2.
inline std::vector<double> power_spectrum(const std::vector<double>& frame, int fft_size) {
  if (!is_power_of_two(fft_size))
    throw std::invalid_argument("power_spectrum: fft_size must be a power of two");
  if (static_cast<int>(frame.size()) > fft_size)
    throw std::invalid_argument("power_spectrum: frame longer than fft_size");
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(fft_size));
  for (std::size_t k = 0; k < frame.size(); ++k) buf[k] = frame[k];
  fft_radix2(buf);
  std::vector<double> power(static_cast<std::size_t>(fft_size / 2 + 1));
  for (std::size_t b = 0; b < power.size(); ++b) power[b] = std::norm(buf[b]);
  return power;
}

}  // namespace emorec
