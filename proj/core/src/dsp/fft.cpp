#include "neo/dsp/fft.hpp"

#include <cmath>
#include <numbers>

namespace neo::dsp {

namespace {

bool is_pow2(std::size_t n) { return n && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n < 2) return;

  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang =
        (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const auto u = a[i + j];
        const auto v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    for (auto& v : a) v /= static_cast<double>(n);
  }
}

std::vector<std::complex<double>> fft(
    std::span<const std::complex<double>> x, bool inverse) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> a(x.begin(), x.end());
  if (n == 0) return a;

  if (is_pow2(n)) {
    fft_pow2(a, inverse);
    return a;
  }

  // Bluestein: express the DFT as a convolution and evaluate with a
  // power-of-two FFT.
  const double sign = inverse ? 1.0 : -1.0;
  const std::size_t m = next_pow2(2 * n - 1);
  std::vector<std::complex<double>> w(n);
  for (std::size_t k = 0; k < n; ++k) {
    // exp(sign*i*pi*k^2/n); reduce k^2 mod 2n to keep the angle accurate
    const auto k2 = static_cast<unsigned long long>(k) * k % (2ull * n);
    const double ang =
        sign * std::numbers::pi * static_cast<double>(k2) /
        static_cast<double>(n);
    w[k] = {std::cos(ang), std::sin(ang)};
  }

  std::vector<std::complex<double>> fa(m, {0.0, 0.0}), fb(m, {0.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) fa[k] = a[k] * w[k];
  fb[0] = std::conj(w[0]);
  for (std::size_t k = 1; k < n; ++k)
    fb[k] = fb[m - k] = std::conj(w[k]);

  fft_pow2(fa, false);
  fft_pow2(fb, false);
  for (std::size_t i = 0; i < m; ++i) fa[i] *= fb[i];
  fft_pow2(fa, true);

  for (std::size_t k = 0; k < n; ++k) a[k] = fa[k] * w[k];
  if (inverse) {
    for (auto& v : a) v /= static_cast<double>(n);
  }
  return a;
}

std::vector<std::complex<double>> fft_real(std::span<const double> x) {
  std::vector<std::complex<double>> c(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) c[i] = {x[i], 0.0};
  return fft(c, false);
}

}  // namespace neo::dsp
