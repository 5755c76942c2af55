#pragma once

#include <complex>
#include <span>
#include <vector>

namespace neo::dsp {

/// In-place radix-2 FFT; size must be a power of two.
void fft_pow2(std::vector<std::complex<double>>& a, bool inverse);

/// DFT of arbitrary length (Bluestein for non power-of-two sizes).
/// Forward: X[k] = sum_n x[n] exp(-2*pi*i*n*k/N). Inverse includes 1/N.
std::vector<std::complex<double>> fft(
    std::span<const std::complex<double>> x, bool inverse = false);

/// Real-input convenience; returns the full N-bin complex spectrum.
std::vector<std::complex<double>> fft_real(std::span<const double> x);

}  // namespace neo::dsp
