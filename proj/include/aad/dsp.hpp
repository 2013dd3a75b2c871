#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "aad/common.hpp"

namespace aad {

// In-place iterative radix-2 FFT; size must be a power of two.
void fft(std::vector<std::complex<double>>& a, bool inverse);

std::size_t next_pow2(std::size_t n);

// Linear convolution of x (length N) with kernel h (length M) evaluated via a
// single zero-padded FFT; returns the full N+M-1 result.
Eigen::VectorXd fft_convolve(const Eigen::VectorXd& x, const Eigen::VectorXd& h);

// DTFT magnitude of taps at frequency f_hz for sample rate fs.
double dtft_magnitude(const Eigen::VectorXd& taps, double f_hz, double fs);

}  // namespace aad
