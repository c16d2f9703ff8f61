#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace bark {

struct MfccConfig {
  std::size_t frame_len = 400;  // 25 ms at 16 kHz
  std::size_t hop = 160;        // 10 ms at 16 kHz
  std::size_t fft_len = 512;
  std::size_t n_mels = 26;
  std::size_t n_coeffs = 13;
  double pre_emphasis = 0.97;
  double log_floor = 1e-10;

  // Throws Error{kBadConfig} when an invariant does not hold.
  void validate() const;
};

// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// frames x n_coeffs.
using MfccFrames = Matrix;

std::vector<double> pre_emphasize(const std::vector<double>& x, double alpha);

std::vector<double> hamming_window(std::size_t len);

std::size_t frame_count(std::size_t signal_len, std::size_t frame_len,
                        std::size_t hop);

// Hamming-windowed frames, each zero-padded to cfg.fft_len.
std::vector<std::vector<double>> frame_and_window(const std::vector<double>& x,
                                                  const MfccConfig& cfg);

// In-place iterative radix-2 FFT. Size must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& a);

// |X[p]|^2 for p = 0..n/2.
std::vector<double> power_spectrum(const std::vector<double>& frame);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Peak frequencies (Hz) of the triangular filters, lowest first.
std::vector<double> mel_peak_frequencies(const MfccConfig& cfg, int sample_rate_hz);

// n_mels x (fft_len/2 + 1) triangular filterbank.
Matrix mel_filterbank(const MfccConfig& cfg, int sample_rate_hz);

// Orthonormal DCT-II basis, size x size (row k = basis function k).
Matrix dct2_matrix(std::size_t size);

// Log mel energies, frames x n_mels (the input to the DCT).
Matrix log_mel_energies(const std::vector<double>& x, const MfccConfig& cfg,
                        int sample_rate_hz);

MfccFrames mfcc(const std::vector<double>& x, const MfccConfig& cfg,
                int sample_rate_hz);

}  // namespace bark
