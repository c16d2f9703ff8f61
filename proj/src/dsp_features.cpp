#include "bark/dsp_features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "bark/error.hpp"

namespace bark {

void MfccConfig::validate() const {
  if (frame_len == 0 || hop == 0) {
    throw Error(ErrorCode::kBadConfig, "mfcc frame_len and hop must be positive");
  }
  if (!std::has_single_bit(fft_len) || fft_len < frame_len) {
    throw Error(ErrorCode::kBadConfig,
                "mfcc fft_len must be a power of two >= frame_len, got " +
                    std::to_string(fft_len));
  }
  if (n_mels == 0 || n_coeffs == 0 || n_coeffs > n_mels) {
    throw Error(ErrorCode::kBadConfig, "mfcc requires 0 < n_coeffs <= n_mels");
  }
  if (!(pre_emphasis >= 0.0 && pre_emphasis < 1.0)) {
    throw Error(ErrorCode::kBadConfig, "mfcc pre_emphasis must lie in [0, 1)");
  }
  if (!(log_floor > 0.0)) {
    throw Error(ErrorCode::kBadConfig, "mfcc log_floor must be positive");
  }
}

std::vector<double> pre_emphasize(const std::vector<double>& x, double alpha) {
  std::vector<double> y(x.size());
  if (x.empty()) return y;
  y[0] = x[0];
  for (std::size_t t = 1; t < x.size(); ++t) y[t] = x[t] - alpha * x[t - 1];
  return y;
}

std::vector<double> hamming_window(std::size_t len) {
  std::vector<double> w(len, 1.0);
  if (len < 2) return w;
  const double denom = static_cast<double>(len - 1);
  for (std::size_t n = 0; n < len; ++n) {
    w[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / denom);
  }
  return w;
}

std::size_t frame_count(std::size_t signal_len, std::size_t frame_len,
                        std::size_t hop) {
  if (signal_len < frame_len) return 0;
  return (signal_len - frame_len) / hop + 1;
}

std::vector<std::vector<double>> frame_and_window(const std::vector<double>& x,
                                                  const MfccConfig& cfg) {
  cfg.validate();
  const auto window = hamming_window(cfg.frame_len);
  const std::size_t count = frame_count(x.size(), cfg.frame_len, cfg.hop);
  std::vector<std::vector<double>> frames(count, std::vector<double>(cfg.fft_len, 0.0));
  for (std::size_t f = 0; f < count; ++f) {
    const std::size_t start = f * cfg.hop;
    for (std::size_t n = 0; n < cfg.frame_len; ++n) {
      frames[f][n] = x[start + n] * window[n];
    }
  }
  return frames;
}

void fft_inplace(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  if (n <= 1) return;
  if (!std::has_single_bit(n)) {
    throw Error(ErrorCode::kBadConfig, "fft size must be a power of two");
  }

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::size_t half = len / 2;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        // Twiddles evaluated directly; recurrences drift past 1e-12.
        const std::complex<double> w(std::cos(angle * static_cast<double>(k)),
                                     std::sin(angle * static_cast<double>(k)));
        const auto u = a[start + k];
        const auto v = a[start + k + half] * w;
        a[start + k] = u + v;
        a[start + k + half] = u - v;
      }
    }
  }
}

std::vector<double> power_spectrum(const std::vector<double>& frame) {
  std::vector<std::complex<double>> buf(frame.begin(), frame.end());
  fft_inplace(buf);
  std::vector<double> power(frame.size() / 2 + 1);
  for (std::size_t p = 0; p < power.size(); ++p) power[p] = std::norm(buf[p]);
  return power;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

namespace {

// n_mels + 2 edge frequencies equally spaced in mel over [0, nyquist].
std::vector<double> mel_edges_hz(const MfccConfig& cfg, int sample_rate_hz) {
  const double top = hz_to_mel(sample_rate_hz / 2.0);
  const std::size_t points = cfg.n_mels + 2;
  std::vector<double> edges(points);
  for (std::size_t i = 0; i < points; ++i) {
    edges[i] = mel_to_hz(top * static_cast<double>(i) / static_cast<double>(points - 1));
  }
  return edges;
}

}  // namespace

std::vector<double> mel_peak_frequencies(const MfccConfig& cfg, int sample_rate_hz) {
  const auto edges = mel_edges_hz(cfg, sample_rate_hz);
  return {edges.begin() + 1, edges.end() - 1};
}

Matrix mel_filterbank(const MfccConfig& cfg, int sample_rate_hz) {
  cfg.validate();
  if (sample_rate_hz <= 0) throw Error(ErrorCode::kBadConfig, "sample rate must be positive");

  const auto edges = mel_edges_hz(cfg, sample_rate_hz);
  const std::size_t bins = cfg.fft_len / 2 + 1;
  const double bin_hz = static_cast<double>(sample_rate_hz) / static_cast<double>(cfg.fft_len);
  Matrix bank(cfg.n_mels, bins);
  for (std::size_t m = 0; m < cfg.n_mels; ++m) {
    const double lo = edges[m];
    const double peak = edges[m + 1];
    const double hi = edges[m + 2];
    for (std::size_t p = 0; p < bins; ++p) {
      const double f = static_cast<double>(p) * bin_hz;
      double w = 0.0;
      if (f > lo && f <= peak) {
        w = (f - lo) / (peak - lo);
      } else if (f > peak && f < hi) {
        w = (hi - f) / (hi - peak);
      }
      bank(m, p) = w;
    }
  }
  return bank;
}

Matrix dct2_matrix(std::size_t size) {
  Matrix d(size, size);
  const double n = static_cast<double>(size);
  for (std::size_t k = 0; k < size; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (std::size_t i = 0; i < size; ++i) {
      d(k, i) = scale * std::cos(std::numbers::pi * static_cast<double>(k) *
                                 (2.0 * static_cast<double>(i) + 1.0) / (2.0 * n));
    }
  }
  return d;
}

Matrix log_mel_energies(const std::vector<double>& x, const MfccConfig& cfg,
                        int sample_rate_hz) {
  const Matrix bank = mel_filterbank(cfg, sample_rate_hz);
  const auto frames = frame_and_window(pre_emphasize(x, cfg.pre_emphasis), cfg);
  Matrix out(frames.size(), cfg.n_mels);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto power = power_spectrum(frames[f]);
    for (std::size_t m = 0; m < cfg.n_mels; ++m) {
      double e = 0.0;
      for (std::size_t p = 0; p < power.size(); ++p) e += bank(m, p) * power[p];
      out(f, m) = std::log(std::max(e, cfg.log_floor));
    }
  }
  return out;
}

MfccFrames mfcc(const std::vector<double>& x, const MfccConfig& cfg,
                int sample_rate_hz) {
  const Matrix log_mel = log_mel_energies(x, cfg, sample_rate_hz);
  const Matrix dct = dct2_matrix(cfg.n_mels);
  MfccFrames out(log_mel.rows, cfg.n_coeffs);
  for (std::size_t f = 0; f < log_mel.rows; ++f) {
    for (std::size_t k = 0; k < cfg.n_coeffs; ++k) {
      double acc = 0.0;
      for (std::size_t m = 0; m < cfg.n_mels; ++m) acc += dct(k, m) * log_mel(f, m);
      out(f, k) = acc;
    }
  }
  return out;
}

}  // namespace bark
