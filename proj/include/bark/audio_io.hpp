#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace bark {

inline constexpr int kCanonicalSampleRateHz = 16000;

// Mono waveform with samples in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate_hz = kCanonicalSampleRateHz;

  std::size_t size() const noexcept { return samples.size(); }
  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

// Decodes a RIFF/WAVE container holding 16-bit integer PCM (mono or stereo).
// Stereo is downmixed by channel mean; unknown chunks are skipped.
// Throws Error{kMissingMagic, kUnsupportedFormat, kTruncated}.
AudioClip parse_wav(std::span<const std::uint8_t> bytes);

// Canonical 44-byte-header mono 16-bit WAV. Samples are clamped to the
// representable range after scaling by 32768.
std::vector<std::uint8_t> emit_wav(const AudioClip& clip);

// Linear interpolation at positions i * src_rate / target_rate.
AudioClip resample_linear(const AudioClip& clip, int target_rate_hz);

AudioClip read_wav_file(const std::filesystem::path& path);
void write_wav_file(const std::filesystem::path& path, const AudioClip& clip);

}  // namespace bark
