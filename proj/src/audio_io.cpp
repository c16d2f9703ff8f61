#include "bark/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>

#include "bark/error.hpp"

namespace bark {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::size_t kCanonicalHeaderSize = 44;

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) |
         (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xFF));
  }
}

void put_tag(std::vector<std::uint8_t>& out, const char (&tag)[5]) {
  out.insert(out.end(), tag, tag + 4);
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

struct FmtChunk {
  std::uint16_t format_tag = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits_per_sample = 0;
};

}  // namespace

AudioClip parse_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") ||
      !tag_is(bytes, 8, "WAVE")) {
    throw Error(ErrorCode::kMissingMagic, "not a RIFF/WAVE container");
  }

  std::optional<FmtChunk> fmt;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t chunk_size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;

    if (tag_is(bytes, pos, "fmt ")) {
      if (chunk_size < 16 || body + 16 > bytes.size()) {
        throw Error(ErrorCode::kTruncated, "fmt chunk shorter than 16 bytes");
      }
      FmtChunk f;
      f.format_tag = read_u16(bytes, body);
      f.channels = read_u16(bytes, body + 2);
      f.sample_rate = read_u32(bytes, body + 4);
      f.bits_per_sample = read_u16(bytes, body + 14);
      if (f.format_tag != kFormatPcm || f.bits_per_sample != 16) {
        throw Error(ErrorCode::kUnsupportedFormat,
                    "format tag " + std::to_string(f.format_tag) + ", " +
                        std::to_string(f.bits_per_sample) +
                        " bits; only 16-bit PCM is supported");
      }
      if (f.channels < 1 || f.channels > 2) {
        throw Error(ErrorCode::kUnsupportedFormat,
                    std::to_string(f.channels) + " channels");
      }
      if (f.sample_rate == 0) {
        throw Error(ErrorCode::kUnsupportedFormat, "sample rate 0");
      }
      fmt = f;
    } else if (tag_is(bytes, pos, "data")) {
      if (!fmt) {
        throw Error(ErrorCode::kUnsupportedFormat, "data chunk before fmt");
      }
      if (static_cast<std::uint64_t>(body) + chunk_size > bytes.size()) {
        throw Error(ErrorCode::kTruncated,
                    "data chunk declares " + std::to_string(chunk_size) +
                        " bytes, " + std::to_string(bytes.size() - body) +
                        " available");
      }
      const std::size_t frame_bytes = 2u * fmt->channels;
      const std::size_t frames = chunk_size / frame_bytes;
      AudioClip clip;
      clip.sample_rate_hz = static_cast<int>(fmt->sample_rate);
      clip.samples.resize(frames);
      for (std::size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (std::size_t c = 0; c < fmt->channels; ++c) {
          const auto raw = static_cast<std::int16_t>(
              read_u16(bytes, body + i * frame_bytes + 2 * c));
          acc += static_cast<double>(raw) / 32768.0;
        }
        clip.samples[i] = acc / fmt->channels;
      }
      return clip;
    }
    // RIFF chunks are word aligned.
    pos = body + chunk_size + (chunk_size & 1u);
  }

  if (!fmt) throw Error(ErrorCode::kTruncated, "no fmt chunk");
  throw Error(ErrorCode::kTruncated, "no data chunk");
}

std::vector<std::uint8_t> emit_wav(const AudioClip& clip) {
  const auto data_size = static_cast<std::uint32_t>(clip.samples.size() * 2);
  const auto rate = static_cast<std::uint32_t>(clip.sample_rate_hz);

  std::vector<std::uint8_t> out;
  out.reserve(kCanonicalHeaderSize + data_size);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_size);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);         // channels
  put_u32(out, rate);
  put_u32(out, rate * 2);  // byte rate
  put_u16(out, 2);         // block align
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_size);
  for (double s : clip.samples) {
    const double scaled = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
  }
  return out;
}

AudioClip resample_linear(const AudioClip& clip, int target_rate_hz) {
  if (target_rate_hz <= 0) {
    throw Error(ErrorCode::kBadConfig, "target sample rate must be positive");
  }
  if (target_rate_hz == clip.sample_rate_hz) return clip;

  AudioClip out;
  out.sample_rate_hz = target_rate_hz;
  const std::size_t n = clip.samples.size();
  if (n == 0) return out;

  const auto out_len = static_cast<std::size_t>(
      (static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(target_rate_hz)) /
      static_cast<std::uint64_t>(clip.sample_rate_hz));
  const double step = static_cast<double>(clip.sample_rate_hz) / target_rate_hz;
  out.samples.resize(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    const double x = static_cast<double>(i) * step;
    const auto lo = static_cast<std::size_t>(x);
    if (lo + 1 >= n) {
      out.samples[i] = clip.samples[n - 1];
      continue;
    }
    const double frac = x - static_cast<double>(lo);
    out.samples[i] = clip.samples[lo] + frac * (clip.samples[lo + 1] - clip.samples[lo]);
  }
  return out;
}

AudioClip read_wav_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_wav(bytes);
}

void write_wav_file(const std::filesystem::path& path, const AudioClip& clip) {
  const auto bytes = emit_wav(clip);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

}  // namespace bark
