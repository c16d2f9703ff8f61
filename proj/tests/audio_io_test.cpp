#include "bark/audio_io.hpp"

#include <gtest/gtest.h>

#include <cstdint>
#include <vector>

#include "bark/error.hpp"
#include "bark/rng.hpp"

namespace bark {
namespace {

void append_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(v & 0xFF);
  b.push_back(v >> 8);
}

void append_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) b.push_back((v >> s) & 0xFF);
}

void append_tag(std::vector<std::uint8_t>& b, const char* tag) { b.insert(b.end(), tag, tag + 4); }

// Hand-assembled WAV with an arbitrary fmt header and raw data bytes.
std::vector<std::uint8_t> make_wav(std::uint16_t format_tag, std::uint16_t channels,
                                   std::uint32_t rate, std::uint16_t bits,
                                   const std::vector<std::int16_t>& samples,
                                   bool extra_chunk = false) {
  std::vector<std::uint8_t> b;
  append_tag(b, "RIFF");
  append_u32(b, 0);  // patched below
  append_tag(b, "WAVE");
  append_tag(b, "fmt ");
  append_u32(b, 16);
  append_u16(b, format_tag);
  append_u16(b, channels);
  append_u32(b, rate);
  append_u32(b, rate * channels * bits / 8);
  append_u16(b, static_cast<std::uint16_t>(channels * bits / 8));
  append_u16(b, bits);
  if (extra_chunk) {
    append_tag(b, "LIST");
    append_u32(b, 5);
    for (int i = 0; i < 6; ++i) b.push_back('x');  // 5 bytes + pad byte
  }
  append_tag(b, "data");
  append_u32(b, static_cast<std::uint32_t>(samples.size() * 2));
  for (auto s : samples) append_u16(b, static_cast<std::uint16_t>(s));
  const auto riff = static_cast<std::uint32_t>(b.size() - 8);
  for (int i = 0; i < 4; ++i) b[4 + i] = (riff >> (8 * i)) & 0xFF;
  return b;
}

ErrorCode code_of(const std::vector<std::uint8_t>& bytes) {
  try {
    parse_wav(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "parse_wav did not throw";
  return ErrorCode::kEmpty;
}

TEST(ParseWavTest, AcceptsPcmHeader) {
  const auto bytes = make_wav(1, 1, 16000, 16, {0, 1, 2});
  ASSERT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "RIFF");
  ASSERT_EQ(std::string(bytes.begin() + 8, bytes.begin() + 12), "WAVE");
  const AudioClip clip = parse_wav(bytes);
  EXPECT_EQ(clip.sample_rate_hz, 16000);
  EXPECT_EQ(clip.samples.size(), 3u);
}

TEST(ParseWavTest, FixedPointScaling) {
  const AudioClip clip = parse_wav(make_wav(1, 1, 8000, 16, {16384, -32768, 32767, 0}));
  EXPECT_EQ(clip.samples[0], 0.5);
  EXPECT_EQ(clip.samples[1], -1.0);
  EXPECT_EQ(clip.samples[2], 32767.0 / 32768.0);
  EXPECT_EQ(clip.samples[3], 0.0);
}

TEST(ParseWavTest, StereoIsDownmixedByMean) {
  const AudioClip clip = parse_wav(make_wav(1, 2, 44100, 16, {16384, 0, -16384, -16384}));
  ASSERT_EQ(clip.samples.size(), 2u);
  EXPECT_EQ(clip.samples[0], 0.25);
  EXPECT_EQ(clip.samples[1], -0.5);
  EXPECT_EQ(clip.sample_rate_hz, 44100);
}

TEST(ParseWavTest, SkipsUnknownChunksWithPadding) {
  const AudioClip clip = parse_wav(make_wav(1, 1, 16000, 16, {16384}, /*extra_chunk=*/true));
  ASSERT_EQ(clip.samples.size(), 1u);
  EXPECT_EQ(clip.samples[0], 0.5);
}

TEST(ParseWavTest, RejectsMissingMagic) {
  auto bytes = make_wav(1, 1, 16000, 16, {1});
  bytes[0] = 'X';
  EXPECT_EQ(code_of(bytes), ErrorCode::kMissingMagic);
  bytes = make_wav(1, 1, 16000, 16, {1});
  bytes[10] = 'X';
  EXPECT_EQ(code_of(bytes), ErrorCode::kMissingMagic);
  EXPECT_EQ(code_of({}), ErrorCode::kMissingMagic);
}

TEST(ParseWavTest, RejectsUnsupportedFormat) {
  EXPECT_EQ(code_of(make_wav(3, 1, 16000, 16, {1})), ErrorCode::kUnsupportedFormat);
  EXPECT_EQ(code_of(make_wav(1, 1, 16000, 24, {1})), ErrorCode::kUnsupportedFormat);
  EXPECT_EQ(code_of(make_wav(1, 6, 16000, 16, {1, 2, 3, 4, 5, 6})),
            ErrorCode::kUnsupportedFormat);
}

TEST(ParseWavTest, RejectsTruncatedData) {
  auto bytes = make_wav(1, 1, 16000, 16, {1, 2, 3, 4});
  bytes.resize(bytes.size() - 3);
  EXPECT_EQ(code_of(bytes), ErrorCode::kTruncated);
}

TEST(ParseWavTest, NeverLeavesUnitRange) {
  SeededRng rng(7);
  std::vector<std::int16_t> raw(4096);
  for (auto& s : raw) s = static_cast<std::int16_t>(rng.next_u64() & 0xFFFF);
  for (std::uint16_t channels : {1, 2}) {
    const AudioClip clip = parse_wav(make_wav(1, channels, 16000, 16, raw));
    for (double s : clip.samples) {
      ASSERT_GE(s, -1.0);
      ASSERT_LE(s, 1.0);
    }
  }
}

TEST(EmitWavTest, EmptyClipIsHeaderOnly) {
  const auto bytes = emit_wav(AudioClip{{}, 16000});
  ASSERT_EQ(bytes.size(), 44u);
  EXPECT_EQ(bytes[40] | bytes[41] | bytes[42] | bytes[43], 0);
  EXPECT_EQ(parse_wav(bytes).samples.size(), 0u);
}

TEST(EmitWavTest, CanonicalHeaderFields) {
  const auto bytes = emit_wav(AudioClip{{0.0, 0.0}, 16000});
  const std::vector<std::uint8_t> expected_header = {
      'R', 'I', 'F', 'F', 40, 0, 0, 0, 'W', 'A', 'V', 'E', 'f', 'm', 't', ' ',
      16,  0,   0,   0,   1,  0, 1, 0, 0x80, 0x3E, 0, 0, 0x00, 0x7D, 0, 0,
      2,   0,   16,  0,   'd', 'a', 't', 'a', 4, 0, 0, 0};
  ASSERT_EQ(bytes.size(), 48u);
  EXPECT_EQ(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 44), expected_header);
}

TEST(EmitWavTest, ZeroSample) {
  const auto bytes = emit_wav(AudioClip{{0.0}, 16000});
  ASSERT_EQ(bytes.size(), 46u);
  EXPECT_EQ(bytes[44], 0x00);
  EXPECT_EQ(bytes[45], 0x00);
}

TEST(EmitWavTest, HalfScaleLittleEndian) {
  // 16384 = 0x4000, -16384 = 0xC000.
  const auto bytes = emit_wav(AudioClip{{0.5, -0.5}, 16000});
  ASSERT_EQ(bytes.size(), 48u);
  EXPECT_EQ(std::vector<std::uint8_t>(bytes.begin() + 44, bytes.end()),
            (std::vector<std::uint8_t>{0x00, 0x40, 0x00, 0xC0}));
}

TEST(EmitWavTest, ClampsOutOfRange) {
  const AudioClip back = parse_wav(emit_wav(AudioClip{{1.0, 3.0, -1.5}, 16000}));
  EXPECT_EQ(back.samples[0], 32767.0 / 32768.0);
  EXPECT_EQ(back.samples[1], 32767.0 / 32768.0);
  EXPECT_EQ(back.samples[2], -1.0);
}

// Clips on the 1/32768 grid survive emit -> parse exactly, and re-emitting the
// parsed clip reproduces the original bytes.
TEST(WavRoundTripTest, RandomizedClipsAreBitExact) {
  SeededRng rng(2024);
  const int rates[] = {8000, 16000, 22050, 44100, 48000};
  for (int trial = 0; trial < 100; ++trial) {
    AudioClip clip;
    clip.sample_rate_hz = rates[rng.uniform_index(5)];
    clip.samples.resize(rng.uniform_index(2000));
    for (double& s : clip.samples) {
      s = (static_cast<double>(rng.uniform_index(65536)) - 32768.0) / 32768.0;
    }
    const auto bytes = emit_wav(clip);
    const AudioClip back = parse_wav(bytes);
    ASSERT_EQ(back.sample_rate_hz, clip.sample_rate_hz);
    ASSERT_EQ(back.samples, clip.samples) << "trial " << trial;
    ASSERT_EQ(emit_wav(back), bytes) << "trial " << trial;
  }
}

TEST(ResampleLinearTest, SameRateIsIdentity) {
  const AudioClip clip{{0.1, -0.2, 0.3}, 16000};
  const AudioClip out = resample_linear(clip, 16000);
  EXPECT_EQ(out.samples, clip.samples);
  EXPECT_EQ(out.sample_rate_hz, 16000);
}

TEST(ResampleLinearTest, Upsample) {
  const AudioClip out = resample_linear(AudioClip{{0.0, 1.0}, 2}, 4);
  EXPECT_EQ(out.sample_rate_hz, 4);
  EXPECT_EQ(out.samples, (std::vector<double>{0.0, 0.5, 1.0, 1.0}));
}

TEST(ResampleLinearTest, DownsampleLength) {
  AudioClip clip{std::vector<double>(44100, 0.25), 44100};
  const AudioClip out = resample_linear(clip, 16000);
  EXPECT_EQ(out.samples.size(), 16000u);
  for (double s : out.samples) ASSERT_EQ(s, 0.25);
}

TEST(ResampleLinearTest, EmptyClip) {
  const AudioClip out = resample_linear(AudioClip{{}, 8000}, 16000);
  EXPECT_TRUE(out.samples.empty());
  EXPECT_EQ(out.sample_rate_hz, 16000);
}

}  // namespace
}  // namespace bark
