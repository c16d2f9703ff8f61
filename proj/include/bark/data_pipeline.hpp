#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bark/audio_io.hpp"

namespace bark {

enum class EmotionClass : int {
  kAggressive = 0,
  kArrogant = 1,
  kFearAndPain = 2,
  kHappy = 3,
  kSad = 4,
};

inline constexpr std::size_t kNumClasses = 5;

inline constexpr std::array<EmotionClass, kNumClasses> kAllClasses = {
    EmotionClass::kAggressive, EmotionClass::kArrogant,
    EmotionClass::kFearAndPain, EmotionClass::kHappy, EmotionClass::kSad};

constexpr int ordinal(EmotionClass c) { return static_cast<int>(c); }

std::string_view class_name(EmotionClass c);
std::optional<EmotionClass> class_from_name(std::string_view name);
// Throws Error{kLabelOutOfRange} outside 0..4.
EmotionClass class_from_ordinal(int ordinal);

inline constexpr std::size_t kDefaultFragmentLen = 12000;
inline constexpr double kDefaultEnergyGate = 0.01;

struct Fragment {
  std::vector<double> samples;
};

struct LabeledFragment {
  Fragment fragment;
  EmotionClass label;
};

struct ManifestRow {
  std::string path;
  EmotionClass label;
};

struct Manifest {
  std::vector<ManifestRow> rows;
};

struct SplitConfig {
  std::size_t train_n = 4000;
  std::size_t val_n = 800;
  std::size_t test_n = 1500;
  std::uint64_t seed = 0;
};

struct Splits {
  std::vector<LabeledFragment> train;
  std::vector<LabeledFragment> val;
  std::vector<LabeledFragment> test;
};

double rms(const std::vector<double>& x);

// Full, non-padded windows at 0, hop, 2*hop, ... whose RMS exceeds
// energy_gate.
std::vector<Fragment> segment_clip(const AudioClip& clip,
                                   std::size_t fragment_len, std::size_t hop,
                                   double energy_gate);

// Divides by the peak absolute value when it is non-zero.
void peak_normalize(std::vector<double>& samples);

// Parses "path,label" lines. LF or CRLF; blank lines skipped.
// Throws Error{kUnknownLabel, kMalformedRow} naming the 1-based line.
Manifest load_manifest(std::string_view text);
std::string format_manifest(const Manifest& manifest);

// Class-proportional split with largest-remainder allocation per split.
// Throws Error{kInsufficientData} naming the deficient class and split.
Splits stratified_split(const std::vector<LabeledFragment>& items,
                        const SplitConfig& cfg);

// Class k is a sine at 400*(k+1) Hz, amplitude 0.5, random phase, plus white
// Gaussian noise rescaled so that the fragment's measured SNR equals snr_db.
// snr_db = +inf produces noise-free fragments.
std::vector<LabeledFragment> synth_dataset(std::size_t n_per_class,
                                           std::size_t fragment_len,
                                           int sample_rate_hz, double snr_db,
                                           std::uint64_t seed);

inline constexpr double synth_frequency_hz(EmotionClass c) {
  return 400.0 * (ordinal(c) + 1);
}

// Seeded shuffle of 0..n-1 chunked into batches; the last batch may be short.
std::vector<std::vector<std::size_t>> batch_indices(std::size_t n,
                                                    std::size_t batch_size,
                                                    std::uint64_t seed);

std::vector<std::vector<const LabeledFragment*>> batch_iterator(
    const std::vector<LabeledFragment>& items, std::size_t batch_size,
    std::uint64_t seed);

}  // namespace bark
