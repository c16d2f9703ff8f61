#include "bark/data_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bark/error.hpp"
#include "bark/rng.hpp"

namespace bark {
namespace {

constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "aggressive", "arrogant", "fear_and_pain", "happy", "sad"};

std::string_view trim(std::string_view s) {
  const auto not_space = [](char c) {
    return c != ' ' && c != '\t' && c != '\r' && c != '\n';
  };
  while (!s.empty() && !not_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && !not_space(s.back())) s.remove_suffix(1);
  return s;
}

// Largest-remainder apportionment of `total` over `weights`.
std::vector<std::size_t> apportion(std::size_t total,
                                   const std::vector<std::size_t>& weights) {
  std::size_t weight_sum = 0;
  for (auto w : weights) weight_sum += w;
  std::vector<std::size_t> out(weights.size(), 0);
  if (weight_sum == 0) return out;

  std::vector<std::pair<std::size_t, std::size_t>> remainders;  // (rem, idx)
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const auto product = static_cast<unsigned __int128>(total) * weights[i];
    out[i] = static_cast<std::size_t>(product / weight_sum);
    remainders.emplace_back(static_cast<std::size_t>(product % weight_sum), i);
    assigned += out[i];
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) {
    ++out[remainders[k % remainders.size()].second];
  }
  return out;
}

}  // namespace

std::string_view class_name(EmotionClass c) {
  return kClassNames.at(static_cast<std::size_t>(ordinal(c)));
}

std::optional<EmotionClass> class_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (kClassNames[i] == name) return static_cast<EmotionClass>(i);
  }
  return std::nullopt;
}

EmotionClass class_from_ordinal(int value) {
  if (value < 0 || value >= static_cast<int>(kNumClasses)) {
    throw Error(ErrorCode::kLabelOutOfRange,
                "class ordinal " + std::to_string(value));
  }
  return static_cast<EmotionClass>(value);
}

double rms(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

std::vector<Fragment> segment_clip(const AudioClip& clip,
                                   std::size_t fragment_len, std::size_t hop,
                                   double energy_gate) {
  if (fragment_len == 0 || hop == 0) {
    throw Error(ErrorCode::kBadConfig, "fragment_len and hop must be positive");
  }
  std::vector<Fragment> out;
  const std::size_t n = clip.samples.size();
  if (n < fragment_len) return out;
  const std::size_t windows = (n - fragment_len) / hop + 1;
  for (std::size_t w = 0; w < windows; ++w) {
    const auto begin = clip.samples.begin() + static_cast<std::ptrdiff_t>(w * hop);
    Fragment f{std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(fragment_len))};
    if (rms(f.samples) > energy_gate) out.push_back(std::move(f));
  }
  return out;
}

void peak_normalize(std::vector<double>& samples) {
  double peak = 0.0;
  for (double v : samples) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    for (double& v : samples) v /= peak;
  }
}

Manifest load_manifest(std::string_view text) {
  Manifest manifest;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    line = trim(line);
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string_view::npos) {
      throw Error(ErrorCode::kMalformedRow,
                  "line " + std::to_string(line_no) + ": expected \"path,label\"");
    }
    const auto path = trim(line.substr(0, comma));
    const auto label = trim(line.substr(comma + 1));
    if (path.empty()) {
      throw Error(ErrorCode::kMalformedRow,
                  "line " + std::to_string(line_no) + ": empty path");
    }
    const auto cls = class_from_name(label);
    if (!cls) {
      throw Error(ErrorCode::kUnknownLabel, "line " + std::to_string(line_no) +
                                                ": unknown label \"" +
                                                std::string(label) + "\"");
    }
    manifest.rows.push_back({std::string(path), *cls});
  }
  return manifest;
}

std::string format_manifest(const Manifest& manifest) {
  std::ostringstream out;
  for (const auto& row : manifest.rows) {
    out << row.path << ',' << class_name(row.label) << '\n';
  }
  return out.str();
}

Splits stratified_split(const std::vector<LabeledFragment>& items,
                        const SplitConfig& cfg) {
  if (cfg.train_n == 0 || cfg.val_n == 0 || cfg.test_n == 0) {
    throw Error(ErrorCode::kBadConfig, "split sizes must be positive");
  }

  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < items.size(); ++i) {
    by_class[static_cast<std::size_t>(ordinal(items[i].label))].push_back(i);
  }
  std::vector<std::size_t> counts;
  for (const auto& idx : by_class) counts.push_back(idx.size());

  const std::array<std::pair<const char*, std::size_t>, 3> sizes = {
      {{"train", cfg.train_n}, {"val", cfg.val_n}, {"test", cfg.test_n}}};
  std::array<std::vector<std::size_t>, 3> alloc;
  for (std::size_t s = 0; s < 3; ++s) alloc[s] = apportion(sizes[s].second, counts);

  if (items.empty()) {
    throw Error(ErrorCode::kInsufficientData, "split train: pool is empty");
  }

  for (std::size_t c = 0; c < kNumClasses; ++c) {
    std::size_t used = 0;
    for (std::size_t s = 0; s < 3; ++s) {
      used += alloc[s][c];
      if (used > counts[c]) {
        throw Error(ErrorCode::kInsufficientData,
                    "class " + std::string(class_name(static_cast<EmotionClass>(c))) +
                        " has " + std::to_string(counts[c]) +
                        " items, split " + sizes[s].first + " needs " +
                        std::to_string(used) + " cumulatively");
      }
    }
  }

  Splits out;
  std::array<std::vector<LabeledFragment>*, 3> targets = {&out.train, &out.val,
                                                            &out.test};
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    SeededRng rng(derive_seed(cfg.seed, c));
    auto order = by_class[c];
    seeded_shuffle(order.begin(), order.end(), rng);
    std::size_t cursor = 0;
    for (std::size_t s = 0; s < 3; ++s) {
      for (std::size_t k = 0; k < alloc[s][c]; ++k) {
        targets[s]->push_back(items[order[cursor++]]);
      }
    }
  }
  for (std::size_t s = 0; s < 3; ++s) {
    SeededRng rng(derive_seed(cfg.seed, 100 + s));
    seeded_shuffle(targets[s]->begin(), targets[s]->end(), rng);
  }
  return out;
}

std::vector<LabeledFragment> synth_dataset(std::size_t n_per_class,
                                           std::size_t fragment_len,
                                           int sample_rate_hz, double snr_db,
                                           std::uint64_t seed) {
  if (n_per_class == 0 || fragment_len == 0 || sample_rate_hz <= 0) {
    throw Error(ErrorCode::kBadConfig,
                "n_per_class, fragment_len and sample_rate_hz must be positive");
  }
  constexpr double kAmplitude = 0.5;
  SeededRng rng(seed);
  std::vector<LabeledFragment> out;
  out.reserve(n_per_class * kNumClasses);
  std::vector<double> noise(fragment_len);

  for (std::size_t i = 0; i < n_per_class; ++i) {
    for (EmotionClass cls : kAllClasses) {
      const double omega =
          2.0 * std::numbers::pi * synth_frequency_hz(cls) / sample_rate_hz;
      const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      LabeledFragment item{Fragment{std::vector<double>(fragment_len)}, cls};
      auto& x = item.fragment.samples;
      double signal_power = 0.0;
      for (std::size_t t = 0; t < fragment_len; ++t) {
        x[t] = kAmplitude * std::sin(omega * static_cast<double>(t) + phase);
        signal_power += x[t] * x[t];
      }
      signal_power /= static_cast<double>(fragment_len);

      if (!(std::isinf(snr_db) && snr_db > 0)) {
        double noise_power = 0.0;
        for (double& v : noise) {
          v = rng.normal();
          noise_power += v * v;
        }
        noise_power /= static_cast<double>(fragment_len);
        const double target_power = signal_power / std::pow(10.0, snr_db / 10.0);
        const double scale =
            noise_power > 0.0 ? std::sqrt(target_power / noise_power) : 0.0;
        for (std::size_t t = 0; t < fragment_len; ++t) x[t] += scale * noise[t];
      }
      out.push_back(std::move(item));
    }
  }
  return out;
}

std::vector<std::vector<std::size_t>> batch_indices(std::size_t n,
                                                    std::size_t batch_size,
                                                    std::uint64_t seed) {
  if (batch_size == 0) throw Error(ErrorCode::kBadConfig, "batch_size must be positive");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  SeededRng rng(seed);
  seeded_shuffle(order.begin(), order.end(), rng);

  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

std::vector<std::vector<const LabeledFragment*>> batch_iterator(
    const std::vector<LabeledFragment>& items, std::size_t batch_size,
    std::uint64_t seed) {
  std::vector<std::vector<const LabeledFragment*>> out;
  for (const auto& batch : batch_indices(items.size(), batch_size, seed)) {
    auto& dst = out.emplace_back();
    dst.reserve(batch.size());
    for (auto i : batch) dst.push_back(&items[i]);
  }
  return out;
}

}  // namespace bark
