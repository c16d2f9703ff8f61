#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "bark/data_pipeline.hpp"
#include "bark/dsp_features.hpp"
#include "bark/evaluation.hpp"
#include "bark/model.hpp"
#include "bark/training.hpp"

namespace bark::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitEmpty = 3,
};

struct SynthConfig {
  std::size_t n_per_class = 1260;
  double snr_db = 10.0;
};

// Every module configuration in one place. Serialised as a JSON object with
// sections audio, data, synth, mfcc, model and train plus a top-level seed.
struct RunConfig {
  int sample_rate_hz = kCanonicalSampleRateHz;
  std::size_t fragment_len = kDefaultFragmentLen;
  std::size_t hop = 0;  // 0 means hop = fragment_len
  double energy_gate = kDefaultEnergyGate;
  SynthConfig synth;
  MfccConfig mfcc;
  BarkNetConfig model;
  TrainConfig train;
  SplitConfig split;
  std::uint64_t seed = 0;

  std::size_t effective_hop() const { return hop == 0 ? fragment_len : hop; }

  // Pushes fragment_len and the seed into the sub-configs and validates them.
  // Throws Error{kBadConfig}.
  void finalize();
};

// Throws Error{kBadConfig} on malformed JSON or unknown keys.
RunConfig parse_run_config(std::string_view json_text);
std::string dump_run_config(const RunConfig& cfg);

std::string report_to_json(const ClassificationReport& report);
std::string train_log_to_json(const TrainLog& log);

// Reads every manifest row, resamples to the configured rate and segments it.
// Paths are resolved relative to the manifest directory.
std::vector<LabeledFragment> load_labeled_fragments(const std::filesystem::path& manifest_path,
                                                    const RunConfig& cfg);

struct SynthOutput {
  std::filesystem::path manifest;
  std::size_t files = 0;
};

// Writes <out>/<class>/<class>_<index>.wav and <out>/manifest.csv.
SynthOutput cmd_synth(const RunConfig& cfg, const std::filesystem::path& out_dir);

// Clip-level label by majority vote, ties to the lowest ordinal.
EmotionClass majority_vote(std::span<const EmotionClass> votes);

// Entry point shared by the executable and the tests. args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bark::cli
