#include "bark/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "bark/audio_io.hpp"
#include "bark/error.hpp"
#include "bark/rng.hpp"

namespace bark::cli {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

namespace {

enum SeedTag : std::uint64_t { kSplitSeed = 1, kModelSeed = 2, kTrainSeed = 3, kSynthSeed = 4 };

// Reads known keys out of one JSON section and rejects the rest.
class SectionReader {
 public:
  SectionReader(const json& root, const char* name) : name_(name) {
    if (!root.contains(name)) return;
    section_ = &root.at(name);
    if (!section_->is_object()) bad("section must be an object");
  }

  template <typename T>
  void read(const char* key, T& target) {
    seen_.push_back(key);
    if (section_ == nullptr || !section_->contains(key)) return;
    try {
      target = section_->at(key).get<T>();
    } catch (const json::exception& e) {
      bad(std::string(key) + ": " + e.what());
    }
  }

  void finish() const {
    if (section_ == nullptr) return;
    for (const auto& [key, value] : section_->items()) {
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
        bad("unknown key \"" + key + "\"");
      }
    }
  }

 private:
  [[noreturn]] void bad(const std::string& msg) const {
    throw Error(ErrorCode::kBadConfig, std::string("config section ") + name_ + ": " + msg);
  }

  const char* name_;
  const json* section_ = nullptr;
  std::vector<std::string> seen_;
};

std::string optimizer_name(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "sgd";
}

OptimizerKind optimizer_from_name(const std::string& name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "sgd") return OptimizerKind::kSgd;
  throw Error(ErrorCode::kBadConfig, "optimizer must be adam or sgd, got " + name);
}

}  // namespace

void RunConfig::finalize() {
  if (sample_rate_hz <= 0) throw Error(ErrorCode::kBadConfig, "sample_rate_hz must be positive");
  if (fragment_len == 0) throw Error(ErrorCode::kBadConfig, "fragment_len must be positive");
  if (!(energy_gate >= 0.0)) throw Error(ErrorCode::kBadConfig, "energy_gate must be >= 0");
  if (synth.n_per_class == 0) throw Error(ErrorCode::kBadConfig, "n_per_class must be positive");
  model.fragment_len = fragment_len;
  model.seed = derive_seed(seed, kModelSeed);
  split.seed = derive_seed(seed, kSplitSeed);
  train.seed = derive_seed(seed, kTrainSeed);
  if (split.train_n == 0 || split.val_n == 0 || split.test_n == 0) {
    throw Error(ErrorCode::kBadConfig, "split sizes must be positive");
  }
  mfcc.validate();
  model.validate();
  train.validate();
}

RunConfig parse_run_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kBadConfig, std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw Error(ErrorCode::kBadConfig, "config must be a JSON object");

  RunConfig cfg;
  for (const auto& [key, value] : root.items()) {
    static const std::vector<std::string> kSections = {"audio", "data",  "synth", "mfcc",
                                                       "model", "train", "seed"};
    if (std::find(kSections.begin(), kSections.end(), key) == kSections.end()) {
      throw Error(ErrorCode::kBadConfig, "unknown config section \"" + key + "\"");
    }
  }
  if (root.contains("seed")) {
    if (!root["seed"].is_number_unsigned() && !root["seed"].is_number_integer()) {
      throw Error(ErrorCode::kBadConfig, "seed must be an integer");
    }
    cfg.seed = root["seed"].get<std::uint64_t>();
  }

  SectionReader audio(root, "audio");
  audio.read("sample_rate_hz", cfg.sample_rate_hz);
  audio.finish();

  SectionReader data(root, "data");
  data.read("fragment_len", cfg.fragment_len);
  data.read("hop", cfg.hop);
  data.read("energy_gate", cfg.energy_gate);
  data.read("train_n", cfg.split.train_n);
  data.read("val_n", cfg.split.val_n);
  data.read("test_n", cfg.split.test_n);
  data.finish();

  SectionReader synth(root, "synth");
  synth.read("n_per_class", cfg.synth.n_per_class);
  synth.read("snr_db", cfg.synth.snr_db);
  synth.finish();

  SectionReader mfcc(root, "mfcc");
  mfcc.read("frame_len", cfg.mfcc.frame_len);
  mfcc.read("hop", cfg.mfcc.hop);
  mfcc.read("fft_len", cfg.mfcc.fft_len);
  mfcc.read("n_mels", cfg.mfcc.n_mels);
  mfcc.read("n_coeffs", cfg.mfcc.n_coeffs);
  mfcc.read("pre_emphasis", cfg.mfcc.pre_emphasis);
  mfcc.read("log_floor", cfg.mfcc.log_floor);
  mfcc.finish();

  SectionReader model(root, "model");
  model.read("conv1_channels", cfg.model.conv1_channels);
  model.read("conv1_kernel", cfg.model.conv1_kernel);
  model.read("conv1_stride", cfg.model.conv1_stride);
  model.read("conv2_channels", cfg.model.conv2_channels);
  model.read("conv2_kernel", cfg.model.conv2_kernel);
  model.read("conv2_stride", cfg.model.conv2_stride);
  model.finish();

  SectionReader train(root, "train");
  std::string optimizer = optimizer_name(cfg.train.optimizer);
  train.read("epochs_max", cfg.train.epochs_max);
  train.read("batch_size", cfg.train.batch_size);
  train.read("optimizer", optimizer);
  train.read("lr", cfg.train.adam.lr);
  train.read("beta1", cfg.train.adam.beta1);
  train.read("beta2", cfg.train.adam.beta2);
  train.read("eps", cfg.train.adam.eps);
  train.read("sgd_lr", cfg.train.sgd_lr);
  train.read("early_stop_patience", cfg.train.early_stop_patience);
  train.finish();
  cfg.train.optimizer = optimizer_from_name(optimizer);
  return cfg;
}

std::string dump_run_config(const RunConfig& cfg) {
  json root;
  root["seed"] = cfg.seed;
  root["audio"] = {{"sample_rate_hz", cfg.sample_rate_hz}};
  root["data"] = {{"fragment_len", cfg.fragment_len}, {"hop", cfg.hop},
                  {"energy_gate", cfg.energy_gate},   {"train_n", cfg.split.train_n},
                  {"val_n", cfg.split.val_n},         {"test_n", cfg.split.test_n}};
  root["synth"] = {{"n_per_class", cfg.synth.n_per_class}, {"snr_db", cfg.synth.snr_db}};
  root["mfcc"] = {{"frame_len", cfg.mfcc.frame_len},       {"hop", cfg.mfcc.hop},
                  {"fft_len", cfg.mfcc.fft_len},           {"n_mels", cfg.mfcc.n_mels},
                  {"n_coeffs", cfg.mfcc.n_coeffs},         {"pre_emphasis", cfg.mfcc.pre_emphasis},
                  {"log_floor", cfg.mfcc.log_floor}};
  root["model"] = {{"conv1_channels", cfg.model.conv1_channels},
                   {"conv1_kernel", cfg.model.conv1_kernel},
                   {"conv1_stride", cfg.model.conv1_stride},
                   {"conv2_channels", cfg.model.conv2_channels},
                   {"conv2_kernel", cfg.model.conv2_kernel},
                   {"conv2_stride", cfg.model.conv2_stride}};
  root["train"] = {{"epochs_max", cfg.train.epochs_max},
                   {"batch_size", cfg.train.batch_size},
                   {"optimizer", optimizer_name(cfg.train.optimizer)},
                   {"lr", cfg.train.adam.lr},
                   {"beta1", cfg.train.adam.beta1},
                   {"beta2", cfg.train.adam.beta2},
                   {"eps", cfg.train.adam.eps},
                   {"sgd_lr", cfg.train.sgd_lr},
                   {"early_stop_patience", cfg.train.early_stop_patience}};
  return root.dump(2) + "\n";
}

std::string report_to_json(const ClassificationReport& report) {
  json classes = json::array();
  for (const auto& m : report.classes) {
    classes.push_back({{"name", m.name},
                       {"precision", m.precision},
                       {"recall", m.recall},
                       {"f1", m.f1},
                       {"support", m.support},
                       {"degenerate", m.degenerate}});
  }
  const auto avg = [](const AverageMetrics& a) {
    return json{{"precision", a.precision}, {"recall", a.recall}, {"f1", a.f1}};
  };
  json root = {{"classes", classes},
               {"accuracy", report.accuracy},
               {"macro_avg", avg(report.macro_avg)},
               {"weighted_avg", avg(report.weighted_avg)},
               {"total_support", report.total_support}};
  return root.dump(2) + "\n";
}

std::string train_log_to_json(const TrainLog& log) {
  // Wall time is left out so that identical runs produce identical files.
  json epochs = json::array();
  for (const auto& e : log.epochs) {
    epochs.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss},
                      {"val_accuracy", e.val_accuracy}});
  }
  json root = {{"epochs", epochs},
               {"best_epoch", log.best_epoch},
               {"best_val_accuracy", log.best_val_accuracy},
               {"first_batch_loss", log.first_batch_loss}};
  return root.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Data helpers
// ---------------------------------------------------------------------------

namespace {

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::uint8_t> read_binary_file(const fs::path& path) {
  const std::string text = read_text_file(path);
  return {text.begin(), text.end()};
}

void write_file(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

AudioClip load_canonical_clip(const fs::path& path, int sample_rate_hz) {
  return resample_linear(read_wav_file(path), sample_rate_hz);
}

}  // namespace

std::vector<LabeledFragment> load_labeled_fragments(const fs::path& manifest_path,
                                                    const RunConfig& cfg) {
  const Manifest manifest = load_manifest(read_text_file(manifest_path));
  const fs::path base = manifest_path.parent_path();
  std::vector<LabeledFragment> items;
  for (const auto& row : manifest.rows) {
    const fs::path wav = fs::path(row.path).is_absolute() ? fs::path(row.path) : base / row.path;
    const AudioClip clip = load_canonical_clip(wav, cfg.sample_rate_hz);
    for (auto& fragment :
         segment_clip(clip, cfg.fragment_len, cfg.effective_hop(), cfg.energy_gate)) {
      items.push_back({std::move(fragment), row.label});
    }
  }
  return items;
}

SynthOutput cmd_synth(const RunConfig& cfg, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + out_dir.string() + ": " + ec.message());

  const auto items = synth_dataset(cfg.synth.n_per_class, cfg.fragment_len, cfg.sample_rate_hz,
                                   cfg.synth.snr_db, derive_seed(cfg.seed, kSynthSeed));
  Manifest manifest;
  std::array<std::size_t, kNumClasses> next_index{};
  for (const auto& item : items) {
    const std::string name(class_name(item.label));
    const std::size_t index = next_index[static_cast<std::size_t>(ordinal(item.label))]++;
    char file[64];
    std::snprintf(file, sizeof(file), "%s_%05zu.wav", name.c_str(), index);
    const fs::path rel = fs::path(name) / file;
    fs::create_directories(out_dir / name, ec);
    if (ec) throw Error(ErrorCode::kIoError, "cannot create " + (out_dir / name).string());

    AudioClip clip;
    clip.sample_rate_hz = cfg.sample_rate_hz;
    clip.samples = item.fragment.samples;
    for (double& s : clip.samples) s = std::clamp(s, -1.0, 1.0);
    write_wav_file(out_dir / rel, clip);
    manifest.rows.push_back({rel.generic_string(), item.label});
  }
  SynthOutput out{out_dir / "manifest.csv", items.size()};
  write_file(out.manifest, format_manifest(manifest));
  return out;
}

EmotionClass majority_vote(std::span<const EmotionClass> votes) {
  if (votes.empty()) throw Error(ErrorCode::kNoFragments, "no votes to count");
  std::array<std::size_t, kNumClasses> counts{};
  for (auto v : votes) ++counts[static_cast<std::size_t>(ordinal(v))];
  std::size_t best = 0;
  for (std::size_t c = 1; c < kNumClasses; ++c) {
    if (counts[c] > counts[best]) best = c;
  }
  return static_cast<EmotionClass>(best);
}

// ---------------------------------------------------------------------------
// Command line
// ---------------------------------------------------------------------------

namespace {

struct Overrides {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> sample_rate_hz;
  std::optional<std::size_t> fragment_len;
  std::optional<std::size_t> hop;
  std::optional<double> energy_gate;
  std::optional<std::size_t> train_n;
  std::optional<std::size_t> val_n;
  std::optional<std::size_t> test_n;
  std::optional<std::size_t> n_per_class;
  std::optional<double> snr_db;
  std::optional<std::size_t> conv1_channels;
  std::optional<std::size_t> conv1_kernel;
  std::optional<std::size_t> conv1_stride;
  std::optional<std::size_t> conv2_channels;
  std::optional<std::size_t> conv2_kernel;
  std::optional<std::size_t> conv2_stride;
  std::optional<std::size_t> epochs_max;
  std::optional<std::size_t> batch_size;
  std::optional<std::string> optimizer;
  std::optional<double> lr;
  std::optional<double> sgd_lr;
  std::optional<std::size_t> patience;

  RunConfig resolve() const {
    RunConfig cfg = config_path ? parse_run_config(read_text_file(*config_path)) : RunConfig{};
    if (seed) cfg.seed = *seed;
    if (sample_rate_hz) cfg.sample_rate_hz = *sample_rate_hz;
    if (fragment_len) cfg.fragment_len = *fragment_len;
    if (hop) cfg.hop = *hop;
    if (energy_gate) cfg.energy_gate = *energy_gate;
    if (train_n) cfg.split.train_n = *train_n;
    if (val_n) cfg.split.val_n = *val_n;
    if (test_n) cfg.split.test_n = *test_n;
    if (n_per_class) cfg.synth.n_per_class = *n_per_class;
    if (snr_db) cfg.synth.snr_db = *snr_db;
    if (conv1_channels) cfg.model.conv1_channels = *conv1_channels;
    if (conv1_kernel) cfg.model.conv1_kernel = *conv1_kernel;
    if (conv1_stride) cfg.model.conv1_stride = *conv1_stride;
    if (conv2_channels) cfg.model.conv2_channels = *conv2_channels;
    if (conv2_kernel) cfg.model.conv2_kernel = *conv2_kernel;
    if (conv2_stride) cfg.model.conv2_stride = *conv2_stride;
    if (epochs_max) cfg.train.epochs_max = *epochs_max;
    if (batch_size) cfg.train.batch_size = *batch_size;
    if (optimizer) cfg.train.optimizer = optimizer_from_name(*optimizer);
    if (lr) cfg.train.adam.lr = *lr;
    if (sgd_lr) cfg.train.sgd_lr = *sgd_lr;
    if (patience) cfg.train.early_stop_patience = *patience;
    cfg.finalize();
    return cfg;
  }
};

void add_common_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON run configuration");
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--sample-rate", o.sample_rate_hz, "Canonical sample rate (Hz)");
  cmd->add_option("--fragment-len", o.fragment_len, "Fragment length in samples");
  cmd->add_option("--hop", o.hop, "Segmentation hop in samples (0 = fragment length)");
  cmd->add_option("--energy-gate", o.energy_gate, "Minimum fragment RMS");
  cmd->add_option("--train-n", o.train_n, "Training split size");
  cmd->add_option("--val-n", o.val_n, "Validation split size");
  cmd->add_option("--test-n", o.test_n, "Test split size");
  cmd->add_option("--n-per-class", o.n_per_class, "Synthetic fragments per class");
  cmd->add_option("--snr-db", o.snr_db, "Synthetic signal-to-noise ratio (dB)");
  cmd->add_option("--conv1-channels", o.conv1_channels);
  cmd->add_option("--conv1-kernel", o.conv1_kernel);
  cmd->add_option("--conv1-stride", o.conv1_stride);
  cmd->add_option("--conv2-channels", o.conv2_channels);
  cmd->add_option("--conv2-kernel", o.conv2_kernel);
  cmd->add_option("--conv2-stride", o.conv2_stride);
  cmd->add_option("--epochs", o.epochs_max, "Maximum training epochs");
  cmd->add_option("--batch-size", o.batch_size);
  cmd->add_option("--optimizer", o.optimizer, "adam or sgd");
  cmd->add_option("--lr", o.lr, "Adam learning rate");
  cmd->add_option("--sgd-lr", o.sgd_lr, "SGD learning rate");
  cmd->add_option("--patience", o.patience, "Early-stopping patience (epochs)");
}

Splits split_dataset(const fs::path& manifest, const RunConfig& cfg) {
  return stratified_split(load_labeled_fragments(manifest, cfg), cfg.split);
}

int do_train(const RunConfig& cfg, const fs::path& manifest, const fs::path& out_ckpt,
             const std::optional<fs::path>& log_path, std::ostream& out, std::ostream& err) {
  const Splits splits = split_dataset(manifest, cfg);
  err << "train=" << splits.train.size() << " val=" << splits.val.size()
      << " test=" << splits.test.size() << "\n";
  FitResult result = fit(init_barknet(cfg.model), splits.train, splits.val, cfg.train,
                         [&](const EpochRecord& r) {
                           out << format_epoch_line(r) << "\n" << std::flush;
                           err << "epoch " << r.epoch << " took " << r.wall_seconds << " s\n";
                         });
  const auto bytes = save_checkpoint(result.net);
  write_file(out_ckpt, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  if (log_path) write_file(*log_path, train_log_to_json(result.log));
  char line[96];
  std::snprintf(line, sizeof(line), "best_epoch=%zu val_acc=%.4f", result.log.best_epoch,
                result.log.best_val_accuracy);
  out << line << "\n";
  return kExitOk;
}

BarkNet read_checkpoint(const fs::path& path) {
  return load_checkpoint(read_binary_file(path));
}

int do_evaluate(RunConfig cfg, const fs::path& manifest, const fs::path& ckpt, bool as_json,
                const std::optional<fs::path>& report_path, std::ostream& out) {
  const BarkNet net = read_checkpoint(ckpt);
  cfg.fragment_len = net.config.fragment_len;
  const Splits splits = split_dataset(manifest, cfg);
  const SplitEvaluation eval = evaluate_split(net, splits.test);
  const ClassificationReport report =
      build_report(confusion(eval.truths, eval.predictions));
  const std::string json_text = report_to_json(report);
  if (report_path) write_file(*report_path, json_text);
  out << (as_json ? json_text : render_report(report));
  return kExitOk;
}

int do_predict(RunConfig cfg, const fs::path& ckpt, const fs::path& wav, bool as_json,
               std::ostream& out) {
  const BarkNet net = read_checkpoint(ckpt);
  cfg.fragment_len = net.config.fragment_len;
  const AudioClip clip = load_canonical_clip(wav, cfg.sample_rate_hz);
  const auto fragments =
      segment_clip(clip, cfg.fragment_len, cfg.effective_hop(), cfg.energy_gate);
  if (fragments.empty()) {
    throw Error(ErrorCode::kNoFragments, wav.string() + ": no fragment of " +
                                             std::to_string(cfg.fragment_len) +
                                             " samples passes the energy gate");
  }
  std::vector<EmotionClass> votes;
  json records = json::array();
  for (std::size_t i = 0; i < fragments.size(); ++i) {
    const Prediction p = predict(net, fragments[i]);
    votes.push_back(p.label);
    if (as_json) {
      records.push_back({{"fragment", i},
                         {"class", class_name(p.label)},
                         {"confidences", p.confidences}});
      continue;
    }
    out << "fragment=" << i << " class=" << class_name(p.label) << " confidences=";
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%.4f", p.confidences[c]);
      out << (c ? "," : "") << buf;
    }
    out << "\n";
  }
  const EmotionClass clip_label = majority_vote(votes);
  if (as_json) {
    out << json{{"fragments", records}, {"clip", class_name(clip_label)}}.dump(2) << "\n";
  } else {
    out << "clip=" << class_name(clip_label) << " fragments=" << fragments.size() << "\n";
  }
  return kExitOk;
}

int do_features(const RunConfig& cfg, const fs::path& wav, std::ostream& out) {
  const AudioClip clip = load_canonical_clip(wav, cfg.sample_rate_hz);
  const MfccFrames frames = mfcc(clip.samples, cfg.mfcc, cfg.sample_rate_hz);
  std::string text;
  char buf[32];
  for (std::size_t r = 0; r < frames.rows; ++r) {
    for (std::size_t c = 0; c < frames.cols; ++c) {
      std::snprintf(buf, sizeof(buf), "%.6f", frames(r, c));
      if (c) text += ' ';
      text += buf;
    }
    text += '\n';
  }
  out << text;
  return kExitOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBadConfig: return kExitUsage;
    case ErrorCode::kNoFragments: return kExitEmpty;
    default: return kExitData;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"barkctl: raw-audio dog emotion classifier"};
  app.require_subcommand(1);

  Overrides o;
  std::string out_path;
  std::string manifest;
  std::string checkpoint;
  std::string wav;
  std::optional<std::string> log_path;
  std::optional<std::string> report_path;
  bool as_json = false;

  auto* synth = app.add_subcommand("synth", "Write a synthetic WAV dataset and manifest");
  add_common_options(synth, o);
  synth->add_option("--out", out_path, "Output directory")->required();

  auto* train = app.add_subcommand("train", "Train a model from a manifest");
  add_common_options(train, o);
  train->add_option("--manifest", manifest, "Manifest of path,label rows")->required();
  train->add_option("--out", out_path, "Checkpoint to write")->required();
  train->add_option("--log", log_path, "JSON training log to write");

  auto* evaluate = app.add_subcommand("evaluate", "Classification report on the test split");
  add_common_options(evaluate, o);
  evaluate->add_option("--manifest", manifest)->required();
  evaluate->add_option("--checkpoint", checkpoint)->required();
  evaluate->add_flag("--json", as_json, "Print the report as JSON");
  evaluate->add_option("--out", report_path, "Also write the JSON report here");

  auto* predict_cmd = app.add_subcommand("predict", "Classify every fragment of one WAV");
  add_common_options(predict_cmd, o);
  predict_cmd->add_option("--checkpoint", checkpoint)->required();
  predict_cmd->add_option("wav", wav)->required();
  predict_cmd->add_flag("--json", as_json);

  auto* features = app.add_subcommand("features", "Print MFCC frames of one WAV");
  add_common_options(features, o);
  features->add_option("wav", wav)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const RunConfig cfg = o.resolve();
    if (synth->parsed()) {
      const SynthOutput s = cmd_synth(cfg, out_path);
      out << "wrote " << s.files << " files, manifest " << s.manifest.string() << "\n";
      return kExitOk;
    }
    if (train->parsed()) {
      std::optional<fs::path> log;
      if (log_path) log = *log_path;
      return do_train(cfg, manifest, out_path, log, out, err);
    }
    if (evaluate->parsed()) {
      std::optional<fs::path> report;
      if (report_path) report = *report_path;
      return do_evaluate(cfg, manifest, checkpoint, as_json, report, out);
    }
    if (predict_cmd->parsed()) return do_predict(cfg, checkpoint, wav, as_json, out);
    if (features->parsed()) return do_features(cfg, wav, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace bark::cli
