#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "bark/audio_io.hpp"
#include "bark/cli.hpp"
#include "bark/data_pipeline.hpp"
#include "bark/dsp_features.hpp"
#include "bark/error.hpp"
#include "bark/evaluation.hpp"
#include "bark/model.hpp"
#include "bark/training.hpp"

namespace py = pybind11;
using namespace bark;

namespace {

py::bytes to_bytes(const std::vector<std::uint8_t>& v) {
  return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

std::vector<std::uint8_t> from_bytes(const py::bytes& b) {
  const std::string s = b;
  return {s.begin(), s.end()};
}

EmotionClass named_class(const std::string& name) {
  const auto c = class_from_name(name);
  if (!c) throw Error(ErrorCode::kUnknownLabel, "unknown class '" + name + "'");
  return *c;
}

std::vector<LabeledFragment> zip_fragments(const std::vector<std::vector<double>>& fragments,
                                           const std::vector<std::string>& labels) {
  if (fragments.size() != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch, "fragments and labels differ in length");
  }
  std::vector<LabeledFragment> out;
  out.reserve(fragments.size());
  for (std::size_t i = 0; i < fragments.size(); ++i) {
    out.push_back({Fragment{fragments[i]}, named_class(labels[i])});
  }
  return out;
}

std::vector<EmotionClass> to_classes(const std::vector<std::string>& names) {
  std::vector<EmotionClass> out;
  for (const auto& n : names) out.push_back(named_class(n));
  return out;
}

py::dict config_dict(const BarkNetConfig& c) {
  py::dict d;
  d["fragment_len"] = c.fragment_len;
  d["conv1_channels"] = c.conv1_channels;
  d["conv1_kernel"] = c.conv1_kernel;
  d["conv1_stride"] = c.conv1_stride;
  d["conv2_channels"] = c.conv2_channels;
  d["conv2_kernel"] = c.conv2_kernel;
  d["conv2_stride"] = c.conv2_stride;
  d["seed"] = c.seed;
  return d;
}

py::dict report_dict(const ClassificationReport& r) {
  py::list classes;
  for (const auto& m : r.classes) {
    py::dict c;
    c["name"] = m.name;
    c["precision"] = m.precision;
    c["recall"] = m.recall;
    c["f1"] = m.f1;
    c["support"] = m.support;
    c["degenerate"] = m.degenerate;
    classes.append(c);
  }
  const auto avg = [](const AverageMetrics& a) {
    py::dict d;
    d["precision"] = a.precision;
    d["recall"] = a.recall;
    d["f1"] = a.f1;
    return d;
  };
  py::dict d;
  d["classes"] = classes;
  d["accuracy"] = r.accuracy;
  d["macro_avg"] = avg(r.macro_avg);
  d["weighted_avg"] = avg(r.weighted_avg);
  d["total_support"] = r.total_support;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Raw-audio bark emotion classifier: codec, features, CNN, training, metrics";

  static py::exception<Error> bark_error(m, "BarkError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(bark_error, e.what());
    }
  });

  m.attr("CLASSES") = [] {
    py::list names;
    for (EmotionClass c : kAllClasses) names.append(std::string(class_name(c)));
    return names;
  }();
  m.attr("DEFAULT_FRAGMENT_LEN") = kDefaultFragmentLen;
  m.attr("SAMPLE_RATE_HZ") = kCanonicalSampleRateHz;

  m.def(
      "parse_wav",
      [](const py::bytes& data) {
        const AudioClip clip = parse_wav(from_bytes(data));
        return py::make_tuple(clip.samples, clip.sample_rate_hz);
      },
      py::arg("data"), "Decode PCM16 WAV bytes into (samples, sample_rate_hz).");
  m.def(
      "emit_wav",
      [](std::vector<double> samples, int sample_rate_hz) {
        return to_bytes(emit_wav(AudioClip{std::move(samples), sample_rate_hz}));
      },
      py::arg("samples"), py::arg("sample_rate_hz") = kCanonicalSampleRateHz);
  m.def(
      "resample",
      [](std::vector<double> samples, int from_hz, int to_hz) {
        return resample_linear(AudioClip{std::move(samples), from_hz}, to_hz).samples;
      },
      py::arg("samples"), py::arg("from_hz"), py::arg("to_hz"));
  m.def(
      "segment",
      [](std::vector<double> samples, std::size_t fragment_len, std::size_t hop,
         double energy_gate) {
        std::vector<std::vector<double>> out;
        for (auto& f : segment_clip(AudioClip{std::move(samples), kCanonicalSampleRateHz},
                                    fragment_len, hop == 0 ? fragment_len : hop, energy_gate)) {
          out.push_back(std::move(f.samples));
        }
        return out;
      },
      py::arg("samples"), py::arg("fragment_len") = kDefaultFragmentLen, py::arg("hop") = 0,
      py::arg("energy_gate") = kDefaultEnergyGate);
  m.def(
      "mfcc",
      [](const std::vector<double>& samples, int sample_rate_hz) {
        const MfccFrames f = mfcc(samples, MfccConfig{}, sample_rate_hz);
        py::array_t<double> out({f.rows, f.cols});
        std::copy(f.data.begin(), f.data.end(), out.mutable_data());
        return out;
      },
      py::arg("samples"), py::arg("sample_rate_hz") = kCanonicalSampleRateHz,
      "MFCC matrix (frames x 13) with the default configuration.");
  m.def(
      "synth_dataset",
      [](std::size_t n_per_class, std::size_t fragment_len, double snr_db, std::uint64_t seed) {
        std::vector<std::vector<double>> fragments;
        std::vector<std::string> labels;
        for (auto& item :
             synth_dataset(n_per_class, fragment_len, kCanonicalSampleRateHz, snr_db, seed)) {
          fragments.push_back(std::move(item.fragment.samples));
          labels.emplace_back(class_name(item.label));
        }
        return py::make_tuple(fragments, labels);
      },
      py::arg("n_per_class"), py::arg("fragment_len") = kDefaultFragmentLen,
      py::arg("snr_db") = 10.0, py::arg("seed") = 0);

  py::class_<BarkNet>(m, "Model")
      .def(py::init([](std::size_t fragment_len, std::size_t conv1_channels,
                       std::size_t conv1_kernel, std::size_t conv1_stride,
                       std::size_t conv2_channels, std::size_t conv2_kernel,
                       std::size_t conv2_stride, std::uint64_t seed) {
             BarkNetConfig c;
             c.fragment_len = fragment_len;
             c.conv1_channels = conv1_channels;
             c.conv1_kernel = conv1_kernel;
             c.conv1_stride = conv1_stride;
             c.conv2_channels = conv2_channels;
             c.conv2_kernel = conv2_kernel;
             c.conv2_stride = conv2_stride;
             c.seed = seed;
             return init_barknet(c);
           }),
           py::arg("fragment_len") = kDefaultFragmentLen, py::arg("conv1_channels") = 16,
           py::arg("conv1_kernel") = 64, py::arg("conv1_stride") = 8,
           py::arg("conv2_channels") = 32, py::arg("conv2_kernel") = 32,
           py::arg("conv2_stride") = 4, py::arg("seed") = 0)
      .def_property_readonly("config", [](const BarkNet& n) { return config_dict(n.config); })
      .def_static(
          "from_bytes", [](const py::bytes& b) { return load_checkpoint(from_bytes(b)); },
          py::arg("data"))
      .def("to_bytes", [](const BarkNet& n) { return to_bytes(save_checkpoint(n)); })
      .def(
          "predict",
          [](const BarkNet& n, std::vector<double> fragment) {
            py::gil_scoped_release release;
            const Prediction p = predict(n, Fragment{std::move(fragment)});
            py::gil_scoped_acquire acquire;
            return py::make_tuple(std::string(class_name(p.label)),
                                  std::vector<double>(p.confidences.begin(), p.confidences.end()));
          },
          py::arg("fragment"), "Returns (class name, five confidences).");

  m.def(
      "fit",
      [](const BarkNet& net, const std::vector<std::vector<double>>& train_x,
         const std::vector<std::string>& train_y, const std::vector<std::vector<double>>& val_x,
         const std::vector<std::string>& val_y, std::size_t epochs, std::size_t batch_size,
         std::size_t patience, const std::string& optimizer, std::uint64_t seed) {
        TrainConfig cfg;
        cfg.epochs_max = epochs;
        cfg.batch_size = batch_size;
        cfg.early_stop_patience = patience;
        if (optimizer == "sgd") {
          cfg.optimizer = OptimizerKind::kSgd;
        } else if (optimizer != "adam") {
          throw Error(ErrorCode::kBadConfig, "optimizer must be adam or sgd");
        }
        cfg.seed = seed;
        const auto train = zip_fragments(train_x, train_y);
        const auto val = zip_fragments(val_x, val_y);
        FitResult r = [&] {
          py::gil_scoped_release release;
          return fit(net, train, val, cfg);
        }();
        py::list log;
        for (const auto& e : r.log.epochs) {
          py::dict d;
          d["epoch"] = e.epoch;
          d["train_loss"] = e.train_loss;
          d["val_accuracy"] = e.val_accuracy;
          log.append(d);
        }
        return py::make_tuple(std::move(r.net), log);
      },
      py::arg("model"), py::arg("train_x"), py::arg("train_y"), py::arg("val_x"),
      py::arg("val_y"), py::arg("epochs") = 50, py::arg("batch_size") = 32,
      py::arg("patience") = 5, py::arg("optimizer") = "adam", py::arg("seed") = 0,
      "Train a copy of `model`; returns (best model, per-epoch log).");

  m.def(
      "classification_report",
      [](const std::vector<std::string>& truths, const std::vector<std::string>& preds) {
        const auto t = to_classes(truths);
        const auto p = to_classes(preds);
        return render_report(build_report(confusion(t, p)));
      },
      py::arg("truths"), py::arg("preds"));
  m.def(
      "report_dict",
      [](const std::vector<std::string>& truths, const std::vector<std::string>& preds) {
        const auto t = to_classes(truths);
        const auto p = to_classes(preds);
        return report_dict(build_report(confusion(t, p)));
      },
      py::arg("truths"), py::arg("preds"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run a barkctl subcommand; returns (exit code, stdout, stderr).");
}
