// Copyright (c) 2026 the faultvit authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: synth | prepare | train | eval | predict.
// Exit codes: 0 ok, 2 usage/config, 3 data, 4 numeric divergence.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "faultvit/faultvit.hpp"

namespace fv = faultvit;
namespace fs = std::filesystem;

namespace {

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "key = value config file");
  cmd->add_option("--set", o.overrides, "override a config key (key=value)");
  cmd->add_option("--seed", o.seed, "override run.seed");
}

fv::RunConfig make_config(const CommonOpts& o) {
  fv::RunConfig rc;
  if (!o.config_path.empty()) rc.apply_file(o.config_path);
  for (const std::string& kv : o.overrides) rc.apply_override(kv);
  if (o.seed) rc.set("run.seed", std::to_string(*o.seed));
  return rc;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw fv::IoError("cannot create directory " + dir.string());
}

std::vector<std::string> read_labels_file(const fs::path& path) {
  const std::string bytes = fv::detail::read_file_bytes(path);
  std::vector<std::string> names;
  std::istringstream in(bytes);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) names.push_back(line);
  if (names.empty()) throw fv::DataError("no labels in " + path.string());
  return names;
}

void write_labels_file(const fs::path& path,
                       const std::vector<std::string>& names) {
  std::string out;
  for (const std::string& n : names) out += n + "\n";
  fv::detail::write_file_bytes(path, out);
}

struct SplitLine {
  std::string split;
  std::string label;
  std::string relpath;
};

std::vector<SplitLine> read_split_index(const fs::path& path) {
  const std::string bytes = fv::detail::read_file_bytes(path);
  std::vector<SplitLine> lines;
  std::istringstream in(bytes);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    SplitLine s;
    if (!(row >> s.split >> s.label >> s.relpath))
      throw fv::DataError(path.string() + ":" + std::to_string(lineno) +
                          ": expected '<split> <label> <path>'");
    if (s.split != "train" && s.split != "val" && s.split != "test")
      throw fv::DataError(path.string() + ":" + std::to_string(lineno) +
                          ": unknown split '" + s.split + "'");
    lines.push_back(std::move(s));
  }
  if (lines.empty())
    throw fv::DataError("split index " + path.string() + " lists no images");
  return lines;
}

int label_id_of(const std::vector<std::string>& names, const std::string& name,
                const std::string& context) {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  throw fv::DataError(context + ": label '" + name +
                      "' not in the dataset label list");
}

fv::ImageSet load_split(const fs::path& data_dir,
                        const std::vector<SplitLine>& lines,
                        const std::string& which,
                        const std::vector<std::string>& names,
                        const fv::ViTConfig& cfg) {
  std::vector<fv::TFImage> images;
  std::vector<int> labels;
  for (const SplitLine& s : lines) {
    if (s.split != which) continue;
    images.push_back(fv::read_tfimage(data_dir / s.relpath));
    labels.push_back(label_id_of(names, s.label, s.relpath));
  }
  return fv::patchify_set(images, labels, cfg);
}

// ---- synth ----

int run_synth(const CommonOpts& common, const std::string& out_dir,
              std::optional<std::size_t> classes_flag,
              std::optional<std::size_t> segments_flag) {
  fv::RunConfig rc = make_config(common);
  if (classes_flag) rc.set("synth.classes", std::to_string(*classes_flag));
  if (segments_flag)
    rc.set("synth.segments_per_class", std::to_string(*segments_flag));

  const std::size_t classes = rc.get_size("synth.classes");
  const std::size_t per_class = rc.get_size("synth.segments_per_class");
  const std::size_t segment_len = rc.get_size("signal.segment_len");
  const double rate = rc.get_double("signal.sample_rate");
  const std::uint64_t seed = rc.get_u64("run.seed");

  const auto suite = fv::default_desk_suite();
  if (classes < 2 || classes > suite.size())
    throw fv::ConfigError("synth.classes must be in 2.." +
                          std::to_string(suite.size()));
  if (per_class == 0)
    throw fv::ConfigError("synth.segments_per_class must be >= 1");

  const fs::path out(out_dir);
  ensure_dir(out);
  fv::Manifest manifest;
  manifest.dir = out;
  for (std::size_t c = 0; c < classes; ++c) {
    const auto& [label, spec] = suite[c];
    fv::Signal sig = fv::generate_signal_samples(
        spec, per_class * segment_len, rate, fv::mix_seed(seed, 100 + c));
    const std::string filename = label + ".f64";
    fv::write_raw_f64le(sig.samples, out / filename);
    fv::ManifestEntry e;
    e.path = filename;
    e.label = label;
    e.channel = fv::Channel::Unknown;
    e.sample_rate = rate;
    manifest.entries.push_back(std::move(e));
  }
  fv::write_manifest(manifest, out / "manifest.txt");
  rc.write_resolved(out / "config.resolved");
  std::cout << "wrote " << classes << " signals to " << out.string() << "\n";
  return 0;
}

// ---- prepare ----

int run_prepare(const CommonOpts& common, const std::string& manifest_path,
                const std::string& out_dir) {
  fv::RunConfig rc = make_config(common);
  const std::size_t segment_len = rc.get_size("signal.segment_len");
  const std::size_t stride = rc.get_size("signal.stride");
  const fv::Window window = fv::window_from_string(rc.get_str("stft.window"));
  const std::size_t window_len = rc.get_size("stft.window_len");
  const std::size_t hop = rc.get_size("stft.hop");
  const std::size_t nfft = rc.get_size("stft.nfft");
  const double log_eps = rc.get_double("stft.log_eps");
  const std::size_t image_h = rc.get_size("stft.image_h");
  const std::size_t image_w = rc.get_size("stft.image_w");
  const std::uint64_t seed = rc.get_u64("run.seed");
  const std::array<double, 3> ratios{rc.get_double("split.train"),
                                     rc.get_double("split.val"),
                                     rc.get_double("split.test")};

  const fv::Manifest manifest = fv::read_manifest(manifest_path);
  if (manifest.entries.empty())
    throw fv::DataError("manifest " + manifest_path + " lists no files");

  // Label ids follow canonical taxonomy order over the labels present.
  std::vector<std::string> names;
  for (const auto& canonical : fv::canonical_labels())
    for (const auto& e : manifest.entries)
      if (e.label == canonical &&
          std::find(names.begin(), names.end(), canonical) == names.end())
        names.push_back(canonical);

  const fs::path out(out_dir);
  ensure_dir(out / "images");

  std::vector<fv::Segment> segments;
  std::vector<std::string> relpaths;  // aligned with segments
  std::map<std::string, std::size_t> per_label_counter;
  for (const auto& e : manifest.entries) {
    const fs::path sig_path = manifest.dir / e.path;
    try {
      fv::FaultLabel label;
      label.name = e.label;
      label.class_id = label_id_of(names, e.label, e.path);
      const fv::Signal sig = fv::load_signal(
          sig_path, fv::guess_format(sig_path), e.sample_rate,
          fv::default_var_hint(e.channel, ""), e.channel);
      std::vector<fv::Segment> segs =
          fv::segment_signal(sig, segment_len, stride, label);
      ensure_dir(out / "images" / e.label);
      for (auto& seg : segs) {
        const fv::Spectrogram spec = fv::stft(seg.samples, sig.sample_rate,
                                              window, window_len, hop, nfft);
        const fv::TFImage img = fv::to_image(spec, image_h, image_w, log_eps);
        char name[32];
        std::snprintf(name, sizeof(name), "%06zu.tfi",
                      per_label_counter[e.label]++);
        const std::string rel = "images/" + e.label + "/" + name;
        fv::write_tfimage(img, out / rel);
        relpaths.push_back(rel);
        segments.push_back(std::move(seg));
      }
    } catch (const fv::ConfigError& err) {
      throw fv::ConfigError(e.path + ": " + err.what());
    } catch (const fv::NumericError& err) {
      throw fv::NumericError(e.path + ": " + err.what());
    } catch (const fv::DataError& err) {
      throw fv::DataError(e.path + ": " + err.what());
    }
  }
  if (segments.empty())
    throw fv::InsufficientData("no file in " + manifest_path +
                               " is long enough for one segment");

  const fv::DatasetSplit split = fv::split_dataset(segments, ratios, seed);

  // Map each split's segments back to the image files written above.
  std::map<std::string, std::string> seg_to_rel;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const fv::Segment& s = segments[i];
    seg_to_rel[s.source_id + ":" + std::to_string(s.start_index) + ":" +
               std::to_string(s.label.class_id)] = relpaths[i];
  }
  auto emit = [&](const char* tag, const std::vector<fv::Segment>& part,
                  std::string& idx) {
    for (const fv::Segment& s : part) {
      const auto it = seg_to_rel.find(s.source_id + ":" +
                                      std::to_string(s.start_index) + ":" +
                                      std::to_string(s.label.class_id));
      if (it == seg_to_rel.end())
        throw fv::DataError("internal: split segment lost its image file");
      idx += std::string(tag) + " " + s.label.name + " " + it->second + "\n";
    }
  };
  std::string idx = "# split label path\n";
  emit("train", split.train, idx);
  emit("val", split.val, idx);
  emit("test", split.test, idx);
  fv::detail::write_file_bytes(out / "split.idx", idx);
  write_labels_file(out / "labels.txt", names);
  rc.write_resolved(out / "config.resolved");
  std::cout << "prepared " << segments.size() << " images in "
            << out.string() << "\n";
  return 0;
}

// ---- train ----

int run_train(const CommonOpts& common, const std::string& data_dir,
              const std::string& out_dir,
              std::optional<std::size_t> epochs_flag) {
  fv::RunConfig rc = make_config(common);
  if (epochs_flag) rc.set("train.epochs", std::to_string(*epochs_flag));

  const fs::path data(data_dir);
  const std::vector<std::string> names = read_labels_file(data / "labels.txt");
  fv::ViTConfig cfg = rc.vit_config();
  if (cfg.classes < names.size())
    throw fv::ConfigMismatch("model.classes = " + std::to_string(cfg.classes) +
                             " but the dataset has " +
                             std::to_string(names.size()) + " labels");
  const std::vector<SplitLine> lines = read_split_index(data / "split.idx");
  const fv::ImageSet train_set = load_split(data, lines, "train", names, cfg);
  const fv::ImageSet val_set = load_split(data, lines, "val", names, cfg);
  if (train_set.size() == 0)
    throw fv::EmptyTrainSet("split index has no train images");

  const fv::TrainConfig tcfg = rc.train_config();
  fv::ViTParams params = fv::init_params(cfg);
  fv::AdamState state;

  const fs::path out(out_dir);
  ensure_dir(out);

  // Best-validation snapshot: highest val accuracy, earliest epoch on ties.
  fv::ViTParams best_params = params;
  fv::AdamState best_state;
  double best_val_acc = -1.0;
  auto hook = [&](std::size_t epoch, const fv::ViTParams& p,
                  const fv::AdamState& st, const fv::TrainHistory& h) {
    if (h.back().val_acc > best_val_acc) {
      best_val_acc = h.back().val_acc;
      best_params = p;
      best_state = st;
    }
    if (tcfg.checkpoint_interval > 0 && epoch % tcfg.checkpoint_interval == 0)
      fv::save_checkpoint(out / ("checkpoint_epoch" + std::to_string(epoch) +
                                 ".fvcp"),
                          cfg, p, fv::adam_state_tensors(st));
  };

  const fv::TrainHistory history =
      fv::train(cfg, params, train_set, val_set, tcfg, &state, hook);

  fv::save_checkpoint(out / "checkpoint.fvcp", cfg, params,
                      history.empty() ? fv::NamedTensors{}
                                      : fv::adam_state_tensors(state));
  if (best_val_acc < 0.0) {
    best_params = params;  // epochs = 0: best is the initial model
    fv::save_checkpoint(out / "checkpoint_best.fvcp", cfg, best_params);
  } else {
    fv::save_checkpoint(out / "checkpoint_best.fvcp", cfg, best_params,
                        fv::adam_state_tensors(best_state));
  }
  fv::write_history_csv(out / "history.csv", history);
  write_labels_file(out / "labels.txt", names);
  rc.write_resolved(out / "config.resolved");
  if (!history.empty())
    std::cout << "trained " << history.size()
              << " epochs, final val_acc=" << fmt17(history.back().val_acc)
              << "\n";
  else
    std::cout << "trained 0 epochs\n";
  return 0;
}

// ---- eval ----

int run_eval(const CommonOpts& common, const std::string& ckpt_path,
             const std::string& data_dir, const std::string& split_name,
             const std::string& out_dir) {
  fv::RunConfig rc = make_config(common);
  const fv::Checkpoint ck = fv::load_checkpoint(ckpt_path);
  const fs::path data(data_dir);
  const std::vector<std::string> names = read_labels_file(data / "labels.txt");
  if (names.size() > ck.cfg.classes)
    throw fv::ConfigMismatch("checkpoint has " +
                             std::to_string(ck.cfg.classes) +
                             " classes but the dataset lists " +
                             std::to_string(names.size()) + " labels");
  if (split_name != "train" && split_name != "val" && split_name != "test")
    throw fv::ConfigError("--split must be train, val, or test");

  const std::vector<SplitLine> lines = read_split_index(data / "split.idx");
  const fv::ImageSet set = load_split(data, lines, split_name, names, ck.cfg);
  if (set.size() == 0)
    throw fv::EmptyDataset("split '" + split_name + "' has no images");

  const fv::EvalResult res = fv::evaluate(ck.cfg, ck.params, set);
  std::vector<std::string> padded = names;
  for (std::size_t i = names.size(); i < ck.cfg.classes; ++i)
    padded.push_back("class" + std::to_string(i));
  fv::ReportInputs report;
  report.cm = fv::confusion(res.predictions, set.labels, ck.cfg.classes);
  report.class_names = padded;
  report.accuracy_pct = res.accuracy_pct;
  report.config_hash = rc.hash_hex();
  report.heat_image = true;
  fv::export_report(report, out_dir);
  std::cout << "accuracy_pct=" << fmt17(res.accuracy_pct) << "\n";
  return 0;
}

// ---- predict ----

int run_predict(const CommonOpts& common, const std::string& ckpt_path,
                const std::string& input_path, const std::string& format_name,
                const std::string& channel_name_flag,
                const std::string& var_hint, std::optional<double> rate_flag,
                const std::string& labels_path) {
  fv::RunConfig rc = make_config(common);
  const fv::Checkpoint ck = fv::load_checkpoint(ckpt_path);

  std::vector<std::string> names;
  fs::path labels_file = labels_path.empty()
                             ? fs::path(ckpt_path).parent_path() / "labels.txt"
                             : fs::path(labels_path);
  if (fs::exists(labels_file)) names = read_labels_file(labels_file);
  auto class_name = [&](int id) {
    return static_cast<std::size_t>(id) < names.size()
               ? names[static_cast<std::size_t>(id)]
               : "class" + std::to_string(id);
  };

  const fs::path input(input_path);
  const fv::SignalFormat format = format_name == "auto"
                                      ? fv::guess_format(input)
                                      : fv::format_from_string(format_name);
  const fv::Channel channel = fv::channel_from_string(channel_name_flag);
  const double rate =
      rate_flag ? *rate_flag : rc.get_double("signal.sample_rate");
  const fv::Signal sig = fv::load_signal(
      input, format, rate, var_hint.empty()
                               ? fv::default_var_hint(channel, "")
                               : var_hint,
      channel);

  const std::size_t segment_len = rc.get_size("signal.segment_len");
  const std::size_t stride = rc.get_size("signal.stride");
  const std::vector<fv::Segment> segs =
      fv::segment_signal(sig, segment_len, stride);
  if (segs.empty())
    throw fv::SignalTooShort("signal has " +
                             std::to_string(sig.samples.size()) +
                             " samples; one segment needs " +
                             std::to_string(segment_len));

  const fv::Window window = fv::window_from_string(rc.get_str("stft.window"));
  const std::size_t window_len = rc.get_size("stft.window_len");
  const std::size_t hop = rc.get_size("stft.hop");
  const std::size_t nfft = rc.get_size("stft.nfft");
  const double log_eps = rc.get_double("stft.log_eps");

  std::vector<std::size_t> votes(ck.cfg.classes, 0);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const fv::Spectrogram spec = fv::stft(segs[i].samples, sig.sample_rate,
                                          window, window_len, hop, nfft);
    const fv::TFImage img =
        fv::to_image(spec, ck.cfg.image_h, ck.cfg.image_w, log_eps);
    fv::Tape tape;
    const fv::ViTVars vars = fv::register_params(tape, ck.params, false);
    const fv::Var logits = fv::forward_image(tape, vars, ck.cfg, img);
    const fv::Tensor& row = logits.value();
    double mx = row[0];
    for (std::size_t j = 1; j < row.size(); ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    std::vector<double> probs(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) {
      probs[j] = std::exp(row[j] - mx);
      sum += probs[j];
    }
    std::size_t best = 0;
    for (std::size_t j = 0; j < probs.size(); ++j) {
      probs[j] /= sum;
      if (probs[j] > probs[best]) best = j;
    }
    ++votes[best];
    std::cout << i << "," << class_name(static_cast<int>(best)) << ","
              << fmt17(probs[best]) << "\n";
  }
  std::size_t majority = 0;
  for (std::size_t j = 1; j < votes.size(); ++j)
    if (votes[j] > votes[majority]) majority = j;
  std::cout << "majority=" << class_name(static_cast<int>(majority)) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bearing-fault spectrogram classifier pipeline"};
  app.require_subcommand(1);

  CommonOpts synth_common, prep_common, train_common, eval_common,
      pred_common;

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  std::string synth_out;
  std::optional<std::size_t> synth_classes, synth_segments;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--classes", synth_classes, "number of classes (2..4)");
  synth->add_option("--segments", synth_segments, "segments per class");
  add_common(synth, synth_common);

  auto* prepare =
      app.add_subcommand("prepare", "signals -> spectrogram image dataset");
  std::string prep_manifest, prep_out;
  prepare->add_option("--manifest", prep_manifest, "dataset manifest file")
      ->required();
  prepare->add_option("--out", prep_out, "output directory")->required();
  add_common(prepare, prep_common);

  auto* train = app.add_subcommand("train", "train the classifier");
  std::string train_data, train_out;
  std::optional<std::size_t> train_epochs;
  train->add_option("--data", train_data, "prepared dataset directory")
      ->required();
  train->add_option("--out", train_out, "output directory")->required();
  train->add_option("--epochs", train_epochs, "override train.epochs");
  add_common(train, train_common);

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string eval_ckpt, eval_data, eval_split = "test", eval_out;
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  eval->add_option("--data", eval_data, "prepared dataset directory")
      ->required();
  eval->add_option("--split", eval_split, "train | val | test");
  eval->add_option("--out", eval_out, "report directory")->required();
  add_common(eval, eval_common);

  auto* predict = app.add_subcommand("predict", "classify one signal file");
  std::string pred_ckpt, pred_input, pred_format = "auto",
                         pred_channel = "Unknown", pred_var, pred_labels;
  std::optional<double> pred_rate;
  predict->add_option("--checkpoint", pred_ckpt, "checkpoint file")
      ->required();
  predict->add_option("--input", pred_input, "signal file")->required();
  predict->add_option("--format", pred_format, "auto | mat | csv | raw");
  predict->add_option("--channel", pred_channel,
                      "DriveEnd | FanEnd | Base | Unknown");
  predict->add_option("--var", pred_var, "MAT variable name hint");
  predict->add_option("--rate", pred_rate, "sample rate override (Hz)");
  predict->add_option("--labels", pred_labels, "label names file");
  add_common(predict, pred_common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (*synth)
      return run_synth(synth_common, synth_out, synth_classes, synth_segments);
    if (*prepare) return run_prepare(prep_common, prep_manifest, prep_out);
    if (*train)
      return run_train(train_common, train_data, train_out, train_epochs);
    if (*eval)
      return run_eval(eval_common, eval_ckpt, eval_data, eval_split, eval_out);
    if (*predict)
      return run_predict(pred_common, pred_ckpt, pred_input, pred_format,
                         pred_channel, pred_var, pred_rate, pred_labels);
  } catch (const fv::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fv::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const fv::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
