// Copyright (c) 2026 the faultvit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "faultvit/adam.hpp"
#include "faultvit/autodiff.hpp"
#include "faultvit/errors.hpp"
#include "faultvit/rng.hpp"
#include "faultvit/vit.hpp"

namespace faultvit {

enum class LrSchedule { None, Cosine };

inline LrSchedule lr_schedule_from_string(const std::string& s) {
  if (s == "none") return LrSchedule::None;
  if (s == "cosine") return LrSchedule::Cosine;
  throw ConfigError("unknown lr schedule: " + s);
}

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  AdamHyper adam;
  std::uint64_t seed = 0;
  bool shuffle = true;
  std::size_t checkpoint_interval = 0;  // epochs between checkpoints; 0 = off
  LrSchedule schedule = LrSchedule::None;
  std::size_t early_stop_patience = 0;  // reserved; the loop ignores it

  void validate() const {
    if (batch_size < 1) throw InvalidParams("batch_size must be >= 1");
    adam.validate();
  }
};

struct EpochStats {
  double train_loss = 0.0;
  double val_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
};

using TrainHistory = std::vector<EpochStats>;

// Pre-patchified dataset: one [N x P*P*C] tensor per image.
struct ImageSet {
  std::vector<Tensor> patches;
  std::vector<int> labels;

  std::size_t size() const { return patches.size(); }
};

inline ImageSet patchify_set(const std::vector<TFImage>& images,
                             const std::vector<int>& labels,
                             const ViTConfig& cfg) {
  if (images.size() != labels.size())
    throw LengthMismatch("image/label counts disagree: " +
                         std::to_string(images.size()) + " vs " +
                         std::to_string(labels.size()));
  ImageSet set;
  set.patches.reserve(images.size());
  for (const TFImage& img : images) {
    if (img.h != cfg.image_h || img.w != cfg.image_w || img.c != cfg.image_c)
      throw ConfigMismatch("image " + std::to_string(img.h) + "x" +
                           std::to_string(img.w) + "x" + std::to_string(img.c) +
                           " does not match model input " +
                           std::to_string(cfg.image_h) + "x" +
                           std::to_string(cfg.image_w) + "x" +
                           std::to_string(cfg.image_c));
    set.patches.push_back(patchify(img, cfg.patch));
  }
  set.labels = labels;
  return set;
}

struct EvalResult {
  double mean_loss = 0.0;
  double accuracy_pct = 0.0;
  std::vector<int> predictions;
};

// Full pass without parameter updates: mean cross-entropy plus exact-match
// accuracy. Ties in argmax resolve to the lowest class id.
inline EvalResult evaluate(const ViTConfig& cfg, const ViTParams& params,
                           const ImageSet& set, std::size_t batch_size = 32) {
  if (set.size() == 0) throw EmptyDataset("evaluate on an empty dataset");
  if (batch_size < 1) throw InvalidParams("batch_size must be >= 1");
  EvalResult res;
  res.predictions.reserve(set.size());
  double loss_sum = 0.0;
  for (std::size_t start = 0; start < set.size(); start += batch_size) {
    const std::size_t stop = std::min(set.size(), start + batch_size);
    Tape tape;
    ViTVars vars = register_params(tape, params, false);
    std::vector<Var> logit_rows;
    std::vector<int> labels;
    logit_rows.reserve(stop - start);
    for (std::size_t i = start; i < stop; ++i) {
      logit_rows.push_back(forward_patches(tape, vars, cfg, set.patches[i]));
      labels.push_back(set.labels[i]);
    }
    Var logits = concat_rows(std::span<const Var>(logit_rows));
    Var loss = cross_entropy(logits, labels);
    loss_sum += loss.value().item() * static_cast<double>(stop - start);
    const Tensor& L = logits.value();
    for (std::size_t r = 0; r < L.rows(); ++r) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < L.cols(); ++j)
        if (L(r, j) > L(r, best)) best = j;
      res.predictions.push_back(static_cast<int>(best));
    }
  }
  res.mean_loss = loss_sum / static_cast<double>(set.size());
  std::size_t match = 0;
  for (std::size_t i = 0; i < set.size(); ++i)
    if (res.predictions[i] == set.labels[i]) ++match;
  res.accuracy_pct =
      100.0 * static_cast<double>(match) / static_cast<double>(set.size());
  return res;
}

// Called after every completed epoch, between optimizer steps; callers
// gate interval checkpoints and best-model snapshots on it.
using EpochHook = std::function<void(
    std::size_t epoch, const ViTParams&, const AdamState&, const TrainHistory&)>;

namespace train_impl {

inline double epoch_lr(const TrainConfig& tcfg, std::size_t epoch) {
  if (tcfg.schedule == LrSchedule::Cosine && tcfg.epochs > 1) {
    const double frac = static_cast<double>(epoch - 1) /
                        static_cast<double>(tcfg.epochs - 1);
    return tcfg.adam.lr * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
  }
  return tcfg.adam.lr;
}

}  // namespace train_impl

// Mini-batch loop: seeded shuffle, batched forward/backward, Adam update,
// then a full train+val evaluation per epoch. Deterministic for a fixed
// seed in this single-threaded build.
inline TrainHistory train(const ViTConfig& cfg, ViTParams& params,
                          const ImageSet& train_set, const ImageSet& val_set,
                          const TrainConfig& tcfg, AdamState* state = nullptr,
                          const EpochHook& hook = {}) {
  if (train_set.size() == 0) throw EmptyTrainSet("training set is empty");
  tcfg.validate();
  cfg.validate();

  std::vector<Tensor*> param_ptrs;
  for_each_param(params, [&](const std::string&, Tensor& t) {
    param_ptrs.push_back(&t);
  });
  AdamState local_state =
      state && !state->m.empty() ? *state : AdamState::zeros_like(param_ptrs);

  TrainHistory history;
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= tcfg.epochs; ++epoch) {
    if (tcfg.shuffle) {
      Rng shuffle_rng(mix_seed(tcfg.seed, epoch));
      shuffle_rng.shuffle(order);
    }
    Rng drop_rng(mix_seed(tcfg.seed, 0x00D0000000000000ULL + epoch));
    AdamHyper hyper = tcfg.adam;
    hyper.lr = train_impl::epoch_lr(tcfg, epoch);

    for (std::size_t start = 0; start < order.size();
         start += tcfg.batch_size) {
      const std::size_t stop =
          std::min(order.size(), start + tcfg.batch_size);
      try {
        Tape tape;
        ViTVars vars = register_params(tape, params, true);
        std::vector<Var> logit_rows;
        std::vector<int> labels;
        logit_rows.reserve(stop - start);
        for (std::size_t i = start; i < stop; ++i) {
          const std::size_t idx = order[i];
          logit_rows.push_back(forward_patches(
              tape, vars, cfg, train_set.patches[idx], nullptr,
              cfg.dropout > 0.0 ? &drop_rng : nullptr));
          labels.push_back(train_set.labels[idx]);
        }
        Var logits = concat_rows(std::span<const Var>(logit_rows));
        Var loss = cross_entropy(logits, labels);
        if (!std::isfinite(loss.value().item()))
          throw DivergedLoss("loss is not finite at epoch " +
                             std::to_string(epoch));
        std::vector<Tensor> grads = tape.backward(loss);
        std::vector<const Tensor*> grad_ptrs;
        grad_ptrs.reserve(param_ptrs.size());
        std::size_t vi = 0;
        for_each_param(vars, [&](const std::string&, Var& v) {
          grad_ptrs.push_back(
              &Tape::slot(grads, v.id, tape.value(v.id).shape()));
          ++vi;
        });
        adam_step(param_ptrs, grad_ptrs, local_state, hyper);
      } catch (const DivergedLoss&) {
        throw;
      } catch (const NumericError& e) {
        throw DivergedLoss(std::string("training diverged: ") + e.what());
      }
    }

    EpochStats stats;
    const EvalResult tr = evaluate(cfg, params, train_set, tcfg.batch_size);
    stats.train_loss = tr.mean_loss;
    stats.train_acc = tr.accuracy_pct;
    if (val_set.size() > 0) {
      const EvalResult va = evaluate(cfg, params, val_set, tcfg.batch_size);
      stats.val_loss = va.mean_loss;
      stats.val_acc = va.accuracy_pct;
    } else {
      stats.val_loss = stats.train_loss;
      stats.val_acc = stats.train_acc;
    }
    if (!std::isfinite(stats.train_loss) || !std::isfinite(stats.val_loss))
      throw DivergedLoss("epoch " + std::to_string(epoch) +
                         " produced a non-finite loss");
    history.push_back(stats);

    if (hook) hook(epoch, params, local_state, history);
  }

  if (state) *state = local_state;
  return history;
}

inline std::string history_csv(const TrainHistory& history) {
  std::string out = "epoch,train_loss,val_loss,train_acc,val_acc\n";
  char buf[256];
  for (std::size_t i = 0; i < history.size(); ++i) {
    const EpochStats& s = history[i];
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g\n", i + 1,
                  s.train_loss, s.val_loss, s.train_acc, s.val_acc);
    out += buf;
  }
  return out;
}

inline void write_history_csv(const std::filesystem::path& path,
                              const TrainHistory& history) {
  detail::write_file_bytes(path, history_csv(history));
}

}  // namespace faultvit
