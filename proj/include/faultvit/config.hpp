// Copyright (c) 2026 the faultvit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "faultvit/adam.hpp"
#include "faultvit/bytes.hpp"
#include "faultvit/errors.hpp"
#include "faultvit/trainer.hpp"
#include "faultvit/vit.hpp"

namespace faultvit {

// Layered `section.key = value` configuration: built-in defaults, then an
// optional file, then command-line overrides. Unknown keys are errors.
class RunConfig {
 public:
  RunConfig() {
    static const std::pair<const char*, const char*> kDefaults[] = {
        {"run.seed", "0"},
        {"signal.sample_rate", "12000"},
        {"signal.segment_len", "2048"},
        {"signal.stride", "2048"},
        {"split.train", "0.8"},
        {"split.val", "0.1"},
        {"split.test", "0.1"},
        {"stft.window", "hann"},
        {"stft.window_len", "128"},
        {"stft.hop", "32"},
        {"stft.nfft", "128"},
        {"stft.log_eps", "1e-08"},
        {"stft.image_h", "56"},
        {"stft.image_w", "56"},
        {"model.patch", "8"},
        {"model.dim", "64"},
        {"model.depth", "4"},
        {"model.heads", "4"},
        {"model.mlp", "128"},
        {"model.classes", "14"},
        {"model.ln_eps", "1e-05"},
        {"model.dropout", "0"},
        {"train.epochs", "100"},
        {"train.batch_size", "32"},
        {"train.lr", "0.0003"},
        {"train.beta1", "0.9"},
        {"train.beta2", "0.999"},
        {"train.eps", "1e-08"},
        {"train.shuffle", "true"},
        {"train.checkpoint_interval", "0"},
        {"train.lr_schedule", "none"},
        {"train.early_stop_patience", "0"},
        {"synth.classes", "4"},
        {"synth.segments_per_class", "100"},
    };
    for (const auto& [k, v] : kDefaults) values_[k] = v;
  }

  void set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end())
      throw ConfigError("unknown config key: " + key);
    it->second = value;
  }

  // "key=value" or "key = value"
  void apply_override(const std::string& kv) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override must be key=value, got: " + kv);
    set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }

  void apply_file(const std::filesystem::path& path) {
    const std::string bytes = detail::read_file_bytes(path);
    std::istringstream in(bytes);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      const std::size_t eq = t.find('=');
      if (eq == std::string::npos)
        throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                          ": expected key = value");
      try {
        set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
      } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " +
                          e.what());
      }
    }
  }

  const std::string& get_str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end())
      throw ConfigError("unknown config key: " + key);
    return it->second;
  }

  long long get_int(const std::string& key) const {
    const std::string& v = get_str(key);
    try {
      std::size_t used = 0;
      const long long out = std::stoll(v, &used);
      if (used != v.size()) throw ConfigError("");
      return out;
    } catch (const std::exception&) {
      throw ConfigError("config " + key + " wants an integer, got '" + v + "'");
    }
  }

  std::size_t get_size(const std::string& key) const {
    const long long v = get_int(key);
    if (v < 0)
      throw ConfigError("config " + key + " must be >= 0, got " +
                        std::to_string(v));
    return static_cast<std::size_t>(v);
  }

  std::uint64_t get_u64(const std::string& key) const {
    const std::string& v = get_str(key);
    try {
      std::size_t used = 0;
      const unsigned long long out = std::stoull(v, &used);
      if (used != v.size()) throw ConfigError("");
      return out;
    } catch (const std::exception&) {
      throw ConfigError("config " + key + " wants an unsigned integer, got '" +
                        v + "'");
    }
  }

  double get_double(const std::string& key) const {
    const std::string& v = get_str(key);
    try {
      std::size_t used = 0;
      const double out = std::stod(v, &used);
      if (used != v.size()) throw ConfigError("");
      return out;
    } catch (const std::exception&) {
      throw ConfigError("config " + key + " wants a number, got '" + v + "'");
    }
  }

  bool get_bool(const std::string& key) const {
    const std::string& v = get_str(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config " + key + " wants true/false, got '" + v + "'");
  }

  // Sorted `key = value` lines; rerunning with this text reproduces the run.
  std::string resolved_text() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
  }

  std::string hash_hex() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : resolved_text()) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return std::string(buf);
  }

  void write_resolved(const std::filesystem::path& path) const {
    detail::write_file_bytes(path, resolved_text());
  }

  ViTConfig vit_config() const {
    ViTConfig cfg;
    cfg.image_h = get_size("stft.image_h");
    cfg.image_w = get_size("stft.image_w");
    cfg.image_c = 1;
    cfg.patch = get_size("model.patch");
    cfg.dim = get_size("model.dim");
    cfg.depth = get_size("model.depth");
    cfg.heads = get_size("model.heads");
    cfg.mlp = get_size("model.mlp");
    cfg.classes = get_size("model.classes");
    cfg.ln_eps = get_double("model.ln_eps");
    cfg.dropout = get_double("model.dropout");
    cfg.seed = get_u64("run.seed");
    cfg.validate();
    return cfg;
  }

  TrainConfig train_config() const {
    TrainConfig t;
    t.epochs = get_size("train.epochs");
    t.batch_size = get_size("train.batch_size");
    t.adam.lr = get_double("train.lr");
    t.adam.beta1 = get_double("train.beta1");
    t.adam.beta2 = get_double("train.beta2");
    t.adam.eps = get_double("train.eps");
    t.seed = get_u64("run.seed");
    t.shuffle = get_bool("train.shuffle");
    t.checkpoint_interval = get_size("train.checkpoint_interval");
    t.schedule = lr_schedule_from_string(get_str("train.lr_schedule"));
    t.early_stop_patience = get_size("train.early_stop_patience");
    t.validate();
    return t;
  }

 private:
  static std::string trim(std::string s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
      s.erase(s.begin());
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
      s.pop_back();
    return s;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace faultvit
