// Copyright (c) 2026 the faultvit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "faultvit/bytes.hpp"
#include "faultvit/errors.hpp"
#include "faultvit/trainer.hpp"

namespace faultvit {

// Exact-match rate as a percentage.
inline double accuracy(const std::vector<int>& predictions,
                       const std::vector<int>& labels) {
  if (predictions.size() != labels.size())
    throw LengthMismatch("accuracy: " + std::to_string(predictions.size()) +
                         " predictions vs " + std::to_string(labels.size()) +
                         " labels");
  if (predictions.empty()) throw EmptyInput("accuracy of an empty set");
  std::size_t match = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    if (predictions[i] == labels[i]) ++match;
  return 100.0 * static_cast<double>(match) /
         static_cast<double>(predictions.size());
}

// Rows are true classes, columns predicted.
struct ConfusionMatrix {
  std::size_t k = 0;
  std::vector<long long> counts;  // k*k, row-major

  long long at(std::size_t t, std::size_t p) const { return counts[t * k + p]; }
  long long& at(std::size_t t, std::size_t p) { return counts[t * k + p]; }

  long long row_sum(std::size_t t) const {
    long long s = 0;
    for (std::size_t p = 0; p < k; ++p) s += at(t, p);
    return s;
  }
  long long trace() const {
    long long s = 0;
    for (std::size_t i = 0; i < k; ++i) s += at(i, i);
    return s;
  }
  long long total() const {
    long long s = 0;
    for (long long c : counts) s += c;
    return s;
  }
};

inline ConfusionMatrix confusion(const std::vector<int>& predictions,
                                 const std::vector<int>& labels,
                                 std::size_t k) {
  if (predictions.size() != labels.size())
    throw LengthMismatch("confusion: " + std::to_string(predictions.size()) +
                         " predictions vs " + std::to_string(labels.size()) +
                         " labels");
  ConfusionMatrix cm;
  cm.k = k;
  cm.counts.assign(k * k, 0);
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const int t = labels[i], p = predictions[i];
    if (t < 0 || static_cast<std::size_t>(t) >= k || p < 0 ||
        static_cast<std::size_t>(p) >= k)
      throw IdOutOfRange("class id (" + std::to_string(t) + ", " +
                         std::to_string(p) + ") outside 0.." +
                         std::to_string(k - 1));
    ++cm.at(static_cast<std::size_t>(t), static_cast<std::size_t>(p));
  }
  return cm;
}

// Percentage per class; nullopt for classes with no true samples.
inline std::vector<std::optional<double>> per_class_accuracy(
    const ConfusionMatrix& cm) {
  std::vector<std::optional<double>> out(cm.k);
  for (std::size_t i = 0; i < cm.k; ++i) {
    const long long rs = cm.row_sum(i);
    if (rs > 0)
      out[i] = 100.0 * static_cast<double>(cm.at(i, i)) /
               static_cast<double>(rs);
  }
  return out;
}

namespace eval_impl {

inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

}  // namespace eval_impl

inline std::string confusion_csv(const ConfusionMatrix& cm,
                                 const std::vector<std::string>& names) {
  if (names.size() != cm.k)
    throw LengthMismatch("confusion_csv: " + std::to_string(names.size()) +
                         " names for " + std::to_string(cm.k) + " classes");
  std::string out = "true\\pred";
  for (const std::string& n : names) out += "," + n;
  out += "\n";
  for (std::size_t i = 0; i < cm.k; ++i) {
    out += names[i];
    for (std::size_t j = 0; j < cm.k; ++j)
      out += "," + std::to_string(cm.at(i, j));
    out += "\n";
  }
  return out;
}

struct ReportInputs {
  ConfusionMatrix cm;
  std::vector<std::string> class_names;
  TrainHistory history;        // may be empty; history.csv written if not
  double accuracy_pct = 0.0;
  std::string config_hash;     // echoed into the summary
  bool heat_image = false;     // also write a row-normalized PGM
};

// Writes confusion.csv, summary.txt, optionally history.csv and
// confusion.pgm under out_dir. Byte-deterministic for identical inputs.
inline void export_report(const ReportInputs& in,
                          const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string());

  detail::write_file_bytes(out_dir / "confusion.csv",
                           confusion_csv(in.cm, in.class_names));

  std::string summary;
  summary += "accuracy_pct = " + eval_impl::fmt17(in.accuracy_pct) + "\n";
  summary += "samples = " + std::to_string(in.cm.total()) + "\n";
  const auto per_class = per_class_accuracy(in.cm);
  for (std::size_t i = 0; i < in.cm.k; ++i) {
    summary += "class." + in.class_names[i] + " = ";
    summary += per_class[i] ? eval_impl::fmt17(*per_class[i]) : "absent";
    summary += "\n";
  }
  if (!in.config_hash.empty())
    summary += "config_hash = " + in.config_hash + "\n";
  detail::write_file_bytes(out_dir / "summary.txt", summary);

  if (!in.history.empty())
    detail::write_file_bytes(out_dir / "history.csv", history_csv(in.history));

  if (in.heat_image) {
    std::vector<double> grid(in.cm.k * in.cm.k, 0.0);
    for (std::size_t i = 0; i < in.cm.k; ++i) {
      const long long rs = in.cm.row_sum(i);
      for (std::size_t j = 0; j < in.cm.k; ++j)
        grid[i * in.cm.k + j] =
            rs > 0 ? static_cast<double>(in.cm.at(i, j)) /
                         static_cast<double>(rs)
                   : 0.0;
    }
    write_pgm(grid, in.cm.k, in.cm.k, out_dir / "confusion.pgm");
  }
}

}  // namespace faultvit
