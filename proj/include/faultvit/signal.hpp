// Copyright (c) 2026 the faultvit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "faultvit/errors.hpp"

namespace faultvit {

enum class Channel { DriveEnd, FanEnd, Base, Unknown };

inline std::string channel_name(Channel c) {
  switch (c) {
    case Channel::DriveEnd: return "DriveEnd";
    case Channel::FanEnd: return "FanEnd";
    case Channel::Base: return "Base";
    case Channel::Unknown: return "Unknown";
  }
  return "Unknown";
}

inline Channel channel_from_string(const std::string& s) {
  if (s == "DriveEnd") return Channel::DriveEnd;
  if (s == "FanEnd") return Channel::FanEnd;
  if (s == "Base") return Channel::Base;
  if (s == "Unknown") return Channel::Unknown;
  throw DataError("unknown channel: " + s);
}

// Raw vibration record: acceleration samples at a fixed rate.
struct Signal {
  std::vector<double> samples;
  double sample_rate = 0.0;  // Hz; comes from configuration, files carry none
  std::string source_id;
  Channel channel = Channel::Unknown;
};

// The closed 14-name taxonomy: Normal plus thirteen fault conditions,
// fault diameter in mils x {ball, inner race, outer race position 1..3}.
inline const std::array<std::string, 14>& canonical_labels() {
  static const std::array<std::string, 14> names = {
      "N",      "7_BA",   "7_IR",   "7_OR1", "7_OR2",  "7_OR3",  "14_BA",
      "14_IR",  "14_OR1", "21_BA",  "21_IR", "21_OR1", "21_OR2", "21_OR3"};
  return names;
}

struct FaultLabel {
  int class_id = -1;  // position within the dataset's ordered label set
  std::string name;

  friend bool operator==(const FaultLabel&, const FaultLabel&) = default;
};

inline bool is_canonical_label(const std::string& name) {
  for (const auto& n : canonical_labels())
    if (n == name) return true;
  return false;
}

inline int canonical_label_index(const std::string& name) {
  const auto& names = canonical_labels();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  throw DataError("label '" + name + "' is not one of the 14 canonical names");
}

// Fixed-length window cut from a parent signal.
struct Segment {
  std::vector<double> samples;
  FaultLabel label;
  std::string source_id;
  std::size_t start_index = 0;

  std::size_t length() const { return samples.size(); }
  // [start, end) sample range in the parent signal
  std::size_t end_index() const { return start_index + samples.size(); }

  bool overlaps(const Segment& o) const {
    return source_id == o.source_id && start_index < o.end_index() &&
           o.start_index < end_index();
  }
};

// Windows of segment_len every stride samples. A too-short signal yields an
// empty sequence rather than an error.
inline std::vector<Segment> segment_signal(const Signal& signal,
                                           std::size_t segment_len,
                                           std::size_t stride,
                                           const FaultLabel& label = {}) {
  if (segment_len == 0 || stride == 0)
    throw InvalidParams("segment_len and stride must be >= 1");
  std::vector<Segment> out;
  if (signal.samples.size() < segment_len) return out;
  const std::size_t n = (signal.samples.size() - segment_len) / stride + 1;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Segment s;
    s.start_index = i * stride;
    s.samples.assign(signal.samples.begin() + static_cast<std::ptrdiff_t>(s.start_index),
                     signal.samples.begin() + static_cast<std::ptrdiff_t>(s.start_index + segment_len));
    s.label = label;
    s.source_id = signal.source_id;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace faultvit
