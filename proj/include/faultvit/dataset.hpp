// Copyright (c) 2026 the faultvit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "faultvit/errors.hpp"
#include "faultvit/rng.hpp"
#include "faultvit/signal.hpp"

namespace faultvit {

struct DatasetSplit {
  std::vector<Segment> train, val, test;
  std::uint64_t seed = 0;
  std::array<double, 3> ratios{0.8, 0.1, 0.1};
};

namespace split_impl {

// A region is a maximal run of segments from one source whose sample ranges
// chain-overlap; regions are the unit of split assignment, which is what
// keeps overlapping windows out of different splits.
struct Region {
  std::vector<std::size_t> segment_indices;
};

inline std::vector<Region> build_regions(const std::vector<Segment>& segments,
                                         std::vector<std::size_t> idx) {
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return segments[a].start_index < segments[b].start_index;
  });
  std::vector<Region> regions;
  std::size_t run_end = 0;
  for (std::size_t i : idx) {
    const Segment& s = segments[i];
    if (regions.empty() || s.start_index >= run_end) {
      regions.emplace_back();
      run_end = s.end_index();
    } else {
      run_end = std::max(run_end, s.end_index());
    }
    regions.back().segment_indices.push_back(i);
  }
  return regions;
}

// Largest-remainder apportionment of n regions over the three ratios, then
// a fixup guaranteeing every split at least one region (possible for n >= 3).
inline std::array<std::size_t, 3> apportion(std::size_t n,
                                            const std::array<double, 3>& ratios) {
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> frac{};
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double q = static_cast<double>(n) * ratios[i];
    counts[i] = static_cast<std::size_t>(std::floor(q));
    frac[i] = q - std::floor(q);
    assigned += counts[i];
  }
  while (assigned < n) {
    int best = 0;
    for (int i = 1; i < 3; ++i)
      if (frac[i] > frac[best]) best = i;
    ++counts[best];
    frac[best] = -1.0;
    ++assigned;
  }
  for (int i = 0; i < 3; ++i) {
    while (counts[i] == 0) {
      int donor = 0;
      for (int j = 1; j < 3; ++j)
        if (counts[j] > counts[donor]) donor = j;
      --counts[donor];
      ++counts[i];
    }
  }
  return counts;
}

}  // namespace split_impl

// Splits segments into train/val/test. Grouping is by (source_id, label);
// contiguous overlap regions are assigned wholly to one split by a seeded
// per-class shuffle, so no two overlapping segments land in different splits.
// Deterministic for a fixed seed.
inline DatasetSplit split_dataset(const std::vector<Segment>& segments,
                                  std::array<double, 3> ratios,
                                  std::uint64_t seed) {
  const double sum = ratios[0] + ratios[1] + ratios[2];
  if (!(ratios[0] > 0 && ratios[1] > 0 && ratios[2] > 0) ||
      std::abs(sum - 1.0) > 1e-9)
    throw InvalidParams("split ratios must be positive and sum to 1");

  // class -> source -> segment indices; std::map keeps iteration deterministic
  std::map<int, std::map<std::string, std::vector<std::size_t>>> by_class;
  for (std::size_t i = 0; i < segments.size(); ++i)
    by_class[segments[i].label.class_id][segments[i].source_id].push_back(i);

  DatasetSplit out;
  out.seed = seed;
  out.ratios = ratios;
  for (auto& [class_id, sources] : by_class) {
    std::vector<split_impl::Region> regions;
    std::string label_name;
    for (auto& [src, idx] : sources) {
      label_name = segments[idx.front()].label.name;
      auto r = split_impl::build_regions(segments, idx);
      regions.insert(regions.end(), std::make_move_iterator(r.begin()),
                     std::make_move_iterator(r.end()));
    }
    if (regions.size() < 3)
      throw InsufficientData(
          "class '" + label_name + "' has only " +
          std::to_string(regions.size()) +
          " non-overlapping region(s); need >= 3 to populate train/val/test");

    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(class_id)));
    rng.shuffle(regions);
    const auto counts = split_impl::apportion(regions.size(), ratios);

    std::size_t r = 0;
    auto take = [&](std::vector<Segment>& dst, std::size_t n) {
      for (std::size_t k = 0; k < n; ++k, ++r)
        for (std::size_t i : regions[r].segment_indices)
          dst.push_back(segments[i]);
    };
    take(out.train, counts[0]);
    take(out.val, counts[1]);
    take(out.test, counts[2]);
  }
  return out;
}

}  // namespace faultvit
