// Copyright (c) 2026 the faultvit authors
// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <string>
#include <vector>

#include "faultvit/dataset.hpp"
#include "faultvit/errors.hpp"
#include "faultvit/signal.hpp"

using namespace faultvit;

namespace {

// n_regions non-overlapping segments per class, one source per class
std::vector<Segment> grid_segments(int classes, std::size_t n_regions,
                                   std::size_t seg_len = 16) {
  std::vector<Segment> out;
  for (int c = 0; c < classes; ++c) {
    for (std::size_t r = 0; r < n_regions; ++r) {
      Segment s;
      s.samples.assign(seg_len, static_cast<double>(c));
      s.label = {c, "class" + std::to_string(c)};
      s.source_id = "src" + std::to_string(c);
      s.start_index = r * seg_len;
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::string key_of(const Segment& s) {
  return s.source_id + ":" + std::to_string(s.start_index) + ":" +
         std::to_string(s.label.class_id);
}

}  // namespace

TEST_CASE("ten regions split 8/1/1 per class", "[dataset]") {
  const auto segs = grid_segments(3, 10);
  const DatasetSplit split = split_dataset(segs, {0.8, 0.1, 0.1}, 7);
  REQUIRE(split.train.size() == 24);
  REQUIRE(split.val.size() == 3);
  REQUIRE(split.test.size() == 3);
  for (int c = 0; c < 3; ++c) {
    auto count = [&](const std::vector<Segment>& v) {
      std::size_t n = 0;
      for (const auto& s : v)
        if (s.label.class_id == c) ++n;
      return n;
    };
    CHECK(count(split.train) == 8);
    CHECK(count(split.val) == 1);
    CHECK(count(split.test) == 1);
  }
}

TEST_CASE("split is deterministic per seed", "[dataset]") {
  const auto segs = grid_segments(4, 8);
  const DatasetSplit a = split_dataset(segs, {0.8, 0.1, 0.1}, 99);
  const DatasetSplit b = split_dataset(segs, {0.8, 0.1, 0.1}, 99);
  auto keys = [](const std::vector<Segment>& v) {
    std::vector<std::string> k;
    for (const auto& s : v) k.push_back(key_of(s));
    return k;
  };
  CHECK(keys(a.train) == keys(b.train));
  CHECK(keys(a.val) == keys(b.val));
  CHECK(keys(a.test) == keys(b.test));

  const DatasetSplit c = split_dataset(segs, {0.8, 0.1, 0.1}, 100);
  CHECK((keys(a.train) != keys(c.train) || keys(a.val) != keys(c.val) ||
         keys(a.test) != keys(c.test)));
}

TEST_CASE("splits partition the input", "[dataset]") {
  const auto segs = grid_segments(2, 12);
  const DatasetSplit split = split_dataset(segs, {0.5, 0.25, 0.25}, 3);
  std::multiset<std::string> seen;
  for (const auto* part : {&split.train, &split.val, &split.test})
    for (const auto& s : *part) seen.insert(key_of(s));
  std::multiset<std::string> want;
  for (const auto& s : segs) want.insert(key_of(s));
  CHECK(seen == want);
}

TEST_CASE("overlapping windows never cross splits", "[dataset]") {
  // one long source per class, stride half the window: everything chains
  // into a single overlap region, plus two isolated regions so the class
  // can still populate three splits
  std::vector<Segment> segs;
  for (int c = 0; c < 2; ++c) {
    Signal sig;
    sig.sample_rate = 1.0;
    sig.source_id = "long" + std::to_string(c);
    sig.samples.assign(64, 0.0);
    auto chained = segment_signal(sig, 16, 8, {c, "class"});
    for (auto& s : chained) segs.push_back(std::move(s));
    for (std::size_t r = 0; r < 2; ++r) {
      Segment iso;
      iso.samples.assign(16, 0.0);
      iso.label = {c, "class"};
      iso.source_id = "iso" + std::to_string(c) + "_" + std::to_string(r);
      iso.start_index = 0;
      segs.push_back(std::move(iso));
    }
  }
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const DatasetSplit split = split_dataset(segs, {0.5, 0.25, 0.25}, seed);
    auto no_cross = [](const std::vector<Segment>& a,
                       const std::vector<Segment>& b) {
      for (const auto& x : a)
        for (const auto& y : b)
          if (x.overlaps(y)) return false;
      return true;
    };
    REQUIRE(no_cross(split.train, split.val));
    REQUIRE(no_cross(split.train, split.test));
    REQUIRE(no_cross(split.val, split.test));
  }
}

TEST_CASE("classes that cannot fill three splits are rejected", "[dataset]") {
  const auto segs = grid_segments(2, 2);
  CHECK_THROWS_AS(split_dataset(segs, {0.8, 0.1, 0.1}, 1), InsufficientData);
}

TEST_CASE("ratio validation", "[dataset]") {
  const auto segs = grid_segments(2, 10);
  CHECK_THROWS_AS(split_dataset(segs, {0.8, 0.1, 0.2}, 1), InvalidParams);
  CHECK_THROWS_AS(split_dataset(segs, {1.0, 0.0, 0.0}, 1), InvalidParams);
  CHECK_THROWS_AS(split_dataset(segs, {0.8, -0.1, 0.3}, 1), InvalidParams);
}
