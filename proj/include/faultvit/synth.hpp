// Copyright (c) 2026 the faultvit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "faultvit/errors.hpp"
#include "faultvit/rng.hpp"
#include "faultvit/signal.hpp"

namespace faultvit {

enum class FaultKind { Normal, InnerRace, OuterRace, Ball };

inline std::string fault_kind_name(FaultKind k) {
  switch (k) {
    case FaultKind::Normal: return "Normal";
    case FaultKind::InnerRace: return "InnerRace";
    case FaultKind::OuterRace: return "OuterRace";
    case FaultKind::Ball: return "Ball";
  }
  return "Normal";
}

// Impulse-train bearing model: each defect impact excites an exponentially
// decaying resonance ring, repeated at the characteristic fault frequency
// with multiplicative slip jitter. Normal emits noise plus a small
// shaft-rate sinusoid (amplitude = impact_amp) only. Ball impacts alternate
// full / half amplitude.
struct FaultSpec {
  FaultKind kind = FaultKind::Normal;
  double impact_rate = 0.0;     // Hz, characteristic fault frequency
  double resonance_freq = 0.0;  // Hz
  double decay = 0.0;           // 1/s ring-down rate
  double impact_amp = 0.0;
  double slip_jitter = 0.0;     // std of inter-impact interval, fraction
  double noise_std = 0.0;
  double modulation = 0.0;      // shaft-rate AM depth in [0, 1]; 0 = none
  double shaft_rate = 29.95;    // Hz, ~1797 rpm
};

inline void validate_spec(const FaultSpec& s, double sample_rate) {
  if (!(s.impact_rate >= 0) || !(s.noise_std >= 0) || !(s.decay >= 0) ||
      !(s.impact_amp >= 0))
    throw InvalidSpec("impact_rate, noise_std, decay, impact_amp must be >= 0");
  if (s.slip_jitter < 0 || s.slip_jitter > 0.2)
    throw InvalidSpec("slip_jitter must lie in [0, 0.2]");
  if (s.modulation < 0 || s.modulation > 1)
    throw InvalidSpec("modulation depth must lie in [0, 1]");
  if (!(s.resonance_freq < sample_rate / 2))
    throw InvalidSpec("resonance_freq must be below sample_rate/2");
  if (!(s.shaft_rate >= 0)) throw InvalidSpec("shaft_rate must be >= 0");
}

// Deterministic per seed. Impact timing and additive noise draw from two
// independent substreams (mix_seed(seed, 0) and mix_seed(seed, 1)), so the
// number of impacts never shifts the noise sequence.
inline Signal generate_signal_samples(const FaultSpec& spec,
                                      std::size_t n_samples,
                                      double sample_rate, std::uint64_t seed) {
  if (n_samples == 0 || sample_rate <= 0)
    throw InvalidSpec("need n_samples >= 1 and sample_rate > 0");
  validate_spec(spec, sample_rate);

  constexpr double two_pi = 2.0 * 3.14159265358979323846;
  Signal sig;
  sig.sample_rate = sample_rate;
  sig.channel = Channel::Unknown;
  sig.samples.assign(n_samples, 0.0);
  const double duration = static_cast<double>(n_samples) / sample_rate;

  Rng impact_rng(mix_seed(seed, 0));
  Rng noise_rng(mix_seed(seed, 1));

  if (spec.kind == FaultKind::Normal) {
    if (spec.impact_amp > 0 && spec.shaft_rate > 0) {
      for (std::size_t n = 0; n < n_samples; ++n) {
        const double t = static_cast<double>(n) / sample_rate;
        sig.samples[n] = spec.impact_amp * std::sin(two_pi * spec.shaft_rate * t);
      }
    }
  } else if (spec.impact_rate > 0 && spec.impact_amp > 0) {
    const double mean_interval = 1.0 / spec.impact_rate;
    // ring contributions below exp(-27.6) ~ 1e-12 of the impact amplitude
    // are dropped
    const std::size_t ring_samples =
        spec.decay > 0
            ? static_cast<std::size_t>(std::ceil(27.63 / spec.decay * sample_rate)) + 1
            : n_samples;
    double t_k = 0.5 * mean_interval;  // first onset half an interval in
    std::size_t k = 0;
    while (t_k < duration) {
      double amp = spec.impact_amp;
      if (spec.modulation > 0 && spec.shaft_rate > 0)
        amp *= 1.0 + spec.modulation * std::sin(two_pi * spec.shaft_rate * t_k);
      if (spec.kind == FaultKind::Ball && (k % 2 == 1)) amp *= 0.5;

      const auto first = static_cast<std::size_t>(std::ceil(t_k * sample_rate));
      const std::size_t last = std::min(n_samples, first + ring_samples);
      for (std::size_t n = first; n < last; ++n) {
        const double dt = static_cast<double>(n) / sample_rate - t_k;
        sig.samples[n] +=
            amp * std::exp(-spec.decay * dt) * std::sin(two_pi * spec.resonance_freq * dt);
      }

      double interval = mean_interval;
      if (spec.slip_jitter > 0)
        interval *= 1.0 + spec.slip_jitter * impact_rng.normal();
      if (interval < 0.1 * mean_interval) interval = 0.1 * mean_interval;
      t_k += interval;
      ++k;
    }
  }

  if (spec.noise_std > 0)
    for (std::size_t n = 0; n < n_samples; ++n)
      sig.samples[n] += noise_rng.normal(0.0, spec.noise_std);

  return sig;
}

inline Signal generate_signal(const FaultSpec& spec, double duration,
                              double sample_rate, std::uint64_t seed) {
  if (!(duration > 0)) throw InvalidSpec("duration must be > 0");
  const auto n = static_cast<std::size_t>(std::llround(duration * sample_rate));
  Signal sig = generate_signal_samples(spec, n, sample_rate, seed);
  sig.source_id = "synth:" + fault_kind_name(spec.kind);
  return sig;
}

// Desk-scale 4-class suite, proportioned like the CWRU characteristic
// frequencies near 1797 rpm. Ordered by canonical label index.
inline std::vector<std::pair<std::string, FaultSpec>> default_desk_suite() {
  std::vector<std::pair<std::string, FaultSpec>> suite;
  FaultSpec normal;
  normal.kind = FaultKind::Normal;
  normal.impact_amp = 0.05;
  normal.noise_std = 0.1;
  suite.emplace_back("N", normal);

  FaultSpec ball;
  ball.kind = FaultKind::Ball;
  ball.impact_rate = 141.0;
  ball.resonance_freq = 3600.0;
  ball.decay = 800.0;
  ball.impact_amp = 1.0;
  ball.slip_jitter = 0.02;
  ball.noise_std = 0.1;
  suite.emplace_back("7_BA", ball);

  FaultSpec inner;
  inner.kind = FaultKind::InnerRace;
  inner.impact_rate = 162.0;
  inner.resonance_freq = 3200.0;
  inner.decay = 900.0;
  inner.impact_amp = 1.0;
  inner.slip_jitter = 0.01;
  inner.noise_std = 0.1;
  inner.modulation = 0.5;
  suite.emplace_back("7_IR", inner);

  FaultSpec outer;
  outer.kind = FaultKind::OuterRace;
  outer.impact_rate = 107.0;
  outer.resonance_freq = 2800.0;
  outer.decay = 700.0;
  outer.impact_amp = 1.0;
  outer.slip_jitter = 0.01;
  outer.noise_std = 0.1;
  suite.emplace_back("7_OR1", outer);
  return suite;
}

struct SynthDataset {
  std::vector<Segment> segments;
  std::vector<std::string> labels;  // index = class_id
};

// One independent signal per class (substream mix_seed(seed, 100 + class)),
// cut into non-overlapping windows; class balance is exact.
inline SynthDataset generate_dataset(
    const std::vector<std::pair<std::string, FaultSpec>>& specs,
    std::size_t segments_per_class, std::size_t segment_len,
    double sample_rate, std::uint64_t seed) {
  if (specs.size() < 2) throw InvalidSpec("need at least 2 classes");
  if (segments_per_class == 0 || segment_len == 0)
    throw InvalidSpec("need segments_per_class >= 1 and segment_len >= 1");

  SynthDataset ds;
  for (std::size_t c = 0; c < specs.size(); ++c) {
    const auto& [label_name, spec] = specs[c];
    Signal sig = generate_signal_samples(spec, segments_per_class * segment_len,
                                         sample_rate,
                                         mix_seed(seed, 100 + c));
    sig.source_id = "synth:" + label_name;
    FaultLabel label{static_cast<int>(c), label_name};
    auto segs = segment_signal(sig, segment_len, segment_len, label);
    ds.segments.insert(ds.segments.end(), std::make_move_iterator(segs.begin()),
                       std::make_move_iterator(segs.end()));
    ds.labels.push_back(label_name);
  }
  return ds;
}

}  // namespace faultvit
