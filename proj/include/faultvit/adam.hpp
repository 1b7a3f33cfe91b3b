// Copyright (c) 2026 the faultvit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "faultvit/errors.hpp"
#include "faultvit/serialize.hpp"
#include "faultvit/tensor.hpp"

namespace faultvit {

struct AdamHyper {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const {
    if (!(lr > 0)) throw InvalidParams("adam lr must be > 0");
    if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1)
      throw InvalidParams("adam betas must be in [0, 1)");
    if (!(eps > 0)) throw InvalidParams("adam eps must be > 0");
  }
};

// First/second moments per parameter plus the shared step counter.
struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t t = 0;

  static AdamState zeros_like(const std::vector<Tensor*>& params) {
    AdamState s;
    s.m.reserve(params.size());
    s.v.reserve(params.size());
    for (const Tensor* p : params) {
      s.m.push_back(Tensor::zeros(p->shape()));
      s.v.push_back(Tensor::zeros(p->shape()));
    }
    return s;
  }
};

// m <- b1 m + (1-b1) g; v <- b2 v + (1-b2) g^2; bias-corrected step.
inline void adam_step(const std::vector<Tensor*>& params,
                      const std::vector<const Tensor*>& grads,
                      AdamState& state, const AdamHyper& hyper) {
  hyper.validate();
  if (params.size() != grads.size() || params.size() != state.m.size() ||
      params.size() != state.v.size())
    throw ShapeMismatch("adam_step: params/grads/state counts disagree");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = *grads[i];
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    if (!p.same_shape(g) || !p.same_shape(m) || !p.same_shape(v))
      throw ShapeMismatch("adam_step: shape disagreement at parameter " +
                          std::to_string(i) + " (" +
                          Tensor::shape_str(p.shape()) + " vs grad " +
                          Tensor::shape_str(g.shape()) + ")");
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = hyper.beta1 * m[j] + (1.0 - hyper.beta1) * g[j];
      v[j] = hyper.beta2 * v[j] + (1.0 - hyper.beta2) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p[j] -= hyper.lr * mhat / (std::sqrt(vhat) + hyper.eps);
    }
  }
}

// Optimizer state as checkpoint-appendable named tensors. Moment names
// index the for_each_param order; the counter rides along as a scalar.
inline NamedTensors adam_state_tensors(const AdamState& state) {
  NamedTensors out;
  for (std::size_t i = 0; i < state.m.size(); ++i) {
    out.emplace_back("adam.m." + std::to_string(i), state.m[i]);
    out.emplace_back("adam.v." + std::to_string(i), state.v[i]);
  }
  out.emplace_back("adam.t", Tensor::scalar(static_cast<double>(state.t)));
  return out;
}

inline AdamState adam_state_from_tensors(const NamedTensors& tensors,
                                         const std::vector<Tensor*>& params) {
  AdamState s = AdamState::zeros_like(params);
  std::size_t found = 0;
  for (const auto& [name, t] : tensors) {
    if (name == "adam.t") {
      s.t = static_cast<std::uint64_t>(t.item());
      ++found;
      continue;
    }
    const bool is_m = name.starts_with("adam.m.");
    const bool is_v = name.starts_with("adam.v.");
    if (!is_m && !is_v) continue;
    const std::size_t idx = std::stoull(name.substr(7));
    if (idx >= params.size())
      throw ConfigMismatch("optimizer state index " + name +
                           " out of range for this model");
    Tensor& dst = is_m ? s.m[idx] : s.v[idx];
    if (!t.same_shape(dst))
      throw ConfigMismatch("optimizer tensor " + name + " has shape " +
                           Tensor::shape_str(t.shape()) + ", parameter is " +
                           Tensor::shape_str(dst.shape()));
    dst = t;
    ++found;
  }
  if (found != 2 * params.size() + 1)
    throw ConfigMismatch("optimizer state incomplete: found " +
                         std::to_string(found) + " tensors, expected " +
                         std::to_string(2 * params.size() + 1));
  return s;
}

}  // namespace faultvit
