// Copyright (c) 2026 the faultvit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "faultvit/autodiff.hpp"
#include "faultvit/errors.hpp"
#include "faultvit/rng.hpp"
#include "faultvit/serialize.hpp"
#include "faultvit/stft.hpp"
#include "faultvit/tensor.hpp"

namespace faultvit {

struct ViTConfig {
  std::size_t image_h = 56;
  std::size_t image_w = 56;
  std::size_t image_c = 1;
  std::size_t patch = 8;
  std::size_t dim = 64;
  std::size_t depth = 4;
  std::size_t heads = 4;
  std::size_t mlp = 128;
  std::size_t classes = 14;
  double ln_eps = 1e-5;
  double dropout = 0.0;
  std::uint64_t seed = 0;

  std::size_t patch_len() const { return patch * patch * image_c; }
  std::size_t patch_count() const {
    return (image_h / patch) * (image_w / patch);
  }
  std::size_t tokens() const { return patch_count() + 1; }
  std::size_t head_dim() const { return dim / heads; }

  void validate() const {
    if (patch == 0 || image_h % patch != 0 || image_w % patch != 0)
      throw IndivisibleImage("image " + std::to_string(image_h) + "x" +
                             std::to_string(image_w) +
                             " not divisible by patch " +
                             std::to_string(patch));
    if (dim == 0 || heads == 0 || dim % heads != 0)
      throw InvalidParams("embed dim " + std::to_string(dim) +
                          " not divisible by heads " + std::to_string(heads));
    if (image_c == 0 || depth == 0 || mlp == 0 || classes < 2)
      throw InvalidParams("model config needs c, depth, mlp > 0 and >= 2 classes");
    if (!(ln_eps > 0)) throw InvalidParams("ln_eps must be > 0");
    if (dropout < 0.0 || dropout >= 1.0)
      throw InvalidParams("dropout must be in [0, 1)");
  }

  std::string to_text() const {
    auto fp = [](double v) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      return std::string(buf);
    };
    std::string s;
    s += "image_h = " + std::to_string(image_h) + "\n";
    s += "image_w = " + std::to_string(image_w) + "\n";
    s += "image_c = " + std::to_string(image_c) + "\n";
    s += "patch = " + std::to_string(patch) + "\n";
    s += "dim = " + std::to_string(dim) + "\n";
    s += "depth = " + std::to_string(depth) + "\n";
    s += "heads = " + std::to_string(heads) + "\n";
    s += "mlp = " + std::to_string(mlp) + "\n";
    s += "classes = " + std::to_string(classes) + "\n";
    s += "ln_eps = " + fp(ln_eps) + "\n";
    s += "dropout = " + fp(dropout) + "\n";
    s += "seed = " + std::to_string(seed) + "\n";
    return s;
  }

  static ViTConfig from_text(const std::string& text) {
    ViTConfig cfg;
    std::map<std::string, std::string> kv;
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      const std::string line = text.substr(start, end - start);
      start = end + 1;
      if (line.empty()) continue;
      const std::size_t eq = line.find(" = ");
      if (eq == std::string::npos)
        throw MalformedHeader("bad checkpoint config line: " + line);
      kv[line.substr(0, eq)] = line.substr(eq + 3);
    }
    auto geti = [&](const char* k, std::size_t& out) {
      auto it = kv.find(k);
      if (it == kv.end())
        throw MalformedHeader(std::string("checkpoint config missing ") + k);
      try {
        out = static_cast<std::size_t>(std::stoull(it->second));
      } catch (const std::exception&) {
        throw MalformedHeader(std::string("bad checkpoint value for ") + k);
      }
    };
    auto getd = [&](const char* k, double& out) {
      auto it = kv.find(k);
      if (it == kv.end())
        throw MalformedHeader(std::string("checkpoint config missing ") + k);
      try {
        out = std::stod(it->second);
      } catch (const std::exception&) {
        throw MalformedHeader(std::string("bad checkpoint value for ") + k);
      }
    };
    geti("image_h", cfg.image_h);
    geti("image_w", cfg.image_w);
    geti("image_c", cfg.image_c);
    geti("patch", cfg.patch);
    geti("dim", cfg.dim);
    geti("depth", cfg.depth);
    geti("heads", cfg.heads);
    geti("mlp", cfg.mlp);
    geti("classes", cfg.classes);
    getd("ln_eps", cfg.ln_eps);
    getd("dropout", cfg.dropout);
    std::size_t seed = 0;
    geti("seed", seed);
    cfg.seed = seed;
    cfg.validate();
    return cfg;
  }
};

// Field-for-field mirror of the parameter tree; T is Tensor for storage
// and Var when registered on a tape.
template <typename T>
struct VitLayerT {
  T ln1_g, ln1_b;
  T wq, wk, wv, wo;
  T ln2_g, ln2_b;
  T w1, b1, w2, b2;
};

template <typename T>
struct VitModelT {
  T embed;  // [P*P*C x D]
  T pos;    // [(N+1) x D]
  T cls;    // [1 x D]
  std::vector<VitLayerT<T>> layers;
  T lnf_g, lnf_b;
  T w_head, b_head;
};

using ViTParams = VitModelT<Tensor>;
using ViTVars = VitModelT<Var>;

// Single traversal order shared by init, serialization, and the optimizer.
template <typename M, typename F>
void for_each_param(M& m, F&& f) {
  f("embed.weight", m.embed);
  f("embed.pos", m.pos);
  f("embed.cls", m.cls);
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    auto& l = m.layers[i];
    const std::string p = "layers." + std::to_string(i) + ".";
    f(p + "ln1.gamma", l.ln1_g);
    f(p + "ln1.beta", l.ln1_b);
    f(p + "attn.wq", l.wq);
    f(p + "attn.wk", l.wk);
    f(p + "attn.wv", l.wv);
    f(p + "attn.wo", l.wo);
    f(p + "ln2.gamma", l.ln2_g);
    f(p + "ln2.beta", l.ln2_b);
    f(p + "mlp.w1", l.w1);
    f(p + "mlp.b1", l.b1);
    f(p + "mlp.w2", l.w2);
    f(p + "mlp.b2", l.b2);
  }
  f("final_ln.gamma", m.lnf_g);
  f("final_ln.beta", m.lnf_b);
  f("head.weight", m.w_head);
  f("head.bias", m.b_head);
}

namespace vit_impl {

inline bool is_gamma(const std::string& name) { return name.ends_with(".gamma"); }

inline bool is_zero_init(const std::string& name) {
  return name.ends_with(".beta") || name.ends_with(".b1") ||
         name.ends_with(".b2") || name == "head.bias";
}

inline ViTParams shaped_params(const ViTConfig& cfg) {
  ViTParams p;
  p.embed = Tensor::zeros({cfg.patch_len(), cfg.dim});
  p.pos = Tensor::zeros({cfg.tokens(), cfg.dim});
  p.cls = Tensor::zeros({1, cfg.dim});
  p.layers.resize(cfg.depth);
  for (auto& l : p.layers) {
    l.ln1_g = Tensor::zeros({cfg.dim});
    l.ln1_b = Tensor::zeros({cfg.dim});
    l.wq = Tensor::zeros({cfg.dim, cfg.dim});
    l.wk = Tensor::zeros({cfg.dim, cfg.dim});
    l.wv = Tensor::zeros({cfg.dim, cfg.dim});
    l.wo = Tensor::zeros({cfg.dim, cfg.dim});
    l.ln2_g = Tensor::zeros({cfg.dim});
    l.ln2_b = Tensor::zeros({cfg.dim});
    l.w1 = Tensor::zeros({cfg.dim, cfg.mlp});
    l.b1 = Tensor::zeros({cfg.mlp});
    l.w2 = Tensor::zeros({cfg.mlp, cfg.dim});
    l.b2 = Tensor::zeros({cfg.dim});
  }
  p.lnf_g = Tensor::zeros({cfg.dim});
  p.lnf_b = Tensor::zeros({cfg.dim});
  p.w_head = Tensor::zeros({cfg.dim, cfg.classes});
  p.b_head = Tensor::zeros({cfg.classes});
  return p;
}

}  // namespace vit_impl

// Truncated normal (std 0.02, cut at 3 sigma) for weights, ones for LN
// gamma, zeros for biases and beta. Draw order follows for_each_param.
inline ViTParams init_params(const ViTConfig& cfg) {
  cfg.validate();
  ViTParams p = vit_impl::shaped_params(cfg);
  Rng rng(cfg.seed);
  for_each_param(p, [&](const std::string& name, Tensor& t) {
    if (vit_impl::is_gamma(name)) {
      for (std::size_t i = 0; i < t.size(); ++i) t[i] = 1.0;
    } else if (vit_impl::is_zero_init(name)) {
      // already zero
    } else {
      for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = 0.02 * rng.truncated_normal3();
    }
  });
  return p;
}

inline NamedTensors named_tensors(const ViTParams& p) {
  NamedTensors out;
  for_each_param(const_cast<ViTParams&>(p),
                 [&](const std::string& name, Tensor& t) {
                   out.emplace_back(name, t);
                 });
  return out;
}

// --- patch extraction ---

// Row-major patch grid; each row flattens one P x P x C block in
// (row, col, channel) order.
inline Tensor patchify(const TFImage& img, std::size_t patch) {
  if (patch == 0 || img.h % patch != 0 || img.w % patch != 0)
    throw IndivisibleImage("image " + std::to_string(img.h) + "x" +
                           std::to_string(img.w) +
                           " not divisible by patch " + std::to_string(patch));
  const std::size_t pr = img.h / patch, pc = img.w / patch;
  const std::size_t n = pr * pc, len = patch * patch * img.c;
  Tensor out({n, len});
  for (std::size_t gi = 0; gi < pr; ++gi) {
    for (std::size_t gj = 0; gj < pc; ++gj) {
      double* row = out.data().data() + (gi * pc + gj) * len;
      std::size_t k = 0;
      for (std::size_t r = 0; r < patch; ++r)
        for (std::size_t c = 0; c < patch; ++c)
          for (std::size_t ch = 0; ch < img.c; ++ch)
            row[k++] =
                img.pixels[((gi * patch + r) * img.w + gj * patch + c) *
                               img.c +
                           ch];
    }
  }
  return out;
}

inline TFImage unpatchify(const Tensor& patches, std::size_t h, std::size_t w,
                          std::size_t c, std::size_t patch) {
  const std::size_t pr = h / patch, pc = w / patch;
  const std::size_t len = patch * patch * c;
  if (patches.rows() != pr * pc || patches.cols() != len)
    throw ShapeMismatch("patch tensor " + Tensor::shape_str(patches.shape()) +
                        " does not tile " + std::to_string(h) + "x" +
                        std::to_string(w));
  TFImage img;
  img.h = h;
  img.w = w;
  img.c = c;
  img.pixels.assign(h * w * c, 0.0);
  for (std::size_t gi = 0; gi < pr; ++gi) {
    for (std::size_t gj = 0; gj < pc; ++gj) {
      const double* row = patches.data().data() + (gi * pc + gj) * len;
      std::size_t k = 0;
      for (std::size_t r = 0; r < patch; ++r)
        for (std::size_t col = 0; col < patch; ++col)
          for (std::size_t ch = 0; ch < c; ++ch)
            img.pixels[((gi * patch + r) * w + gj * patch + col) * c + ch] =
                row[k++];
    }
  }
  return img;
}

// --- forward pass ---

// Attention maps captured during forward; probe.attn[layer][head] is the
// softmax Var of shape [(N+1) x (N+1)].
struct ForwardProbe {
  std::vector<std::vector<Var>> attn;
};

inline ViTVars register_params(Tape& tape, const ViTParams& p,
                               bool requires_grad) {
  ViTVars v;
  v.layers.resize(p.layers.size());
  std::vector<Var*> var_slots;
  for_each_param(v, [&](const std::string&, Var& slot) {
    var_slots.push_back(&slot);
  });
  std::size_t i = 0;
  for_each_param(const_cast<ViTParams&>(p),
                 [&](const std::string&, Tensor& t) {
                   *var_slots[i++] = tape.leaf(t, requires_grad);
                 });
  return v;
}

inline Var dropout_mask(Tape& tape, const Var& x, double p, Rng& rng) {
  const double keep = 1.0 - p;
  Tensor mask(x.shape());
  for (std::size_t i = 0; i < mask.size(); ++i)
    mask[i] = rng.uniform() < keep ? 1.0 / keep : 0.0;
  return mul(x, tape.leaf(std::move(mask), false));
}

// z' = MSA(LN(z)) + z; z'' = MLP(LN(z')) + z'. MSA is h scaled
// dot-product heads over column slices of Q,K,V, concatenated, then W_o.
inline Var encoder_block(Tape& tape, const Var& z, const VitLayerT<Var>& l,
                         const ViTConfig& cfg,
                         std::vector<Var>* attn_probe = nullptr,
                         Rng* drop_rng = nullptr) {
  const std::size_t dh = cfg.head_dim();
  Var x = layer_norm(z, l.ln1_g, l.ln1_b, cfg.ln_eps);
  Var q = matmul(x, l.wq);
  Var k = matmul(x, l.wk);
  Var v = matmul(x, l.wv);
  std::vector<Var> heads;
  heads.reserve(cfg.heads);
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
  for (std::size_t i = 0; i < cfg.heads; ++i) {
    Var qh = slice_cols(q, i * dh, (i + 1) * dh);
    Var kh = slice_cols(k, i * dh, (i + 1) * dh);
    Var vh = slice_cols(v, i * dh, (i + 1) * dh);
    Var att = softmax(scale(matmul(qh, transpose(kh)), inv_sqrt_dh), 1);
    if (attn_probe) attn_probe->push_back(att);
    heads.push_back(matmul(att, vh));
  }
  Var msa = matmul(concat_cols(heads), l.wo);
  if (drop_rng && cfg.dropout > 0.0)
    msa = dropout_mask(tape, msa, cfg.dropout, *drop_rng);
  Var z1 = add(z, msa);

  Var y = layer_norm(z1, l.ln2_g, l.ln2_b, cfg.ln_eps);
  Var mid = gelu(add(matmul(y, l.w1), l.b1));
  Var out = add(matmul(mid, l.w2), l.b2);
  if (drop_rng && cfg.dropout > 0.0)
    out = dropout_mask(tape, out, cfg.dropout, *drop_rng);
  return add(z1, out);
}

// patches [N x P*P*C] -> logits [1 x K]. Class token is row 0; the image
// representation is LN of that row after the last block.
inline Var forward_patches(Tape& tape, const ViTVars& m, const ViTConfig& cfg,
                           const Tensor& patches,
                           ForwardProbe* probe = nullptr,
                           Rng* drop_rng = nullptr) {
  if (patches.rows() != cfg.patch_count() || patches.cols() != cfg.patch_len())
    throw ShapeMismatch("patch tensor " + Tensor::shape_str(patches.shape()) +
                        " does not match config (want [" +
                        std::to_string(cfg.patch_count()) + "x" +
                        std::to_string(cfg.patch_len()) + "])");
  Var px = tape.leaf(patches, false);
  Var proj = matmul(px, m.embed);
  std::vector<Var> seq = {m.cls, proj};
  Var z = add(concat_rows(seq), m.pos);
  if (probe) probe->attn.assign(cfg.depth, {});
  for (std::size_t li = 0; li < cfg.depth; ++li)
    z = encoder_block(tape, z, m.layers[li], cfg,
                      probe ? &probe->attn[li] : nullptr, drop_rng);
  Var cls_row = slice_rows(z, 0, 1);
  Var y = layer_norm(cls_row, m.lnf_g, m.lnf_b, cfg.ln_eps);
  return add(matmul(y, m.w_head), m.b_head);
}

inline Var forward_image(Tape& tape, const ViTVars& m, const ViTConfig& cfg,
                         const TFImage& img, ForwardProbe* probe = nullptr,
                         Rng* drop_rng = nullptr) {
  if (img.h != cfg.image_h || img.w != cfg.image_w || img.c != cfg.image_c)
    throw ShapeMismatch("image " + std::to_string(img.h) + "x" +
                        std::to_string(img.w) + "x" + std::to_string(img.c) +
                        " does not match config " +
                        std::to_string(cfg.image_h) + "x" +
                        std::to_string(cfg.image_w) + "x" +
                        std::to_string(cfg.image_c));
  return forward_patches(tape, m, cfg, patchify(img, cfg.patch), probe,
                         drop_rng);
}

// --- checkpoint: "FVCP", version byte, u32 config length + text, blob ---

inline constexpr char kCheckpointMagic[4] = {'F', 'V', 'C', 'P'};
inline constexpr unsigned char kCheckpointVersion = 1;

inline void save_checkpoint(const std::filesystem::path& path,
                            const ViTConfig& cfg, const ViTParams& params,
                            const NamedTensors& extra = {}) {
  std::string out(kCheckpointMagic, 4);
  out.push_back(static_cast<char>(kCheckpointVersion));
  const std::string cfg_text = cfg.to_text();
  detail::put_u32_le(out, static_cast<std::uint32_t>(cfg_text.size()));
  out += cfg_text;
  NamedTensors all = named_tensors(params);
  for (const auto& [name, t] : extra) all.emplace_back(name, t);
  append_tensor_blob(out, all);
  detail::write_file_bytes(path, out);
}

struct Checkpoint {
  ViTConfig cfg;
  ViTParams params;
  NamedTensors extra;  // tensors beyond the model itself (optimizer state)
};

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string bytes = detail::read_file_bytes(path);
  if (bytes.size() < 9 || bytes.compare(0, 4, kCheckpointMagic, 4) != 0)
    throw MalformedHeader("not a checkpoint file: " + path.string());
  if (static_cast<unsigned char>(bytes[4]) != kCheckpointVersion)
    throw MalformedHeader("unsupported checkpoint version in " + path.string());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t cfg_len = detail::get_u32_le(p + 5);
  if (9 + static_cast<std::size_t>(cfg_len) > bytes.size())
    throw MalformedHeader("checkpoint config block truncated: " + path.string());
  Checkpoint ck;
  ck.cfg = ViTConfig::from_text(bytes.substr(9, cfg_len));
  std::size_t pos = 9 + cfg_len;
  NamedTensors blob = parse_tensor_blob(p, bytes.size(), pos);
  if (pos != bytes.size())
    throw MalformedHeader("trailing bytes after checkpoint blob: " +
                          path.string());
  ck.params = vit_impl::shaped_params(ck.cfg);
  std::map<std::string, Tensor*> loose;
  for (auto& [name, t] : blob) loose[name] = &t;
  for_each_param(ck.params, [&](const std::string& name, Tensor& dst) {
    auto it = loose.find(name);
    if (it == loose.end())
      throw ConfigMismatch("checkpoint missing tensor " + name);
    if (!it->second->same_shape(dst))
      throw ConfigMismatch("checkpoint tensor " + name + " has shape " +
                           Tensor::shape_str(it->second->shape()) +
                           ", config wants " + Tensor::shape_str(dst.shape()));
    dst = std::move(*it->second);
    loose.erase(it);
  });
  for (auto& [name, t] : blob)
    if (loose.count(name)) ck.extra.emplace_back(name, std::move(t));
  return ck;
}

}  // namespace faultvit
