// Copyright (c) 2026 the faultvit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "faultvit/bytes.hpp"
#include "faultvit/errors.hpp"
#include "faultvit/tensor.hpp"

namespace faultvit {

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

// Flat blob: u32 count, then per tensor u32 name length + name bytes +
// u32 rank + u32 dims + row-major float64 payload. All integers LE.
inline void append_tensor_blob(std::string& out, const NamedTensors& tensors) {
  detail::put_u32_le(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    detail::put_u32_le(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    detail::put_u32_le(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape())
      detail::put_u32_le(out, static_cast<std::uint32_t>(d));
    for (std::size_t i = 0; i < t.size(); ++i)
      detail::put_f64_le(out, t[i]);
  }
}

inline NamedTensors parse_tensor_blob(const unsigned char* p, std::size_t n,
                                      std::size_t& pos) {
  auto need = [&](std::size_t k) {
    if (pos + k > n) throw MalformedHeader("tensor blob truncated");
  };
  need(4);
  const std::uint32_t count = detail::get_u32_le(p + pos);
  pos += 4;
  NamedTensors out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    need(4);
    const std::uint32_t name_len = detail::get_u32_le(p + pos);
    pos += 4;
    need(name_len);
    std::string name(reinterpret_cast<const char*>(p + pos), name_len);
    pos += name_len;
    need(4);
    const std::uint32_t rank = detail::get_u32_le(p + pos);
    pos += 4;
    if (rank > 8) throw MalformedHeader("tensor rank " + std::to_string(rank) +
                                        " unreasonable for '" + name + "'");
    std::vector<std::size_t> shape(rank);
    need(4 * rank);
    for (std::uint32_t d = 0; d < rank; ++d) {
      shape[d] = detail::get_u32_le(p + pos);
      pos += 4;
    }
    const std::size_t elems = Tensor::count(shape);
    need(8 * elems);
    std::vector<double> data(elems);
    for (std::size_t e = 0; e < elems; ++e) {
      data[e] = detail::get_f64_le(p + pos);
      pos += 8;
    }
    out.emplace_back(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  return out;
}

inline void write_tensor_blob(const std::filesystem::path& path,
                              const NamedTensors& tensors) {
  std::string out;
  append_tensor_blob(out, tensors);
  detail::write_file_bytes(path, out);
}

inline NamedTensors read_tensor_blob(const std::filesystem::path& path) {
  const std::string bytes = detail::read_file_bytes(path);
  std::size_t pos = 0;
  auto out = parse_tensor_blob(
      reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), pos);
  if (pos != bytes.size())
    throw MalformedHeader("trailing bytes after tensor blob in " +
                          path.string());
  return out;
}

}  // namespace faultvit
