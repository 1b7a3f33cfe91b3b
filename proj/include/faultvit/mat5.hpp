// Copyright (c) 2026 the faultvit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "faultvit/errors.hpp"
#include "faultvit/bytes.hpp"

namespace faultvit {

// Deliberate MAT-v5 subset: little-endian, uncompressed files holding
// miMATRIX elements of class mxDOUBLE_CLASS with real miDOUBLE payloads
// (column-major). That covers the CWRU recordings; anything else raises
// UnsupportedMatFeature rather than being half-parsed.
namespace mat5 {

constexpr std::uint32_t kMiInt8 = 1;
constexpr std::uint32_t kMiInt32 = 5;
constexpr std::uint32_t kMiUInt32 = 6;
constexpr std::uint32_t kMiDouble = 9;
constexpr std::uint32_t kMiMatrix = 14;
constexpr std::uint32_t kMiCompressed = 15;
constexpr std::uint32_t kMxDoubleClass = 6;

struct VarInfo {
  std::string name;
  std::vector<std::size_t> dims;
  std::uint32_t matrix_class = 0;
  bool complex_flag = false;
  std::uint32_t data_type = 0;   // type of the real-part element
  std::size_t data_offset = 0;   // byte offset of the real-part payload
  std::size_t data_bytes = 0;

  std::size_t element_count() const {
    std::size_t n = dims.empty() ? 0 : 1;
    for (std::size_t d : dims) n *= d;
    return n;
  }
};

namespace impl {

struct Cursor {
  const unsigned char* p;
  std::size_t size;
  std::size_t pos;
  std::string path;

  void need(std::size_t n, const char* what) const {
    if (pos + n > size)
      throw MalformedHeader("truncated MAT file (" + std::string(what) +
                            ") in " + path);
  }
};

// Reads one element tag, handling the packed small-element form. Returns
// (type, nbytes, payload offset, next element offset).
struct Tag {
  std::uint32_t type;
  std::uint32_t nbytes;
  std::size_t payload;
  std::size_t next;
};

inline Tag read_tag(Cursor& c) {
  c.need(8, "element tag");
  const std::uint32_t word = detail::get_u32_le(c.p + c.pos);
  Tag t{};
  if (word >> 16) {  // small data element: size packed into the tag
    t.type = word & 0xFFFF;
    t.nbytes = word >> 16;
    if (t.nbytes > 4)
      throw MalformedHeader("small element longer than 4 bytes in " + c.path);
    t.payload = c.pos + 4;
    t.next = c.pos + 8;
  } else {
    t.type = word;
    t.nbytes = detail::get_u32_le(c.p + c.pos + 4);
    t.payload = c.pos + 8;
    const std::size_t padded = (t.nbytes + 7) & ~std::size_t{7};
    t.next = t.payload + padded;
  }
  if (t.payload + t.nbytes > c.size)
    throw MalformedHeader("element overruns file in " + c.path);
  return t;
}

inline VarInfo parse_matrix(Cursor& c, std::size_t end) {
  VarInfo v;
  // array flags
  Tag flags = read_tag(c);
  if (flags.type != kMiUInt32 || flags.nbytes != 8)
    throw MalformedHeader("bad array-flags element in " + c.path);
  const std::uint32_t fw = detail::get_u32_le(c.p + flags.payload);
  v.matrix_class = fw & 0xFF;
  v.complex_flag = (fw & 0x0800) != 0;
  c.pos = flags.next;

  // dimensions
  Tag dims = read_tag(c);
  if (dims.type != kMiInt32 || dims.nbytes % 4 != 0)
    throw MalformedHeader("bad dimensions element in " + c.path);
  for (std::uint32_t i = 0; i < dims.nbytes / 4; ++i) {
    const auto d = static_cast<std::int32_t>(
        detail::get_u32_le(c.p + dims.payload + 4 * i));
    if (d < 0) throw MalformedHeader("negative dimension in " + c.path);
    v.dims.push_back(static_cast<std::size_t>(d));
  }
  c.pos = dims.next;

  // name
  Tag name = read_tag(c);
  if (name.type != kMiInt8)
    throw MalformedHeader("bad array-name element in " + c.path);
  v.name.assign(reinterpret_cast<const char*>(c.p + name.payload), name.nbytes);
  c.pos = name.next;

  // real part (may be absent for empty arrays)
  if (c.pos < end) {
    Tag pr = read_tag(c);
    v.data_type = pr.type;
    v.data_offset = pr.payload;
    v.data_bytes = pr.nbytes;
  }
  return v;
}

inline Cursor open(const std::string& bytes, const std::string& path) {
  if (bytes.size() < 128)
    throw MalformedHeader("file shorter than the 128-byte MAT header: " + path);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const char e0 = bytes[126], e1 = bytes[127];
  if (e0 == 'M' && e1 == 'I')
    throw UnsupportedMatFeature("big-endian MAT file not supported: " + path);
  if (!(e0 == 'I' && e1 == 'M'))
    throw MalformedHeader("missing MI endian marker in " + path);
  const std::uint16_t version =
      static_cast<std::uint16_t>(p[124]) | (static_cast<std::uint16_t>(p[125]) << 8);
  if (version != 0x0100)
    throw MalformedHeader("unexpected MAT version in " + path);
  return Cursor{p, bytes.size(), 128, path};
}

}  // namespace impl

inline std::vector<VarInfo> scan_bytes(const std::string& bytes,
                                       const std::string& path) {
  impl::Cursor c = impl::open(bytes, path);
  std::vector<VarInfo> vars;
  while (c.pos + 8 <= c.size) {
    impl::Tag t = impl::read_tag(c);
    if (t.type == kMiCompressed)
      throw UnsupportedMatFeature("compressed MAT element in " + path +
                                  "; only uncompressed files are supported");
    if (t.type == kMiMatrix) {
      impl::Cursor inner = c;
      inner.pos = t.payload;
      vars.push_back(impl::parse_matrix(inner, t.next));
    }
    c.pos = t.next;
  }
  return vars;
}

inline std::vector<VarInfo> scan(const std::filesystem::path& path) {
  return scan_bytes(detail::read_file_bytes(path), path.string());
}

inline std::vector<double> read_data_bytes(const std::string& bytes,
                                           const VarInfo& v,
                                           const std::string& path) {
  if (v.matrix_class != kMxDoubleClass)
    throw UnsupportedMatFeature("variable '" + v.name + "' in " + path +
                                " is not mxDOUBLE_CLASS");
  if (v.complex_flag)
    throw UnsupportedMatFeature("variable '" + v.name + "' in " + path +
                                " is complex");
  if (v.data_type != kMiDouble)
    throw UnsupportedMatFeature("variable '" + v.name + "' in " + path +
                                " stores a non-miDOUBLE payload");
  const std::size_t n = v.element_count();
  if (v.data_bytes != n * 8)
    throw MalformedHeader("payload size of '" + v.name + "' disagrees with dims in " +
                          path);
  if (v.data_offset + v.data_bytes > bytes.size())
    throw MalformedHeader("payload of '" + v.name + "' overruns " + path);
  std::vector<double> out(n);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  for (std::size_t i = 0; i < n; ++i)
    out[i] = detail::get_f64_le(p + v.data_offset + 8 * i);
  return out;  // column-major file order == flat order for vectors
}

}  // namespace mat5
}  // namespace faultvit
