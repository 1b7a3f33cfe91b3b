// Copyright (c) 2026 the faultvit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "faultvit/bytes.hpp"
#include "faultvit/errors.hpp"
#include "faultvit/mat5.hpp"
#include "faultvit/signal.hpp"

namespace faultvit {

enum class SignalFormat { MatV5, Csv, RawF64LE };

inline SignalFormat format_from_string(const std::string& s) {
  if (s == "mat" || s == "MatV5") return SignalFormat::MatV5;
  if (s == "csv" || s == "Csv") return SignalFormat::Csv;
  if (s == "raw" || s == "RawF64LE") return SignalFormat::RawF64LE;
  throw ConfigError("unknown signal format: " + s);
}

// Extension-based guess: .mat -> MatV5, .csv -> Csv, anything else raw.
inline SignalFormat guess_format(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".mat") return SignalFormat::MatV5;
  if (ext == ".csv") return SignalFormat::Csv;
  return SignalFormat::RawF64LE;
}

namespace io_impl {

inline bool line_is_numeric(const std::string& line) {
  double v;
  const char* b = line.data();
  const char* e = b + line.size();
  while (b < e && std::isspace(static_cast<unsigned char>(*b))) ++b;
  const auto [ptr, ec] = std::from_chars(b, e, v);
  return ec == std::errc{} && ptr != b;
}

inline std::vector<double> read_csv(const std::string& bytes,
                                    const std::string& path) {
  std::vector<double> samples;
  std::istringstream in(bytes);
  std::string line;
  bool first = true;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string trimmed = line;
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back())))
      trimmed.pop_back();
    if (trimmed.empty()) continue;
    if (first && !line_is_numeric(trimmed)) {  // optional header line
      first = false;
      continue;
    }
    first = false;
    double v;
    const char* b = trimmed.data();
    const char* e = b + trimmed.size();
    while (b < e && std::isspace(static_cast<unsigned char>(*b))) ++b;
    const auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || ptr != e)
      throw DataError("bad CSV value at " + path + ":" + std::to_string(lineno) +
                      ": '" + trimmed + "'");
    samples.push_back(v);
  }
  return samples;
}

inline std::vector<double> read_raw_f64le(const std::string& bytes,
                                          const std::string& path) {
  if (bytes.size() % 8 != 0)
    throw MalformedHeader("raw float64 file size not a multiple of 8: " + path);
  const std::size_t n = bytes.size() / 8;
  std::vector<double> samples(n);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  for (std::size_t i = 0; i < n; ++i)
    samples[i] = detail::get_f64_le(p + 8 * i);
  return samples;
}

inline std::vector<double> read_mat(const std::string& bytes,
                                    const std::string& path,
                                    const std::string& var_hint) {
  const auto vars = mat5::scan_bytes(bytes, path);
  auto list_names = [&vars]() {
    std::string s;
    for (const auto& v : vars) {
      if (!s.empty()) s += ", ";
      s += v.name;
    }
    return s.empty() ? std::string("<none>") : s;
  };
  const mat5::VarInfo* chosen = nullptr;
  if (var_hint.empty()) {
    if (vars.size() != 1)
      throw VariableNotFound("no variable hint given and " + path +
                             " holds " + std::to_string(vars.size()) +
                             " variables: " + list_names());
    chosen = &vars.front();
  } else {
    for (const auto& v : vars) {
      if (v.name.find(var_hint) == std::string::npos) continue;
      if (chosen)
        throw VariableNotFound("hint '" + var_hint + "' is ambiguous in " +
                               path + "; candidates: " + list_names());
      chosen = &v;
    }
    if (!chosen)
      throw VariableNotFound("no variable matching '" + var_hint + "' in " +
                             path + "; available: " + list_names());
  }
  return mat5::read_data_bytes(bytes, *chosen, path);
}

}  // namespace io_impl

inline Signal load_signal(const std::filesystem::path& path, SignalFormat format,
                          double sample_rate,
                          const std::string& var_hint = {},
                          Channel channel = Channel::Unknown) {
  if (sample_rate <= 0)
    throw InvalidParams("sample_rate must be > 0 (files carry none)");
  const std::string bytes = detail::read_file_bytes(path);
  Signal sig;
  switch (format) {
    case SignalFormat::MatV5:
      sig.samples = io_impl::read_mat(bytes, path.string(), var_hint);
      break;
    case SignalFormat::Csv:
      sig.samples = io_impl::read_csv(bytes, path.string());
      break;
    case SignalFormat::RawF64LE:
      sig.samples = io_impl::read_raw_f64le(bytes, path.string());
      break;
  }
  if (sig.samples.empty())
    throw EmptySignal("no samples in " + path.string());
  sig.sample_rate = sample_rate;
  sig.source_id = path.string();
  sig.channel = channel;
  return sig;
}

inline void write_raw_f64le(const std::vector<double>& samples,
                            const std::filesystem::path& path) {
  std::string out;
  out.reserve(samples.size() * 8);
  for (double v : samples) detail::put_f64_le(out, v);
  detail::write_file_bytes(path, out);
}

inline void write_csv_signal(const std::vector<double>& samples,
                             const std::filesystem::path& path) {
  std::string out;
  char buf[40];
  for (double v : samples) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", v);
    out += buf;
  }
  detail::write_file_bytes(path, out);
}

// --- dataset manifest: `<path> = <label>,<channel>,<sample_rate>` lines ---

struct ManifestEntry {
  std::string path;  // relative to the manifest's directory
  std::string label;
  Channel channel = Channel::Unknown;
  double sample_rate = 0.0;
};

struct Manifest {
  std::filesystem::path dir;  // directory the paths are relative to
  std::vector<ManifestEntry> entries;
};

inline Manifest read_manifest(const std::filesystem::path& path) {
  const std::string bytes = detail::read_file_bytes(path);
  Manifest m;
  m.dir = path.parent_path();
  std::istringstream in(bytes);
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
      s.erase(s.begin());
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
      s.pop_back();
    return s;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw DataError("manifest line without '=' at " + path.string() + ":" +
                      std::to_string(lineno));
    ManifestEntry e;
    e.path = trim(t.substr(0, eq));
    const std::string rhs = trim(t.substr(eq + 1));
    const auto c1 = rhs.find(',');
    const auto c2 = rhs.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw DataError("manifest value must be label,channel,rate at " +
                      path.string() + ":" + std::to_string(lineno));
    e.label = trim(rhs.substr(0, c1));
    if (!is_canonical_label(e.label))
      throw DataError("manifest label '" + e.label +
                      "' is not one of the 14 canonical names (" +
                      path.string() + ":" + std::to_string(lineno) + ")");
    e.channel = channel_from_string(trim(rhs.substr(c1 + 1, c2 - c1 - 1)));
    const std::string rate = trim(rhs.substr(c2 + 1));
    try {
      e.sample_rate = std::stod(rate);
    } catch (const std::exception&) {
      throw DataError("bad sample rate '" + rate + "' at " + path.string() +
                      ":" + std::to_string(lineno));
    }
    if (e.sample_rate <= 0)
      throw DataError("sample rate must be > 0 at " + path.string() + ":" +
                      std::to_string(lineno));
    m.entries.push_back(std::move(e));
  }
  return m;
}

inline void write_manifest(const Manifest& m, const std::filesystem::path& path) {
  std::string out = "# faultvit dataset manifest: path = label,channel,sample_rate\n";
  char buf[64];
  for (const auto& e : m.entries) {
    std::snprintf(buf, sizeof(buf), "%.17g", e.sample_rate);
    out += e.path + " = " + e.label + "," + channel_name(e.channel) + "," + buf + "\n";
  }
  detail::write_file_bytes(path, out);
}

// CWRU MAT files name their vectors X###_DE_time / _FE_time / _BA_time.
inline std::string default_var_hint(Channel c, const std::string& fallback) {
  switch (c) {
    case Channel::DriveEnd: return "DE_time";
    case Channel::FanEnd: return "FE_time";
    case Channel::Base: return "BA_time";
    case Channel::Unknown: return fallback;
  }
  return fallback;
}

}  // namespace faultvit
