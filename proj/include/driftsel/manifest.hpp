#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "driftsel/error.hpp"

namespace driftsel {

/// 64-bit FNV-1a over the file contents, as 16 lowercase hex digits.
inline std::string file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for checksumming");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 15];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = hex[h & 0xF];
  return out;
}

struct ManifestEntry {
  std::filesystem::path path;
  std::uintmax_t bytes = 0;
  std::string checksum;
};

struct RunManifest {
  std::string command;
  std::string config;  // resolved config, in config-file syntax
  std::uint64_t seed = 0;
  double seconds = 0.0;
  std::vector<ManifestEntry> outputs;

  void add_output(const std::filesystem::path& p) {
    outputs.push_back({p, std::filesystem::file_size(p), file_checksum(p)});
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["config"] = config;
    j["seed"] = seed;
    j["wall_seconds"] = seconds;
    j["outputs"] = nlohmann::json::array();
    for (const auto& o : outputs) {
      j["outputs"].push_back({{"path", o.path.generic_string()}, {"bytes", o.bytes}, {"fnv1a64", o.checksum}});
    }
    return j;
  }

  void write(const std::filesystem::path& p) const {
    std::ofstream out(p, std::ios::trunc);
    if (!out) throw IoError("cannot open " + p.string() + " for writing");
    out << to_json().dump(2) << '\n';
    if (!out) throw IoError("failed writing " + p.string());
  }
};

/// True when every listed output exists with its recorded checksum.
inline bool verify_manifest(const RunManifest& m) {
  for (const auto& o : m.outputs) {
    if (!std::filesystem::exists(o.path) || file_checksum(o.path) != o.checksum) return false;
  }
  return true;
}

}  // namespace driftsel
