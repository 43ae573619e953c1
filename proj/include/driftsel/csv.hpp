#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "driftsel/error.hpp"

namespace driftsel {

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path) : path_(path), out_(path, std::ios::trunc) {
    if (!out_) throw IoError("cannot open " + path.string() + " for writing");
  }

  ~CsvWriter() { out_.flush(); }

  void header(const std::vector<std::string>& names) {
    for (const auto& n : names) field(n);
    end_row();
  }

  void field(double v) { put(format_double(v)); }
  void field(std::int64_t v) { put(std::to_string(v)); }
  void field(int v) { put(std::to_string(v)); }
  void field(std::size_t v) { put(std::to_string(v)); }
  void field(std::string_view s) { put(std::string(s)); }
  void field(const char* s) { put(s); }
  void field(bool b) { put(b ? "1" : "0"); }

  void end_row() {
    out_ << '\n';
    first_ = true;
    if (!out_) throw IoError("failed writing " + path_.string());
  }

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  void put(const std::string& s) {
    if (!first_) out_ << ',';
    out_ << s;
    first_ = false;
  }

  std::filesystem::path path_;
  std::ofstream out_;
  bool first_ = true;
};

}  // namespace driftsel
