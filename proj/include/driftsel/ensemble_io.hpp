#pragma once

// Binary ensemble file:
//   offset  0  char[8]  magic "DRFTENS1"
//   offset  8  uint64   N (paths)
//   offset 16  uint64   n_steps
//   offset 24  float64  dt
//   offset 32  uint64   seed
//   offset 40  float64  values, N x (n_steps + 1), row-major (path-major)
// All fields little-endian.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "driftsel/csv.hpp"
#include "driftsel/error.hpp"
#include "driftsel/simulate.hpp"

namespace driftsel {

static_assert(std::endian::native == std::endian::little,
              "ensemble files are written in native little-endian layout");

inline constexpr std::array<char, 8> kEnsembleMagic{'D', 'R', 'F', 'T', 'E', 'N', 'S', '1'};
inline constexpr std::size_t kEnsembleHeaderBytes = 40;

inline void write_ensemble_binary(const PathEnsemble& ens, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const std::uint64_t n = ens.n_paths();
  const std::uint64_t steps = ens.n_steps();
  out.write(kEnsembleMagic.data(), kEnsembleMagic.size());
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(&steps), sizeof steps);
  out.write(reinterpret_cast<const char*>(&ens.dt), sizeof ens.dt);
  out.write(reinterpret_cast<const char*>(&ens.seed), sizeof ens.seed);
  out.write(reinterpret_cast<const char*>(ens.values.data()),
            static_cast<std::streamsize>(ens.values.size() * sizeof(double)));
  if (!out) throw IoError("failed writing " + path.string());
}

inline PathEnsemble read_ensemble_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::array<char, 8> magic{};
  std::uint64_t n = 0, steps = 0;
  PathEnsemble ens;
  in.read(magic.data(), magic.size());
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  in.read(reinterpret_cast<char*>(&steps), sizeof steps);
  in.read(reinterpret_cast<char*>(&ens.dt), sizeof ens.dt);
  in.read(reinterpret_cast<char*>(&ens.seed), sizeof ens.seed);
  if (!in || magic != kEnsembleMagic) throw IoError(path.string() + " is not an ensemble file");
  if (n == 0 || n > (1u << 24) || steps > (1u << 30)) {
    throw IoError(path.string() + " has an implausible header");
  }
  ens.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(steps + 1));
  in.read(reinterpret_cast<char*>(ens.values.data()),
          static_cast<std::streamsize>(ens.values.size() * sizeof(double)));
  if (!in) throw IoError(path.string() + " is truncated");
  return ens;
}

/// One row per path: path,x_0,x_1,...
inline void write_ensemble_csv(const PathEnsemble& ens, const std::filesystem::path& path) {
  CsvWriter csv(path);
  std::vector<std::string> header{"path"};
  for (std::size_t k = 0; k <= ens.n_steps(); ++k) header.push_back("x_" + std::to_string(k));
  csv.header(header);
  for (Eigen::Index i = 0; i < ens.values.rows(); ++i) {
    csv.field(static_cast<std::int64_t>(i));
    for (Eigen::Index k = 0; k < ens.values.cols(); ++k) csv.field(ens.values(i, k));
    csv.end_row();
  }
}

}  // namespace driftsel
