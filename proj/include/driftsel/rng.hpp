#pragma once

#include <cstdint>
#include <random>

namespace driftsel {

// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of the stream addressed by (seed, replicate, path). Streams depend only
/// on their coordinates, so serial and parallel runs draw identical numbers.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t replicate,
                                    std::uint64_t path) noexcept {
  return mix64(mix64(mix64(seed) ^ (replicate + 0x632be59bd9b4e019ULL)) ^
               (path + 0x2545f4914f6cdd1dULL));
}

class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, std::uint64_t replicate, std::uint64_t path)
      : engine_(stream_seed(seed, replicate, path)) {}

  double operator()() { return normal_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace driftsel
