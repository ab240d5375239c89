#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace srisk {

/// Derives a child seed from `master` by hashing each tag of `path` in turn
/// (SplitMix64 finalizer). Distinct paths give statistically independent
/// streams, so one master seed can feed many disjoint batches.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

/// Deterministic standard-normal stream.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double next() { return dist_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace srisk
