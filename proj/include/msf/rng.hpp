#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace msf {

/// splitmix64 finalizer; used to derive independent replica seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seed of replica `index` under `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Explicit random state: an engine plus a normal sampler.
/// The whole state (including the cached normal variate) round-trips
/// through serialize()/deserialize().
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  std::mt19937_64& engine() { return engine_; }

  std::string serialize() const;
  static Rng deserialize(const std::string& s);

  bool operator==(const Rng& o) const { return engine_ == o.engine_ && normal_ == o.normal_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace msf
