#pragma once

#include <cstdint>

#include "zdiv/fft.hpp"

namespace zdiv {

/// Deterministic random source: splitmix64-seeded xoshiro256++ with a
/// Box-Muller normal generator. Fixed algorithm so that identical seeds
/// reproduce identical streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  double uniform01();              // in [0, 1)
  double normal();                 // standard normal
  cplx normal_complex(double variance);  // circular complex, E|z|^2 = variance
  std::uint32_t uniform_int(std::uint32_t bound);  // in [0, bound)

  /// Independent child stream, decorrelated from this one.
  Rng fork(std::uint64_t stream_id) const;

 private:
  std::uint64_t s_[4];
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
  std::uint64_t seed_;
};

}  // namespace zdiv
