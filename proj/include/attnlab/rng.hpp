#pragma once

#include <cstdint>

namespace attnlab {

// Splittable, seeded random stream. Every stochastic routine in the library
// takes an explicit stream so results are reproducible regardless of call
// order or scheduling: a stream is fully determined by (seed, stream_id).
//
// Generator is xoshiro256++ seeded through splitmix64. Normal deviates use the
// Box-Muller transform computed in-library (not std::normal_distribution,
// whose output is implementation-defined).
class RngStream {
 public:
  RngStream(uint64_t seed, uint64_t stream_id);

  uint64_t next_u64();

  // Uniform on [0, 1).
  double uniform();
  // Uniform on (0, 1); safe as a log() argument.
  double uniform_open();
  // Standard normal.
  double normal();
  // Uniform integer in [0, n); n >= 1. Rejection sampling, no modulo bias.
  int uniform_int(int n);

  // Derives an independent child stream. split(a) != split(b) for a != b.
  RngStream split(uint64_t child_id) const;

 private:
  RngStream() = default;

  uint64_t state_[4];
  uint64_t seed_ = 0;
  uint64_t stream_id_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace attnlab
