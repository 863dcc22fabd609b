#include "attnlab/rng.hpp"

#include <cmath>

namespace attnlab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

uint64_t splitmix64(uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

}  // namespace

RngStream::RngStream(uint64_t seed, uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  // Fold both identifiers through splitmix64 so nearby (seed, stream) pairs
  // land far apart in state space.
  uint64_t x = seed;
  uint64_t a = splitmix64(x);
  x ^= stream_id * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL;
  state_[0] = splitmix64(x) ^ a;
  state_[1] = splitmix64(x);
  state_[2] = splitmix64(x);
  state_[3] = splitmix64(x);
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
}

uint64_t RngStream::next_u64() {
  // xoshiro256++
  const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_open() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform_open()));
  const double theta = kTwoPi * uniform();
  cached_normal_ = r * std::sin(theta);
  has_cached_normal_ = true;
  return r * std::cos(theta);
}

int RngStream::uniform_int(int n) {
  const uint64_t bound = static_cast<uint64_t>(n);
  const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  uint64_t v = next_u64();
  while (v >= limit) v = next_u64();
  return static_cast<int>(v % bound);
}

RngStream RngStream::split(uint64_t child_id) const {
  // Children are keyed off the parent identity, not its current position, so
  // splitting is order-independent.
  uint64_t x = seed_ ^ rotl(stream_id_, 32);
  const uint64_t mixed = splitmix64(x);
  return RngStream(mixed, child_id);
}

}  // namespace attnlab
