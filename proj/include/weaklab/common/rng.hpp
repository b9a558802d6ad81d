#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace weaklab::rng {

// Seed derivation. Every random stream in the code base is identified by
// (master seed, stream id, index) and its seed is a splitmix64 hash of the
// triple, so results do not depend on how work is split across threads.
std::uint64_t mix(std::uint64_t x) noexcept;
std::uint64_t derive(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0) noexcept;

// Stream ids used by the library.
enum Stream : std::uint64_t {
  kInitialPositions = 1,
  kMeasurement = 2,
  kSynthetic = 3,
};

// Small counter-style generator for per-experiment streams, where seeding a
// Mersenne twister a million times would dominate the run time.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() noexcept;

 private:
  std::uint64_t state_;
};

inline std::mt19937_64 make_engine(std::uint64_t master, std::uint64_t stream,
                                   std::uint64_t index = 0) {
  return std::mt19937_64(derive(master, stream, index));
}

}  // namespace weaklab::rng
