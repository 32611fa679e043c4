#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace framealign {

// Per-item random stream. Every scene / enrichment row gets its own engine
// derived from (seed, index, salt), so results never depend on which worker
// processed the item or in what order.
//
// The distributions below are implemented here rather than taken from
// <random> because the standard leaves their algorithms unspecified, and
// outputs must be reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t state) : engine_(state) {}

  static Rng derive(std::uint64_t seed, std::uint64_t index, std::uint64_t salt = 0);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi], inclusive. Unbiased (rejection sampling).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  // Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(n) - 1));
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

// FNV-1a; stable hash used to turn string ids into stream indices.
std::uint64_t stable_hash(std::string_view text);

}  // namespace framealign
