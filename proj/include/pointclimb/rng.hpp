#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace pointclimb {

// Seed/stream derivation: splitmix64 finalizer over (state, input) pairs.
// Used to derive independent named streams from one run seed so that adding
// a consumer never shifts another stream.
uint64_t mix(uint64_t a, uint64_t b);
uint64_t mix(uint64_t a, std::string_view tag);

// xoshiro256** by Blackman & Vigna, seeded through splitmix64.
// Portable and bit-reproducible across platforms; all derived draws
// (uniform doubles, bounded ints, normals) are built from next_u64 only,
// never from std::distribution objects.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();

  // Uniform in [0, 1).
  double next_double();

  // Uniform integer in [lo, hi], both ends inclusive.
  int next_int(int lo, int hi);

  // Standard normal via Box-Muller; second value of each pair is cached.
  double next_normal();

  // Uniform in [lo, hi).
  double next_range(double lo, double hi);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      int j = next_int(0, i);
      std::swap(v[static_cast<size_t>(i)], v[static_cast<size_t>(j)]);
    }
  }

  // k distinct indices drawn from [0, n), in draw order.
  std::vector<int> sample_without_replacement(int n, int k);

 private:
  uint64_t s_[4];
  bool have_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace pointclimb
