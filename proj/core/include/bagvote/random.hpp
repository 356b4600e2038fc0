#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace bagvote {

// Seeded random stream with platform-independent output.
//
// The engine and std::seed_seq are fully specified by the standard, but the
// std:: distributions are not, so the conversions to doubles, normals and
// bounded integers are done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  // Stream keyed by several integers, e.g. (master seed, bag index).
  Rng(std::initializer_list<std::uint64_t> key);

  std::uint64_t next() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal by the Marsaglia polar method.
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  // Uniform integer in [0, bound), unbiased.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

// Uniform random subset of {0..n-1} of size k, sorted ascending.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng);

// In-place Fisher-Yates shuffle.
void shuffle(std::vector<std::size_t>& values, Rng& rng);

}  // namespace bagvote
