#pragma once

#include <cstdint>
#include <vector>

namespace twiqrnn {

// Seeded xoshiro256** generator with hand-rolled distributions, so that
// sampled values do not depend on the standard library's <random>
// implementation. Reproducible given the same seed on any platform.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();

  // Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  bool bernoulli(double p);

  // Index sampled from an (approximately normalized) probability vector.
  int discrete(const std::vector<double>& probs);

  // Independent child stream; distinct salts give distinct streams.
  Rng fork(uint64_t salt) const;

  uint64_t seed() const { return seed_; }

 private:
  uint64_t state_[4];
  uint64_t seed_;
};

}  // namespace twiqrnn
