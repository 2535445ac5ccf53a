#pragma once

#include <cstdint>

namespace vsim {

// Deterministic, splittable random generator (xoshiro256++ seeded through
// splitmix64). All simulation code draws from an explicit Rng so that results
// are reproducible bit-for-bit for a given seed, independent of the host
// standard library.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next();

  // Uniform on [0, 1), 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi);

  // Unbiased integer in [0, n); n must be > 0.
  uint64_t uniform_below(uint64_t n);

  // Standard normal via Box-Muller (two uniforms per draw, no caching).
  double normal();
  double normal(double mu, double sigma);

  // Poisson sample; exact for all lambda >= 0 (Knuth below 10, PTRD above).
  uint64_t poisson(double lambda);

  // Derive an independent child stream. fork(i) depends only on this
  // generator's seed and i, never on how much has been drawn, which is what
  // makes parallel per-sample generation deterministic.
  Rng fork(uint64_t index) const;

  uint64_t seed() const { return seed_; }

 private:
  uint64_t s_[4];
  uint64_t seed_;
};

// splitmix64 finalizer; also used to combine seeds with indices.
uint64_t hash_mix(uint64_t a, uint64_t b);

}  // namespace vsim
