#pragma once

#include <cstdint>

namespace texloss {

// Deterministic pseudo-random generator (SplitMix64).  The standard
// <random> distributions are implementation-defined, so results would not
// reproduce across toolchains; this generator plus Box-Muller gives the
// same stream everywhere.  All randomness in the library flows from an
// explicit seed through instances of this class.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed), have_cached_(false), cached_(0.0) {}

  // Derive an independent stream for a named sub-task, leaving this
  // generator untouched.
  Rng fork(uint64_t tag) const;

  uint64_t next_u64();

  // Uniform in [0, 1).
  double uniform01();

  // Uniform in [a, b).
  double uniform(double a, double b);

  // Integer uniform in [0, n) via rejection-free multiply-shift.
  uint64_t below(uint64_t n);

  // Standard normal via Box-Muller (pairs are cached).
  double normal();

 private:
  uint64_t state_;
  bool have_cached_;
  double cached_;
};

}  // namespace texloss
