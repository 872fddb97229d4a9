#include "texloss/rng.hpp"

#include <cmath>

namespace texloss {

namespace {

constexpr uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

uint64_t mix(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

uint64_t Rng::next_u64() {
  state_ += kGamma;
  return mix(state_);
}

Rng Rng::fork(uint64_t tag) const {
  return Rng(mix(state_ + kGamma * (tag + 1)));
}

double Rng::uniform01() {
  // 53 high bits -> double in [0, 1).
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double a, double b) { return a + (b - a) * uniform01(); }

uint64_t Rng::below(uint64_t n) {
  if (n == 0) return 0;
  return next_u64() % n;
}

double Rng::normal() {
  if (have_cached_) {
    have_cached_ = false;
    return cached_;
  }
  // Box-Muller on two fresh uniforms; u1 is kept away from zero.
  double u1;
  do {
    u1 = uniform01();
  } while (u1 <= 0.0);
  double u2 = uniform01();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 6.283185307179586476925286766559 * u2;
  cached_ = r * std::sin(a);
  have_cached_ = true;
  return r * std::cos(a);
}

}  // namespace texloss
