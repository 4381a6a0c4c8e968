#pragma once

#include <cmath>
#include <cstdint>

#include "polybubble/vec.hpp"

namespace polybubble {

// splitmix64: used both as a stream mixer and as the per-block generator
// seed schedule. Fixed algorithm so results are identical on every platform.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t mix_seed(uint64_t seed, uint64_t stream, uint64_t block) {
  uint64_t s = seed;
  splitmix64(s);
  s ^= 0x6a09e667f3bcc909ULL ^ (stream * 0x9e3779b97f4a7c15ULL);
  splitmix64(s);
  s ^= block * 0xd1342543de82ef95ULL + 0xbb67ae8584caa73bULL;
  splitmix64(s);
  return s;
}

// xoshiro256++, seeded via splitmix64. One instance per Monte Carlo block;
// block results are accumulated in block order, so estimates do not depend
// on the number of workers.
class BlockRng {
 public:
  BlockRng(uint64_t seed, uint64_t stream, uint64_t block) {
    uint64_t s = mix_seed(seed, stream, block);
    for (auto& w : s_) w = splitmix64(s);
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform in (0,1); never returns 0 so logs and inverses are safe
  double uniform() {
    const uint64_t r = next_u64() >> 11;
    return (static_cast<double>(r) + 0.5) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Box-Muller, explicit so the sequence is implementation-independent
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * M_PI * u2;
    spare_ = r * std::sin(th);
    have_spare_ = true;
    return r * std::cos(th);
  }

  Vec gaussian_vec(int n) {
    Vec g(n);
    for (int i = 0; i < n; ++i) g[i] = gaussian();
    return g;
  }

  // uniform direction on the unit sphere S^{n-1} in R^n
  Vec unit_vec(int n) {
    Vec g = gaussian_vec(n);
    double r = norm(g);
    while (r < 1e-300) {
      g = gaussian_vec(n);
      r = norm(g);
    }
    return g * (1.0 / r);
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  uint64_t s_[4];
  double spare_ = 0;
  bool have_spare_ = false;
};

}  // namespace polybubble
