#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace mmwsim {

// splitmix64, used both as a seeding mixer and as a stateless hash.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

inline std::uint64_t hash_str(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Maps a 64-bit word to a double in [0,1).
inline double u64_to_unit(std::uint64_t v) {
  return static_cast<double>(v >> 11) * 0x1.0p-53;
}

// xoshiro256++ generator. Distribution transforms are written out by hand so
// that streams are bit-identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t t = seed;
    for (auto& w : s_) {
      t = splitmix64(t);
      w = t;
    }
    have_gauss_ = false;
  }

  // Named sub-stream: one independent generator per (purpose, index), so
  // enabling one randomness source never perturbs another.
  Rng(std::uint64_t master, std::string_view purpose, std::uint64_t index = 0)
      : Rng(hash_combine(hash_combine(master, hash_str(purpose)), index)) {}

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // [0,1)
  double uniform01() { return u64_to_unit(next_u64()); }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // [0,n)
  std::uint64_t uniform_int(std::uint64_t n) {
    return n == 0 ? 0 : next_u64() % n;
  }

  double exponential(double mean) {
    // 1-u in (0,1] keeps log() finite.
    return -mean * std::log(1.0 - uniform01());
  }

  double normal(double mean = 0.0, double sigma = 1.0) {
    if (have_gauss_) {
      have_gauss_ = false;
      return mean + sigma * cached_gauss_;
    }
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    cached_gauss_ = r * std::sin(theta);
    have_gauss_ = true;
    return mean + sigma * r * std::cos(theta);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
  double cached_gauss_ = 0.0;
  bool have_gauss_;
};

// Single standard normal draw from a stateless hash; used for reproducible
// position-keyed effects such as shadowing.
inline double hashed_normal(std::uint64_t key) {
  const double u1 = 1.0 - u64_to_unit(splitmix64(key));
  const double u2 = u64_to_unit(splitmix64(key ^ 0xa5a5a5a5a5a5a5a5ULL));
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace mmwsim
