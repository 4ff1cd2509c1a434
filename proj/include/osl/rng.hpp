#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "osl/geometry.hpp"

namespace osl {

// splitmix64 step; used to derive independent stream seeds from
// (user seed, mode id, purpose tag) so results never depend on the order
// in which streams are consumed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) {
  std::uint64_t s = a;
  std::uint64_t r = splitmix64(s);
  s ^= b * 0x9e3779b97f4a7c15ULL;
  r ^= splitmix64(s);
  s ^= c * 0xc2b2ae3d27d4eb4fULL;
  r ^= splitmix64(s);
  return r;
}

// Deterministic uniform stream.  The bit-to-double mapping is fixed here
// rather than delegated to distribution objects, which the standard leaves
// implementation-defined; identical seeds must give identical doubles
// everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  std::vector<double> point_in_box(const Box& b) {
    std::vector<double> x(b.lo.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = uniform(b.lo[i], b.hi[i]);
    return x;
  }

  // Rejection sampling from the bounding box; fine for the low dimensions
  // handled here.
  std::vector<double> point_in_ball(const Ball& b) {
    std::vector<double> x(b.center.size());
    for (;;) {
      double s = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        double d = uniform(-b.radius, b.radius);
        x[i] = b.center[i] + d;
        s += d * d;
      }
      if (s <= b.radius * b.radius) return x;
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace osl
