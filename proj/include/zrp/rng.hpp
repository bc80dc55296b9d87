#pragma once

#include <cmath>
#include <cstdint>

namespace zrp {

// SplitMix64. Small state, passes BigCrush, and unlike the std distributions
// its output is identical on every platform, which the determinism contract
// of the simulator relies on.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform on [0,1)
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform on (0,1], safe to pass through log()
  double uniform_pos() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

 private:
  std::uint64_t state_;
};

// Seed for replica `index` derived from a master seed. Streams are
// independent of scheduling order.
inline std::uint64_t child_seed(std::uint64_t master, std::uint64_t index) {
  SplitMix64 g(master ^ (0x9e3779b97f4a7c15ull * (index + 1)));
  g.next();
  return g.next();
}

}  // namespace zrp
