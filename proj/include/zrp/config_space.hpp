#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>

#include "zrp/common.hpp"

namespace zrp {

using Configuration = Eigen::VectorXi;

/// Exact binomial; throws SpaceTooLarge past the 64-bit range.
inline std::int64_t binomial(std::int64_t n, int k) {
  if (k < 0 || n < 0 || n < k) return 0;
  if (n - k < k) k = static_cast<int>(n - k);
  unsigned __int128 r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<unsigned __int128>(n - k + i) / static_cast<unsigned>(i);
    if (r > static_cast<unsigned __int128>(INT64_MAX)) throw SpaceTooLarge("binomial overflow");
  }
  return static_cast<std::int64_t>(r);
}

/// Occupancy vectors with a fixed particle total, indexed colexicographically.
/// Colex keeps the last coordinate slowest, so rank arithmetic for a single
/// particle move touches O(num_sites) binomials.
class ConfigSpace {
 public:
  ConfigSpace(int particles, int num_sites)
      : particles_(particles), num_sites_(num_sites) {
    if (particles < 0 || num_sites < 1) throw IndexOutOfRange("bad space parameters");
    size_ = binomial(particles + num_sites - 1, num_sites - 1);
  }

  int particles() const { return particles_; }
  int num_sites() const { return num_sites_; }
  std::int64_t size() const { return size_; }

  std::int64_t rank(const Configuration& counts) const {
    std::int64_t r = 0;
    std::int64_t total = particles_;
    for (int j = num_sites_ - 1; j >= 1; --j) {
      r += binomial(total + j, j) - binomial(total - counts[j] + j, j);
      total -= counts[j];
    }
    return r;
  }

  void unrank_into(std::int64_t index, Configuration& counts) const {
    if (index < 0 || index >= size_) throw IndexOutOfRange("rank out of range");
    counts.resize(num_sites_);
    std::int64_t total = particles_;
    for (int j = num_sites_ - 1; j >= 1; --j) {
      // largest v with #{configurations whose j-th count < v} <= index
      std::int64_t whole = binomial(total + j, j);
      std::int64_t lo = 0, hi = total;
      while (lo < hi) {
        std::int64_t mid = (lo + hi + 1) / 2;
        std::int64_t below = whole - binomial(total - mid + j, j);
        if (below <= index)
          lo = mid;
        else
          hi = mid - 1;
      }
      counts[j] = static_cast<int>(lo);
      index -= whole - binomial(total - lo + j, j);
      total -= lo;
    }
    counts[0] = static_cast<int>(total);
  }

  Configuration unrank(std::int64_t index) const {
    Configuration counts;
    unrank_into(index, counts);
    return counts;
  }

  /// Visits every configuration in rank order. The buffer is reused; do not
  /// hold references across iterations.
  template <typename Visitor>
  void for_each(Visitor&& visit) const {
    Configuration counts = Configuration::Zero(num_sites_);
    counts[0] = particles_;
    std::int64_t r = 0;
    for (;;) {
      visit(static_cast<const Configuration&>(counts), r);
      ++r;
      if (counts[0] > 0 && num_sites_ > 1) {
        --counts[0];
        ++counts[1];
        continue;
      }
      int j = 1;
      while (j < num_sites_ && counts[j] == 0) ++j;
      if (j >= num_sites_ - 1) return;  // all mass on the last site: done
      int rem = counts[j] - 1;
      counts[j] = 0;
      ++counts[j + 1];
      counts[0] = rem;
    }
  }

 private:
  int particles_;
  int num_sites_;
  std::int64_t size_;
};

/// sigma^{xy}: move one particle from `from` to `to`.
inline Configuration apply_move(const Configuration& counts, int from, int to) {
  if (from == to) throw IndexOutOfRange("move endpoints coincide");
  if (counts[from] <= 0) throw EmptySource("no particle to move");
  Configuration out = counts;
  --out[from];
  ++out[to];
  return out;
}

inline Configuration pure_configuration(const ConfigSpace& space, int site) {
  Configuration c = Configuration::Zero(space.num_sites());
  c[site] = space.particles();
  return c;
}

}  // namespace zrp
