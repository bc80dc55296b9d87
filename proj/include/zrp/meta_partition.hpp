#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "zrp/config_space.hpp"
#include "zrp/measure.hpp"
#include "zrp/model.hpp"

namespace zrp {

/// Scales defining the wells: a condensate may miss at most `margin`
/// particles, and each non-maximal site may hold at most its background cap.
struct WellScales {
  int margin;
  Eigen::VectorXi background_cap;  // indexed by site; consulted off the max sites only
};

inline WellScales default_scales(int particles, const ZrpModel& model) {
  const double kappa = model.num_sites();
  const double exponent =
      model.star.num_max_sites() == 2 ? 1.0 / (kappa - 0.5) : 1.0 / (kappa - 1.0);
  double raw = std::pow(static_cast<double>(particles), exponent);
  int margin = static_cast<int>(std::ceil(raw * (1.0 - 1e-9)));
  if (2 * margin >= particles)
    throw DegenerateScale("margin " + std::to_string(margin) + " too large for N = " +
                          std::to_string(particles));
  Eigen::VectorXi cap = Eigen::VectorXi::Constant(model.num_sites(), -1);
  for (int z = 0; z < model.num_sites(); ++z)
    if (!model.star.is_max_site(z))
      cap[z] = static_cast<int>(
          std::ceil(-std::log(static_cast<double>(margin)) /
                    std::log(model.star.relative_measure[z]) * (1.0 - 1e-9)));
  return WellScales{margin, cap};
}

/// The wells around each maximal site plus the transition region between
/// them. Wells are pairwise disjoint once 2 * margin < N.
class MetaPartition {
 public:
  MetaPartition(const ZrpModel& model, const ConfigSpace& space, WellScales scales)
      : space_(space),
        scales_(std::move(scales)),
        max_sites_(model.star.max_sites),
        is_max_(model.num_sites(), 0) {
    const int N = space.particles();
    if (2 * scales_.margin >= N) throw WellsOverlap("wells overlap: 2 * margin >= N");
    for (int x : max_sites_) is_max_[x] = 1;

    // enumerate each well by the number of particles away from its site
    const int n = model.num_sites();
    std::vector<int> rest;
    well_ranks_.resize(max_sites_.size());
    for (std::size_t w = 0; w < max_sites_.size(); ++w) {
      int x = max_sites_[w];
      rest.clear();
      for (int z = 0; z < n; ++z)
        if (z != x) rest.push_back(z);
      Configuration full(n);
      for (int j = 0; j <= scales_.margin; ++j) {
        ConfigSpace sub(j, n - 1);
        sub.for_each([&](const Configuration& zeta, std::int64_t) {
          for (int i = 0; i < n - 1; ++i) {
            int z = rest[i];
            if (!is_max_[z] && zeta[i] > scales_.background_cap[z]) return;
            full[z] = zeta[i];
          }
          full[x] = N - j;
          well_ranks_[w].push_back(space_.rank(full));
        });
      }
    }
  }

  int num_wells() const { return static_cast<int>(max_sites_.size()); }
  int well_site(int w) const { return max_sites_[w]; }
  int margin() const { return scales_.margin; }
  const Eigen::VectorXi& background_cap() const { return scales_.background_cap; }
  const ConfigSpace& space() const { return space_; }
  const std::vector<std::int64_t>& well_ranks(int w) const { return well_ranks_[w]; }

  /// Well index of a configuration, or -1 for the transition region.
  int classify(const Configuration& counts) const {
    const int threshold = space_.particles() - scales_.margin;
    int w = -1;
    for (std::size_t i = 0; i < max_sites_.size(); ++i)
      if (counts[max_sites_[i]] >= threshold) {
        w = static_cast<int>(i);
        break;
      }
    if (w < 0) return -1;
    for (int z = 0; z < counts.size(); ++z)
      if (!is_max_[z] && counts[z] > scales_.background_cap[z]) return -1;
    return w;
  }

  /// Ranks of the union of the listed wells.
  std::vector<std::int64_t> union_ranks(const std::vector<int>& wells) const {
    std::vector<std::int64_t> out;
    for (int w : wells)
      out.insert(out.end(), well_ranks_[w].begin(), well_ranks_[w].end());
    return out;
  }

  /// Ranks of every well except `w`.
  std::vector<std::int64_t> other_wells_ranks(int w) const {
    std::vector<std::int64_t> out;
    for (int v = 0; v < num_wells(); ++v)
      if (v != w) out.insert(out.end(), well_ranks_[v].begin(), well_ranks_[v].end());
    return out;
  }

 private:
  ConfigSpace space_;
  WellScales scales_;
  std::vector<int> max_sites_;
  std::vector<char> is_max_;
  std::vector<std::vector<std::int64_t>> well_ranks_;
};

inline MetaPartition meta_partition(const ZrpModel& model, const ConfigSpace& space,
                                    const WellScales& scales) {
  return MetaPartition(model, space, scales);
}

inline double well_mass(const MeasureTable& table, const MetaPartition& partition, int w) {
  return table.mass(partition.well_ranks(w));
}

/// Mass of the transition region.
inline double transition_mass(const MeasureTable& table, const MetaPartition& partition) {
  KahanSum wells;
  for (int w = 0; w < partition.num_wells(); ++w)
    wells.add(well_mass(table, partition, w));
  return 1.0 - wells.value();
}

}  // namespace zrp
