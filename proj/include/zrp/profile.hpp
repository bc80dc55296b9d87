#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "zrp/limit_constants.hpp"
#include "zrp/measure.hpp"
#include "zrp/meta_partition.hpp"
#include "zrp/model.hpp"

namespace zrp {

/// Optimal discrete crossing profile between two condensed states when k
/// particles sit elsewhere. `values[i]` is G at occupancy start+i; `gap` is
/// the minimal value of the crossing quadratic form
///   sum_i (G(i+1) - G(i))^2 / (a(i) a(N-1-k-i))^{-1},
/// i.e. the reciprocal of sum_i a(i) a(N-1-k-i) over the crossing range.
struct DiscreteProfile {
  int start;               // G(start) = 0
  Eigen::VectorXd values;  // up to G(N - margin) = 1
  double gap;
};

inline DiscreteProfile optimal_profile(double alpha, int particles, int k, int margin) {
  if (k < 0 || k > margin || 2 * margin >= particles)
    throw DegenerateRange("need 0 <= k <= margin < N/2");
  const int lo = margin - k, hi = particles - margin;  // profile defined on [lo, hi]
  KahanSum norm;
  for (int i = lo; i <= hi - 1; ++i)
    norm.add(occupancy_weight(i, alpha) * occupancy_weight(particles - 1 - k - i, alpha));

  DiscreteProfile out;
  out.start = lo;
  out.gap = 1.0 / norm.value();
  out.values.resize(hi - lo + 1);
  double g = 0.0;
  out.values[0] = 0.0;
  for (int i = lo; i <= hi - 1; ++i) {
    g += occupancy_weight(i, alpha) * occupancy_weight(particles - 1 - k - i, alpha) * out.gap;
    out.values[i - lo + 1] = g;
  }
  return out;
}

/// Energy of an arbitrary profile in the crossing quadratic form; the optimal
/// profile attains `gap` exactly.
inline double profile_energy(double alpha, int particles, int k, int start,
                             const Eigen::VectorXd& values) {
  KahanSum acc;
  for (Eigen::Index i = 0; i + 1 < values.size(); ++i) {
    const int occ = start + static_cast<int>(i);
    const double d = values[i + 1] - values[i];
    acc.add(d * d / (occupancy_weight(occ, alpha) *
                     occupancy_weight(particles - 1 - k - occ, alpha)));
  }
  return acc.value();
}

/// Rigorous finite-N lower bound on the capacity between the wells labelled
/// by s1_star and the remaining wells, assembled tube by tube. The tube width
/// is half the well margin so that configurations shared by two tubes lie
/// deep inside a well, where admissible functions are constant; without that
/// the tube sums could double-count.
struct LowerBoundComparator {
  double value = 0.0;   // lower bound on Cap_N
  int tube_margin = 0;  // particles allowed off the tube pair
  int tube_cap = -1;    // background cap inside tubes (-1: none)
};

inline LowerBoundComparator lower_capacity_bound(const MeasureTable& table,
                                                 const ZrpModel& model,
                                                 const WellScales& scales,
                                                 const std::vector<int>& s1_star) {
  const int N = table.space.particles();
  const int n = model.num_sites();
  LowerBoundComparator out;
  out.tube_margin = (scales.margin - 1) / 2;
  bool has_background = false;
  int min_cap = 0;
  for (int z = 0; z < n; ++z)
    if (!model.star.is_max_site(z)) {
      min_cap = has_background ? std::min(min_cap, scales.background_cap[z])
                               : scales.background_cap[z];
      has_background = true;
    }
  out.tube_cap = has_background ? min_cap - 1 : -1;
  if (out.tube_margin < 1 || (has_background && out.tube_cap < 1)) return out;  // trivial bound

  std::vector<char> in_s1(n, 0);
  for (int x : s1_star) in_s1[x] = 1;
  std::vector<int> s2_star;
  for (int y : model.star.max_sites)
    if (!in_s1[y]) s2_star.push_back(y);

  // gap values depend on the background count only
  std::vector<double> gap(out.tube_margin);
  for (int k = 0; k < out.tube_margin; ++k)
    gap[k] = optimal_profile(model.alpha, N, k, scales.margin).gap;

  const double n_alpha = std::exp(model.alpha * std::log(static_cast<double>(N)));
  KahanSum total;
  for (int x : s1_star)
    for (int y : s2_star) {
      std::vector<int> rest;
      for (int z = 0; z < n; ++z)
        if (z != x && z != y) rest.push_back(z);
      KahanSum tube_sum;
      for (int k = 0; k < out.tube_margin; ++k) {
        KahanSum background;  // sum over capped background configurations of size k
        ConfigSpace sub(k, std::max<int>(1, static_cast<int>(rest.size())));
        if (rest.empty()) {
          if (k == 0) background.add(1.0);
        } else {
          sub.for_each([&](const Configuration& zeta, std::int64_t) {
            double lw = 0.0;
            for (std::size_t i = 0; i < rest.size(); ++i) {
              const int z = rest[i];
              if (!model.star.is_max_site(z) && zeta[i] > out.tube_cap - 1) return;
              lw += zeta[i] * std::log(model.star.relative_measure[z]) -
                    log_occupancy_weight(zeta[i], model.alpha);
            }
            background.add(std::exp(lw));
          });
        }
        tube_sum.add(gap[k] * background.value());
      }
      total.add(capacity_between(model.graph, x, y) * tube_sum.value());
    }
  out.value = total.value() * n_alpha / (table.normalizer * model.star.max_measure);
  return out;
}

}  // namespace zrp
