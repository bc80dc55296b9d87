#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "zrp/harmonic.hpp"
#include "zrp/meta_partition.hpp"
#include "zrp/simulate.hpp"

namespace zrp {

/// Thermalization probability: worst case over pairs (eta, xi) in the well of
/// reaching xi before any other well. Exact, one committor solve per target.
struct ThermalizationResult {
  double min_probability = 1.0;
  std::int64_t worst_start = -1;
  std::int64_t worst_target = -1;
};

inline ThermalizationResult thermalization_probability(const ZrpModel& model,
                                                       const JumpNetwork& net,
                                                       const MetaPartition& partition, int well,
                                                       const SolveOptions& opts = {}) {
  const auto& ranks = partition.well_ranks(well);
  const std::vector<std::int64_t> others = partition.other_wells_ranks(well);
  if (others.empty()) throw InsufficientWells("need a competing well");
  ThermalizationResult out;
  for (std::int64_t target : ranks) {
    HarmonicSolution h = solve_committor(model, net, {target}, others, opts);
    for (std::int64_t start : ranks) {
      const double p = h.values[start];
      if (p < out.min_probability) {
        out.min_probability = p;
        out.worst_start = start;
        out.worst_target = target;
      }
    }
  }
  return out;
}

/// Monte Carlo occupation of the transition region over a rescaled window:
/// estimates E[ time spent outside the wells during [0, T] on the N^(1+alpha)
/// clock ], maximized over a spread of starting states in the well.
struct TransitionOccupation {
  double estimate = 0.0;  // max over starts of the mean occupation
  double std_error = 0.0;
  std::int64_t worst_start = -1;
};

inline TransitionOccupation transition_occupation(const ZrpModel& model,
                                                  const MetaPartition& partition, int well,
                                                  double window, int replicas,
                                                  std::uint64_t seed, int max_starts = 4) {
  const ConfigSpace& space = partition.space();
  const double rescale =
      std::pow(static_cast<double>(space.particles()), 1.0 + model.alpha);
  const auto& ranks = partition.well_ranks(well);

  std::vector<std::int64_t> starts;
  starts.push_back(ranks.back());  // deepest state (pure configuration) ranks last or first
  starts.push_back(ranks.front());
  for (int i = 1; i + 1 < max_starts && ranks.size() > 2; ++i)
    starts.push_back(ranks[i * ranks.size() / max_starts]);
  std::sort(starts.begin(), starts.end());
  starts.erase(std::unique(starts.begin(), starts.end()), starts.end());

  TransitionOccupation out;
  Configuration start_counts;
  std::uint64_t stream = 0;
  for (std::int64_t start : starts) {
    space.unrank_into(start, start_counts);
    double sum = 0.0, sum_sq = 0.0;
    for (int rep = 0; rep < replicas; ++rep) {
      double off_well = 0.0;
      simulate_stream(model, start_counts, Horizon::by_time(window * rescale),
                      child_seed(seed, stream++),
                      [&](const Configuration& counts, double t0, double t1) {
                        if (partition.classify(counts) < 0) off_well += t1 - t0;
                      });
      const double value = off_well / rescale;
      sum += value;
      sum_sq += value * value;
    }
    const double mean = sum / replicas;
    const double var = std::max(0.0, sum_sq / replicas - mean * mean);
    const double se = std::sqrt(var / replicas);
    if (mean > out.estimate) {
      out.estimate = mean;
      out.std_error = se;
      out.worst_start = start;
    }
  }
  return out;
}

}  // namespace zrp
