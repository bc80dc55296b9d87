#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "zrp/dynamics.hpp"
#include "zrp/meta_partition.hpp"
#include "zrp/rng.hpp"

namespace zrp {

struct Horizon {
  double time = std::numeric_limits<double>::infinity();
  std::int64_t jumps = std::numeric_limits<std::int64_t>::max();

  static Horizon by_time(double t) { return Horizon{t, std::numeric_limits<std::int64_t>::max()}; }
  static Horizon by_jumps(std::int64_t j) {
    return Horizon{std::numeric_limits<double>::infinity(), j};
  }
};

/// Exact continuous-time realization (holding time Exp(lambda), jump chosen
/// proportionally to its rate). The visitor receives every sojourn as
/// visit(counts, t_enter, t_leave); the final sojourn is truncated at the
/// horizon. Identical (model, start, horizon, seed) give identical paths.
template <typename Visitor>
void simulate_stream(const ZrpModel& model, const Configuration& start, Horizon horizon,
                     std::uint64_t seed, Visitor&& visit) {
  if (!(horizon.time > 0.0) || horizon.jumps <= 0) throw HorizonZero("empty simulation horizon");
  if (std::isinf(horizon.time) && horizon.jumps == std::numeric_limits<std::int64_t>::max())
    throw HorizonZero("horizon must bound time or jump count");

  SplitMix64 rng(seed);
  Configuration counts = start;
  double t = 0.0;
  for (std::int64_t jump = 0; jump < horizon.jumps; ++jump) {
    const double lambda = total_rate(model, counts);
    const double hold = rng.exponential(lambda);
    if (t + hold >= horizon.time) {
      visit(static_cast<const Configuration&>(counts), t, horizon.time);
      return;
    }
    visit(static_cast<const Configuration&>(counts), t, t + hold);
    t += hold;
    const double u = rng.uniform01() * lambda;
    double acc = 0.0;
    int pick_x = -1, pick_y = -1;
    for_each_move(model, counts, [&](int x, int y, double rate) {
      if (pick_x >= 0) return;
      acc += rate;
      if (acc > u) {
        pick_x = x;
        pick_y = y;
      }
    });
    if (pick_x < 0) {  // rounding pushed u past the last slot
      for_each_move(model, counts, [&](int x, int y, double) {
        pick_x = x;
        pick_y = y;
      });
    }
    --counts[pick_x];
    ++counts[pick_y];
  }
  visit(static_cast<const Configuration&>(counts), t, t);  // state entered by the last jump
}

struct Trajectory {
  std::vector<std::pair<double, std::int64_t>> events;  // (entry time, rank)
  double total_time = 0.0;
  std::uint64_t seed = 0;
};

inline Trajectory simulate(const ZrpModel& model, const ConfigSpace& space,
                           const Configuration& start, Horizon horizon, std::uint64_t seed,
                           std::int64_t event_cap = 10'000'000) {
  Trajectory traj;
  traj.seed = seed;
  simulate_stream(model, start, horizon, seed,
                  [&](const Configuration& counts, double t_enter, double t_leave) {
                    if (static_cast<std::int64_t>(traj.events.size()) >= event_cap)
                      throw SpaceTooLarge("trajectory exceeds the event cap");
                    traj.events.emplace_back(t_enter, space.rank(counts));
                    traj.total_time = t_leave;
                  });
  return traj;
}

/// First entry time into A (by rank mask); nullopt when never hit.
inline std::optional<double> hitting_time(const Trajectory& traj,
                                          const std::vector<char>& in_a) {
  for (const auto& [t, rank] : traj.events)
    if (in_a[rank]) return t;
  return std::nullopt;
}

/// Streaming variant: first hit of `target` within the horizon.
template <typename Predicate>
std::optional<double> simulate_hitting_time(const ZrpModel& model, const Configuration& start,
                                            Predicate&& target, double max_time,
                                            std::uint64_t seed) {
  std::optional<double> hit;
  simulate_stream(model, start, Horizon::by_time(max_time), seed,
                  [&](const Configuration& counts, double t_enter, double) {
                    if (!hit && target(counts)) hit = t_enter;
                  });
  return hit;
}

/// Path watched on A only: time outside A is excised and the gaps closed up.
inline Trajectory trace_path(const Trajectory& traj, const std::vector<char>& in_a) {
  Trajectory out;
  out.seed = traj.seed;
  double clock = 0.0;
  bool seen = false;
  for (std::size_t i = 0; i < traj.events.size(); ++i) {
    const auto [t, rank] = traj.events[i];
    const double t_end = i + 1 < traj.events.size() ? traj.events[i + 1].first : traj.total_time;
    if (!in_a[rank]) continue;
    seen = true;
    if (out.events.empty() || out.events.back().second != rank)
      out.events.emplace_back(clock, rank);
    clock += t_end - t;
  }
  if (!seen) throw NeverInA("path never visits the trace set");
  out.total_time = clock;
  return out;
}

/// Coarse path of the condensate location.
struct CondensatePath {
  std::vector<std::pair<double, int>> events;  // (time, site)
  double total_time = 0.0;
  bool trace_mode = true;
};

/// Trace mode: watch the process on the wells and map each well to its site;
/// max mode: follow the most occupied site, moving only when strictly beaten.
inline CondensatePath condensate_path(const Trajectory& traj, const ConfigSpace& space,
                                      const MetaPartition& partition, bool trace_mode) {
  CondensatePath out;
  out.trace_mode = trace_mode;
  Configuration counts;
  if (trace_mode) {
    double clock = 0.0;
    int current = -2;
    for (std::size_t i = 0; i < traj.events.size(); ++i) {
      const auto [t, rank] = traj.events[i];
      const double t_end =
          i + 1 < traj.events.size() ? traj.events[i + 1].first : traj.total_time;
      space.unrank_into(rank, counts);
      const int w = partition.classify(counts);
      if (w < 0) continue;
      const int site = partition.well_site(w);
      if (out.events.empty() || out.events.back().second != site)
        out.events.emplace_back(clock, site);
      clock += t_end - t;
      current = site;
    }
    if (current == -2) throw NeverInWells("path never visits a well");
    out.total_time = clock;
  } else {
    space.unrank_into(traj.events.front().second, counts);
    int holder = 0;
    for (int z = 1; z < counts.size(); ++z)
      if (counts[z] > counts[holder]) holder = z;
    out.events.emplace_back(traj.events.front().first, holder);
    Configuration prev = counts;
    for (std::size_t i = 1; i < traj.events.size(); ++i) {
      space.unrank_into(traj.events[i].second, counts);
      int receiver = -1;
      for (int z = 0; z < counts.size(); ++z)
        if (counts[z] > prev[z]) receiver = z;
      if (receiver >= 0 && receiver != holder && counts[receiver] > counts[holder]) {
        holder = receiver;
        out.events.emplace_back(traj.events[i].first, holder);
      }
      prev = counts;
    }
    out.total_time = traj.total_time;
  }
  return out;
}

/// Streaming accumulator for the condensate's well-to-well motion: trace
/// occupation time per well, transition counts, and completed trace-clock
/// sojourn lengths.
class WellTransitionStats {
 public:
  explicit WellTransitionStats(const MetaPartition& partition)
      : partition_(&partition),
        counts_(Eigen::MatrixXd::Zero(partition.num_wells(), partition.num_wells())),
        time_in_(Eigen::VectorXd::Zero(partition.num_wells())),
        sojourns_(partition.num_wells()) {}

  void operator()(const Configuration& counts, double t_enter, double t_leave) {
    const int w = partition_->classify(counts);
    if (w < 0) return;  // trace clock frozen off the wells
    const double duration = t_leave - t_enter;
    if (current_ < 0) {
      current_ = w;
      sojourn_ = duration;
    } else if (w == current_) {
      sojourn_ += duration;
    } else {
      counts_(current_, w) += 1.0;
      time_in_[current_] += sojourn_;
      sojourns_[current_].push_back(sojourn_);
      current_ = w;
      sojourn_ = duration;
    }
  }

  void finalize() {
    if (current_ >= 0 && sojourn_ > 0.0) {
      time_in_[current_] += sojourn_;  // final incomplete sojourn counts as time only
      sojourn_ = 0.0;
    }
  }

  std::int64_t total_transitions() const { return static_cast<std::int64_t>(counts_.sum()); }
  const Eigen::MatrixXd& transition_counts() const { return counts_; }
  const Eigen::VectorXd& time_in_wells() const { return time_in_; }
  const std::vector<double>& sojourns(int w) const { return sojourns_[w]; }

 private:
  const MetaPartition* partition_;
  Eigen::MatrixXd counts_;
  Eigen::VectorXd time_in_;
  std::vector<std::vector<double>> sojourns_;
  int current_ = -1;
  double sojourn_ = 0.0;
};

/// Empirical generator of the coarse process on a rescaled clock, with
/// one-standard-error bands from Poisson transition counts.
struct EmpiricalGenerator {
  Eigen::MatrixXd rate;
  Eigen::MatrixXd se;
};

inline EmpiricalGenerator empirical_generator(const WellTransitionStats& stats,
                                              double time_rescale) {
  if (stats.total_transitions() < 2)
    throw TooFewTransitions("need at least two well transitions");
  const auto k = stats.transition_counts().rows();
  EmpiricalGenerator out;
  out.rate = Eigen::MatrixXd::Zero(k, k);
  out.se = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index x = 0; x < k; ++x) {
    const double t = stats.time_in_wells()[x] / time_rescale;
    if (t <= 0.0) continue;
    for (Eigen::Index y = 0; y < k; ++y) {
      if (x == y) continue;
      out.rate(x, y) = stats.transition_counts()(x, y) / t;
      out.se(x, y) = std::sqrt(stats.transition_counts()(x, y)) / t;
    }
  }
  return out;
}

}  // namespace zrp
