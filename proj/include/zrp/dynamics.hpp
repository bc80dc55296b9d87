#pragma once

#include <utility>
#include <vector>

#include "zrp/config_space.hpp"
#include "zrp/model.hpp"

namespace zrp {

/// Enumerates the moves available from `counts`: visit(from, to, rate) with
/// rate g(counts[from]) * r(from, to). Fixed (from, to) order keeps every
/// consumer deterministic.
template <typename Visitor>
void for_each_move(const ZrpModel& model, const Configuration& counts, Visitor&& visit) {
  const int n = model.num_sites();
  for (int x = 0; x < n; ++x) {
    if (counts[x] <= 0) continue;
    const double g = departure_rate(counts[x], model.alpha);
    for (int y = 0; y < n; ++y) {
      if (y == x) continue;
      const double r = model.graph.rates(x, y);
      if (r > 0.0) visit(x, y, g * r);
    }
  }
}

inline double total_rate(const ZrpModel& model, const Configuration& counts) {
  double lambda = 0.0;
  for_each_move(model, counts, [&](int, int, double rate) { lambda += rate; });
  return lambda;
}

/// Materialized one-step transitions (target, rate).
inline std::vector<std::pair<Configuration, double>> jump_rates(const ZrpModel& model,
                                                                const Configuration& counts) {
  std::vector<std::pair<Configuration, double>> out;
  for_each_move(model, counts, [&](int x, int y, double rate) {
    out.emplace_back(apply_move(counts, x, y), rate);
  });
  return out;
}

}  // namespace zrp
