#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "zrp/dynamics.hpp"
#include "zrp/measure.hpp"

namespace zrp {

/// One-particle-move graph of the N-particle chain in CSR form. Rates are the
/// exact directed jump rates; conductances mu(eta) g r are evaluated once per
/// undirected edge (from its lower-rank endpoint) so the stored matrix is
/// symmetric to the last bit.
struct JumpNetwork {
  std::int64_t num_states = 0;
  std::vector<std::int64_t> offsets;
  std::vector<std::int64_t> targets;
  std::vector<double> rates;
  std::vector<double> conductances;
  Eigen::VectorXd total_rates;  // lambda(eta)

  std::int64_t degree(std::int64_t s) const { return offsets[s + 1] - offsets[s]; }
};

inline JumpNetwork build_network(const MeasureTable& table, const ZrpModel& model,
                                 std::int64_t state_cap = 5'000'000) {
  const ConfigSpace& space = table.space;
  if (space.size() > state_cap)
    throw SpaceTooLarge("network over " + std::to_string(space.size()) + " states");

  JumpNetwork net;
  net.num_states = space.size();
  net.offsets.assign(space.size() + 1, 0);

  space.for_each([&](const Configuration& counts, std::int64_t rank) {
    std::int64_t deg = 0;
    for_each_move(model, counts, [&](int, int, double) { ++deg; });
    net.offsets[rank + 1] = deg;
  });
  for (std::int64_t s = 0; s < space.size(); ++s) net.offsets[s + 1] += net.offsets[s];

  const std::int64_t num_edges = net.offsets.back();
  net.targets.resize(num_edges);
  net.rates.resize(num_edges);
  net.conductances.resize(num_edges);
  net.total_rates = Eigen::VectorXd::Zero(space.size());

  Configuration moved;
  space.for_each([&](const Configuration& counts, std::int64_t rank) {
    std::int64_t slot = net.offsets[rank];
    double lambda = 0.0;
    for_each_move(model, counts, [&](int x, int y, double rate) {
      moved = counts;
      --moved[x];
      ++moved[y];
      const std::int64_t target = space.rank(moved);
      double c;
      if (rank < target) {
        c = table.weights[rank] * rate;
      } else {
        // reverse move gives the identical value analytically; evaluating it
        // there keeps the conductance matrix exactly symmetric
        const double back = departure_rate(moved[y], model.alpha) * model.graph.rates(y, x);
        c = table.weights[target] * back;
      }
      net.targets[slot] = target;
      net.rates[slot] = rate;
      net.conductances[slot] = c;
      lambda += rate;
      ++slot;
    });
    net.total_rates[rank] = lambda;
  });
  return net;
}

}  // namespace zrp
