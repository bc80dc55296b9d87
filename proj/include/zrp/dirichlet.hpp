#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "zrp/dynamics.hpp"
#include "zrp/measure.hpp"

namespace zrp {

/// Dirichlet form of the N-particle chain restricted to the states where
/// `include` is true (pass no mask for the full form):
///   (1/2) sum_eta sum_moves mu(eta) g(eta_x) r(x,y) (F(sigma eta) - F(eta))^2.
inline double restricted_dirichlet(const MeasureTable& table, const ZrpModel& model,
                                   const Eigen::VectorXd& F,
                                   const std::vector<char>& include) {
  const ConfigSpace& space = table.space;
  KahanSum acc;
  Configuration moved;
  space.for_each([&](const Configuration& counts, std::int64_t rank) {
    if (!include.empty() && !include[rank]) return;
    const double mu = table.weights[rank];
    for_each_move(model, counts, [&](int x, int y, double rate) {
      moved = counts;
      --moved[x];
      ++moved[y];
      const double d = F[space.rank(moved)] - F[rank];
      acc.add(0.5 * mu * rate * d * d);
    });
  });
  return acc.value();
}

inline double dirichlet_form(const MeasureTable& table, const ZrpModel& model,
                             const Eigen::VectorXd& F) {
  return restricted_dirichlet(table, model, F, {});
}

}  // namespace zrp
