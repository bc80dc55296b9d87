#pragma once

#include <cmath>

#include "zrp/common.hpp"
#include "zrp/site_graph.hpp"

namespace zrp {

/// Stationary occupancy weight a(n) = n^alpha, a(0) = 1.
inline double log_occupancy_weight(int n, double alpha) {
  return n <= 1 ? 0.0 : alpha * std::log(static_cast<double>(n));
}

inline double occupancy_weight(int n, double alpha) {
  if (n <= 1) return 1.0;
  if (n <= 1000) return std::pow(static_cast<double>(n), alpha);
  return std::exp(log_occupancy_weight(n, alpha));
}

/// Departure rate g(n) = a(n)/a(n-1); g(0)=0, g(1)=1, decreasing to 1.
inline double departure_rate(int n, double alpha) {
  if (n <= 0) return 0.0;
  if (n == 1) return 1.0;
  return std::pow(static_cast<double>(n) / static_cast<double>(n - 1), alpha);
}

/// Zero range process on a reversible site graph.
struct ZrpModel {
  double alpha;
  SiteGraph graph;
  StarStructure star;

  int num_sites() const { return graph.num_sites(); }
};

inline ZrpModel make_model(double alpha, SiteGraph graph) {
  if (!(alpha > 1.0)) throw Error("alpha must exceed 1");
  StarStructure star = star_structure(graph);
  return ZrpModel{alpha, std::move(graph), std::move(star)};
}

}  // namespace zrp
