#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "zrp/config_space.hpp"
#include "zrp/limit_constants.hpp"
#include "zrp/model.hpp"

namespace zrp {

/// Stationary distribution of the N-particle process, fully enumerated.
/// weights[r] is the probability of the configuration with rank r;
/// normalizer is the partition sum N^alpha * sum_eta rel_measure^eta / a(eta).
struct MeasureTable {
  ConfigSpace space;
  Eigen::VectorXd weights;
  double normalizer;

  double mass(const std::vector<std::int64_t>& ranks) const {
    KahanSum s;
    for (auto r : ranks) s.add(weights[r]);
    return s.value();
  }
};

inline MeasureTable stationary_measure(const ZrpModel& model, int particles,
                                       std::int64_t size_cap = 50'000'000) {
  ConfigSpace space(particles, model.num_sites());
  if (space.size() > size_cap)
    throw SpaceTooLarge("state space has " + std::to_string(space.size()) +
                        " configurations, cap is " + std::to_string(size_cap));

  const int n = model.num_sites();
  Eigen::VectorXd log_rel(n);
  for (int x = 0; x < n; ++x) log_rel[x] = std::log(model.star.relative_measure[x]);
  std::vector<double> log_weight(particles + 1);
  for (int k = 0; k <= particles; ++k) log_weight[k] = log_occupancy_weight(k, model.alpha);

  Eigen::VectorXd w(space.size());
  KahanSum total;
  space.for_each([&](const Configuration& counts, std::int64_t rank) {
    double lw = 0.0;
    for (int x = 0; x < n; ++x) lw += counts[x] * log_rel[x] - log_weight[counts[x]];
    double v = std::exp(lw);
    w[rank] = v;
    total.add(v);
  });
  double z = std::exp(model.alpha * std::log(static_cast<double>(particles))) * total.value();
  w /= total.value();
  return MeasureTable{space, std::move(w), z};
}

struct TailMasses {
  Eigen::VectorXd condensed;  // per site: mass of {eta_x >= N - margin}
  double bulk;                // mass of {eta_x <= N - margin for all x}
};

/// Exact masses of the condensed tails {eta_x >= N - margin} and of the bulk
/// {eta_x <= N - margin for all x}. The two overlap on the threshold shell;
/// the complement of the union of the tails is the bulk at margin + 1.
inline TailMasses tail_masses(const MeasureTable& table, int margin) {
  const int n = table.space.num_sites();
  const int threshold = table.space.particles() - margin;
  std::vector<KahanSum> per_site(n);
  KahanSum bulk;
  table.space.for_each([&](const Configuration& counts, std::int64_t rank) {
    bool below = true;
    for (int x = 0; x < n; ++x) {
      if (counts[x] >= threshold) per_site[x].add(table.weights[rank]);
      if (counts[x] > threshold) below = false;
    }
    if (below) bulk.add(table.weights[rank]);
  });
  TailMasses out;
  out.condensed.resize(n);
  for (int x = 0; x < n; ++x) out.condensed[x] = per_site[x].value();
  out.bulk = bulk.value();
  return out;
}

/// Total-variation gap between the law of the configuration off `site`,
/// conditioned on >= N - margin particles at `site`, and the truncated
/// grand-canonical product. The product is kept as a sub-probability; its
/// missing mass counts toward the distance.
inline double conditional_vs_grand_canonical(const MeasureTable& table, const ZrpModel& model,
                                             const LimitConstants& lc, int site, int margin) {
  if (!model.star.is_max_site(site)) throw Error("conditioning site must carry maximal measure");
  const int n = model.num_sites();
  const int N = table.space.particles();

  std::vector<int> rest;
  for (int x = 0; x < n; ++x)
    if (x != site) rest.push_back(x);
  const int d = static_cast<int>(rest.size());

  std::vector<double> log_weight(margin + 1);
  for (int k = 0; k <= margin; ++k) log_weight[k] = log_occupancy_weight(k, model.alpha);

  // unnormalized conditional weight of the background zeta, and the product weight
  Configuration full(n);
  std::vector<double> cond, prod;
  KahanSum cond_total;
  for (int j = 0; j <= margin; ++j) {
    ConfigSpace sub(j, d);
    sub.for_each([&](const Configuration& zeta, std::int64_t) {
      full.setZero();
      full[site] = N - j;
      double lp = 0.0;
      for (int i = 0; i < d; ++i) {
        full[rest[i]] = zeta[i];
        lp += zeta[i] * std::log(model.star.relative_measure[rest[i]]) - log_weight[zeta[i]];
      }
      cond.push_back(table.weights[table.space.rank(full)]);
      cond_total.add(cond.back());
      double q = std::exp(lp);
      for (int i = 0; i < d; ++i) q /= lc.site_pf[rest[i]];
      prod.push_back(q);
    });
  }

  double tv = 0.0, prod_mass = 0.0;
  for (std::size_t i = 0; i < cond.size(); ++i) {
    tv += std::abs(cond[i] / cond_total.value() - prod[i]);
    prod_mass += prod[i];
  }
  return 0.5 * (tv + (1.0 - prod_mass));
}

}  // namespace zrp
