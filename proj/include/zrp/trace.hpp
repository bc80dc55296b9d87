#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "zrp/harmonic.hpp"
#include "zrp/meta_partition.hpp"
#include "zrp/network.hpp"

namespace zrp {

/// Jump rates of the trace process on A. R(eta, xi) = lambda(eta) times the
/// probability that the first A-state visited after leaving eta is xi;
/// excursions returning to eta fold into the holding time.
struct TraceRates {
  std::vector<std::int64_t> ranks;  // states of A, ascending
  Eigen::MatrixXd rates;            // R(i, j) between ranks[i] -> ranks[j]
};

inline TraceRates trace_rates(const ZrpModel& model, const JumpNetwork& net,
                              std::vector<std::int64_t> A,
                              std::int64_t dense_cap = 20'000) {
  if (A.empty()) throw OverlappingSets("trace set must be nonempty");
  std::sort(A.begin(), A.end());
  A.erase(std::unique(A.begin(), A.end()), A.end());

  std::vector<std::int64_t> a_index(net.num_states, -1);
  for (std::size_t i = 0; i < A.size(); ++i) a_index[A[i]] = static_cast<std::int64_t>(i);

  std::vector<std::int64_t> outside;
  for (std::int64_t s = 0; s < net.num_states; ++s)
    if (a_index[s] < 0) outside.push_back(s);

  const auto na = static_cast<Eigen::Index>(A.size());
  const auto nu = static_cast<Eigen::Index>(outside.size());
  TraceRates out;
  out.ranks = A;
  out.rates = Eigen::MatrixXd::Zero(na, na);

  // absorption distribution over A from every outside state, one dense solve
  Eigen::MatrixXd absorb;  // nu x na
  if (nu > 0) {
    if (nu > dense_cap) throw SpaceTooLarge("trace complement too large for a dense solve");
    std::vector<std::int64_t> u_index(net.num_states, -1);
    for (Eigen::Index i = 0; i < nu; ++i) u_index[outside[i]] = i;

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nu, nu);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nu, na);
    for (Eigen::Index i = 0; i < nu; ++i) {
      const std::int64_t s = outside[i];
      M(i, i) = net.total_rates[s];
      for (std::int64_t e = net.offsets[s]; e < net.offsets[s + 1]; ++e) {
        const std::int64_t t = net.targets[e];
        if (a_index[t] >= 0)
          rhs(i, a_index[t]) += net.rates[e];
        else
          M(i, u_index[t]) -= net.rates[e];
      }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    absorb = lu.solve(rhs);
    absorb += lu.solve(rhs - M * absorb);  // refinement

    for (Eigen::Index i = 0; i < na; ++i) {
      const std::int64_t s = A[i];
      for (std::int64_t e = net.offsets[s]; e < net.offsets[s + 1]; ++e) {
        const std::int64_t t = net.targets[e];
        if (a_index[t] >= 0) {
          if (a_index[t] != i) out.rates(i, a_index[t]) += net.rates[e];
        } else {
          const Eigen::Index u = static_cast<Eigen::Index>(
              std::distance(outside.begin(),
                            std::lower_bound(outside.begin(), outside.end(), t)));
          for (Eigen::Index j = 0; j < na; ++j)
            if (j != i) out.rates(i, j) += net.rates[e] * absorb(u, j);
        }
      }
    }
  } else {
    for (Eigen::Index i = 0; i < na; ++i) {
      const std::int64_t s = A[i];
      for (std::int64_t e = net.offsets[s]; e < net.offsets[s + 1]; ++e) {
        const Eigen::Index j = a_index[net.targets[e]];
        if (j != i) out.rates(i, j) += net.rates[e];
      }
    }
  }
  return out;
}

/// Inter-well rates of the condensate, by two routes: averaging the exact
/// trace rates over the wells, and the half-sum capacity identity. The two
/// must agree; max_rel_gap reports how well they do.
struct WellRates {
  Eigen::MatrixXd via_trace;     // indexed by well
  Eigen::MatrixXd via_capacity;
  Eigen::VectorXd well_mass;
  double max_rel_gap = 0.0;
  bool trace_computed = false;
};

inline Eigen::MatrixXd well_rates_via_capacity(const MeasureTable& table, const ZrpModel& model,
                                               const JumpNetwork& net,
                                               const MetaPartition& partition,
                                               const SolveOptions& opts = {}) {
  const int k = partition.num_wells();
  if (k < 2) throw InsufficientWells("need at least two wells");
  Eigen::VectorXd mass(k);
  for (int w = 0; w < k; ++w) mass[w] = well_mass(table, partition, w);

  Eigen::VectorXd cap_one_vs_rest(k);
  for (int w = 0; w < k; ++w)
    cap_one_vs_rest[w] =
        capacity_between(model, net, partition.well_ranks(w), partition.other_wells_ranks(w), opts)
            .capacity;

  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(k, k);
  for (int x = 0; x < k; ++x)
    for (int y = x + 1; y < k; ++y) {
      double half_sum;
      if (k == 2) {
        half_sum = cap_one_vs_rest[x];  // both one-vs-rest capacities coincide
      } else {
        std::vector<std::int64_t> pair = partition.union_ranks({x, y});
        std::vector<int> rest;
        for (int w = 0; w < k; ++w)
          if (w != x && w != y) rest.push_back(w);
        const double cap_pair =
            capacity_between(model, net, pair, partition.union_ranks(rest), opts).capacity;
        half_sum = 0.5 * (cap_one_vs_rest[x] + cap_one_vs_rest[y] - cap_pair);
      }
      r(x, y) = half_sum / mass[x];
      r(y, x) = half_sum / mass[y];
    }
  return r;
}

inline WellRates well_jump_rates(const MeasureTable& table, const ZrpModel& model,
                                 const JumpNetwork& net, const MetaPartition& partition,
                                 bool with_trace = true, const SolveOptions& opts = {}) {
  const int k = partition.num_wells();
  if (k < 2) throw InsufficientWells("need at least two wells");

  WellRates out;
  out.well_mass.resize(k);
  for (int w = 0; w < k; ++w) out.well_mass[w] = well_mass(table, partition, w);
  out.via_capacity = well_rates_via_capacity(table, model, net, partition, opts);

  if (with_trace) {
    std::vector<int> all(k);
    for (int w = 0; w < k; ++w) all[w] = w;
    std::vector<std::int64_t> union_ranks = partition.union_ranks(all);
    TraceRates tr = trace_rates(model, net, union_ranks);

    std::vector<int> well_of_state(tr.ranks.size());
    Configuration counts;
    for (std::size_t i = 0; i < tr.ranks.size(); ++i) {
      partition.space().unrank_into(tr.ranks[i], counts);
      well_of_state[i] = partition.classify(counts);
    }
    out.via_trace = Eigen::MatrixXd::Zero(k, k);
    for (std::size_t i = 0; i < tr.ranks.size(); ++i)
      for (std::size_t j = 0; j < tr.ranks.size(); ++j) {
        const int wx = well_of_state[i], wy = well_of_state[j];
        if (wx != wy && tr.rates(i, j) > 0.0)
          out.via_trace(wx, wy) += table.weights[tr.ranks[i]] * tr.rates(i, j);
      }
    for (int x = 0; x < k; ++x) out.via_trace.row(x) /= out.well_mass[x];
    out.trace_computed = true;

    for (int x = 0; x < k; ++x)
      for (int y = 0; y < k; ++y)
        if (x != y) {
          const double a = out.via_trace(x, y), b = out.via_capacity(x, y);
          const double scale = std::max(std::abs(a), std::abs(b));
          if (scale > 0.0) out.max_rel_gap = std::max(out.max_rel_gap, std::abs(a - b) / scale);
        }
  }
  return out;
}

}  // namespace zrp
