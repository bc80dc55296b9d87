#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "zrp/common.hpp"
#include "zrp/network.hpp"

namespace zrp {

struct SolveOptions {
  double tolerance = 1e-11;         // relative residual target
  int max_iterations = 100'000;     // conjugate-gradient cap per pass
  int dense_limit = 2'000;          // largest interior solved directly
  int refinement_rounds = 4;
  std::int64_t state_cap = 5'000'000;
};

struct HarmonicSolution {
  Eigen::VectorXd values;  // full space; 1 on A, 0 on B
  double residual = 0.0;   // relative residual of the interior system
  int iterations = 0;
  std::string method;
};

struct CapacityResult {
  double capacity;
  HarmonicSolution solution;
};

namespace detail {

struct InteriorSystem {
  std::vector<std::int64_t> states;           // interior ranks in ascending order
  std::vector<std::int64_t> index_of;         // rank -> interior index, -1 elsewhere
  Eigen::VectorXd diag;                       // total incident conductance
  Eigen::VectorXd rhs;                        // flow from A
};

inline InteriorSystem interior_system(const JumpNetwork& net, const std::vector<char>& role) {
  InteriorSystem sys;
  sys.index_of.assign(net.num_states, -1);
  for (std::int64_t s = 0; s < net.num_states; ++s)
    if (role[s] == 0) {
      sys.index_of[s] = static_cast<std::int64_t>(sys.states.size());
      sys.states.push_back(s);
    }
  const auto k = static_cast<Eigen::Index>(sys.states.size());
  sys.diag = Eigen::VectorXd::Zero(k);
  sys.rhs = Eigen::VectorXd::Zero(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const std::int64_t s = sys.states[i];
    for (std::int64_t e = net.offsets[s]; e < net.offsets[s + 1]; ++e) {
      sys.diag[i] += net.conductances[e];
      if (role[net.targets[e]] == 1) sys.rhs[i] += net.conductances[e];
    }
  }
  return sys;
}

// y = K x on the interior block (diag minus interior-to-interior conductances)
inline void apply_interior(const JumpNetwork& net, const InteriorSystem& sys,
                           const Eigen::VectorXd& x, Eigen::VectorXd& y) {
  const auto k = static_cast<Eigen::Index>(sys.states.size());
  for (Eigen::Index i = 0; i < k; ++i) {
    const std::int64_t s = sys.states[i];
    double acc = sys.diag[i] * x[i];
    for (std::int64_t e = net.offsets[s]; e < net.offsets[s + 1]; ++e) {
      const std::int64_t j = sys.index_of[net.targets[e]];
      if (j >= 0) acc -= net.conductances[e] * x[j];
    }
    y[i] = acc;
  }
}

// residual b - K x accumulated in extended precision
inline double interior_residual(const JumpNetwork& net, const InteriorSystem& sys,
                                const Eigen::VectorXd& x, Eigen::VectorXd& r) {
  const auto k = static_cast<Eigen::Index>(sys.states.size());
  long double norm_r = 0.0L;
  for (Eigen::Index i = 0; i < k; ++i) {
    const std::int64_t s = sys.states[i];
    long double acc = static_cast<long double>(sys.rhs[i]) -
                      static_cast<long double>(sys.diag[i]) * x[i];
    for (std::int64_t e = net.offsets[s]; e < net.offsets[s + 1]; ++e) {
      const std::int64_t j = sys.index_of[net.targets[e]];
      if (j >= 0) acc += static_cast<long double>(net.conductances[e]) * x[j];
    }
    r[i] = static_cast<double>(acc);
    norm_r += acc * acc;
  }
  return static_cast<double>(std::sqrt(norm_r));
}

// Jacobi-preconditioned conjugate gradients; returns iterations used.
inline int conjugate_gradient(const JumpNetwork& net, const InteriorSystem& sys,
                              const Eigen::VectorXd& rhs, Eigen::VectorXd& x, double rel_tol,
                              int max_iterations) {
  const auto k = static_cast<Eigen::Index>(sys.states.size());
  Eigen::VectorXd inv_diag = sys.diag.cwiseInverse();
  Eigen::VectorXd r = rhs, z(k), p(k), Ap(k);
  x.setZero();
  const double target = rel_tol * rhs.norm();
  if (rhs.norm() == 0.0) return 0;
  z = inv_diag.cwiseProduct(r);
  p = z;
  double rz = r.dot(z);
  int it = 0;
  for (; it < max_iterations; ++it) {
    if (r.norm() <= target) break;
    apply_interior(net, sys, p, Ap);
    const double p_ap = p.dot(Ap);
    if (!(p_ap > 0.0)) break;  // lost positive definiteness to rounding
    const double a = rz / p_ap;
    x += a * p;
    r -= a * Ap;
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  return it;
}

// Exact elimination for two-site spaces, where the state graph is the path
// 0..N and each maximal interior run is tridiagonal.
inline void solve_two_site_runs(const JumpNetwork& net, const std::vector<char>& role,
                                Eigen::VectorXd& h) {
  const std::int64_t n = net.num_states;
  auto edge_conductance = [&](std::int64_t s, std::int64_t t) {
    for (std::int64_t e = net.offsets[s]; e < net.offsets[s + 1]; ++e)
      if (net.targets[e] == t) return net.conductances[e];
    return 0.0;
  };
  std::int64_t s = 0;
  while (s < n) {
    if (role[s] != 0) {
      ++s;
      continue;
    }
    std::int64_t a = s, b = s;
    while (b + 1 < n && role[b + 1] == 0) ++b;
    const std::int64_t len = b - a + 1;
    // Dirichlet data just outside the run, when present
    const bool has_left = a > 0, has_right = b + 1 < n;
    std::vector<double> sub(len, 0.0), diag(len, 0.0), sup(len, 0.0), rhs(len, 0.0);
    for (std::int64_t i = 0; i < len; ++i) {
      const std::int64_t state = a + i;
      const double cl = state > 0 ? edge_conductance(state, state - 1) : 0.0;
      const double cr = state + 1 < n ? edge_conductance(state, state + 1) : 0.0;
      diag[i] = cl + cr;
      if (i > 0) sub[i] = -cl;
      if (i + 1 < len) sup[i] = -cr;
      if (i == 0 && has_left) rhs[i] += cl * h[a - 1];
      if (i == len - 1 && has_right) rhs[i] += cr * h[b + 1];
    }
    for (std::int64_t i = 1; i < len; ++i) {  // Thomas sweep
      const double m = sub[i] / diag[i - 1];
      diag[i] -= m * sup[i - 1];
      rhs[i] -= m * rhs[i - 1];
    }
    h[b] = rhs[len - 1] / diag[len - 1];
    for (std::int64_t i = len - 2; i >= 0; --i) h[a + i] = (rhs[i] - sup[i] * h[a + i + 1]) / diag[i];
    s = b + 1;
  }
}

}  // namespace detail

inline void check_disjoint_ranks(const std::vector<std::int64_t>& A,
                                 const std::vector<std::int64_t>& B, std::int64_t size) {
  if (A.empty() || B.empty()) throw OverlappingSets("boundary sets must be nonempty");
  std::vector<char> seen(size, 0);
  for (auto r : A) {
    if (r < 0 || r >= size) throw IndexOutOfRange("boundary rank out of range");
    seen[r] = 1;
  }
  for (auto r : B) {
    if (r < 0 || r >= size) throw IndexOutOfRange("boundary rank out of range");
    if (seen[r]) throw OverlappingSets("boundary sets intersect");
  }
}

/// Committor of the N-particle chain: 1 on A, 0 on B, harmonic elsewhere.
inline HarmonicSolution solve_committor(const ZrpModel& model, const JumpNetwork& net,
                                        const std::vector<std::int64_t>& A,
                                        const std::vector<std::int64_t>& B,
                                        const SolveOptions& opts = {}) {
  check_disjoint_ranks(A, B, net.num_states);
  std::vector<char> role(net.num_states, 0);
  for (auto r : A) role[r] = 1;
  for (auto r : B) role[r] = 2;

  HarmonicSolution out;
  out.values = Eigen::VectorXd::Zero(net.num_states);
  for (auto r : A) out.values[r] = 1.0;

  detail::InteriorSystem sys = detail::interior_system(net, role);
  const auto k = static_cast<Eigen::Index>(sys.states.size());
  if (k == 0) {
    out.method = "boundary-only";
    return out;
  }

  Eigen::VectorXd x(k);
  if (model.num_sites() == 2) {
    detail::solve_two_site_runs(net, role, out.values);
    for (Eigen::Index i = 0; i < k; ++i) x[i] = out.values[sys.states[i]];
    out.method = "tridiagonal";
  } else if (k <= opts.dense_limit) {
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      const std::int64_t s = sys.states[i];
      K(i, i) = sys.diag[i];
      for (std::int64_t e = net.offsets[s]; e < net.offsets[s + 1]; ++e) {
        const std::int64_t j = sys.index_of[net.targets[e]];
        if (j >= 0) K(i, j) -= net.conductances[e];
      }
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(K);
    x = ldlt.solve(sys.rhs);
    Eigen::VectorXd r(k);
    detail::interior_residual(net, sys, x, r);
    x += ldlt.solve(r);  // one refinement pass
    out.method = "dense";
  } else {
    x.setZero();
    Eigen::VectorXd r = sys.rhs, delta(k);
    const double b_norm = sys.rhs.norm();
    int used = 0;
    for (int round = 0; round < opts.refinement_rounds; ++round) {
      used += detail::conjugate_gradient(net, sys, r, delta, opts.tolerance, opts.max_iterations);
      x += delta;
      const double r_norm = detail::interior_residual(net, sys, x, r);
      if (r_norm <= opts.tolerance * b_norm) break;
    }
    out.iterations = used;
    out.method = "cg";
  }

  Eigen::VectorXd r(k);
  const double r_norm = detail::interior_residual(net, sys, x, r);
  const double b_norm = sys.rhs.norm();
  out.residual = b_norm > 0.0 ? r_norm / b_norm : r_norm;
  if (out.residual > opts.tolerance && out.method == "cg")
    throw SolverDiverged("relative residual " + std::to_string(out.residual));
  for (Eigen::Index i = 0; i < k; ++i) out.values[sys.states[i]] = x[i];
  return out;
}

/// Dirichlet energy evaluated on the network (each undirected edge counted once).
inline double network_energy(const JumpNetwork& net, const Eigen::VectorXd& F) {
  KahanSum acc;
  for (std::int64_t s = 0; s < net.num_states; ++s)
    for (std::int64_t e = net.offsets[s]; e < net.offsets[s + 1]; ++e) {
      const double d = F[net.targets[e]] - F[s];
      acc.add(0.5 * net.conductances[e] * d * d);
    }
  return acc.value();
}

/// Capacity between disjoint configuration sets with its equilibrium potential.
inline CapacityResult capacity_between(const ZrpModel& model, const JumpNetwork& net,
                                       const std::vector<std::int64_t>& A,
                                       const std::vector<std::int64_t>& B,
                                       const SolveOptions& opts = {}) {
  HarmonicSolution h = solve_committor(model, net, A, B, opts);
  return CapacityResult{network_energy(net, h.values), std::move(h)};
}

inline CapacityResult capacity_between(const MeasureTable& table, const ZrpModel& model,
                                       const std::vector<std::int64_t>& A,
                                       const std::vector<std::int64_t>& B,
                                       const SolveOptions& opts = {}) {
  JumpNetwork net = build_network(table, model, opts.state_cap);
  return capacity_between(model, net, A, B, opts);
}

}  // namespace zrp
