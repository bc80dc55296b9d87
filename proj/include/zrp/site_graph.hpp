#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "zrp/common.hpp"

namespace zrp {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Finite irreducible random walk, reversible with respect to `measure`.
/// `rates(x,y)` is the jump rate x -> y; the diagonal is zero.
struct SiteGraph {
  std::vector<std::string> names;
  Eigen::MatrixXd rates;
  Eigen::VectorXd measure;

  int num_sites() const { return static_cast<int>(rates.rows()); }

  // conductance of the edge {x,y}; symmetric by detailed balance
  double conductance(int x, int y) const { return measure[x] * rates(x, y); }
};

/// Sites where the reversible measure attains its maximum.
struct StarStructure {
  double max_measure = 0.0;            // M_star
  std::vector<int> max_sites;          // S_star, ascending
  Eigen::VectorXd relative_measure;    // m(x)/M_star, equals 1 on S_star

  int num_max_sites() const { return static_cast<int>(max_sites.size()); }
  bool is_max_site(int x) const { return relative_measure[x] == 1.0; }
};

namespace detail {

inline bool strongly_connected(const Eigen::MatrixXd& rates) {
  const int n = static_cast<int>(rates.rows());
  // DFS forward and along reversed edges; n is tiny
  auto reach = [&](bool transpose) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w = 0; w < n; ++w) {
        double r = transpose ? rates(w, v) : rates(v, w);
        if (r > 0.0 && !seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
      }
    }
    for (char s : seen)
      if (!s) return false;
    return true;
  };
  return reach(false) && reach(true);
}

}  // namespace detail

/// Stationary distribution of the walk with the given rates (global balance,
/// normalized). Requires irreducibility.
inline Eigen::VectorXd walk_stationary_measure(const Eigen::MatrixXd& rates) {
  const int n = static_cast<int>(rates.rows());
  if (!detail::strongly_connected(rates)) throw NotIrreducible("rate graph is not strongly connected");
  // m Q = 0 with the last equation replaced by normalization
  Eigen::MatrixXd system = rates.transpose();
  for (int x = 0; x < n; ++x) system(x, x) -= rates.row(x).sum();
  system.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs[n - 1] = 1.0;
  Eigen::VectorXd m = system.partialPivLu().solve(rhs);
  return m;
}

struct GraphSpec {
  std::vector<std::string> sites;
  Eigen::MatrixXd rates;
  Eigen::VectorXd measure;  // size 0 means: compute the stationary measure
};

/// Validates and assembles a SiteGraph. Detailed balance is required whether
/// the measure was supplied or computed; non-reversible inputs are rejected.
inline SiteGraph build_graph(const GraphSpec& spec, double tol = 1e-12) {
  const int n = static_cast<int>(spec.rates.rows());
  if (n < 2) throw InvalidMeasure("need at least two sites");
  if (spec.rates.cols() != n) throw InvalidMeasure("rate matrix must be square");
  for (int x = 0; x < n; ++x) {
    if (spec.rates(x, x) != 0.0) throw InvalidMeasure("diagonal rates must be zero");
    for (int y = 0; y < n; ++y)
      if (spec.rates(x, y) < 0.0) throw InvalidMeasure("negative rate");
  }
  if (!detail::strongly_connected(spec.rates))
    throw NotIrreducible("rate graph is not strongly connected");

  Eigen::VectorXd m = spec.measure;
  if (m.size() == 0) {
    m = walk_stationary_measure(spec.rates);
  } else {
    if (m.size() != n) throw InvalidMeasure("measure size mismatch");
    double total = m.sum();
    if (!(total > 0.0)) throw InvalidMeasure("measure must have positive mass");
    if (std::abs(total - 1.0) > 1e-12) m /= total;  // normalized on load
  }
  for (int x = 0; x < n; ++x)
    if (!(m[x] > 0.0)) throw InvalidMeasure("measure must be strictly positive");
  if (std::abs(m.sum() - 1.0) > 1e-12) throw InvalidMeasure("measure does not normalize");

  for (int x = 0; x < n; ++x)
    for (int y = x + 1; y < n; ++y) {
      double fwd = m[x] * spec.rates(x, y);
      double bwd = m[y] * spec.rates(y, x);
      double scale = std::max(std::abs(fwd), std::abs(bwd));
      if (scale > 0.0 && std::abs(fwd - bwd) > tol * scale)
        throw NotReversible("detailed balance fails on edge " + std::to_string(x) + "-" +
                            std::to_string(y));
      if ((fwd > 0.0) != (bwd > 0.0)) throw NotReversible("one-sided edge");
    }

  std::vector<std::string> names = spec.sites;
  if (names.empty())
    for (int x = 0; x < n; ++x) names.push_back(std::to_string(x));
  return SiteGraph{std::move(names), spec.rates, m};
}

/// Argmax structure of the measure. Ties within `tol` (relative) are all kept.
inline StarStructure star_structure(const SiteGraph& g, double tol = 1e-12) {
  StarStructure s;
  s.max_measure = g.measure.maxCoeff();
  s.relative_measure = g.measure / s.max_measure;
  for (int x = 0; x < g.num_sites(); ++x)
    if (g.measure[x] >= s.max_measure * (1.0 - tol)) {
      s.max_sites.push_back(x);
      s.relative_measure[x] = 1.0;  // exact on ties
    }
  return s;
}

/// Dirichlet energy (1/2) sum m(x) r(x,y) (f(y)-f(x))^2.
template <typename Derived>
double dirichlet_energy(const SiteGraph& g, const Eigen::MatrixBase<Derived>& f) {
  const int n = g.num_sites();
  double acc = 0.0;
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      if (g.rates(x, y) > 0.0) {
        double d = static_cast<double>(f[y] - f[x]);
        acc += 0.5 * g.measure[x] * g.rates(x, y) * d * d;
      }
  return acc;
}

namespace detail {

inline void check_disjoint_site_sets(int n, const std::vector<int>& a,
                                     const std::vector<int>& b) {
  if (a.empty() || b.empty()) throw OverlappingSets("boundary sets must be nonempty");
  std::vector<char> in(n, 0);
  for (int x : a) in.at(x) = 1;
  for (int x : b)
    if (in.at(x)) throw OverlappingSets("boundary sets intersect");
}

}  // namespace detail

/// Committor of A against B: the unique f with f=1 on A, f=0 on B, harmonic
/// elsewhere. Equals the probability of hitting A before B.
inline Eigen::VectorXd equilibrium_potential(const SiteGraph& g, const std::vector<int>& A,
                                             const std::vector<int>& B) {
  const int n = g.num_sites();
  detail::check_disjoint_site_sets(n, A, B);
  std::vector<int> role(n, -1);  // -1 interior, 1 in A, 0 in B
  for (int x : A) role[x] = 1;
  for (int x : B) role[x] = 0;

  std::vector<int> interior;
  for (int x = 0; x < n; ++x)
    if (role[x] < 0) interior.push_back(x);

  Eigen::VectorXd f(n);
  for (int x = 0; x < n; ++x) f[x] = role[x] == 1 ? 1.0 : 0.0;
  if (interior.empty()) return f;

  // conductance-weighted Laplacian on the interior block; SPD, dense solve
  const int k = static_cast<int>(interior.size());
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(k, k);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  for (int i = 0; i < k; ++i) {
    int x = interior[i];
    double diag = 0.0;
    for (int y = 0; y < n; ++y) {
      if (y == x) continue;
      double c = g.conductance(x, y);
      if (c <= 0.0) continue;
      diag += c;
      if (role[y] == 1) rhs[i] += c;
    }
    K(i, i) = diag;
  }
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (i != j) {
        double c = g.conductance(interior[i], interior[j]);
        if (c > 0.0) K(i, j) = -c;
      }
  Eigen::VectorXd sol = K.ldlt().solve(rhs);
  for (int i = 0; i < k; ++i) f[interior[i]] = sol[i];
  return f;
}

/// Capacity between disjoint site sets: Dirichlet energy of the committor.
inline double capacity_between(const SiteGraph& g, const std::vector<int>& A,
                               const std::vector<int>& B) {
  return dirichlet_energy(g, equilibrium_potential(g, A, B));
}

inline double capacity_between(const SiteGraph& g, int x, int y) {
  return capacity_between(g, std::vector<int>{x}, std::vector<int>{y});
}

}  // namespace zrp
