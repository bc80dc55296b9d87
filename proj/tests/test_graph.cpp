#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracle.hpp"
#include "zrp/experiments.hpp"
#include "zrp/site_graph.hpp"

using namespace zrp;

namespace {

SiteGraph two_state() { return preset_graph("two_site_uniform"); }
SiteGraph ring3() { return preset_graph("three_ring_uniform"); }

}  // namespace

TEST_CASE("build_graph validates inputs") {
  Eigen::MatrixXd r(2, 2);
  r << 0, 1, 1, 0;
  SiteGraph g = build_graph(GraphSpec{{}, r, Eigen::Vector2d(0.5, 0.5)});
  CHECK(g.measure[0] == doctest::Approx(0.5));

  Eigen::MatrixXd bad(2, 2);
  bad << 0, 2, 1, 0;
  CHECK_THROWS_AS(build_graph(GraphSpec{{}, bad, Eigen::Vector2d(0.5, 0.5)}), NotReversible);

  Eigen::MatrixXd oneway = Eigen::MatrixXd::Zero(2, 2);
  oneway(0, 1) = 1.0;
  CHECK_THROWS_AS(build_graph(GraphSpec{{}, oneway, Eigen::VectorXd()}), NotIrreducible);

  CHECK_THROWS_AS(build_graph(GraphSpec{{}, r, Eigen::Vector2d(1.0, 0.0)}), InvalidMeasure);
  CHECK_THROWS_AS(build_graph(GraphSpec{{}, r, Eigen::Vector2d(-1.0, 2.0)}), InvalidMeasure);
}

TEST_CASE("computed stationary measure of the three-ring is uniform") {
  SiteGraph g = ring3();
  for (int x = 0; x < 3; ++x) CHECK(g.measure[x] == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("star structure") {
  SUBCASE("uniform: every site is maximal") {
    StarStructure s = star_structure(ring3());
    CHECK(s.num_max_sites() == 3);
    CHECK(s.max_measure == doctest::Approx(1.0 / 3));
  }
  SUBCASE("unique maximum") {
    SiteGraph g = preset_graph("three_sites_nonuniform");  // m = (0.5, 0.3, 0.2)
    StarStructure s = star_structure(g);
    CHECK(s.max_sites == std::vector<int>{0});
    CHECK(s.max_measure == doctest::Approx(0.5));
    CHECK(s.relative_measure[1] == doctest::Approx(0.6));
    CHECK(s.relative_measure[2] == doctest::Approx(0.4));
  }
  SUBCASE("two-way tie") {
    StarStructure s = star_structure(preset_graph("three_sites_two_max"));
    CHECK(s.num_max_sites() == 2);
    CHECK(s.relative_measure[0] == 1.0);
    CHECK(s.relative_measure[1] == 1.0);
  }
}

TEST_CASE("walk Dirichlet energy") {
  CHECK(dirichlet_energy(two_state(), Eigen::Vector2d(0.7, 0.7)) == doctest::Approx(0.0));
  CHECK(dirichlet_energy(two_state(), Eigen::Vector2d(1, 0)) == doctest::Approx(0.5));
  CHECK(dirichlet_energy(ring3(), Eigen::Vector3d(1.0, 0.0, 0.5)) == doctest::Approx(0.5));
}

TEST_CASE("equilibrium potentials on small graphs") {
  Eigen::VectorXd f = equilibrium_potential(two_state(), {0}, {1});
  CHECK(f[0] == 1.0);
  CHECK(f[1] == 0.0);

  f = equilibrium_potential(ring3(), {0}, {1});
  CHECK(f[2] == doctest::Approx(0.5).epsilon(1e-12));

  SiteGraph ring4 = preset_graph("four_ring_uniform");
  f = equilibrium_potential(ring4, {0}, {2});
  CHECK(f[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f[3] == doctest::Approx(0.5).epsilon(1e-12));

  CHECK_THROWS_AS(equilibrium_potential(ring3(), {0, 1}, {1}), OverlappingSets);
}

TEST_CASE("walk capacities") {
  CHECK(capacity_between(two_state(), 0, 1) == doctest::Approx(0.5));
  CHECK(capacity_between(ring3(), 0, 1) == doctest::Approx(0.5).epsilon(1e-12));

  // series chain 0-1-2, all rates 1, uniform measure: 1/(3+3)
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(3, 3);
  r(0, 1) = r(1, 0) = r(1, 2) = r(2, 1) = 1.0;
  SiteGraph chain = build_graph(GraphSpec{{}, r, Eigen::Vector3d(1, 1, 1) / 3.0});
  CHECK(capacity_between(chain, 0, 2) == doctest::Approx(1.0 / 6).epsilon(1e-12));
}

TEST_CASE("capacity symmetry, monotonicity and the variational inequality") {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + static_cast<int>(rng.next() % 4);  // 3..6 sites
    SiteGraph g = testing::random_reversible_graph(n, rng);

    CHECK(capacity_between(g, {0}, {1}) ==
          doctest::Approx(capacity_between(g, {1}, {0})).epsilon(1e-12));

    if (n >= 4) {
      const double small = capacity_between(g, {0}, {2});
      const double bigger = capacity_between(g, std::vector<int>{0, 1}, std::vector<int>{2});
      CHECK(bigger >= small * (1.0 - 1e-12));
    }

    // any admissible f dominates the capacity
    Eigen::VectorXd f(n);
    for (int i = 0; i < n; ++i) f[i] = rng.uniform01();
    f[0] = 1.0;
    f[1] = 0.0;
    CHECK(dirichlet_energy(g, f) >= capacity_between(g, {0}, {1}) * (1.0 - 1e-12));
  }
}

TEST_CASE("committor agrees with the absorbing jump-chain solve") {
  // the site-graph solver against the same construction done on a one-particle
  // configuration space, where sites and configurations coincide
  SplitMix64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3 + static_cast<int>(rng.next() % 4);
    SiteGraph g = testing::random_reversible_graph(n, rng);
    ZrpModel model = make_model(2.0, g);
    ConfigSpace space(1, n);  // single particle: rank = site index of the particle
    Configuration c = Configuration::Zero(n);
    std::vector<std::int64_t> a, b;
    c[0] = 1;
    a.push_back(space.rank(c));
    c.setZero();
    c[1] = 1;
    b.push_back(space.rank(c));
    Eigen::VectorXd oracle = testing::absorbing_hitting_probability(model, space, a, b);

    Eigen::VectorXd f = equilibrium_potential(g, {0}, {1});
    for (int w = 0; w < n; ++w) {
      c.setZero();
      c[w] = 1;
      CHECK(std::abs(f[w] - oracle[space.rank(c)]) <= 1e-10);
    }
  }
}

TEST_CASE("escape-probability identity for the walk capacity") {
  SplitMix64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3 + static_cast<int>(rng.next() % 4);
    SiteGraph g = testing::random_reversible_graph(n, rng);
    const double cap = capacity_between(g, 0, 1);
    const double esc = testing::capacity_via_escape(g, 0, 1);
    CHECK(cap == doctest::Approx(esc).epsilon(1e-8));
  }
}
