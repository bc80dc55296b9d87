#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracle.hpp"
#include "zrp/dirichlet.hpp"
#include "zrp/experiments.hpp"
#include "zrp/harmonic.hpp"
#include "zrp/profile.hpp"
#include "zrp/trace.hpp"

using namespace zrp;

namespace {

ZrpModel two_site(double alpha) { return make_model(alpha, preset_graph("two_site_uniform")); }

std::vector<std::int64_t> single(const ConfigSpace& space, int site) {
  return {space.rank(pure_configuration(space, site))};
}

}  // namespace

TEST_CASE("Dirichlet form of the particle chain") {
  ZrpModel model = two_site(2.0);
  MeasureTable table = stationary_measure(model, 2);

  CHECK(dirichlet_form(table, model, Eigen::VectorXd::Constant(3, 0.3)) == doctest::Approx(0.0));

  Eigen::VectorXd indicator = Eigen::VectorXd::Zero(3);
  indicator[0] = 1.0;  // (2,0)
  CHECK(dirichlet_form(table, model, indicator) == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(dirichlet_form(table, model, Eigen::VectorXd::Ones(3) - indicator) ==
        doctest::Approx(2.0 / 3).epsilon(1e-12));

  SUBCASE("restriction is additive over a partition") {
    MeasureTable t = stationary_measure(model, 12);
    SplitMix64 rng(5);
    Eigen::VectorXd f(t.space.size());
    for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = rng.uniform01();
    std::vector<char> low(t.space.size(), 0), high(t.space.size(), 0);
    for (std::int64_t r = 0; r < t.space.size(); ++r) (r % 3 == 0 ? low : high)[r] = 1;
    CHECK(restricted_dirichlet(t, model, f, low) + restricted_dirichlet(t, model, f, high) ==
          doctest::Approx(dirichlet_form(t, model, f)).epsilon(1e-12));
    CHECK(restricted_dirichlet(t, model, f, std::vector<char>(t.space.size(), 0)) == 0.0);
  }
}

TEST_CASE("capacity of the two-site chain at N=2") {
  ZrpModel model = two_site(2.0);
  MeasureTable table = stationary_measure(model, 2);
  CapacityResult cap = capacity_between(table, model, single(table.space, 0),
                                        single(table.space, 1));
  CHECK(cap.capacity == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(cap.solution.values[1] == doctest::Approx(0.5).epsilon(1e-12));

  CapacityResult rev = capacity_between(table, model, single(table.space, 1),
                                        single(table.space, 0));
  CHECK(cap.capacity == doctest::Approx(rev.capacity).epsilon(1e-13));

  CHECK_THROWS_AS(
      capacity_between(table, model, single(table.space, 0), single(table.space, 0)),
      OverlappingSets);
}

TEST_CASE("capacity monotonicity and the variational inequality") {
  ZrpModel model = make_model(2.5, preset_graph("three_ring_uniform"));
  MeasureTable table = stationary_measure(model, 12);
  JumpNetwork net = build_network(table, model);

  auto a = single(table.space, 0);
  auto b = single(table.space, 1);
  const double cap = capacity_between(model, net, a, b).capacity;

  auto a_bigger = a;
  Configuration c(3);
  c << 11, 1, 0;
  a_bigger.push_back(table.space.rank(c));
  CHECK(capacity_between(model, net, a_bigger, b).capacity >= cap * (1.0 - 1e-12));

  SUBCASE("admissible functions dominate; perturbing the minimizer costs energy") {
    HarmonicSolution h = solve_committor(model, net, a, b);
    SplitMix64 rng(17);
    for (int trial = 0; trial < 5; ++trial) {
      Eigen::VectorXd f = h.values;
      for (Eigen::Index i = 0; i < f.size(); ++i) f[i] += 0.2 * (rng.uniform01() - 0.5);
      for (auto r : a) f[r] = 1.0;
      for (auto r : b) f[r] = 0.0;
      CHECK(dirichlet_form(table, model, f) >= cap * (1.0 - 1e-12));
    }
  }
}

TEST_CASE("committor matches the absorbing jump-chain oracle") {
  SplitMix64 rng(23);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 2 + static_cast<int>(rng.next() % 2);
    const double alpha = 1.5 + 1.5 * rng.uniform01();
    ZrpModel model = make_model(alpha, testing::random_reversible_graph(n, rng));
    const int particles = 10 + static_cast<int>(rng.next() % 20);
    MeasureTable table = stationary_measure(model, particles);
    JumpNetwork net = build_network(table, model);

    // condensed neighborhoods of two sites as the boundary sets
    std::vector<std::int64_t> a, b;
    table.space.for_each([&](const Configuration& counts, std::int64_t rank) {
      if (counts[0] >= particles - 2) a.push_back(rank);
      if (counts[1] >= particles - 1) b.push_back(rank);
    });

    HarmonicSolution h = solve_committor(model, net, a, b);
    Eigen::VectorXd oracle = testing::absorbing_hitting_probability(model, table.space, a, b);
    CHECK((h.values - oracle).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(h.values.minCoeff() >= -1e-9);
    CHECK(h.values.maxCoeff() <= 1.0 + 1e-9);
  }
}

TEST_CASE("trace rates") {
  ZrpModel model = two_site(2.0);
  MeasureTable table = stationary_measure(model, 2);
  JumpNetwork net = build_network(table, model);

  SUBCASE("trace on the full space returns the original rates") {
    std::vector<std::int64_t> all{0, 1, 2};
    TraceRates tr = trace_rates(model, net, all);
    CHECK(tr.rates(0, 1) == doctest::Approx(4.0));
    CHECK(tr.rates(1, 0) == doctest::Approx(1.0));
    CHECK(tr.rates(1, 2) == doctest::Approx(1.0));
    CHECK(tr.rates(0, 2) == 0.0);
  }

  SUBCASE("watched on the two pure configurations") {
    TraceRates tr = trace_rates(model, net, {0, 2});
    CHECK(tr.rates(0, 1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(tr.rates(1, 0) == doctest::Approx(2.0).epsilon(1e-12));
  }

  SUBCASE("trace chain is reversible for the restricted measure") {
    ZrpModel m = make_model(2.2, preset_graph("three_ring_uniform"));
    MeasureTable t = stationary_measure(m, 9);
    JumpNetwork nw = build_network(t, m);
    std::vector<std::int64_t> a;
    for (std::int64_t r = 0; r < t.space.size(); r += 3) a.push_back(r);
    TraceRates tr = trace_rates(m, nw, a);
    for (std::size_t i = 0; i < tr.ranks.size(); ++i)
      for (std::size_t j = 0; j < tr.ranks.size(); ++j) {
        const double fwd = t.weights[tr.ranks[i]] * tr.rates(i, j);
        const double bwd = t.weights[tr.ranks[j]] * tr.rates(j, i);
        CHECK(std::abs(fwd - bwd) <= 1e-10 * std::max({fwd, bwd, 1e-300}));
      }
  }
}

TEST_CASE("well jump rates: trace averaging against the capacity identity") {
  SUBCASE("two sites, N=2: both give 2, matching the capacity 1/3 over mass 1/6") {
    ZrpModel model = two_site(2.0);
    MeasureTable table = stationary_measure(model, 2);
    JumpNetwork net = build_network(table, model);
    MetaPartition partition(model, table.space, WellScales{0, Eigen::VectorXi()});
    WellRates wr = well_jump_rates(table, model, net, partition);
    CHECK(wr.via_capacity(0, 1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(wr.via_trace(0, 1) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(wr.max_rel_gap <= 1e-10);
  }

  SUBCASE("the two routes agree for kappa = 2 and 3 up to N = 30") {
    for (const char* preset : {"two_site_uniform", "three_ring_uniform"}) {
      ZrpModel model = make_model(2.0, preset_graph(preset));
      for (int n : {10, 20, 30}) {
        MeasureTable table = stationary_measure(model, n);
        JumpNetwork net = build_network(table, model);
        // default margins degenerate at these small N; fix a safe explicit one
        MetaPartition partition(model, table.space,
                                WellScales{n / 4, Eigen::VectorXi::Constant(3, n / 4)});
        WellRates wr = well_jump_rates(table, model, net, partition);
        CHECK(wr.max_rel_gap <= 1e-8);

        // reversibility of the averaged rates
        for (int x = 0; x < partition.num_wells(); ++x)
          for (int y = x + 1; y < partition.num_wells(); ++y)
            CHECK(wr.well_mass[x] * wr.via_capacity(x, y) ==
                  doctest::Approx(wr.well_mass[y] * wr.via_capacity(y, x)).epsilon(1e-10));
      }
    }
  }

  SUBCASE("a single well is rejected") {
    ZrpModel model = make_model(2.0, preset_graph("three_sites_nonuniform"));
    MeasureTable table = stationary_measure(model, 20);
    JumpNetwork net = build_network(table, model);
    MetaPartition partition(model, table.space, default_scales(20, model));
    CHECK(partition.num_wells() == 1);
    CHECK_THROWS_AS(well_jump_rates(table, model, net, partition), InsufficientWells);
  }
}

TEST_CASE("discrete crossing profile") {
  SUBCASE("two-term case") {
    DiscreteProfile p = optimal_profile(2.0, 4, 0, 1);
    CHECK(p.gap == doctest::Approx(1.0 / (2.0 * std::pow(2.0, 2.0))).epsilon(1e-14));
  }

  SUBCASE("monotone from 0 to 1 and optimal in the quadratic form") {
    DiscreteProfile p = optimal_profile(2.5, 200, 3, 20);
    CHECK(p.values[0] == 0.0);
    CHECK(p.values[p.values.size() - 1] == doctest::Approx(1.0).epsilon(1e-12));
    for (Eigen::Index i = 0; i + 1 < p.values.size(); ++i) CHECK(p.values[i + 1] >= p.values[i]);
    CHECK(profile_energy(2.5, 200, 3, p.start, p.values) ==
          doctest::Approx(p.gap).epsilon(1e-12));

    // any other admissible profile costs more
    Eigen::VectorXd linear(p.values.size());
    for (Eigen::Index i = 0; i < linear.size(); ++i)
      linear[i] = static_cast<double>(i) / (linear.size() - 1);
    CHECK(profile_energy(2.5, 200, 3, p.start, linear) >= p.gap);
  }

  SUBCASE("rescaled gap approaches the profile-integral reciprocal") {
    const int n = 10000;
    const int margin = static_cast<int>(std::ceil(std::pow(n, 2.0 / 3.0)));
    DiscreteProfile p = optimal_profile(2.0, n, 0, margin);
    const double rescaled = std::pow(n, 5.0) * p.gap;
    CHECK(rescaled == doctest::Approx(30.0).epsilon(0.02));
  }

  CHECK_THROWS_AS(optimal_profile(2.0, 10, 6, 5), DegenerateRange);
  CHECK_THROWS_AS(optimal_profile(2.0, 10, 0, 5), DegenerateRange);
}

TEST_CASE("tube lower bound stays below the exact capacity") {
  for (const char* preset : {"two_site_uniform", "three_ring_uniform", "three_sites_two_max"}) {
    ZrpModel model = make_model(2.0, preset_graph(preset));
    for (int n : {50, 100}) {
      MeasureTable table = stationary_measure(model, n);
      WellScales scales = default_scales(n, model);
      MetaPartition partition(model, table.space, scales);
      JumpNetwork net = build_network(table, model);
      std::vector<int> s1{model.star.max_sites.front()};
      std::vector<int> s1_wells{0};
      std::vector<int> s2_wells;
      for (int w = 1; w < partition.num_wells(); ++w) s2_wells.push_back(w);
      const double cap = capacity_between(model, net, partition.union_ranks(s1_wells),
                                          partition.union_ranks(s2_wells))
                             .capacity;
      LowerBoundComparator lower = lower_capacity_bound(table, model, scales, s1);
      CHECK(lower.value <= cap * (1.0 + 1e-12));
      CHECK(lower.value > 0.0);
    }
  }
}
