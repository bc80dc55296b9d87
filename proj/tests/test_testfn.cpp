#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "zrp/experiments.hpp"
#include "zrp/harmonic.hpp"
#include "zrp/rng.hpp"
#include "zrp/test_function.hpp"

using namespace zrp;

TEST_CASE("epsilon feasibility") {
  ZrpModel model = make_model(2.0, preset_graph("two_site_uniform"));
  CHECK(max_feasible_epsilon() == doctest::Approx(0.0211).epsilon(0.02));
  CHECK_NOTHROW(build_test_spec(model, 0.015));
  CHECK_THROWS_AS(build_test_spec(model, 0.05), EpsilonOutOfRange);   // over the slope limit
  CHECK_THROWS_AS(build_test_spec(model, 0.2), EpsilonOutOfRange);    // over 1/6
  CHECK_THROWS_AS(build_test_spec(model, -0.01), EpsilonOutOfRange);
}

TEST_CASE("ramp and crossing profile satisfy the stated constraints") {
  // the constructor grid-checks everything; re-verify the headline points
  ZrpModel model = make_model(2.0, preset_graph("three_ring_uniform"));
  TestFunctionSpec spec = build_test_spec(model, 0.015);
  const double eps = spec.epsilon();

  CHECK(spec.ramp(0.0) == 0.0);
  CHECK(spec.ramp(3.0 * eps) == 0.0);
  CHECK(spec.ramp(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(spec.ramp(0.5) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(spec.crossing(3.0 * eps) == 0.0);
  CHECK(spec.crossing(1.0 - 3.0 * eps) == 1.0);

  for (double t : {0.1, 0.33, 0.5, 0.61, 0.9}) {
    CHECK(spec.ramp(t) + spec.ramp(1.0 - t) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(spec.crossing(t) + spec.crossing(1.0 - t) == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(spec.ramp_derivative(t) <= spec.slope_bound() * (1.0 + 1e-12));
  }
}

TEST_CASE("partition of unity over the tubes") {
  ZrpModel model = make_model(2.0, preset_graph("three_ring_uniform"));
  TestFunctionSpec spec = build_test_spec(model, 0.015);
  const double eps = spec.epsilon();
  const int n = model.num_sites();

  SUBCASE("unit sum at random simplex points") {
    SplitMix64 rng(29);
    for (int trial = 0; trial < 1000; ++trial) {
      Eigen::VectorXd u(n);
      double total = 0.0;
      for (int z = 0; z < n; ++z) total += (u[z] = -std::log(rng.uniform_pos()));
      u /= total;
      for (int x = 0; x < n; ++x) {
        double sum = 0.0;
        for (int y = 0; y < n; ++y)
          if (y != x) {
            const double theta = spec.blend(x, y, u);
            CHECK(theta >= -1e-12);
            CHECK(theta <= 1.0 + 1e-12);
            sum += theta;
          }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }

  SUBCASE("equals one on the tube body") {
    Eigen::VectorXd u(3);
    u << 1.0 - 3.5 * eps, 3.0 * eps, 0.5 * eps;  // u_0 + u_1 >= 1 - eps, u_0 <= 1 - 3 eps
    CHECK(spec.tube_distance(0, 1, u) == 0.0);
    CHECK(spec.blend(0, 1, u) == doctest::Approx(1.0));
    CHECK(spec.blend(0, 2, u) == doctest::Approx(0.0));
  }

  SUBCASE("distance is exact on hand-solved points") {
    Eigen::VectorXd u(3);
    u << 0.5, 0.5, 0.0;  // needs u_0 + u_1 >= 1 - eps: already there
    CHECK(spec.tube_distance(0, 1, u) == 0.0);
    // raising u_0 + u_1 is limited by how fast u_2 can shed mass: t = (1 - eps) - 0.7
    u << 0.4, 0.3, 0.3;
    CHECK(spec.tube_distance(0, 1, u) == doctest::Approx(0.3 - eps).epsilon(1e-9));
  }
}

TEST_CASE("candidate plateaus and tube identity") {
  ZrpModel model = make_model(2.0, preset_graph("three_ring_uniform"));
  TestFunctionSpec spec = build_test_spec(model, 0.015);
  const int n_particles = 1000;
  ConfigSpace space(n_particles, 3);

  SUBCASE("pure configurations") {
    Eigen::VectorXd u(3);
    for (int x = 0; x < 3; ++x) {
      const Configuration pure = pure_configuration(space, x);
      for (int z = 0; z < 3; ++z) u[z] = static_cast<double>(pure[z]) / n_particles;
      double f0 = 0.0;
      for (int y = 0; y < 3; ++y)
        if (y != 0) f0 += spec.blend(0, y, u) * tube_candidate(spec, 0, y, pure, n_particles);
      CHECK(f0 == doctest::Approx(x == 0 ? 1.0 : 0.0));
    }
  }

  SUBCASE("constant 1 on tubes between S1 sites") {
    // margin 10 at N=1000 keeps the tube inside the macroscopic body
    const int margin = 10;
    const std::vector<int> s1{0, 1};
    Eigen::VectorXd u(3);
    Configuration counts(3), moved(3);
    for (int k = 0; k <= margin; ++k)          // particles off the pair
      for (int i = 0; i <= n_particles - k; ++i) {
        counts << i, n_particles - k - i, k;
        for (int z = 0; z < 3; ++z) u[z] = static_cast<double>(counts[z]) / n_particles;
        double f = 0.0;
        for (int x : s1)
          for (int y = 0; y < 3; ++y)
            if (y != x) f += spec.blend(x, y, u) * tube_candidate(spec, x, y, counts, n_particles);
        CHECK(f == doctest::Approx(1.0).epsilon(1e-10));
      }
  }
}

TEST_CASE("upper bound estimate") {
  ZrpModel model = make_model(2.0, preset_graph("two_site_uniform"));
  TestFunctionSpec spec = build_test_spec(model, 0.015);

  double prev_step = 1e9;
  for (int n : {60, 120}) {
    MeasureTable table = stationary_measure(model, n);
    MetaPartition partition(model, table.space, default_scales(n, model));
    JumpNetwork net = build_network(table, model);
    UpperBoundEstimate ub = upper_bound_estimate(table, model, spec, {0}, partition);

    const double cap = capacity_between(model, net, partition.well_ranks(0),
                                        partition.well_ranks(1))
                           .capacity;
    CHECK(ub.clamped_total >= cap * (1.0 - 1e-12));
    CHECK(ub.exterior >= 0.0);
    CHECK(ub.exterior + ub.tubes == doctest::Approx(ub.total).epsilon(1e-12));
    // the step bound scales like 1/N: the achieved constant must not blow up
    CHECK(ub.max_step_times_n < 50.0);
    CHECK(ub.max_step_times_n < prev_step * 2.0);
    prev_step = ub.max_step_times_n;
  }

  SUBCASE("admissibility appears once the plateaus cover the wells") {
    // small margin forces the wells deep into the plateau region
    const int n = 400;
    MeasureTable table = stationary_measure(model, n);
    MetaPartition partition(model, table.space, WellScales{5, Eigen::VectorXi()});
    UpperBoundEstimate ub = upper_bound_estimate(table, model, spec, {0}, partition);
    CHECK(ub.admissible);
    CHECK(ub.clamped_total == doctest::Approx(ub.total));
  }
}

TEST_CASE("rescaled candidate energy approaches the capacity limit from above") {
  ZrpModel model = make_model(2.0, preset_graph("two_site_uniform"));
  LimitConstants lc = limit_constants(model);
  TestFunctionSpec spec = build_test_spec(model, 0.015);
  const double target = capacity_scaling_limit(model, lc, {0});
  const double allowed =
      std::pow(1.0 + std::sqrt(spec.epsilon()), 2.0 * model.alpha + 1.0);

  double prev = 1e30;
  for (int n : {100, 200, 400}) {
    MeasureTable table = stationary_measure(model, n);
    MetaPartition partition(model, table.space, default_scales(n, model));
    UpperBoundEstimate ub = upper_bound_estimate(table, model, spec, {0}, partition);
    const double rescaled = std::pow(n, 1.0 + model.alpha) * ub.total;
    CHECK(rescaled < prev);  // decreasing toward the limit band
    prev = rescaled;
  }
  CHECK(prev <= target * allowed * 1.10);
}
