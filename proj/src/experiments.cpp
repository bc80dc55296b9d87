#include "zrp/experiments.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "zrp/dirichlet.hpp"
#include "zrp/io.hpp"
#include "zrp/limit_constants.hpp"
#include "zrp/measure.hpp"
#include "zrp/meta_partition.hpp"
#include "zrp/metastability_checks.hpp"
#include "zrp/profile.hpp"
#include "zrp/simulate.hpp"
#include "zrp/stats.hpp"
#include "zrp/test_function.hpp"
#include "zrp/trace.hpp"

namespace zrp {

using nlohmann::json;

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

struct Timer {
  double start = now_seconds();
  double elapsed() const { return now_seconds() - start; }
};

json fit_to_json(const ConvergenceFit& fit) {
  return json{{"limit", fit.limit},
              {"coeff", fit.coeff},
              {"beta", fit.beta},
              {"rel_residual", fit.rel_residual},
              {"conclusive", fit.conclusive}};
}

json scales_to_json(const WellScales& scales, const ZrpModel& model) {
  json b = json::object();
  for (int z = 0; z < model.num_sites(); ++z)
    if (!model.star.is_max_site(z)) b[model.graph.names[z]] = scales.background_cap[z];
  return json{{"margin", scales.margin}, {"background_cap", b}};
}

WellScales resolve_scales(const ExperimentConfig& config, int particles, const ZrpModel& model) {
  WellScales scales = default_scales(particles, model);
  if (config.margin) {
    scales.margin = *config.margin;
    if (2 * scales.margin >= particles) throw DegenerateScale("margin override too large");
  }
  return scales;
}

std::vector<int> resolve_s1(const ExperimentConfig& config, const ZrpModel& model) {
  if (!config.s1_sites.empty()) return config.s1_sites;
  return {model.star.max_sites.front()};
}

struct CsvBuilder {
  std::ostringstream out;
  std::string experiment, graph;
  double alpha;

  CsvBuilder(const std::string& exp, const std::string& g, double a)
      : experiment(exp), graph(g), alpha(a) {
    out << "experiment,graph,alpha,N,quantity,value\n";
    out.precision(17);
  }
  void row(int n, const std::string& quantity, double value) {
    out << experiment << ',' << graph << ',' << alpha << ',' << n << ',' << quantity << ','
        << value << '\n';
  }
};

json base_report(const std::string& name, const ExperimentConfig& config) {
  return json{{"experiment", name}, {"config", config_to_json(config)}};
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  c.model_spec = j.at("model");
  if (j.contains("schedule")) c.schedule = j.at("schedule").get<std::vector<int>>();
  for (std::size_t i = 1; i < c.schedule.size(); ++i)
    if (c.schedule[i] <= c.schedule[i - 1]) throw Error("schedule must increase strictly");
  if (j.contains("s1_sites")) c.s1_sites = j.at("s1_sites").get<std::vector<int>>();
  if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
  if (j.contains("margin")) c.margin = j.at("margin").get<int>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("replicas")) c.replicas = j.at("replicas").get<int>();
  if (j.contains("min_transitions")) c.min_transitions = j.at("min_transitions").get<std::int64_t>();
  if (j.contains("size_cap")) c.size_cap = j.at("size_cap").get<std::int64_t>();
  if (j.contains("tolerance")) c.tolerance = j.at("tolerance").get<double>();
  if (j.contains("out")) c.out_dir = j.at("out").get<std::string>();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j{{"model", c.model_spec},
         {"schedule", c.schedule},
         {"s1_sites", c.s1_sites},
         {"epsilon", c.epsilon},
         {"seed", c.seed},
         {"replicas", c.replicas},
         {"min_transitions", c.min_transitions},
         {"size_cap", c.size_cap},
         {"tolerance", c.tolerance}};
  if (c.margin) j["margin"] = *c.margin;
  return j;
}

void write_result(const ExperimentResult& result, const std::string& out_dir) {
  if (out_dir.empty()) return;
  atomic_write(out_dir + "/" + result.name + ".json", result.report.dump(2) + "\n");
  atomic_write(out_dir + "/" + result.name + ".csv", result.csv);
}

SiteGraph preset_graph(const std::string& name) {
  auto from_conductances = [](std::vector<std::string> sites, const Eigen::VectorXd& m,
                              const Eigen::MatrixXd& c) {
    const int n = m.size();
    Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(n, n);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        if (x != y) rates(x, y) = c(x, y) / m[x];
    return build_graph(GraphSpec{std::move(sites), rates, m});
  };

  if (name == "two_site_uniform") {
    Eigen::MatrixXd r(2, 2);
    r << 0, 1, 1, 0;
    return build_graph(GraphSpec{{"a", "b"}, r, Eigen::Vector2d(0.5, 0.5)});
  }
  if (name == "two_site_asymmetric") {
    // m = (2/3, 1/3), conductance 1/3 on the single edge
    Eigen::MatrixXd r(2, 2);
    r << 0, 0.5, 1.0, 0;
    return build_graph(GraphSpec{{"a", "b"}, r, Eigen::Vector2d(2.0 / 3.0, 1.0 / 3.0)});
  }
  if (name == "three_ring_uniform") {
    Eigen::MatrixXd r(3, 3);
    r << 0, 1, 1, 1, 0, 1, 1, 1, 0;
    return build_graph(GraphSpec{{"a", "b", "c"}, r, Eigen::VectorXd()});
  }
  if (name == "four_ring_uniform") {
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(4, 4);
    for (int x = 0; x < 4; ++x) {
      r(x, (x + 1) % 4) = 1;
      r(x, (x + 3) % 4) = 1;
    }
    return build_graph(GraphSpec{{"a", "b", "c", "d"}, r, Eigen::VectorXd()});
  }
  if (name == "three_sites_two_max") {
    Eigen::VectorXd m(3);
    m << 0.4, 0.4, 0.2;
    Eigen::MatrixXd c(3, 3);
    c << 0, 0.10, 0.05, 0.10, 0, 0.05, 0.05, 0.05, 0;
    return from_conductances({"a", "b", "c"}, m, c);
  }
  if (name == "three_sites_nonuniform") {
    Eigen::VectorXd m(3);
    m << 0.5, 0.3, 0.2;
    Eigen::MatrixXd c(3, 3);
    c << 0, 0.15, 0.10, 0.15, 0, 0.06, 0.10, 0.06, 0;
    return from_conductances({"a", "b", "c"}, m, c);
  }
  throw Error("unknown preset graph: " + name);
}

ExperimentResult run_zk(const ExperimentConfig& config) {
  Timer timer;
  const ZrpModel model = model_from_json(config.model_spec);
  const LimitConstants lc = limit_constants(model);
  const double tol = config.tolerance > 0 ? config.tolerance : 0.01;

  ExperimentResult result;
  result.name = "zk";
  result.report = base_report("zk", config);
  CsvBuilder csv("zk", graph_hash(model.graph), model.alpha);

  std::vector<double> ns, zs;
  json per_n = json::array();
  for (int n : config.schedule) {
    MeasureTable table = stationary_measure(model, n, config.size_cap);
    ns.push_back(n);
    zs.push_back(table.normalizer);
    per_n.push_back({{"N", n}, {"Z", table.normalizer}, {"states", table.space.size()}});
    csv.row(n, "Z", table.normalizer);
  }
  const ConvergenceFit fit = fit_convergence(ns, zs);
  const double gap = std::abs(fit.limit - lc.z_limit) / lc.z_limit;

  result.conclusive = fit.conclusive;
  result.pass = fit.conclusive && gap <= tol;
  result.report["per_N"] = per_n;
  result.report["fit"] = fit_to_json(fit);
  result.report["target"] = lc.z_limit;
  result.report["rel_gap"] = gap;
  result.report["tolerance"] = tol;
  result.report["pass"] = result.pass;
  result.seconds = timer.elapsed();
  result.report["seconds"] = result.seconds;
  result.csv = csv.out.str();
  write_result(result, config.out_dir);
  return result;
}

ExperimentResult run_mt1(const ExperimentConfig& config) {
  Timer timer;
  const ZrpModel model = model_from_json(config.model_spec);
  const LimitConstants lc = limit_constants(model);
  const double tol = config.tolerance > 0 ? config.tolerance : 0.05;
  const std::vector<int> s1 = resolve_s1(config, model);
  const double target = capacity_scaling_limit(model, lc, s1);
  const TestFunctionSpec spec = build_test_spec(model, config.epsilon);

  ExperimentResult result;
  result.name = "mt1";
  result.report = base_report("mt1", config);
  CsvBuilder csv("mt1", graph_hash(model.graph), model.alpha);

  std::vector<int> s1_wells, s2_wells;
  std::vector<double> ns, caps;
  json per_n = json::array();
  for (int n : config.schedule) {
    const double rescale = std::pow(static_cast<double>(n), 1.0 + model.alpha);
    MeasureTable table = stationary_measure(model, n, config.size_cap);
    WellScales scales = resolve_scales(config, n, model);
    MetaPartition partition(model, table.space, scales);
    JumpNetwork net = build_network(table, model, config.size_cap);

    s1_wells.clear();
    s2_wells.clear();
    std::vector<char> in_s1(model.num_sites(), 0);
    for (int x : s1) in_s1[x] = 1;
    for (int w = 0; w < partition.num_wells(); ++w)
      (in_s1[partition.well_site(w)] ? s1_wells : s2_wells).push_back(w);
    if (s1_wells.empty() || s2_wells.empty())
      throw InsufficientWells("S1 must split the maximal sites");

    CapacityResult cap = capacity_between(model, net, partition.union_ranks(s1_wells),
                                          partition.union_ranks(s2_wells));
    LowerBoundComparator lower = lower_capacity_bound(table, model, scales, s1);
    UpperBoundEstimate upper = upper_bound_estimate(table, model, spec, s1, partition);

    const bool sandwich = lower.value <= cap.capacity * (1.0 + 1e-9) &&
                          cap.capacity <= upper.clamped_total * (1.0 + 1e-9);
    result.hard_pass = result.hard_pass && sandwich;

    ns.push_back(n);
    caps.push_back(rescale * cap.capacity);
    per_n.push_back({{"N", n},
                     {"scales", scales_to_json(scales, model)},
                     {"cap", cap.capacity},
                     {"rescaled_cap", rescale * cap.capacity},
                     {"rescaled_lower", rescale * lower.value},
                     {"rescaled_upper", rescale * upper.clamped_total},
                     {"upper_raw", upper.total},
                     {"upper_admissible", upper.admissible},
                     {"upper_exterior_rescaled", rescale * upper.exterior},
                     {"residual", cap.solution.residual},
                     {"solver", cap.solution.method},
                     {"sandwich", sandwich}});
    csv.row(n, "rescaled_cap", rescale * cap.capacity);
    csv.row(n, "rescaled_lower", rescale * lower.value);
    csv.row(n, "rescaled_upper", rescale * upper.clamped_total);
  }

  const ConvergenceFit fit = fit_convergence(ns, caps);
  const double gap = std::abs(fit.limit - target) / target;
  result.conclusive = fit.conclusive;
  result.pass = fit.conclusive && gap <= tol && result.hard_pass;
  result.report["per_N"] = per_n;
  result.report["fit"] = fit_to_json(fit);
  result.report["target"] = target;
  result.report["rel_gap"] = gap;
  result.report["tolerance"] = tol;
  result.report["pass"] = result.pass;
  result.report["hard_pass"] = result.hard_pass;
  result.seconds = timer.elapsed();
  result.report["seconds"] = result.seconds;
  result.csv = csv.out.str();
  write_result(result, config.out_dir);
  return result;
}

ExperimentResult run_h_conditions(const ExperimentConfig& config) {
  Timer timer;
  const ZrpModel model = model_from_json(config.model_spec);
  const LimitConstants lc = limit_constants(model);
  if (model.star.num_max_sites() < 2) throw InsufficientWells("need two maximal sites");
  const int x = model.star.max_sites[0];
  const int y = model.star.max_sites[1];
  const double rate_target = tunneling_rate_limit(model, lc, x, y);

  ExperimentResult result;
  result.name = "hcond";
  result.report = base_report("hcond", config);
  CsvBuilder csv("hcond", graph_hash(model.graph), model.alpha);

  std::vector<double> ns, h0s, h1s, h2s;
  json per_n = json::array();
  for (int n : config.schedule) {
    const double rescale = std::pow(static_cast<double>(n), 1.0 + model.alpha);
    MeasureTable table = stationary_measure(model, n, config.size_cap);
    WellScales scales = resolve_scales(config, n, model);
    MetaPartition partition(model, table.space, scales);
    JumpNetwork net = build_network(table, model, config.size_cap);

    // occupation ratio of the transition region
    const double delta_mass = transition_mass(table, partition);
    double h2 = 0.0;
    for (int w = 0; w < partition.num_wells(); ++w)
      h2 = std::max(h2, delta_mass / well_mass(table, partition, w));

    // separation of scales: crossing capacity vs the worst in-well capacity
    const double cap_cross =
        capacity_between(model, net, partition.well_ranks(0), partition.other_wells_ranks(0))
            .capacity;
    const std::int64_t pure = table.space.rank(pure_configuration(table.space, x));
    double cap_min = std::numeric_limits<double>::infinity();
    for (std::int64_t eta : partition.well_ranks(0)) {
      if (eta == pure) continue;
      cap_min =
          std::min(cap_min, capacity_between(model, net, {eta}, {pure}).capacity);
    }
    const double h1 = cap_cross / cap_min;

    // rescaled inter-well rate against its limit
    const Eigen::MatrixXd rates = well_rates_via_capacity(table, model, net, partition);
    const double h0 = rescale * rates(0, 1);

    ns.push_back(n);
    h0s.push_back(h0);
    h1s.push_back(h1);
    h2s.push_back(h2);
    per_n.push_back({{"N", n},
                     {"scales", scales_to_json(scales, model)},
                     {"rate_rescaled", h0},
                     {"capacity_ratio", h1},
                     {"occupation_ratio", h2}});
    csv.row(n, "rate_rescaled", h0);
    csv.row(n, "capacity_ratio", h1);
    csv.row(n, "occupation_ratio", h2);
  }

  bool monotone = true;
  for (std::size_t i = 0; i + 1 < ns.size(); ++i) {
    monotone = monotone && h1s[i + 1] < h1s[i] && h2s[i + 1] < h2s[i];
    monotone =
        monotone && std::abs(h0s[i + 1] - rate_target) < std::abs(h0s[i] - rate_target);
  }
  const ConvergenceFit h0_fit = fit_convergence(ns, h0s);
  const double h0_gap = std::abs(h0_fit.limit - rate_target) / rate_target;
  const double tol = config.tolerance > 0 ? config.tolerance : 0.05;

  result.hard_pass = monotone && h2s.back() < 0.1;
  result.conclusive = h0_fit.conclusive;
  result.pass = result.hard_pass && h0_fit.conclusive && h0_gap <= tol;
  result.report["per_N"] = per_n;
  result.report["rate_target"] = rate_target;
  result.report["rate_fit"] = fit_to_json(h0_fit);
  result.report["rate_rel_gap"] = h0_gap;
  result.report["monotone"] = monotone;
  result.report["final_occupation_ratio"] = h2s.back();
  result.report["pass"] = result.pass;
  result.report["hard_pass"] = result.hard_pass;
  result.seconds = timer.elapsed();
  result.report["seconds"] = result.seconds;
  result.csv = csv.out.str();
  write_result(result, config.out_dir);
  return result;
}

ExperimentResult run_tunneling(const ExperimentConfig& config) {
  Timer timer;
  const ZrpModel model = model_from_json(config.model_spec);
  const int n = config.schedule.back();
  const double rescale = std::pow(static_cast<double>(n), 1.0 + model.alpha);

  MeasureTable table = stationary_measure(model, n, config.size_cap);
  WellScales scales = resolve_scales(config, n, model);
  MetaPartition partition(model, table.space, scales);
  JumpNetwork net = build_network(table, model, config.size_cap);
  const int wells = partition.num_wells();

  const Eigen::MatrixXd exact = well_rates_via_capacity(table, model, net, partition);

  // horizon sized from the exact rates so the transition budget is met
  double slowest = 0.0;
  for (int w = 0; w < wells; ++w) {
    double exit = 0.0;
    for (int v = 0; v < wells; ++v) exit += exact(w, v);
    slowest = std::max(slowest, 1.0 / exit);
  }
  const double horizon = 2.5 * static_cast<double>(config.min_transitions) * slowest;

  WellTransitionStats stats(partition);
  const Configuration start = pure_configuration(table.space, partition.well_site(0));
  std::int64_t events = 0;
  simulate_stream(model, start, Horizon::by_time(horizon), child_seed(config.seed, 1),
                  [&](const Configuration& counts, double t0, double t1) {
                    stats(counts, t0, t1);
                    ++events;
                  });
  stats.finalize();

  const EmpiricalGenerator emp = empirical_generator(stats, rescale);

  ExperimentResult result;
  result.name = "tunnel";
  result.report = base_report("tunnel", config);
  CsvBuilder csv("tunnel", graph_hash(model.graph), model.alpha);

  json rate_rows = json::array();
  bool rates_ok = true;
  for (int w = 0; w < wells; ++w)
    for (int v = 0; v < wells; ++v) {
      if (w == v) continue;
      const double target = rescale * exact(w, v);
      const double gap = std::abs(emp.rate(w, v) - target);
      const bool ok = gap <= 3.0 * emp.se(w, v);
      rates_ok = rates_ok && ok;
      rate_rows.push_back({{"from", model.graph.names[partition.well_site(w)]},
                           {"to", model.graph.names[partition.well_site(v)]},
                           {"empirical", emp.rate(w, v)},
                           {"se", emp.se(w, v)},
                           {"exact", target},
                           {"within_3se", ok}});
      csv.row(n, "rate_" + std::to_string(w) + std::to_string(v), emp.rate(w, v));
    }

  json ks_rows = json::array();
  bool ks_ok = true;
  for (int w = 0; w < wells; ++w) {
    double exit = 0.0;
    for (int v = 0; v < wells; ++v) exit += rescale * exact(w, v);
    std::vector<double> rescaled;
    rescaled.reserve(stats.sojourns(w).size());
    for (double s : stats.sojourns(w)) rescaled.push_back(s / rescale);
    const KsResult ks = ks_exponential(rescaled, exit);
    ks_ok = ks_ok && ks.p_value >= 0.01;
    ks_rows.push_back({{"well", model.graph.names[partition.well_site(w)]},
                       {"samples", rescaled.size()},
                       {"statistic", ks.statistic},
                       {"p_value", ks.p_value}});
    csv.row(n, "ks_p_" + std::to_string(w), ks.p_value);
  }

  const ThermalizationResult therm = thermalization_probability(model, net, partition, 0);
  const TransitionOccupation occupation = transition_occupation(
      model, partition, 0, 1.0, std::min(config.replicas, 64), child_seed(config.seed, 2));

  result.hard_pass = rates_ok && ks_ok && stats.total_transitions() >= config.min_transitions;
  result.pass = result.hard_pass;
  result.report["N"] = n;
  result.report["scales"] = scales_to_json(scales, model);
  result.report["events"] = events;
  result.report["transitions"] = stats.total_transitions();
  result.report["horizon"] = horizon;
  result.report["rates"] = rate_rows;
  result.report["sojourn_ks"] = ks_rows;
  result.report["thermalization_min_probability"] = therm.min_probability;
  result.report["transition_occupation"] = occupation.estimate;
  result.report["transition_occupation_se"] = occupation.std_error;
  result.report["pass"] = result.pass;
  result.report["hard_pass"] = result.hard_pass;
  result.seconds = timer.elapsed();
  result.report["seconds"] = result.seconds;
  csv.row(n, "thermalization_min_probability", therm.min_probability);
  csv.row(n, "transition_occupation", occupation.estimate);
  result.csv = csv.out.str();
  write_result(result, config.out_dir);
  return result;
}

ExperimentResult run_condensation_remark(const ExperimentConfig& config) {
  Timer timer;
  const ZrpModel model = model_from_json(config.model_spec);
  const LimitConstants lc = limit_constants(model);
  const double tol = config.tolerance > 0 ? config.tolerance : 0.02;
  const double kappa_star = model.star.num_max_sites();

  ExperimentResult result;
  result.name = "remark";
  result.report = base_report("remark", config);
  CsvBuilder csv("remark", graph_hash(model.graph), model.alpha);

  json per_n = json::array();
  double final_gap = 1.0, final_tv = 1.0;
  for (int n : config.schedule) {
    MeasureTable table = stationary_measure(model, n, config.size_cap);
    WellScales scales = resolve_scales(config, n, model);
    const TailMasses tails = tail_masses(table, scales.margin);

    json masses = json::object();
    double worst = 0.0;
    for (int site : model.star.max_sites) {
      masses[model.graph.names[site]] = tails.condensed[site];
      worst = std::max(worst,
                       std::abs(tails.condensed[site] - 1.0 / kappa_star) * kappa_star);
      csv.row(n, "well_mass_" + model.graph.names[site], tails.condensed[site]);
    }
    const double tv = conditional_vs_grand_canonical(table, model, lc,
                                                     model.star.max_sites.front(),
                                                     scales.margin);
    csv.row(n, "tv_to_grand_canonical", tv);
    per_n.push_back({{"N", n},
                     {"scales", scales_to_json(scales, model)},
                     {"well_mass", masses},
                     {"worst_rel_gap_to_uniform", worst},
                     {"tv_to_grand_canonical", tv}});
    final_gap = worst;
    final_tv = tv;
  }

  result.pass = final_gap <= tol;
  result.report["per_N"] = per_n;
  result.report["kappa_star"] = kappa_star;
  result.report["final_rel_gap"] = final_gap;
  result.report["final_tv"] = final_tv;
  result.report["tolerance"] = tol;
  result.report["pass"] = result.pass;
  result.seconds = timer.elapsed();
  result.report["seconds"] = result.seconds;
  result.csv = csv.out.str();
  write_result(result, config.out_dir);
  return result;
}

}  // namespace zrp
