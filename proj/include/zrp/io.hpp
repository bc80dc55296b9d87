#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "zrp/harmonic.hpp"
#include "zrp/measure.hpp"
#include "zrp/model.hpp"
#include "zrp/site_graph.hpp"

namespace zrp {

using nlohmann::json;

/// Graph spec document: {"sites": [names], "rates": [{"from","to","rate"}],
/// optional "measure": {site: weight}}. Omitting the measure asks for the
/// stationary distribution of the walk.
inline GraphSpec graph_spec_from_json(const json& j) {
  GraphSpec spec;
  for (const auto& s : j.at("sites")) spec.sites.push_back(s.get<std::string>());
  const int n = static_cast<int>(spec.sites.size());
  std::map<std::string, int> index;
  for (int i = 0; i < n; ++i) index[spec.sites[i]] = i;

  spec.rates = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : j.at("rates")) {
    const auto from = index.find(e.at("from").get<std::string>());
    const auto to = index.find(e.at("to").get<std::string>());
    if (from == index.end() || to == index.end()) throw Error("rate references unknown site");
    spec.rates(from->second, to->second) = e.at("rate").get<double>();
  }
  if (j.contains("measure")) {
    spec.measure = Eigen::VectorXd::Zero(n);
    for (const auto& [site, weight] : j.at("measure").items()) {
      const auto it = index.find(site);
      if (it == index.end()) throw Error("measure references unknown site");
      spec.measure[it->second] = weight.get<double>();
    }
  }
  return spec;
}

inline json graph_to_json(const SiteGraph& g) {
  json j;
  j["sites"] = g.names;
  json edges = json::array();
  for (int x = 0; x < g.num_sites(); ++x)
    for (int y = 0; y < g.num_sites(); ++y)
      if (g.rates(x, y) > 0.0)
        edges.push_back({{"from", g.names[x]}, {"to", g.names[y]}, {"rate", g.rates(x, y)}});
  j["rates"] = edges;
  json m = json::object();
  for (int x = 0; x < g.num_sites(); ++x) m[g.names[x]] = g.measure[x];
  j["measure"] = m;
  return j;
}

/// Model spec: the graph spec plus "alpha" (either flat or under "graph").
inline ZrpModel model_from_json(const json& j) {
  const double alpha = j.at("alpha").get<double>();
  const json& g = j.contains("graph") ? j.at("graph") : j;
  return make_model(alpha, build_graph(graph_spec_from_json(g)));
}

inline json model_to_json(const ZrpModel& model) {
  json j = graph_to_json(model.graph);
  j["alpha"] = model.alpha;
  return j;
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

/// Write-then-rename so readers never observe a partial file.
inline void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, target);
}

inline std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string graph_hash(const SiteGraph& g) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(graph_to_json(g).dump())));
  return buf;
}

inline std::string measure_table_csv(const MeasureTable& table) {
  std::ostringstream out;
  out << "rank";
  for (int x = 0; x < table.space.num_sites(); ++x) out << ",n" << x;
  out << ",weight\n";
  out.precision(17);
  table.space.for_each([&](const Configuration& counts, std::int64_t rank) {
    out << rank;
    for (int x = 0; x < counts.size(); ++x) out << ',' << counts[x];
    out << ',' << table.weights[rank] << '\n';
  });
  return out.str();
}

inline std::string harmonic_csv(const HarmonicSolution& h) {
  std::ostringstream out;
  out << "rank,value\n";
  out.precision(17);
  for (Eigen::Index r = 0; r < h.values.size(); ++r) out << r << ',' << h.values[r] << '\n';
  return out.str();
}

/// One capacity record in the export schema.
inline json capacity_record(int particles, double alpha, const std::string& graph_hash_hex,
                            const std::string& a_label, const std::string& b_label,
                            const CapacityResult& result, double seconds) {
  return json{{"N", particles},          {"alpha", alpha},
              {"graph_hash", graph_hash_hex}, {"A", a_label},
              {"B", b_label},            {"cap", result.capacity},
              {"residual", result.solution.residual}, {"seconds", seconds}};
}

}  // namespace zrp
