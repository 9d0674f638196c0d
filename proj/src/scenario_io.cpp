#include "xfer/scenario_io.hpp"

#include <fstream>
#include <ostream>

#include "xfer/errors.hpp"
#include "xfer/measure_io.hpp"

namespace xfer {

namespace {

using nlohmann::json;

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

SolverSettings solver_from_json(const json& j) {
  SolverSettings v;
  if (!j.is_object()) throw ConfigError("scenario: 'solver' must be an object");
  if (j.contains("mode")) v.mode = solver_mode_from_string(j.at("mode").get<std::string>());
  read_opt(j, "dt", v.dt);
  read_opt(j, "t_end", v.t_end);
  read_opt(j, "max_atoms", v.max_atoms);
  read_opt(j, "seed", v.seed);
  read_opt(j, "snapshot_every", v.snapshot_every);
  read_opt(j, "n_particles", v.n_particles);
  read_opt(j, "symmetric", v.symmetric);
  read_opt(j, "eps", v.eps);
  read_opt(j, "nx", v.nx);
  read_opt(j, "picard_tol", v.picard_tol);
  read_opt(j, "picard_max", v.picard_max);
  read_opt(j, "window", v.window);
  read_opt(j, "mirrored", v.mirrored);
  read_opt(j, "factor_atoms", v.factor_atoms);
  read_opt(j, "partitions", v.partitions);
  return v;
}

json solver_to_json(const SolverSettings& v) {
  return json{{"mode", to_string(v.mode)},
              {"dt", v.dt},
              {"t_end", v.t_end},
              {"max_atoms", v.max_atoms},
              {"seed", v.seed},
              {"snapshot_every", v.snapshot_every},
              {"n_particles", v.n_particles},
              {"symmetric", v.symmetric},
              {"eps", v.eps},
              {"nx", v.nx},
              {"picard_tol", v.picard_tol},
              {"picard_max", v.picard_max},
              {"window", v.window},
              {"mirrored", v.mirrored},
              {"factor_atoms", v.factor_atoms},
              {"partitions", v.partitions}};
}

SourceSpec source_from_json(const json& j) {
  SourceSpec src;
  if (!j.is_object() || !j.contains("pieces")) throw ConfigError("scenario: 'source' needs 'pieces'");
  for (const auto& p : j.at("pieces")) {
    src.pieces.push_back({p.at("t_start").get<double>(), p.at("t_end").get<double>(),
                          measure_from_json(p.at("measure"))});
  }
  return src;
}

json source_to_json(const SourceSpec& src) {
  json pieces = json::array();
  for (const auto& p : src.pieces) {
    pieces.push_back({{"t_start", p.t_start}, {"t_end", p.t_end}, {"measure", measure_to_json(p.measure)}});
  }
  return json{{"pieces", pieces}};
}

}  // namespace

GrowthSpec growth_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "constant") return ConstantGrowth{j.at("c").get<double>()};
  if (type == "affine_capped") {
    return AffineCappedGrowth{j.at("a").get<double>(), j.at("b").get<double>(), j.at("xcap").get<double>()};
  }
  if (type == "table") {
    TableGrowth g;
    g.times = j.at("times").get<std::vector<double>>();
    g.locations = j.at("locations").get<std::vector<double>>();
    for (const auto& row : j.at("values")) {
      const auto r = row.get<std::vector<double>>();
      if (r.size() != g.locations.size()) throw ConfigError("growth: table row length must match locations");
      g.values.insert(g.values.end(), r.begin(), r.end());
    }
    return g;
  }
  throw ConfigError("growth: unknown type '" + type + "'");
}

json growth_to_json(const GrowthSpec& h) {
  if (const auto* c = std::get_if<ConstantGrowth>(&h)) return {{"type", "constant"}, {"c", c->c}};
  if (const auto* a = std::get_if<AffineCappedGrowth>(&h)) {
    return {{"type", "affine_capped"}, {"a", a->a}, {"b", a->b}, {"xcap", a->xcap}};
  }
  const auto& g = std::get<TableGrowth>(h);
  json rows = json::array();
  const std::size_t nl = g.locations.size();
  for (std::size_t i = 0; i < g.times.size(); ++i) {
    rows.push_back(std::vector<double>(g.values.begin() + i * nl, g.values.begin() + (i + 1) * nl));
  }
  return {{"type", "table"}, {"times", g.times}, {"locations", g.locations}, {"values", rows}};
}

Scenario scenario_from_json(const json& j) {
  try {
    if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
    for (const char* key : {"kernel", "initial", "growth"}) {
      if (!j.contains(key)) throw ConfigError(std::string("scenario: missing '") + key + "'");
    }
    Scenario s;
    s.kernel = kernel_spec_from_json(j.at("kernel"));
    s.initial = measure_from_json(j.at("initial"));
    s.growth = growth_from_json(j.at("growth"));
    if (j.contains("source")) s.source = source_from_json(j.at("source"));
    if (j.contains("solver")) s.solver = solver_from_json(j.at("solver"));
    read_opt(j, "c_bar", s.c_bar);
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
}

json scenario_to_json(const Scenario& s) {
  return json{{"kernel", kernel_spec_to_json(s.kernel)},
              {"initial", measure_to_json(s.initial)},
              {"growth", growth_to_json(s.growth)},
              {"source", source_to_json(s.source)},
              {"solver", solver_to_json(s.solver)},
              {"c_bar", s.c_bar}};
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("scenario " + path + " is not valid JSON: " + e.what());
  }
  return scenario_from_json(j);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,mass,mean,variance,mass_at_zero,tv_rate,n_atoms\n";
  for (const auto& r : traj.diagnostics) {
    os << format_double(r.t) << ',' << format_double(r.mass) << ',' << format_double(r.mean) << ','
       << format_double(r.variance) << ',' << format_double(r.mass_at_zero) << ','
       << format_double(r.tv_rate) << ',' << r.n_atoms << '\n';
  }
}

}  // namespace xfer
