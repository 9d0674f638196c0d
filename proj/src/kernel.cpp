#include "xfer/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/special_functions/beta.hpp>

#include "xfer/errors.hpp"

namespace xfer {

namespace {

std::vector<Atom> dirac_atoms(const DiracKernelSpec& s) {
  if (!(s.p >= 0.0 && s.p <= 1.0)) {
    throw InvalidSpec("dirac kernel needs p in [0,1], got " + std::to_string(s.p));
  }
  return {{s.p, 1.0}};
}

std::vector<Atom> explicit_atoms(const AtomsKernelSpec& s) {
  if (s.atoms.empty()) throw InvalidSpec("atoms kernel needs at least one atom");
  CompensatedSum total;
  for (const Atom& a : s.atoms) {
    if (!(a.location >= 0.0 && a.location <= 1.0)) {
      throw InvalidSpec("kernel atom outside [0,1]: " + std::to_string(a.location));
    }
    if (!(a.weight >= 0.0) || !std::isfinite(a.weight)) {
      throw InvalidSpec("kernel atom weight must be non-negative");
    }
    total.add(a.weight);
  }
  if (std::abs(total.value() - 1.0) > 1e-9) {
    throw InvalidSpec("kernel atom weights sum to " + std::to_string(total.value()) +
                      ", expected 1");
  }
  return s.atoms;
}

double table_density(const std::vector<std::pair<double, double>>& table, double z) {
  if (z < table.front().first || z > table.back().first) return 0.0;
  auto hi = std::lower_bound(table.begin(), table.end(), z,
                             [](const auto& p, double v) { return p.first < v; });
  if (hi == table.begin()) return hi->second;
  auto lo = std::prev(hi);
  if (hi->first == lo->first) return hi->second;
  const double t = (z - lo->first) / (hi->first - lo->first);
  return lo->second + t * (hi->second - lo->second);
}

std::vector<Atom> density_atoms(const DensityKernelSpec& s) {
  if (s.nodes < 1) throw InvalidSpec("density kernel needs at least one quadrature node");
  const std::size_t n = s.nodes;
  const double h = 1.0 / static_cast<double>(n);
  std::vector<Atom> atoms(n);
  for (std::size_t k = 0; k < n; ++k) atoms[k].location = (static_cast<double>(k) + 0.5) * h;

  switch (s.family) {
    case DensityFamily::uniform:
      for (Atom& a : atoms) a.weight = h;
      break;
    case DensityFamily::beta: {
      if (!(s.a > 0.0) || !(s.b > 0.0)) throw InvalidSpec("beta kernel needs a > 0 and b > 0");
      double prev = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double edge = k + 1 == n ? 1.0 : static_cast<double>(k + 1) * h;
        const double cur = boost::math::ibeta(s.a, s.b, edge);
        atoms[k].weight = std::max(0.0, cur - prev);
        prev = cur;
      }
      break;
    }
    case DensityFamily::table: {
      auto table = s.table;
      if (table.size() < 2) throw InvalidSpec("density table needs at least two points");
      std::stable_sort(table.begin(), table.end(),
                       [](const auto& p, const auto& q) { return p.first < q.first; });
      for (const auto& [z, value] : table) {
        if (!(z >= 0.0 && z <= 1.0)) throw InvalidSpec("density table point outside [0,1]");
        if (!(value >= 0.0) || !std::isfinite(value)) {
          throw InvalidSpec("density table has a negative or non-finite value");
        }
      }
      for (std::size_t k = 0; k < n; ++k) {
        const double lo = static_cast<double>(k) * h;
        const double hi = static_cast<double>(k + 1) * h;
        atoms[k].weight = 0.5 * h * (table_density(table, lo) + table_density(table, hi));
      }
      break;
    }
  }

  CompensatedSum total;
  for (const Atom& a : atoms) total.add(a.weight);
  if (!(total.value() > 0.0) || !std::isfinite(total.value())) {
    throw InvalidSpec("density kernel is not normalizable");
  }
  for (Atom& a : atoms) a.weight /= total.value();
  return atoms;
}

}  // namespace

TransferKernel make_kernel(const KernelSpec& spec) {
  std::vector<Atom> atoms = std::visit(
      [](const auto& s) -> std::vector<Atom> {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, DiracKernelSpec>) {
          return dirac_atoms(s);
        } else if constexpr (std::is_same_v<S, AtomsKernelSpec>) {
          return explicit_atoms(s);
        } else {
          return density_atoms(s);
        }
      },
      spec);

  TransferKernel k;
  k.atoms = AtomicMeasure(std::move(atoms));
  // Pin the total mass to 1 so downstream identities see an exact probability.
  const double m = k.atoms.mass();
  if (m != 1.0) k.atoms = k.atoms.scaled(1.0 / m);
  k.spec = spec;
  k.lambda1 = moment(k.atoms, 1);
  k.lambda2 = moment(k.atoms, 2);
  k.mass_at_0 = k.atoms.weight_at(0.0);
  k.mass_at_1 = k.atoms.weight_at(1.0);
  CompensatedSum acc;
  for (const Atom& a : k.atoms.atoms()) {
    acc.add(a.weight);
    k.cumulative.push_back(acc.value());
  }
  return k;
}

double kernel_sample(const TransferKernel& kernel, Rng& rng) {
  const auto atoms = kernel.atoms.atoms();
  if (atoms.size() == 1) return atoms.front().location;
  std::uniform_real_distribution<double> unif(0.0, kernel.cumulative.back());
  const double r = unif(rng);
  auto it = std::upper_bound(kernel.cumulative.begin(), kernel.cumulative.end(), r);
  if (it == kernel.cumulative.end()) --it;
  return atoms[static_cast<std::size_t>(it - kernel.cumulative.begin())].location;
}

KernelSpec kernel_spec_from_json(const nlohmann::json& j) {
  try {
    const std::string type = j.at("type").get<std::string>();
    if (type == "dirac") return DiracKernelSpec{j.at("p").get<double>()};
    if (type == "atoms") {
      AtomsKernelSpec s;
      for (const auto& pair : j.at("atoms")) {
        s.atoms.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
      }
      return s;
    }
    if (type == "density") {
      DensityKernelSpec s;
      s.nodes = j.value("nodes", std::size_t{512});
      const std::string name = j.at("name").get<std::string>();
      if (name == "uniform") {
        s.family = DensityFamily::uniform;
      } else if (name == "beta") {
        s.family = DensityFamily::beta;
        s.a = j.at("a").get<double>();
        s.b = j.at("b").get<double>();
      } else if (name == "table") {
        s.family = DensityFamily::table;
        for (const auto& pair : j.at("table")) {
          s.table.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
        }
      } else {
        throw InvalidSpec("unknown density family '" + name + "'");
      }
      return s;
    }
    throw InvalidSpec("unknown kernel type '" + type + "'");
  } catch (const nlohmann::json::exception& e) {
    throw InvalidSpec(std::string("kernel spec: ") + e.what());
  }
}

nlohmann::json kernel_spec_to_json(const KernelSpec& spec) {
  return std::visit(
      [](const auto& s) -> nlohmann::json {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, DiracKernelSpec>) {
          return {{"type", "dirac"}, {"p", s.p}};
        } else if constexpr (std::is_same_v<S, AtomsKernelSpec>) {
          auto atoms = nlohmann::json::array();
          for (const Atom& a : s.atoms) atoms.push_back({a.location, a.weight});
          return {{"type", "atoms"}, {"atoms", atoms}};
        } else {
          nlohmann::json j{{"type", "density"}, {"nodes", s.nodes}};
          switch (s.family) {
            case DensityFamily::uniform:
              j["name"] = "uniform";
              break;
            case DensityFamily::beta:
              j["name"] = "beta";
              j["a"] = s.a;
              j["b"] = s.b;
              break;
            case DensityFamily::table: {
              j["name"] = "table";
              auto table = nlohmann::json::array();
              for (const auto& [z, v] : s.table) table.push_back({z, v});
              j["table"] = table;
              break;
            }
          }
          return j;
        }
      },
      spec);
}

}  // namespace xfer
