#include "xfer/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "xfer/cauchy.hpp"
#include "xfer/errors.hpp"
#include "xfer/fixedpoint.hpp"
#include "xfer/measure_io.hpp"
#include "xfer/oracles.hpp"
#include "xfer/scenario_io.hpp"
#include "xfer/transfer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace xfer::cli {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << content;
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Collects the files a command writes and the manifest that lists them.
class OutputDir {
 public:
  OutputDir(const std::string& dir, std::string hash_input, std::uint64_t seed)
      : dir_(dir), hash_(fnv1a64(hash_input)), seed_(seed), started_(utc_now()) {
    fs::create_directories(dir_);
  }

  void write(const std::string& relative, const std::string& content) {
    const fs::path p = dir_ / relative;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    write_atomic(p, content);
    files_.push_back(relative);
  }

  void finish() {
    const json manifest{{"scenario_hash", hex64(hash_)},
                        {"seed", seed_},
                        {"tool_version", kVersion},
                        {"started", started_},
                        {"finished", utc_now()},
                        {"files", files_}};
    write_atomic(dir_ / "manifest.json", manifest.dump(2) + "\n");
  }

 private:
  fs::path dir_;
  std::uint64_t hash_;
  std::uint64_t seed_;
  std::string started_;
  std::vector<std::string> files_;
};

std::size_t thread_cap() {
  const char* env = std::getenv("XFER_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0' || v == 0) throw ConfigError("XFER_THREADS must be a positive integer");
  return static_cast<std::size_t>(v);
}

std::size_t capped_partitions(std::size_t requested) {
  const std::size_t cap = thread_cap();
  return cap == 0 ? requested : std::min(requested, cap);
}

struct Common {
  std::string scenario;
  std::string kernel;
  std::string out;
  std::string u;
  std::string v;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t max_atoms = 0;
  double dt = 0.0;
  double t_end = 0.0;
  std::string schemes = "atomic,grid";
};

struct Loaded {
  Scenario scenario;
  std::string bytes;
};

Loaded load(const Common& c) {
  if (c.scenario.empty()) throw ConfigError("--scenario is required");
  Loaded l;
  l.bytes = read_file(c.scenario);
  json j;
  try {
    j = json::parse(l.bytes);
  } catch (const json::exception& e) {
    throw ConfigError("scenario " + c.scenario + " is not valid JSON: " + e.what());
  }
  l.scenario = scenario_from_json(j);
  SolverSettings& v = l.scenario.solver;
  if (c.seed_set) v.seed = c.seed;
  if (c.max_atoms > 0) v.max_atoms = c.max_atoms;
  if (c.dt > 0.0) v.dt = c.dt;
  if (c.t_end > 0.0) v.t_end = c.t_end;
  v.partitions = capped_partitions(v.partitions);
  return l;
}

// Kernel from --kernel (a kernel JSON file) or from the scenario.
std::pair<TransferKernel, std::string> load_kernel(const Common& c) {
  if (!c.kernel.empty()) {
    const std::string bytes = read_file(c.kernel);
    try {
      return {make_kernel(kernel_spec_from_json(json::parse(bytes))), bytes};
    } catch (const json::exception& e) {
      throw ConfigError("kernel " + c.kernel + ": " + e.what());
    }
  }
  if (!c.scenario.empty()) {
    Loaded l = load(c);
    return {make_kernel(l.scenario.kernel), l.bytes};
  }
  throw ConfigError("give --kernel or --scenario");
}

std::pair<AtomicMeasure, AtomicMeasure> load_inputs(const Common& c) {
  if (c.u.empty()) throw ConfigError("--u is required");
  AtomicMeasure u = load_measure(c.u);
  AtomicMeasure v = c.v.empty() ? u : load_measure(c.v);
  return {std::move(u), std::move(v)};
}

void emit(OutputDir* out, const std::string& name, const std::string& content) {
  if (out != nullptr) {
    out->write(name, content);
  } else {
    std::cout << content;
  }
}

int cmd_apply(const Common& c) {
  auto [kernel, kbytes] = load_kernel(c);
  auto [u, v] = load_inputs(c);
  TransferOptions opts;
  const std::size_t max_atoms = c.max_atoms > 0 ? c.max_atoms : 1024;
  const Compressed r = t_b(kernel, u, v, max_atoms, opts);
  json doc = measure_to_json(r.measure);
  doc["merges_performed"] = r.report.merges_performed;
  doc["w1_error_bound"] = r.report.w1_error_bound;
  std::unique_ptr<OutputDir> out;
  if (!c.out.empty()) out = std::make_unique<OutputDir>(c.out, kbytes, 0);
  emit(out.get(), "result.json", doc.dump() + "\n");
  if (out) out->finish();
  return 0;
}

int cmd_moments(const Common& c) {
  auto [kernel, kbytes] = load_kernel(c);
  auto [u, v] = load_inputs(c);
  const PredictedMoments p = predicted_moments(kernel, u, v);
  const AtomicMeasure exact = t_b_exact(kernel, u, v);
  std::ostringstream os;
  os << "moment,predicted,actual,relative_error\n";
  const double predicted[3] = {p.m0, p.m1, p.m2};
  for (int k = 0; k < 3; ++k) {
    const double actual = moment(exact, k);
    const double rel = predicted[k] == 0.0 ? std::abs(actual) : std::abs(actual - predicted[k]) / std::abs(predicted[k]);
    os << k << ',' << format_double(predicted[k]) << ',' << format_double(actual) << ',' << format_double(rel) << '\n';
  }
  std::unique_ptr<OutputDir> out;
  if (!c.out.empty()) out = std::make_unique<OutputDir>(c.out, kbytes, 0);
  emit(out.get(), "moments.csv", os.str());
  if (out) out->finish();
  return 0;
}

int cmd_fixpoint(const Common& c, const std::string& u0_path, double tol, std::size_t max_iter) {
  auto [kernel, kbytes] = load_kernel(c);
  const AtomicMeasure u0 = u0_path.empty() ? AtomicMeasure::dirac(1.0) : load_measure(u0_path);
  FixedPointSettings fs_;
  fs_.tol = tol;
  fs_.max_iter = max_iter;
  if (c.max_atoms > 0) fs_.max_atoms = c.max_atoms;
  fs_.partitions = capped_partitions(1);
  const FixedPointReport r = iterate_fixed_point(kernel, u0, fs_);

  std::ostringstream hist;
  hist << "iter,mass,mean,variance,mass_at_zero,w1_step,n_atoms\n";
  for (const auto& row : r.history) {
    hist << row.iter << ',' << format_double(row.mass) << ',' << format_double(row.mean) << ','
         << format_double(row.variance) << ',' << format_double(row.mass_at_zero) << ','
         << format_double(row.w1_step) << ',' << row.n_atoms << '\n';
  }
  json summary{{"classification", to_string(r.classification)},
               {"converged", r.converged},
               {"lattice", r.lattice},
               {"iterations", r.iterations},
               {"w1_step", r.w1_step},
               {"mean", r.mean},
               {"variance", r.variance},
               {"mass_at_zero", r.mass_at_zero},
               {"iterate", measure_to_json(r.iterate)}};
  summary["predicted_variance"] = r.predicted_variance ? json(*r.predicted_variance) : json(nullptr);

  if (!c.out.empty()) {
    OutputDir out(c.out, kbytes, 0);
    out.write("history.csv", hist.str());
    out.write("fixpoint.json", summary.dump(2) + "\n");
    out.finish();
  }
  std::cout << to_string(r.classification) << " after " << r.iterations << " iterations, mean "
            << format_double(r.mean) << ", variance " << format_double(r.variance) << '\n';
  return 0;
}

int cmd_evolve(const Common& c) {
  const Loaded l = load(c);
  validate_scenario(l.scenario);
  const Trajectory traj = evolve(l.scenario);
  if (c.out.empty()) {
    write_trajectory_csv(std::cout, traj);
    return 0;
  }
  OutputDir out(c.out, l.bytes, l.scenario.solver.seed);
  std::ostringstream csv;
  write_trajectory_csv(csv, traj);
  out.write("trajectory.csv", csv.str());
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    char name[40];
    std::snprintf(name, sizeof name, "snapshots/%06zu.json", i);
    json doc = measure_to_json(traj.snapshots[i].measure);
    doc["t"] = traj.snapshots[i].t;
    out.write(name, doc.dump() + "\n");
  }
  out.finish();
  return 0;
}

int cmd_mc(const Common& c, const std::vector<std::size_t>& samples) {
  auto [kernel, kbytes] = load_kernel(c);
  auto [u, v] = load_inputs(c);
  const AtomicMeasure exact = t_b_exact(kernel, u, v);
  Rng rng(c.seed_set ? c.seed : 1);
  std::ostringstream os;
  os << "n_samples,normalized_w1\n";
  for (std::size_t n : samples) {
    const AtomicMeasure est = t_b_mc(kernel, u, v, n, rng);
    os << n << ',' << format_double(normalized_w1(est, exact)) << '\n';
  }
  std::unique_ptr<OutputDir> out;
  if (!c.out.empty()) out = std::make_unique<OutputDir>(c.out, kbytes, c.seed_set ? c.seed : 1);
  emit(out.get(), "mc.csv", os.str());
  if (out) out->finish();
  return 0;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

const Snapshot* at_time(const Trajectory& traj, double t) {
  for (const auto& s : traj.snapshots) {
    if (std::abs(s.t - t) <= 1e-9 * std::max(1.0, std::abs(t))) return &s;
  }
  return nullptr;
}

int cmd_compare(const Common& c) {
  const Loaded l = load(c);
  validate_scenario(l.scenario);
  std::vector<std::string> names;
  bool ode = false;
  for (const auto& s : split(c.schemes)) {
    if (s == "ode") {
      ode = true;
    } else {
      solver_mode_from_string(s);
      names.push_back(s);
    }
  }
  if (names.empty()) throw ConfigError("--schemes needs at least one of atomic, grid, particles");

  std::vector<std::future<Trajectory>> jobs;
  for (const auto& name : names) {
    Scenario s = l.scenario;
    s.solver.mode = solver_mode_from_string(name);
    jobs.push_back(std::async(std::launch::async, [s = std::move(s)] { return evolve(s); }));
  }
  std::vector<Trajectory> runs;
  for (auto& j : jobs) runs.push_back(j.get());

  std::ostringstream os;
  os << "t,pair,metric,value\n";
  const Trajectory& ref = runs.front();
  for (std::size_t r = 1; r < runs.size(); ++r) {
    for (const auto& snap : ref.snapshots) {
      const Snapshot* other = at_time(runs[r], snap.t);
      if (other == nullptr) continue;
      os << format_double(snap.t) << ',' << names[0] << '-' << names[r] << ",normalized_w1,"
         << format_double(normalized_w1(snap.measure, other->measure)) << '\n';
    }
  }
  if (ode) {
    const auto rate = constant_rate(l.scenario.growth);
    if (!rate || !l.scenario.source.empty()) {
      throw UnsupportedConfiguration("the moment ODE needs constant growth and no source");
    }
    const AtomicMeasure& n0 = l.scenario.initial;
    const auto states = oracles::moment_ode_solve(make_kernel(l.scenario.kernel), moment(n0, 0),
                                                  moment(n0, 1), moment(n0, 2), *rate,
                                                  l.scenario.solver.t_end, l.scenario.solver.dt);
    for (std::size_t r = 0; r < runs.size(); ++r) {
      for (const auto& snap : runs[r].snapshots) {
        const oracles::MomentOdeState* match = nullptr;
        for (const auto& st : states) {
          if (std::abs(st.t - snap.t) <= 1e-9 * std::max(1.0, snap.t)) match = &st;
        }
        if (match == nullptr) continue;
        const std::string pair = names[r] + "-ode";
        os << format_double(snap.t) << ',' << pair << ",mass_error,"
           << format_double(std::abs(snap.measure.mass() - match->m0)) << '\n';
        os << format_double(snap.t) << ',' << pair << ",mean_error,"
           << format_double(std::abs(snap.measure.mean() - match->mean())) << '\n';
        os << format_double(snap.t) << ',' << pair << ",variance_error,"
           << format_double(std::abs(snap.measure.variance() - match->variance())) << '\n';
      }
    }
  }
  std::unique_ptr<OutputDir> out;
  if (!c.out.empty()) out = std::make_unique<OutputDir>(c.out, l.bytes, l.scenario.solver.seed);
  emit(out.get(), "compare.csv", os.str());
  if (out) out->finish();
  return 0;
}

int cmd_validate(const Common& c) {
  const Loaded l = load(c);
  validate_scenario(l.scenario);
  std::cout << "ok: " << c.scenario << '\n';
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Transfer-operator simulations on atomic measures", "xfer"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common c;
  std::string u0;
  double tol = 1e-8;
  std::size_t max_iter = 10'000;
  std::vector<std::size_t> samples{1000, 10'000, 100'000};

  const auto add_seed = [&](CLI::App* sub) {
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t s) { c.seed = s, c.seed_set = true; }, "RNG seed (overrides the scenario)");
  };
  const auto add_kernel_inputs = [&](CLI::App* sub) {
    sub->add_option("--kernel", c.kernel, "kernel JSON file");
    sub->add_option("--scenario", c.scenario, "scenario JSON file (its kernel is used)");
    sub->add_option("--u", c.u, "first measure (.json or .csv)");
    sub->add_option("--v", c.v, "second measure (defaults to --u)");
    sub->add_option("--out", c.out, "output directory");
  };
  const auto add_run = [&](CLI::App* sub) {
    sub->add_option("--scenario", c.scenario, "scenario JSON file")->required();
    sub->add_option("--out", c.out, "output directory");
    add_seed(sub);
    sub->add_option("--max-atoms", c.max_atoms, "atom budget after compression");
    sub->add_option("--dt", c.dt, "time step");
    sub->add_option("--t-end", c.t_end, "final time");
  };

  auto* apply = app.add_subcommand("apply", "one application of T_B to input measures");
  add_kernel_inputs(apply);
  apply->add_option("--max-atoms", c.max_atoms, "atom budget after compression");

  auto* moments = app.add_subcommand("moments", "predicted vs enumerated moments of T_B[u, v]");
  add_kernel_inputs(moments);

  auto* fixpoint = app.add_subcommand("fixpoint", "iterate u <- T_B[u, u] on probability measures");
  fixpoint->add_option("--kernel", c.kernel, "kernel JSON file");
  fixpoint->add_option("--scenario", c.scenario, "scenario JSON file (its kernel is used)");
  fixpoint->add_option("--u0", u0, "initial probability measure (default: Dirac at 1)");
  fixpoint->add_option("--out", c.out, "output directory");
  fixpoint->add_option("--max-atoms", c.max_atoms, "atom budget after compression");
  fixpoint->add_option("--tol", tol, "W1 step tolerance");
  fixpoint->add_option("--max-iter", max_iter, "iteration limit");

  auto* evolve_cmd = app.add_subcommand("evolve", "integrate a scenario in time");
  add_run(evolve_cmd);

  auto* mc = app.add_subcommand("mc", "Monte Carlo estimator against the exact product");
  add_kernel_inputs(mc);
  add_seed(mc);
  mc->add_option("--samples", samples, "sample counts")->delimiter(',');

  auto* compare = app.add_subcommand("compare", "cross-check schemes and the moment ODE");
  add_run(compare);
  compare->add_option("--schemes", c.schemes, "comma list of atomic, grid, particles, ode");

  auto* validate = app.add_subcommand("validate", "check a scenario against the model bounds");
  validate->add_option("--scenario", c.scenario, "scenario JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code != 0 && !e.get_name().empty()) std::cerr << app.help();
    return code == 0 ? 0 : 2;
  }

  try {
    if (*apply) return cmd_apply(c);
    if (*moments) return cmd_moments(c);
    if (*fixpoint) return cmd_fixpoint(c, u0, tol, max_iter);
    if (*evolve_cmd) return cmd_evolve(c);
    if (*mc) return cmd_mc(c, samples);
    if (*compare) return cmd_compare(c);
    if (*validate) return cmd_validate(c);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  std::cerr << app.help();
  return 2;
}

}  // namespace xfer::cli
