#include <algorithm>
#include <cmath>
#include <string>

#include "xfer/cauchy.hpp"
#include "xfer/errors.hpp"
#include "xfer/measure_io.hpp"

namespace xfer {

namespace {

// Index i with grid[i] <= x < grid[i+1] and the interpolation fraction,
// clamped to the ends.
std::pair<std::size_t, double> locate(const std::vector<double>& grid, double x) {
  if (grid.size() == 1 || x <= grid.front()) return {0, 0.0};
  if (x >= grid.back()) return {grid.size() - 2, 1.0};
  const auto it = std::upper_bound(grid.begin(), grid.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - grid.begin()) - 1;
  return {i, (x - grid[i]) / (grid[i + 1] - grid[i])};
}

// h(times[i], x), linear in x.
double table_row(const TableGrowth& g, std::size_t i, double x) {
  const std::size_t nl = g.locations.size();
  const double* row = g.values.data() + i * nl;
  if (nl == 1) return row[0];
  const auto [j, f] = locate(g.locations, x);
  return row[j] + f * (row[j + 1] - row[j]);
}

double table_rate(const TableGrowth& g, double t, double x) {
  if (g.times.size() == 1) return table_row(g, 0, x);
  const auto [i, f] = locate(g.times, t);
  const double lo = table_row(g, i, x);
  const double hi = table_row(g, i + 1, x);
  return lo + f * (hi - lo);
}

// Piecewise linear in time, so trapezoids between breakpoints are exact.
double table_integral(const TableGrowth& g, double x, double s, double t) {
  std::vector<double> cuts{s};
  for (double tau : g.times) {
    if (tau > s && tau < t) cuts.push_back(tau);
  }
  cuts.push_back(t);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    total += 0.5 * (cuts[k + 1] - cuts[k]) * (table_rate(g, cuts[k], x) + table_rate(g, cuts[k + 1], x));
  }
  return total;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

void validate_growth(const GrowthSpec& h, double c_bar) {
  if (const auto* c = std::get_if<ConstantGrowth>(&h)) {
    require(std::isfinite(c->c), "growth: c must be finite");
    require(c->c <= c_bar, "growth violates h <= c_bar (c = " + format_double(c->c) +
                               ", c_bar = " + format_double(c_bar) + ")");
  } else if (const auto* a = std::get_if<AffineCappedGrowth>(&h)) {
    require(std::isfinite(a->a) && std::isfinite(a->b) && std::isfinite(a->xcap),
            "growth: affine_capped parameters must be finite");
    require(a->xcap > 0.0, "growth: affine_capped xcap must be positive");
    require(std::abs(a->b) <= c_bar, "growth violates |dh/dx| <= c_bar (|b| = " +
                                         format_double(std::abs(a->b)) +
                                         ", c_bar = " + format_double(c_bar) + ")");
    const double top = std::max(a->a, a->a + a->b * a->xcap);
    require(top <= c_bar, "growth violates h <= c_bar (sup h = " + format_double(top) +
                              ", c_bar = " + format_double(c_bar) + ")");
  } else {
    const auto& g = std::get<TableGrowth>(h);
    require(!g.times.empty() && !g.locations.empty(), "growth: table needs times and locations");
    require(g.values.size() == g.times.size() * g.locations.size(),
            "growth: table values must be times x locations");
    const auto increasing = [](const std::vector<double>& xs) {
      return std::adjacent_find(xs.begin(), xs.end(), [](double a, double b) { return !(a < b); }) ==
             xs.end();
    };
    require(increasing(g.times), "growth: table times must be strictly increasing");
    require(increasing(g.locations), "growth: table locations must be strictly increasing");
    require(g.locations.front() >= 0.0, "growth: table locations must be non-negative");
    for (double v : g.values) {
      require(std::isfinite(v), "growth: table values must be finite");
      require(v <= c_bar, "growth violates h <= c_bar (table value " + format_double(v) +
                              ", c_bar = " + format_double(c_bar) + ")");
    }
    const std::size_t nl = g.locations.size();
    for (std::size_t i = 0; i < g.times.size(); ++i) {
      for (std::size_t j = 0; j + 1 < nl; ++j) {
        const double q = (g.values[i * nl + j + 1] - g.values[i * nl + j]) /
                         (g.locations[j + 1] - g.locations[j]);
        require(std::abs(q) <= c_bar, "growth violates |dh/dx| <= c_bar (difference quotient " +
                                          format_double(q) + ", c_bar = " + format_double(c_bar) + ")");
      }
    }
  }
}

void validate_source(const SourceSpec& src, double c_bar) {
  std::vector<const SourcePiece*> order;
  for (const auto& p : src.pieces) {
    require(std::isfinite(p.t_start) && std::isfinite(p.t_end) && p.t_start >= 0.0 &&
                p.t_start < p.t_end,
            "source: each piece needs 0 <= t_start < t_end");
    const double weighted = p.measure.integrate([](double y) { return 1.0 + y * y; });
    require(weighted <= c_bar, "source violates integral of (1 + y^2) dg <= c_bar (" +
                                   format_double(weighted) + " > " + format_double(c_bar) + ")");
    order.push_back(&p);
  }
  std::sort(order.begin(), order.end(),
            [](const SourcePiece* a, const SourcePiece* b) { return a->t_start < b->t_start; });
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    require(order[k]->t_end <= order[k + 1]->t_start, "source: pieces overlap");
  }
}

}  // namespace

double growth_rate(const GrowthSpec& h, double t, double x) {
  if (const auto* c = std::get_if<ConstantGrowth>(&h)) return c->c;
  if (const auto* a = std::get_if<AffineCappedGrowth>(&h)) return a->a + a->b * std::min(x, a->xcap);
  return table_rate(std::get<TableGrowth>(h), t, x);
}

double growth_integral(const GrowthSpec& h, double x, double s, double t) {
  if (const auto* g = std::get_if<TableGrowth>(&h)) return table_integral(*g, x, s, t);
  return growth_rate(h, s, x) * (t - s);
}

std::optional<double> constant_rate(const GrowthSpec& h) {
  if (const auto* c = std::get_if<ConstantGrowth>(&h)) return c->c;
  if (const auto* a = std::get_if<AffineCappedGrowth>(&h); a && a->b == 0.0) return a->a;
  if (const auto* g = std::get_if<TableGrowth>(&h)) {
    if (!g->values.empty() &&
        std::all_of(g->values.begin(), g->values.end(), [&](double v) { return v == g->values[0]; })) {
      return g->values[0];
    }
  }
  return std::nullopt;
}

const AtomicMeasure* SourceSpec::at(double t) const {
  for (const auto& p : pieces) {
    if (p.t_start <= t && t < p.t_end) return &p.measure;
  }
  return nullptr;
}

std::string to_string(SolverMode m) {
  switch (m) {
    case SolverMode::atomic_euler:
      return "atomic_euler";
    case SolverMode::grid_picard:
      return "grid_picard";
    case SolverMode::particles:
      return "particles";
  }
  return "atomic_euler";
}

SolverMode solver_mode_from_string(const std::string& s) {
  if (s == "atomic_euler" || s == "atomic") return SolverMode::atomic_euler;
  if (s == "grid_picard" || s == "grid") return SolverMode::grid_picard;
  if (s == "particles" || s == "particle") return SolverMode::particles;
  throw ConfigError("unknown solver mode '" + s + "'");
}

void validate_scenario(const Scenario& s) {
  require(std::isfinite(s.c_bar) && s.c_bar > 0.0, "c_bar must be positive");
  make_kernel(s.kernel);
  require(s.initial.mass() > 0.0 && std::isfinite(s.initial.mass()), "initial measure must have positive mass");
  require(std::isfinite(moment(s.initial, 2)), "initial measure must have a finite second moment");
  validate_growth(s.growth, s.c_bar);
  validate_source(s.source, s.c_bar);

  const SolverSettings& v = s.solver;
  require(std::isfinite(v.dt) && v.dt > 0.0, "solver: dt must be positive");
  require(std::isfinite(v.t_end) && v.t_end > 0.0, "solver: t_end must be positive");
  require(v.t_end / v.dt <= 1e8, "solver: more than 1e8 time steps");
  require(v.snapshot_every >= 1, "solver: snapshot_every must be at least 1");
  require(v.max_atoms >= 2, "solver: max_atoms must be at least 2");
  require(v.partitions >= 1, "solver: partitions must be at least 1");

  switch (v.mode) {
    case SolverMode::atomic_euler:
      break;
    case SolverMode::grid_picard:
      require(v.eps > 0.0 && v.eps < 1.0, "solver: eps must lie in (0, 1)");
      require(v.nx >= 16, "solver: nx must be at least 16");
      require(std::isfinite(v.window) && v.window > 0.0, "solver: window must be positive");
      require(v.picard_tol > 0.0, "solver: picard_tol must be positive");
      require(v.picard_max >= 1, "solver: picard_max must be at least 1");
      break;
    case SolverMode::particles:
      require(v.dt <= 1.0, "solver: particle mode needs dt <= 1");
      require(v.n_particles >= 2, "solver: particle mode needs at least 2 particles");
      if (!constant_rate(s.growth)) {
        throw UnsupportedConfiguration("particle mode supports constant growth only");
      }
      if (!s.source.empty()) throw UnsupportedConfiguration("particle mode supports g = 0 only");
      break;
  }
}

double TestFunction::operator()(double x) const {
  switch (kind) {
    case Kind::one:
      return 1.0;
    case Kind::x:
      return x;
    case Kind::x2:
      return x * x;
    case Kind::exp_neg:
      return std::exp(-x);
    case Kind::min_k:
      return std::min(x, k);
  }
  return 0.0;
}

std::string TestFunction::name() const {
  switch (kind) {
    case Kind::one:
      return "1";
    case Kind::x:
      return "x";
    case Kind::x2:
      return "x^2";
    case Kind::exp_neg:
      return "exp(-x)";
    case Kind::min_k:
      return "min(x," + format_double(k) + ")";
  }
  return "?";
}

Trajectory evolve(const Scenario& s) {
  switch (s.solver.mode) {
    case SolverMode::atomic_euler:
      return evolve_atomic(s);
    case SolverMode::grid_picard:
      return evolve_grid_picard(s);
    case SolverMode::particles:
      return evolve_particles(s);
  }
  return evolve_atomic(s);
}

}  // namespace xfer
