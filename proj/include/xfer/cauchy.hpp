#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "xfer/kernel.hpp"
#include "xfer/measure.hpp"

namespace xfer {

// Growth rate h(t, x).

struct ConstantGrowth {
  double c = -1.0;
};

/// h(t, x) = a + b min(x, xcap).
struct AffineCappedGrowth {
  double a = 0.0;
  double b = 0.0;
  double xcap = 1.0;
};

/// Bilinear interpolation on a (times x locations) table, held constant
/// outside the table range. values[i * locations.size() + j] = h(times[i], locations[j]).
struct TableGrowth {
  std::vector<double> times;
  std::vector<double> locations;
  std::vector<double> values;
};

using GrowthSpec = std::variant<ConstantGrowth, AffineCappedGrowth, TableGrowth>;

double growth_rate(const GrowthSpec& h, double t, double x);

/// Integral of h(sigma, x) over sigma in [s, t].
double growth_integral(const GrowthSpec& h, double x, double s, double t);

/// The value when h does not depend on (t, x).
std::optional<double> constant_rate(const GrowthSpec& h);

// Source g_t, piecewise constant in time.

struct SourcePiece {
  double t_start = 0.0;
  double t_end = 0.0;
  AtomicMeasure measure;
};

struct SourceSpec {
  std::vector<SourcePiece> pieces;

  /// The piece active at time t (t_start <= t < t_end), or nullptr.
  [[nodiscard]] const AtomicMeasure* at(double t) const;
  [[nodiscard]] bool empty() const { return pieces.empty(); }
};

enum class SolverMode { atomic_euler, grid_picard, particles };

std::string to_string(SolverMode m);
SolverMode solver_mode_from_string(const std::string& s);

struct SolverSettings {
  SolverMode mode = SolverMode::atomic_euler;
  double dt = 1e-3;
  double t_end = 1.0;
  std::size_t max_atoms = 256;
  std::uint64_t seed = 1;
  std::size_t snapshot_every = 100;

  // particles
  std::size_t n_particles = 10'000;
  bool symmetric = false;

  // grid_picard
  double eps = 0.01;
  std::size_t nx = 2048;
  double picard_tol = 1e-9;
  std::size_t picard_max = 50;
  double window = 0.1;
  /// Deposit with Gamma_eps(x - y) instead of Gamma_eps(y - x).
  bool mirrored = false;

  // forwarded to t_b; factor_atoms = 0 factors at 2 * max_atoms only when
  // the exact product would exceed the cap
  std::size_t factor_atoms = 0;
  std::size_t partitions = 1;
};

struct Scenario {
  KernelSpec kernel = DiracKernelSpec{0.0};
  AtomicMeasure initial;
  GrowthSpec growth = ConstantGrowth{-1.0};
  SourceSpec source;
  SolverSettings solver;
  /// Bound shared by h, its x-derivative and the source moments.
  double c_bar = 10.0;
};

/// Throws ConfigError (or UnsupportedConfiguration) naming the first violated
/// requirement. Every solver calls this before running.
void validate_scenario(const Scenario& s);

struct DiagnosticRow {
  double t = 0.0;
  double mass = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  double mass_at_zero = 0.0;
  /// Largest TV(n_a, n_b) / (b - a) observed since the previous row.
  double tv_rate = 0.0;
  std::size_t n_atoms = 0;
};

struct Snapshot {
  double t = 0.0;
  AtomicMeasure measure;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  std::vector<DiagnosticRow> diagnostics;
};

/// Exponential Euler on the mild form, compressed to max_atoms every step.
Trajectory evolve_atomic(const Scenario& s);

/// Truncated, mollified problem on a uniform grid over [eps, 1/eps], solved
/// window by window with Picard iteration.
Trajectory evolve_grid_picard(const Scenario& s);

/// Stochastic pair-exchange particles. g = 0 and constant h only.
Trajectory evolve_particles(const Scenario& s);

/// Dispatch on s.solver.mode.
Trajectory evolve(const Scenario& s);

struct TestFunction {
  enum class Kind { one, x, x2, exp_neg, min_k } kind = Kind::one;
  double k = 1.0;  // cap for min_k

  [[nodiscard]] double operator()(double x) const;
  [[nodiscard]] std::string name() const;
};

struct Residual {
  std::size_t function = 0;  // index into the test-function list
  double t = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
};

/// Both sides of the Duhamel identity at every snapshot time, time integrals
/// by the trapezoid rule over the snapshots. Throws InsufficientData for
/// fewer than 3 snapshots.
std::vector<Residual> mild_residual(const Trajectory& traj, const Scenario& s,
                                    std::span<const TestFunction> functions);

}  // namespace xfer
