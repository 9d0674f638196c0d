#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "xfer/kernel.hpp"
#include "xfer/measure.hpp"
#include "xfer/transfer.hpp"

namespace xfer {

enum class FixedPointClass { dirac_at_zero, diffuse_candidate, dirac_at_Z, not_converged };

std::string to_string(FixedPointClass c);

struct FixedPointSettings {
  std::size_t max_iter = 10'000;
  double tol = 1e-8;
  std::size_t max_atoms = 1024;
  /// Passed to t_b. 0 selects 2 * max_atoms.
  std::size_t factor_atoms = 0;
  std::size_t partitions = 1;
  /// Project onto a fixed lattice instead of greedy compression when B has
  /// positive variance and l1 > l2.
  bool lattice = true;
};

/// One row per iteration, k = 0 being the initial measure.
struct FixedPointRow {
  std::size_t iter = 0;
  double mass = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  double mass_at_zero = 0.0;
  double w1_step = 0.0;
  std::size_t n_atoms = 0;
};

struct FixedPointReport {
  AtomicMeasure iterate;
  std::size_t iterations = 0;
  double w1_step = 0.0;
  double mass_at_zero = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  /// Var(B) M1^2 / (l1 - l2) when l1 > l2.
  std::optional<double> predicted_variance;
  bool converged = false;
  bool lattice = false;
  FixedPointClass classification = FixedPointClass::not_converged;
  std::vector<FixedPointRow> history;
};

/// Picard iteration u <- compress(T_B[u, u], max_atoms) on probability
/// measures, stopped when the W1 distance between consecutive iterates drops
/// to tol or after max_iter steps. Throws InvalidArgument unless |u0| = 1
/// within 1e-9.
///
/// Greedy merging picks different pairs from one iterate to the next, which
/// leaves a W1 jitter of order span / max_atoms that never dies out. For
/// kernels with a diffuse limit the lattice route is used instead: both
/// factors x1 (1 - z1) and x2 z2 are split linearly onto nodes k h (mass and
/// mean exact), summed by index, and mass above the top node is kept as one
/// atom at its barycenter. That map is continuous so the iteration settles.
FixedPointReport iterate_fixed_point(const TransferKernel& kernel, const AtomicMeasure& u0,
                                     const FixedPointSettings& settings = {});

/// W1(T_B[delta_Z, delta_Z], delta_Z). Zero exactly when B is a single atom.
double dirac_displacement(const TransferKernel& kernel, double z);

/// Weight that T_B[u, u] puts at exactly 0.
double zero_mass_flow(const TransferKernel& kernel, const AtomicMeasure& u);

}  // namespace xfer
