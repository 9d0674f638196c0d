#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "xfer/cauchy.hpp"
#include "xfer/transfer.hpp"

namespace xfer::detail {

// Uniform steps of length dt; the last one is shortened to land on t_end.
struct TimeGrid {
  double dt;
  double t_end;
  std::size_t steps;

  explicit TimeGrid(const SolverSettings& v)
      : dt(v.dt), t_end(v.t_end), steps(static_cast<std::size_t>(std::ceil(v.t_end / v.dt - 1e-9))) {
    steps = std::max<std::size_t>(steps, 1);
  }

  [[nodiscard]] double time(std::size_t k) const {
    return k >= steps ? t_end : std::min(static_cast<double>(k) * dt, t_end);
  }
};

// factor_atoms = 0 keeps exact enumeration while the m^2 n^2 product fits
// under the cap and switches to factors of 2 * max_atoms beyond it.
inline TransferOptions transfer_options(const SolverSettings& v, std::size_t kernel_atoms, std::size_t n_atoms) {
  TransferOptions o;
  o.partitions = v.partitions;
  o.factor_atoms = v.factor_atoms;
  const double m = static_cast<double>(kernel_atoms);
  const double n = static_cast<double>(n_atoms);
  if (o.factor_atoms == 0 && m * m * n * n > static_cast<double>(o.hard_cap)) o.factor_atoms = 2 * v.max_atoms;
  return o;
}

inline DiagnosticRow make_row(double t, const AtomicMeasure& u, double tv_rate) {
  return {t, u.mass(), u.mean(), u.variance(), u.mass_at_zero(), tv_rate, u.size()};
}

inline bool snapshot_due(std::size_t k, const TimeGrid& grid, std::size_t every) {
  return k == 0 || k == grid.steps || k % every == 0;
}

inline void record(Trajectory& traj, double t, AtomicMeasure u, double tv_rate) {
  traj.diagnostics.push_back(make_row(t, u, tv_rate));
  traj.snapshots.push_back({t, std::move(u)});
}

}  // namespace xfer::detail
