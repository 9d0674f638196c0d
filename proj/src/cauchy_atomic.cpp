#include <cmath>

#include "cauchy_common.hpp"
#include "xfer/cauchy.hpp"
#include "xfer/errors.hpp"
#include "xfer/measure_io.hpp"
#include "xfer/transfer.hpp"

namespace xfer {

namespace {

// Integral of exp(H (dt - r) / dt) over r in [0, dt]: the Duhamel weight of
// anything injected during the step when h integrates to H over it.
double injection_factor(double H, double dt) {
  if (std::abs(H) < 1e-300) return dt;
  return dt * std::expm1(H) / H;
}

}  // namespace

Trajectory evolve_atomic(const Scenario& s) {
  validate_scenario(s);
  const SolverSettings& v = s.solver;
  const TransferKernel kernel = make_kernel(s.kernel);
  const detail::TimeGrid grid(v);

  Trajectory traj;
  AtomicMeasure n = compress(s.initial, v.max_atoms).measure;
  detail::record(traj, 0.0, n, 0.0);
  double max_rate = 0.0;

  std::vector<Atom> next;
  for (std::size_t k = 0; k < grid.steps; ++k) {
    const double t0 = grid.time(k);
    const double t1 = grid.time(k + 1);
    const double dt = t1 - t0;
    const double mass = n.mass();
    if (!(mass >= 1e-12)) {
      throw DegenerateMass("total mass fell to " + format_double(mass) + " at t = " + format_double(t0));
    }

    next.clear();
    for (const Atom& a : n.atoms()) {
      next.push_back({a.location, a.weight * std::exp(growth_integral(s.growth, a.location, t0, t1))});
    }
    if (const AtomicMeasure* g = s.source.at(t0)) {
      for (const Atom& a : g->atoms()) {
        const double f = injection_factor(growth_integral(s.growth, a.location, t0, t1), dt);
        next.push_back({a.location, a.weight * f});
      }
    }
    const TransferOptions opts = detail::transfer_options(v, kernel.atoms.size(), n.size());
    const AtomicMeasure tb = t_b(kernel, n, n, v.max_atoms, opts).measure;
    for (const Atom& a : tb.atoms()) {
      const double f = injection_factor(growth_integral(s.growth, a.location, t0, t1), dt);
      next.push_back({a.location, a.weight * f / mass});
    }

    AtomicMeasure raw(std::move(next));
    next = {};
    max_rate = std::max(max_rate, tv_distance(n, raw) / dt);
    n = compress(raw, v.max_atoms).measure;

    for (const Atom& a : n.atoms()) {
      if (!(a.weight > 0.0) || !std::isfinite(a.weight)) {
        throw DegenerateMass("non-positive or non-finite weight at t = " + format_double(t1));
      }
    }
    if (detail::snapshot_due(k + 1, grid, v.snapshot_every)) {
      detail::record(traj, t1, n, max_rate);
      max_rate = 0.0;
    }
  }
  return traj;
}

}  // namespace xfer
