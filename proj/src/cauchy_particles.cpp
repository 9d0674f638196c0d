#include <cmath>

#include "cauchy_common.hpp"
#include "xfer/cauchy.hpp"
#include "xfer/errors.hpp"

namespace xfer {

namespace {

AtomicMeasure empirical(const std::vector<double>& xs, double mass) {
  const double w = mass / static_cast<double>(xs.size());
  std::vector<Atom> atoms;
  atoms.reserve(xs.size());
  for (double x : xs) atoms.push_back({x, w});
  return AtomicMeasure(std::move(atoms));
}

}  // namespace

Trajectory evolve_particles(const Scenario& s) {
  validate_scenario(s);
  const SolverSettings& v = s.solver;
  const TransferKernel kernel = make_kernel(s.kernel);
  const detail::TimeGrid grid(v);
  // Constant h: the growth term scales mass by e^{c t}, the normalized transfer
  // term adds |n| per unit time while leaving the trait law to the exchanges.
  const double rate = *constant_rate(s.growth) + 1.0;
  const double m0 = s.initial.mass();
  const std::size_t n = v.n_particles;

  Rng rng(v.seed);
  std::vector<double> xs = sample(s.initial, n, rng);
  std::vector<double> old;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> partner(0, n - 2);
  const auto pick_partner = [&](std::size_t i) {
    std::size_t j = partner(rng);
    return j >= i ? j + 1 : j;
  };

  Trajectory traj;
  AtomicMeasure last = empirical(xs, m0);
  detail::record(traj, 0.0, last, 0.0);
  double last_t = 0.0;

  for (std::size_t k = 0; k < grid.steps; ++k) {
    const double dt = grid.time(k + 1) - grid.time(k);
    const double p = -std::expm1(-dt);
    if (v.symmetric) {
      // Sequential pair events, each agent initiating with probability p / 2.
      for (std::size_t i = 0; i < n; ++i) {
        if (unif(rng) >= 0.5 * p) continue;
        const std::size_t j = pick_partner(i);
        const double give_i = kernel_sample(kernel, rng) * xs[i];
        const double give_j = kernel_sample(kernel, rng) * xs[j];
        xs[i] = xs[i] - give_i + give_j;
        xs[j] = xs[j] - give_j + give_i;
      }
    } else {
      // Synchronous one-sided update against the previous state.
      old = xs;
      for (std::size_t i = 0; i < n; ++i) {
        if (unif(rng) >= p) continue;
        const std::size_t j = pick_partner(i);
        const double z1 = kernel_sample(kernel, rng);
        const double z2 = kernel_sample(kernel, rng);
        xs[i] = old[i] * (1.0 - z1) + old[j] * z2;
      }
    }

    if (detail::snapshot_due(k + 1, grid, v.snapshot_every)) {
      const double t = grid.time(k + 1);
      AtomicMeasure snap = empirical(xs, m0 * std::exp(rate * t));
      if (!(snap.mass() >= 1e-12)) throw DegenerateMass("particle mass underflow");
      const double tv = tv_distance(last, snap) / (t - last_t);
      detail::record(traj, t, snap, tv);
      last = std::move(snap);
      last_t = t;
    }
  }
  return traj;
}

}  // namespace xfer
