#include <cmath>

#include "xfer/cauchy.hpp"
#include "xfer/errors.hpp"
#include "xfer/transfer.hpp"

namespace xfer {

std::vector<Residual> mild_residual(const Trajectory& traj, const Scenario& s,
                                    std::span<const TestFunction> functions) {
  const auto& snaps = traj.snapshots;
  if (snaps.size() < 3) throw InsufficientData("mild_residual needs at least 3 snapshots");
  const TransferKernel kernel = make_kernel(s.kernel);
  const std::size_t ns = snaps.size();
  const std::optional<double> c = constant_rate(s.growth);

  // Trapezoid weights on snapshots 0..a, as a function of a.
  const auto trap = [&](std::size_t q, std::size_t a) {
    double w = 0.0;
    if (q > 0) w += 0.5 * (snaps[q].t - snaps[q - 1].t);
    if (q < a) w += 0.5 * (snaps[q + 1].t - snaps[q].t);
    return w;
  };

  std::vector<Residual> out;
  for (std::size_t f = 0; f < functions.size(); ++f) {
    const TestFunction& phi = functions[f];

    // Integrand of the time integral at snapshot q, weighted for evaluation
    // time t: integral of e^{H(x, s_q, t)} phi against g and T/|n|.
    const auto integrand = [&](std::size_t q, double t) {
      const double sq = snaps[q].t;
      const AtomicMeasure& n = snaps[q].measure;
      const auto weight = [&](double x) { return std::exp(growth_integral(s.growth, x, sq, t)) * phi(x); };
      double value = integrate_t_b(kernel, n, n, weight) / n.mass();
      if (const AtomicMeasure* g = s.source.at(sq)) value += g->integrate(weight);
      return value;
    };

    // With constant h the time dependence factors out of the integrand.
    std::vector<double> at_own_time;
    if (c) {
      at_own_time.resize(ns);
      for (std::size_t q = 0; q < ns; ++q) at_own_time[q] = integrand(q, snaps[q].t);
    }

    for (std::size_t a = 0; a < ns; ++a) {
      const double t = snaps[a].t;
      const double lhs = snaps[a].measure.integrate(phi);
      CompensatedSum rhs;
      rhs.add(snaps[0].measure.integrate(
          [&](double x) { return std::exp(growth_integral(s.growth, x, snaps[0].t, t)) * phi(x); }));
      for (std::size_t q = 0; q <= a && a > 0; ++q) {
        const double value = c ? std::exp(*c * (t - snaps[q].t)) * at_own_time[q] : integrand(q, t);
        rhs.add(trap(q, a) * value);
      }
      out.push_back({f, t, lhs, rhs.value(), std::abs(lhs - rhs.value())});
    }
  }
  return out;
}

}  // namespace xfer
