#pragma once

#include <vector>

#include "xfer/kernel.hpp"
#include "xfer/measure.hpp"

// Reference computations used to check the solvers. Nothing here calls into
// the transfer, fixed-point or Cauchy modules.
namespace xfer::oracles {

struct MomentOdeState {
  double t = 0.0;
  double m0 = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;

  [[nodiscard]] double mean() const { return m1 / m0; }
  [[nodiscard]] double variance() const { return m2 / m0 - (m1 / m0) * (m1 / m0); }
};

/// Closed moment system of dn/dt = c n + T_B[n, n] / |n| (no source):
///   M0' = (c + 1) M0,  M1' = (c + 1) M1,
///   M2' = c M2 + (1 - 2 l1 + 2 l2) M2 + 2 l1 (1 - l1) M1^2 / M0,
/// integrated with classical RK4 at fixed step dt. Returns every step,
/// starting with t = 0.
std::vector<MomentOdeState> moment_ode_solve(const TransferKernel& kernel, double m0, double m1,
                                             double m2, double c, double t_end, double dt);

/// Largest product enumerate_t_b accepts.
inline constexpr std::size_t kEnumerationCap = 1'000'000;

/// Four nested loops over (z1, z2, x1, x2) accumulating into an ordered map.
AtomicMeasure enumerate_t_b(const TransferKernel& kernel, const AtomicMeasure& u,
                            const AtomicMeasure& v);

}  // namespace xfer::oracles
