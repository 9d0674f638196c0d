#include "xfer/oracles.hpp"

#include <array>
#include <cmath>
#include <map>
#include <string>

#include "xfer/errors.hpp"

namespace xfer::oracles {

std::vector<MomentOdeState> moment_ode_solve(const TransferKernel& kernel, double m0, double m1,
                                             double m2, double c, double t_end, double dt) {
  if (!(m0 > 0.0)) throw InvalidArgument("moment_ode_solve: initial mass must be positive");
  if (!(dt > 0.0) || !(t_end >= 0.0)) throw InvalidArgument("moment_ode_solve: bad time grid");

  const double l1 = kernel.lambda1;
  const double l2 = kernel.lambda2;
  const double a = c + 1.0 - 2.0 * l1 + 2.0 * l2;
  const double b = 2.0 * l1 * (1.0 - l1);
  using State = std::array<double, 3>;
  const auto rhs = [&](const State& s) -> State {
    if (!(s[0] > 0.0)) throw DegenerateMass("moment ODE: mass reached zero");
    return {(c + 1.0) * s[0], (c + 1.0) * s[1], a * s[2] + b * s[1] * s[1] / s[0]};
  };

  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  std::vector<MomentOdeState> out;
  out.reserve(steps + 1);
  State s{m0, m1, m2};
  out.push_back({0.0, s[0], s[1], s[2]});
  for (std::size_t k = 0; k < steps; ++k) {
    const State k1 = rhs(s);
    State tmp;
    for (int i = 0; i < 3; ++i) tmp[i] = s[i] + 0.5 * dt * k1[i];
    const State k2 = rhs(tmp);
    for (int i = 0; i < 3; ++i) tmp[i] = s[i] + 0.5 * dt * k2[i];
    const State k3 = rhs(tmp);
    for (int i = 0; i < 3; ++i) tmp[i] = s[i] + dt * k3[i];
    const State k4 = rhs(tmp);
    for (int i = 0; i < 3; ++i) s[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (!(s[0] > 0.0)) throw DegenerateMass("moment ODE: mass reached zero");
    out.push_back({static_cast<double>(k + 1) * dt, s[0], s[1], s[2]});
  }
  return out;
}

AtomicMeasure enumerate_t_b(const TransferKernel& kernel, const AtomicMeasure& u,
                            const AtomicMeasure& v) {
  const auto b = kernel.atoms.atoms();
  const double count = static_cast<double>(b.size()) * static_cast<double>(b.size()) *
                       static_cast<double>(u.size()) * static_cast<double>(v.size());
  if (count > static_cast<double>(kEnumerationCap)) {
    throw CapacityError("enumerate_t_b: " + std::to_string(count) + " combinations exceed " +
                        std::to_string(kEnumerationCap));
  }

  std::map<double, CompensatedSum> acc;
  for (std::size_t i1 = 0; i1 < b.size(); ++i1) {
    for (std::size_t i2 = 0; i2 < b.size(); ++i2) {
      for (std::size_t j1 = 0; j1 < u.size(); ++j1) {
        for (std::size_t j2 = 0; j2 < v.size(); ++j2) {
          const double z1 = b[i1].location;
          const double z2 = b[i2].location;
          const double x1 = u.atoms()[j1].location;
          const double x2 = v.atoms()[j2].location;
          double x = (x1 == x2 && z1 == z2) ? x1 : x1 * (1.0 - z1) + x2 * z2;
          if (std::abs(x) <= kZeroSnap) x = 0.0;
          const double w = b[i1].weight * b[i2].weight * u.atoms()[j1].weight * v.atoms()[j2].weight;
          acc[x].add(w);
        }
      }
    }
  }
  std::vector<Atom> atoms;
  atoms.reserve(acc.size());
  for (const auto& [x, w] : acc) atoms.push_back({x, w.value()});
  return AtomicMeasure(std::move(atoms));
}

}  // namespace xfer::oracles
