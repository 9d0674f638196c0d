#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "xfer/kernel.hpp"
#include "xfer/measure.hpp"

namespace xfer::testing {

/// Random atomic measure with 1..max_atoms atoms on [0, scale].
inline AtomicMeasure random_measure(Rng& rng, std::size_t max_atoms, double scale = 5.0,
                                    bool allow_zero = false) {
  std::uniform_int_distribution<std::size_t> count(1, max_atoms);
  std::uniform_real_distribution<double> loc(0.0, scale);
  std::uniform_real_distribution<double> wt(0.05, 1.0);
  std::bernoulli_distribution zero(0.2);
  std::vector<Atom> atoms(count(rng));
  for (Atom& a : atoms) {
    a.location = (allow_zero && zero(rng)) ? 0.0 : loc(rng);
    a.weight = wt(rng);
  }
  return AtomicMeasure(std::move(atoms));
}

/// Random kernel on [0,1] with up to max_atoms atoms, sometimes hitting 0 and 1.
inline TransferKernel random_kernel(Rng& rng, std::size_t max_atoms) {
  std::uniform_int_distribution<std::size_t> count(1, max_atoms);
  std::uniform_real_distribution<double> loc(0.0, 1.0);
  std::uniform_real_distribution<double> wt(0.05, 1.0);
  std::uniform_int_distribution<int> pick(0, 5);
  std::vector<Atom> atoms(count(rng));
  double total = 0.0;
  for (Atom& a : atoms) {
    const int p = pick(rng);
    a.location = p == 0 ? 0.0 : (p == 1 ? 1.0 : loc(rng));
    a.weight = wt(rng);
    total += a.weight;
  }
  for (Atom& a : atoms) a.weight /= total;
  double fix = 1.0;
  for (std::size_t i = 1; i < atoms.size(); ++i) fix -= atoms[i].weight;
  atoms[0].weight = fix;
  return make_kernel(AtomsKernelSpec{atoms});
}

/// W1 by coupling the two quantile functions: both step functions are
/// refined to a common partition of (0, mass) and |Q_u - Q_v| is integrated
/// piece by piece.
inline double quantile_w1(const AtomicMeasure& u, const AtomicMeasure& v) {
  std::vector<double> cu{0.0};
  std::vector<double> cv{0.0};
  for (const Atom& a : u.atoms()) cu.push_back(cu.back() + a.weight);
  for (const Atom& a : v.atoms()) cv.push_back(cv.back() + a.weight);
  std::vector<double> cuts(cu.begin(), cu.end());
  cuts.insert(cuts.end(), cv.begin(), cv.end());
  std::sort(cuts.begin(), cuts.end());
  const double top = std::min(cu.back(), cv.back());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double lo = cuts[k];
    const double hi = std::min(cuts[k + 1], top);
    if (!(hi > lo)) continue;
    const double mid = 0.5 * (lo + hi);
    const auto q = [mid](const std::vector<double>& c, const AtomicMeasure& m) {
      auto it = std::upper_bound(c.begin(), c.end(), mid);
      std::size_t idx = static_cast<std::size_t>(it - c.begin()) - 1;
      idx = std::min(idx, m.size() - 1);
      return m.atoms()[idx].location;
    };
    total += (hi - lo) * std::abs(q(cu, u) - q(cv, v));
  }
  return total;
}

/// sup over phi in {-1, +1} on the union support of the integral of phi
/// against u - v, by exhaustive enumeration of sign patterns.
inline double brute_tv(const AtomicMeasure& u, const AtomicMeasure& v) {
  std::vector<double> xs;
  for (const Atom& a : u.atoms()) xs.push_back(a.location);
  for (const Atom& a : v.atoms()) xs.push_back(a.location);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  double best = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << xs.size()); ++mask) {
    double s = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const double phi = (mask >> k) & 1U ? 1.0 : -1.0;
      s += phi * (u.weight_at(xs[k]) - v.weight_at(xs[k]));
    }
    best = std::max(best, s);
  }
  return best;
}

}  // namespace xfer::testing
