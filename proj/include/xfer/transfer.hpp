#pragma once

#include <cstddef>

#include "xfer/kernel.hpp"
#include "xfer/measure.hpp"

namespace xfer {

inline constexpr std::size_t kDefaultProductCap = 10'000'000;

struct TransferOptions {
  /// Largest number of product atoms materialized before compression.
  std::size_t hard_cap = kDefaultProductCap;
  /// 0 means exact enumeration only. Otherwise, when one of the two factor
  /// measures {x1 (1 - z1)} or {x2 z2} has more than factor_atoms atoms, each
  /// factor is compressed to factor_atoms before convolving them.
  std::size_t factor_atoms = 0;
  /// Number of contiguous blocks of u's atoms enumerated concurrently. The
  /// result is bitwise identical for a fixed value.
  std::size_t partitions = 1;
};

/// Closed-form moments of T_B[u, v] computed from the moments of u and v.
struct PredictedMoments {
  double m0 = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
};

/// Law of x1 (1 - Z1) + x2 Z2 with Z1, Z2 i.i.d. ~ B. A probability measure
/// supported in [0, x1 + x2].
AtomicMeasure k_b(const TransferKernel& kernel, double x1, double x2);

/// The bilinear transfer operator T_B[u, v], followed by compression to
/// max_atoms.
///
/// Exact route: every (z1, z2, x1, x2) combination emits the atom
/// (x1 (1 - z1) + x2 z2, wB(z1) wB(z2) wu(x1) wv(x2)), enumerated in that loop
/// order; equal locations are merged by exact floating equality. Throws
/// CapacityError if the product exceeds options.hard_cap.
Compressed t_b(const TransferKernel& kernel, const AtomicMeasure& u, const AtomicMeasure& v,
               std::size_t max_atoms, const TransferOptions& options = {});

/// Uncompressed exact product (hard cap still applies).
AtomicMeasure t_b_exact(const TransferKernel& kernel, const AtomicMeasure& u,
                        const AtomicMeasure& v, std::size_t hard_cap = kDefaultProductCap);

/// Integral of phi against T_B[u, v] without materializing the product.
template <class F>
double integrate_t_b(const TransferKernel& kernel, const AtomicMeasure& u, const AtomicMeasure& v,
                     F&& phi);

PredictedMoments predicted_moments(const TransferKernel& kernel, const AtomicMeasure& u,
                                   const AtomicMeasure& v);

/// Monte Carlo estimate of T_B[u, v]: n_samples draws of x1 (1 - Z1) + x2 Z2
/// with x1 ~ u/|u|, x2 ~ v/|v|, each worth |u| |v| / n_samples.
AtomicMeasure t_b_mc(const TransferKernel& kernel, const AtomicMeasure& u, const AtomicMeasure& v,
                     std::size_t n_samples, Rng& rng);

template <class F>
double integrate_t_b(const TransferKernel& kernel, const AtomicMeasure& u, const AtomicMeasure& v,
                     F&& phi) {
  CompensatedSum acc;
  for (const Atom& b1 : kernel.atoms.atoms()) {
    for (const Atom& b2 : kernel.atoms.atoms()) {
      const double wz = b1.weight * b2.weight;
      for (const Atom& a1 : u.atoms()) {
        const double w1 = wz * a1.weight;
        const double base = a1.location * (1.0 - b1.location);
        for (const Atom& a2 : v.atoms()) {
          acc.add(w1 * a2.weight * phi(base + a2.location * b2.location));
        }
      }
    }
  }
  return acc.value();
}

}  // namespace xfer
