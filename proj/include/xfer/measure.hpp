#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "xfer/compensated.hpp"

namespace xfer {

using Rng = std::mt19937_64;

/// Locations closer than this to the origin are snapped to exactly 0.
inline constexpr double kZeroSnap = 1e-12;

struct Atom {
  double location = 0.0;
  double weight = 0.0;

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Finite non-negative combination of Dirac masses on [0, +inf).
///
/// Construction canonicalizes: atoms are sorted by location, exact duplicates
/// are merged (weights summed with compensation), locations within kZeroSnap
/// of 0 become exactly 0, and zero-weight atoms are dropped. Negative or
/// non-finite input is rejected with InvalidArgument. Values are immutable.
class AtomicMeasure {
 public:
  AtomicMeasure() = default;
  explicit AtomicMeasure(std::vector<Atom> atoms);

  static AtomicMeasure dirac(double location, double weight = 1.0);

  /// n equal-weight atoms at the midpoints of n uniform cells of [lo, hi].
  static AtomicMeasure uniform_cells(double lo, double hi, std::size_t n, double mass = 1.0);

  [[nodiscard]] std::span<const Atom> atoms() const noexcept { return atoms_; }
  [[nodiscard]] std::size_t size() const noexcept { return atoms_.size(); }
  [[nodiscard]] bool empty() const noexcept { return atoms_.empty(); }

  [[nodiscard]] double mass() const;
  [[nodiscard]] double mean() const;
  [[nodiscard]] double variance() const;
  [[nodiscard]] double mass_at_zero() const noexcept;
  [[nodiscard]] double weight_at(double location) const noexcept;
  [[nodiscard]] double max_location() const noexcept;
  [[nodiscard]] double max_weight() const noexcept;

  /// alpha * this, for alpha > 0.
  [[nodiscard]] AtomicMeasure scaled(double alpha) const;

  /// Integral of f against the measure.
  template <class F>
  [[nodiscard]] double integrate(F&& f) const;

  friend bool operator==(const AtomicMeasure&, const AtomicMeasure&) = default;

 private:
  struct Canonical {};
  AtomicMeasure(Canonical, std::vector<Atom> atoms) : atoms_(std::move(atoms)) {}

  friend AtomicMeasure adopt_canonical(std::vector<Atom> atoms);

  std::vector<Atom> atoms_;
};

/// Wraps atoms already sorted, unique, snapped and positive. Checked in O(n).
AtomicMeasure adopt_canonical(std::vector<Atom> atoms);

struct CompressionReport {
  std::size_t merges_performed = 0;
  /// Certified upper bound on W1(input, output).
  double w1_error_bound = 0.0;
};

struct Compressed {
  AtomicMeasure measure;
  CompressionReport report;
};

/// Sum of atom weights times location^k, k in {0, 1, 2}.
double moment(const AtomicMeasure& u, int k);

/// Greedy adjacent-pair merging down to at most max_atoms atoms.
///
/// Each step merges the neighbouring pair whose replacement by its barycenter
/// loses the least second moment, w_i w_j / (w_i + w_j) (x_j - x_i)^2. Mass and
/// mean are preserved, the second moment never increases, and an atom sitting
/// exactly at 0 is never merged. Throws InvalidArgument when max_atoms < 1, or
/// max_atoms < 2 while u has both a zero atom and positive atoms.
Compressed compress(const AtomicMeasure& u, std::size_t max_atoms);

/// 1-D Wasserstein-1 distance between two measures of equal mass
/// (relative tolerance 1e-9), i.e. the integral of |F_u - F_v|.
double w1_distance(const AtomicMeasure& u, const AtomicMeasure& v);

/// W1 between u/|u| and v/|v|.
double normalized_w1(const AtomicMeasure& u, const AtomicMeasure& v);

/// Sum over the union support of |u({x}) - v({x})| (no 1/2 factor).
double tv_distance(const AtomicMeasure& u, const AtomicMeasure& v);

/// n i.i.d. draws from u / |u|.
std::vector<double> sample(const AtomicMeasure& u, std::size_t n, Rng& rng);

/// u + v.
AtomicMeasure add(const AtomicMeasure& u, const AtomicMeasure& v);

template <class F>
double AtomicMeasure::integrate(F&& f) const {
  CompensatedSum acc;
  for (const Atom& a : atoms_) acc.add(a.weight * f(a.location));
  return acc.value();
}

}  // namespace xfer
