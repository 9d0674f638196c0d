#include "xfer/fixedpoint.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "xfer/errors.hpp"

namespace xfer {

std::string to_string(FixedPointClass c) {
  switch (c) {
    case FixedPointClass::dirac_at_zero:
      return "dirac_at_zero";
    case FixedPointClass::diffuse_candidate:
      return "diffuse_candidate";
    case FixedPointClass::dirac_at_Z:
      return "dirac_at_Z";
    case FixedPointClass::not_converged:
      return "not_converged";
  }
  return "not_converged";
}

namespace {

FixedPointRow make_row(std::size_t iter, const AtomicMeasure& u, double w1_step) {
  return {iter, u.mass(), u.mean(), u.variance(), u.mass_at_zero(), w1_step, u.size()};
}

FixedPointClass classify(const FixedPointReport& r, double tol) {
  if (!r.converged) return FixedPointClass::not_converged;
  if (r.mass_at_zero > 1.0 - tol) return FixedPointClass::dirac_at_zero;
  if (r.variance < tol * r.mean * r.mean) return FixedPointClass::dirac_at_Z;
  if (r.iterate.max_weight() < 0.05) return FixedPointClass::diffuse_candidate;
  return FixedPointClass::not_converged;
}

// Nodes k h for k = 1..n-1, plus an exact zero, one atom for (0, h) and one
// above the top node.
class Lattice {
 public:
  Lattice(double h, std::size_t n) : h_(h), w_(n, 0.0) {}

  void deposit(double x, double w) {
    if (w == 0.0) return;
    if (x <= kZeroSnap) {
      zero_ += w;
    } else if (x < h_) {
      head_w_ += w;
      head_wx_ += w * x;
    } else if (x > top()) {
      tail_w_ += w;
      tail_wx_ += w * x;
    } else {
      const double r = x / h_;
      auto k = static_cast<std::size_t>(r);
      if (k >= w_.size() - 1) k = w_.size() - 2;
      const double f = r - static_cast<double>(k);
      w_[k] += w * (1.0 - f);
      w_[k + 1] += w * f;
    }
  }

  [[nodiscard]] double top() const { return h_ * static_cast<double>(w_.size() - 1); }

  // Everything that is not a plain node, as (x, w).
  [[nodiscard]] std::vector<Atom> specials() const {
    std::vector<Atom> out;
    if (zero_ > 0.0) out.push_back({0.0, zero_});
    if (head_w_ > 0.0) out.push_back({head_wx_ / head_w_, head_w_});
    if (tail_w_ > 0.0) out.push_back({tail_wx_ / tail_w_, tail_w_});
    return out;
  }

  [[nodiscard]] AtomicMeasure measure() const {
    std::vector<Atom> atoms = specials();
    for (std::size_t k = 1; k < w_.size(); ++k) {
      if (w_[k] > 0.0) atoms.push_back({h_ * static_cast<double>(k), w_[k]});
    }
    return AtomicMeasure(std::move(atoms));
  }

  // Law of the sum of independent draws from a and c, projected.
  static Lattice sum(const Lattice& a, const Lattice& c) {
    Lattice out(a.h_, a.w_.size());
    const std::size_t n = a.w_.size();
    for (std::size_t i = 1; i < n; ++i) {
      if (a.w_[i] == 0.0) continue;
      for (std::size_t j = 1; j < n; ++j) {
        if (c.w_[j] == 0.0) continue;
        if (i + j < n) {
          out.w_[i + j] += a.w_[i] * c.w_[j];
        } else {
          out.deposit(a.h_ * static_cast<double>(i + j), a.w_[i] * c.w_[j]);
        }
      }
    }
    const auto sa = a.specials();
    const auto sc = c.specials();
    for (const Atom& p : sa) {
      for (std::size_t j = 1; j < n; ++j) {
        if (c.w_[j] > 0.0) out.deposit(p.location + c.h_ * static_cast<double>(j), p.weight * c.w_[j]);
      }
      for (const Atom& q : sc) out.deposit(p.location + q.location, p.weight * q.weight);
    }
    for (const Atom& q : sc) {
      for (std::size_t i = 1; i < n; ++i) {
        if (a.w_[i] > 0.0) out.deposit(a.h_ * static_cast<double>(i) + q.location, a.w_[i] * q.weight);
      }
    }
    return out;
  }

 private:
  double h_;
  std::vector<double> w_;
  double zero_ = 0.0;
  double head_w_ = 0.0, head_wx_ = 0.0;
  double tail_w_ = 0.0, tail_wx_ = 0.0;
};

AtomicMeasure lattice_step(const TransferKernel& kernel, const AtomicMeasure& u, double h,
                           std::size_t nodes) {
  Lattice a(h, nodes), c(h, nodes);
  for (const Atom& z : kernel.atoms.atoms()) {
    for (const Atom& x : u.atoms()) {
      a.deposit(x.location * (1.0 - z.location), x.weight * z.weight);
      c.deposit(x.location * z.location, x.weight * z.weight);
    }
  }
  return Lattice::sum(a, c).measure();
}

}  // namespace

FixedPointReport iterate_fixed_point(const TransferKernel& kernel, const AtomicMeasure& u0,
                                     const FixedPointSettings& settings) {
  if (std::abs(u0.mass() - 1.0) > 1e-9) {
    throw InvalidArgument("iterate_fixed_point: initial measure must be a probability measure");
  }
  if (settings.max_atoms < 2) throw InvalidArgument("iterate_fixed_point: max_atoms must be >= 2");

  TransferOptions opts;
  opts.factor_atoms = settings.factor_atoms == 0 ? 2 * settings.max_atoms : settings.factor_atoms;
  opts.partitions = settings.partitions;

  FixedPointReport report;
  const double m1 = u0.mean();
  std::optional<double> predicted;
  if (kernel.lambda1 > kernel.lambda2) {
    predicted = kernel.variance() * m1 * m1 / (kernel.lambda1 - kernel.lambda2);
  }

  // Span: mean plus 12 predicted standard deviations, at least 4 means.
  // Three atoms are reserved for zero, head and tail.
  report.lattice = settings.lattice && predicted && *predicted > 0.0 && settings.max_atoms >= 16;
  const std::size_t nodes = settings.max_atoms - 2;
  const double span = report.lattice ? std::max(4.0 * m1, m1 + 12.0 * std::sqrt(*predicted)) : 0.0;
  const double h = span / static_cast<double>(nodes - 1);

  AtomicMeasure u = compress(u0, settings.max_atoms).measure;
  report.history.push_back(make_row(0, u, 0.0));

  for (std::size_t k = 1; k <= settings.max_iter; ++k) {
    AtomicMeasure next = report.lattice ? lattice_step(kernel, u, h, nodes)
                                        : t_b(kernel, u, u, settings.max_atoms, opts).measure;
    // |T[u, u]| = |u|^2 doubles any rounding in the mass every iteration.
    next = next.scaled(1.0 / next.mass());
    const double step = w1_distance(u, next);
    u = std::move(next);
    report.history.push_back(make_row(k, u, step));
    report.iterations = k;
    report.w1_step = step;
    if (step <= settings.tol) {
      report.converged = true;
      break;
    }
  }

  report.iterate = u;
  report.mass_at_zero = u.mass_at_zero();
  report.mean = u.mean();
  report.variance = u.variance();
  report.predicted_variance = predicted;
  report.classification = classify(report, settings.tol);
  return report;
}

double dirac_displacement(const TransferKernel& kernel, double z) {
  if (!(z > 0.0)) throw InvalidArgument("dirac_displacement: Z must be positive");
  return w1_distance(k_b(kernel, z, z), AtomicMeasure::dirac(z));
}

double zero_mass_flow(const TransferKernel& kernel, const AtomicMeasure& u) {
  const std::size_t m = kernel.atoms.size();
  const double count = static_cast<double>(m * m) * static_cast<double>(u.size()) *
                       static_cast<double>(u.size());
  if (count <= static_cast<double>(kDefaultProductCap)) return t_b_exact(kernel, u, u).mass_at_zero();
  return integrate_t_b(kernel, u, u, [](double x) { return x <= kZeroSnap ? 1.0 : 0.0; });
}

}  // namespace xfer
