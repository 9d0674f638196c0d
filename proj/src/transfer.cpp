#include "xfer/transfer.hpp"

#include <algorithm>
#include <string>
#include <thread>

#include "xfer/errors.hpp"

namespace xfer {

namespace {

void check_capacity(std::size_t count, std::size_t cap) {
  if (count > cap) {
    throw CapacityError("transfer product has " + std::to_string(count) +
                        " atoms, above the cap of " + std::to_string(cap) +
                        "; compress the inputs first (fewer atoms) or enable factor compression");
  }
}

std::size_t checked_product(std::size_t a, std::size_t b) {
  if (a != 0 && b > static_cast<std::size_t>(-1) / a) return static_cast<std::size_t>(-1);
  return a * b;
}

// Atoms for u's block [first, last), in (z1, z2, x1, x2) loop order.
void enumerate_block(const TransferKernel& kernel, std::span<const Atom> u, std::size_t first,
                     std::size_t last, std::span<const Atom> v, std::vector<Atom>& out) {
  const auto b = kernel.atoms.atoms();
  for (const Atom& b1 : b) {
    for (const Atom& b2 : b) {
      const double wz = b1.weight * b2.weight;
      for (std::size_t i = first; i < last; ++i) {
        const Atom& a1 = u[i];
        const double w1 = wz * a1.weight;
        const double base = a1.location * (1.0 - b1.location);
        // x (1 - z) + x z can miss x by an ulp; the pushforward fixes x exactly.
        const bool same_z = b1.location == b2.location;
        for (const Atom& a2 : v) {
          const double x = same_z && a2.location == a1.location ? a1.location
                                                                : base + a2.location * b2.location;
          out.push_back({x, w1 * a2.weight});
        }
      }
    }
  }
}

std::vector<Atom> enumerate_product(const TransferKernel& kernel, const AtomicMeasure& u,
                                    const AtomicMeasure& v, std::size_t partitions) {
  const auto ua = u.atoms();
  const auto va = v.atoms();
  const std::size_t m = kernel.atoms.size();
  partitions = std::clamp<std::size_t>(partitions, 1, std::max<std::size_t>(ua.size(), 1));

  std::vector<std::vector<Atom>> blocks(partitions);
  const auto bounds = [&](std::size_t p) { return p * ua.size() / partitions; };
  const auto run = [&](std::size_t p) {
    const std::size_t first = bounds(p);
    const std::size_t last = bounds(p + 1);
    blocks[p].reserve(m * m * (last - first) * va.size());
    enumerate_block(kernel, ua, first, last, va, blocks[p]);
  };
  if (partitions == 1) {
    run(0);
    return std::move(blocks[0]);
  }
  std::vector<std::thread> workers;
  workers.reserve(partitions);
  for (std::size_t p = 0; p < partitions; ++p) workers.emplace_back(run, p);
  for (auto& t : workers) t.join();

  std::vector<Atom> all;
  all.reserve(m * m * ua.size() * va.size());
  for (auto& blk : blocks) all.insert(all.end(), blk.begin(), blk.end());
  return all;
}

Compressed factored_product(const TransferKernel& kernel, const AtomicMeasure& u,
                            const AtomicMeasure& v, std::size_t max_atoms,
                            const TransferOptions& options) {
  std::vector<Atom> left;
  std::vector<Atom> right;
  left.reserve(kernel.atoms.size() * u.size());
  right.reserve(kernel.atoms.size() * v.size());
  for (const Atom& b : kernel.atoms.atoms()) {
    for (const Atom& a : u.atoms()) left.push_back({a.location * (1.0 - b.location), b.weight * a.weight});
    for (const Atom& a : v.atoms()) right.push_back({a.location * b.location, b.weight * a.weight});
  }
  auto [lc, lrep] = compress(AtomicMeasure(std::move(left)), options.factor_atoms);
  auto [rc, rrep] = compress(AtomicMeasure(std::move(right)), options.factor_atoms);

  check_capacity(checked_product(lc.size(), rc.size()), options.hard_cap);
  std::vector<Atom> prod;
  prod.reserve(lc.size() * rc.size());
  for (const Atom& a : lc.atoms()) {
    for (const Atom& c : rc.atoms()) prod.push_back({a.location + c.location, a.weight * c.weight});
  }
  auto [out, rep] = compress(AtomicMeasure(std::move(prod)), max_atoms);

  // W1(A*C, A'*C') <= |C| W1(A, A') + |A'| W1(C, C').
  CompressionReport total;
  total.merges_performed = lrep.merges_performed + rrep.merges_performed + rep.merges_performed;
  total.w1_error_bound = rc.mass() * lrep.w1_error_bound + lc.mass() * rrep.w1_error_bound +
                         rep.w1_error_bound;
  return {std::move(out), total};
}

}  // namespace

AtomicMeasure t_b_exact(const TransferKernel& kernel, const AtomicMeasure& u,
                        const AtomicMeasure& v, std::size_t hard_cap) {
  const std::size_t m = kernel.atoms.size();
  check_capacity(checked_product(checked_product(m * m, u.size()), v.size()), hard_cap);
  return AtomicMeasure(enumerate_product(kernel, u, v, 1));
}

AtomicMeasure k_b(const TransferKernel& kernel, double x1, double x2) {
  if (!(x1 >= 0.0) || !(x2 >= 0.0)) throw InvalidArgument("k_b: traits must be non-negative");
  return t_b_exact(kernel, AtomicMeasure::dirac(x1), AtomicMeasure::dirac(x2));
}

Compressed t_b(const TransferKernel& kernel, const AtomicMeasure& u, const AtomicMeasure& v,
               std::size_t max_atoms, const TransferOptions& options) {
  const std::size_t m = kernel.atoms.size();
  const bool factor = options.factor_atoms > 0 &&
                      (m * u.size() > options.factor_atoms || m * v.size() > options.factor_atoms);
  if (factor) return factored_product(kernel, u, v, max_atoms, options);

  check_capacity(checked_product(checked_product(m * m, u.size()), v.size()), options.hard_cap);
  return compress(AtomicMeasure(enumerate_product(kernel, u, v, options.partitions)), max_atoms);
}

PredictedMoments predicted_moments(const TransferKernel& kernel, const AtomicMeasure& u,
                                   const AtomicMeasure& v) {
  const double l1 = kernel.lambda1;
  const double l2 = kernel.lambda2;
  const double u0 = moment(u, 0), u1 = moment(u, 1), u2 = moment(u, 2);
  const double v0 = moment(v, 0), v1 = moment(v, 1), v2 = moment(v, 2);
  PredictedMoments p;
  p.m0 = u0 * v0;
  CompensatedSum m1;
  m1.add((1.0 - l1) * v0 * u1);
  m1.add(l1 * u0 * v1);
  p.m1 = m1.value();
  CompensatedSum m2;
  m2.add((1.0 - 2.0 * l1 + l2) * v0 * u2);
  m2.add(l2 * u0 * v2);
  m2.add(2.0 * (1.0 - l1) * l1 * u1 * v1);
  p.m2 = m2.value();
  return p;
}

AtomicMeasure t_b_mc(const TransferKernel& kernel, const AtomicMeasure& u, const AtomicMeasure& v,
                     std::size_t n_samples, Rng& rng) {
  const double mu = u.mass();
  const double mv = v.mass();
  if (!(mu > 0.0) || !(mv > 0.0)) throw EmptyMeasure("t_b_mc: zero-mass input");
  if (n_samples == 0) return {};

  const std::vector<double> x1 = sample(u, n_samples, rng);
  const std::vector<double> x2 = sample(v, n_samples, rng);
  std::vector<double> out(n_samples);
  for (std::size_t s = 0; s < n_samples; ++s) {
    const double z1 = kernel_sample(kernel, rng);
    const double z2 = kernel_sample(kernel, rng);
    out[s] = x1[s] * (1.0 - z1) + x2[s] * z2;
  }
  std::sort(out.begin(), out.end());

  const double total = mu * mv;
  const double n = static_cast<double>(n_samples);
  std::vector<Atom> atoms;
  std::size_t i = 0;
  while (i < out.size()) {
    std::size_t j = i;
    while (j < out.size() && out[j] == out[i]) ++j;
    atoms.push_back({out[i], total * static_cast<double>(j - i) / n});
    i = j;
  }
  return AtomicMeasure(std::move(atoms));
}

}  // namespace xfer
