#include "xfer/measure.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

#include "xfer/errors.hpp"

namespace xfer {

namespace {

void check_atom(const Atom& a) {
  if (!std::isfinite(a.location) || !std::isfinite(a.weight)) {
    throw InvalidArgument("atom with non-finite location or weight");
  }
  if (a.weight < 0.0) {
    throw InvalidArgument("negative atom weight " + std::to_string(a.weight));
  }
  if (a.location < -kZeroSnap) {
    throw InvalidArgument("negative atom location " + std::to_string(a.location));
  }
}

}  // namespace

AtomicMeasure::AtomicMeasure(std::vector<Atom> atoms) {
  for (Atom& a : atoms) {
    check_atom(a);
    if (std::abs(a.location) <= kZeroSnap) a.location = 0.0;
  }
  std::erase_if(atoms, [](const Atom& a) { return a.weight == 0.0; });
  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const Atom& a, const Atom& b) { return a.location < b.location; });

  atoms_.reserve(atoms.size());
  std::size_t i = 0;
  while (i < atoms.size()) {
    const double x = atoms[i].location;
    CompensatedSum w;
    for (; i < atoms.size() && atoms[i].location == x; ++i) w.add(atoms[i].weight);
    atoms_.push_back({x, w.value()});
  }
}

AtomicMeasure adopt_canonical(std::vector<Atom> atoms) {
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const Atom& a = atoms[i];
    const bool ok = std::isfinite(a.location) && std::isfinite(a.weight) && a.weight > 0.0 &&
                    (a.location == 0.0 || a.location > kZeroSnap) &&
                    (i == 0 || atoms[i - 1].location < a.location);
    if (!ok) throw InvalidArgument("adopt_canonical: atoms are not canonical");
  }
  return AtomicMeasure(AtomicMeasure::Canonical{}, std::move(atoms));
}

AtomicMeasure AtomicMeasure::dirac(double location, double weight) {
  return AtomicMeasure({{location, weight}});
}

AtomicMeasure AtomicMeasure::uniform_cells(double lo, double hi, std::size_t n, double mass) {
  if (!(hi > lo) || n == 0 || !(mass > 0.0)) {
    throw InvalidArgument("uniform_cells: need hi > lo, n > 0, mass > 0");
  }
  std::vector<Atom> atoms;
  atoms.reserve(n);
  const double h = (hi - lo) / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    atoms.push_back({lo + (static_cast<double>(k) + 0.5) * h, mass / static_cast<double>(n)});
  }
  return AtomicMeasure(std::move(atoms));
}

double AtomicMeasure::mass() const { return moment(*this, 0); }

double AtomicMeasure::mean() const {
  const double m0 = moment(*this, 0);
  return m0 > 0.0 ? moment(*this, 1) / m0 : 0.0;
}

double AtomicMeasure::variance() const {
  const double m0 = moment(*this, 0);
  if (!(m0 > 0.0)) return 0.0;
  const double mu = moment(*this, 1) / m0;
  // Centered form keeps tiny variances accurate.
  CompensatedSum acc;
  for (const Atom& a : atoms_) {
    const double d = a.location - mu;
    acc.add(a.weight * d * d);
  }
  return acc.value() / m0;
}

double AtomicMeasure::mass_at_zero() const noexcept {
  return (!atoms_.empty() && atoms_.front().location == 0.0) ? atoms_.front().weight : 0.0;
}

double AtomicMeasure::weight_at(double location) const noexcept {
  const auto it = std::lower_bound(atoms_.begin(), atoms_.end(), location,
                                   [](const Atom& a, double x) { return a.location < x; });
  return (it != atoms_.end() && it->location == location) ? it->weight : 0.0;
}

double AtomicMeasure::max_location() const noexcept {
  return atoms_.empty() ? 0.0 : atoms_.back().location;
}

double AtomicMeasure::max_weight() const noexcept {
  double m = 0.0;
  for (const Atom& a : atoms_) m = std::max(m, a.weight);
  return m;
}

AtomicMeasure AtomicMeasure::scaled(double alpha) const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InvalidArgument("scale factor must be positive and finite");
  }
  std::vector<Atom> out(atoms_.begin(), atoms_.end());
  for (Atom& a : out) a.weight *= alpha;
  return AtomicMeasure(Canonical{}, std::move(out));
}

double moment(const AtomicMeasure& u, int k) {
  CompensatedSum acc;
  switch (k) {
    case 0:
      for (const Atom& a : u.atoms()) acc.add(a.weight);
      break;
    case 1:
      for (const Atom& a : u.atoms()) acc.add(a.weight * a.location);
      break;
    case 2:
      for (const Atom& a : u.atoms()) acc.add(a.weight * a.location * a.location);
      break;
    default:
      throw InvalidArgument("moment order must be 0, 1 or 2, got " + std::to_string(k));
  }
  return acc.value();
}

namespace {

// Far above the budget: merge runs of equal atom count to their barycenters
// (linear time, exact transport cost), then finish greedily.
Compressed coarse_then_greedy(const AtomicMeasure& u, std::size_t max_atoms) {
  const auto in = u.atoms();
  const std::size_t first = in.front().location == 0.0 ? 1 : 0;
  const std::size_t n = in.size() - first;
  const std::size_t groups = 4 * max_atoms;
  std::vector<Atom> out;
  out.reserve(groups + 1);
  if (first == 1) out.push_back(in.front());

  CompressionReport report;
  CompensatedSum bound;
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t lo = first + g * n / groups;
    const std::size_t hi = first + (g + 1) * n / groups;
    if (lo == hi) continue;
    CompensatedSum w;
    CompensatedSum wx;
    for (std::size_t i = lo; i < hi; ++i) {
      w.add(in[i].weight);
      wx.add(in[i].weight * in[i].location);
    }
    const double mass = w.value();
    const double xm = std::clamp(wx.value() / mass, in[lo].location, in[hi - 1].location);
    for (std::size_t i = lo; i < hi; ++i) bound.add(in[i].weight * std::abs(in[i].location - xm));
    report.merges_performed += hi - lo - 1;
    if (!out.empty() && out.back().location == xm) {
      out.back().weight += mass;
    } else {
      out.push_back({xm, mass});
    }
  }
  auto [result, rest] = compress(adopt_canonical(std::move(out)), max_atoms);
  report.merges_performed += rest.merges_performed;
  report.w1_error_bound = bound.value() + rest.w1_error_bound;
  return {std::move(result), report};
}

}  // namespace

Compressed compress(const AtomicMeasure& u, std::size_t max_atoms) {
  if (max_atoms < 1) throw InvalidArgument("compress: max_atoms must be at least 1");
  const auto in = u.atoms();
  const std::size_t n = in.size();
  const bool has_zero = n > 0 && in.front().location == 0.0;
  if (has_zero && n > 1 && max_atoms < 2) {
    throw InvalidArgument("compress: the atom at 0 is never merged, max_atoms must be >= 2");
  }
  if (n <= max_atoms) return {u, {}};
  if (n > 8 * max_atoms) return coarse_then_greedy(u, max_atoms);

  // Doubly linked list over the atoms; heap of candidate pairs keyed by the
  // second-moment loss, with version stamps to skip stale entries.
  std::vector<double> x(n), w(n);
  std::vector<std::size_t> prev(n), next(n);
  std::vector<std::uint32_t> version(n, 0);
  std::vector<bool> alive(n, true);
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = in[i].location;
    w[i] = in[i].weight;
    prev[i] = i == 0 ? kNone : i - 1;
    next[i] = i + 1 == n ? kNone : i + 1;
  }

  struct Candidate {
    double cost;
    std::size_t left;
    std::size_t right;
    std::uint32_t vl;
    std::uint32_t vr;
  };
  const auto worse = [](const Candidate& a, const Candidate& b) {
    return a.cost != b.cost ? a.cost > b.cost : a.left > b.left;
  };
  std::vector<Candidate> storage;
  storage.reserve(n);
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(worse)> heap(worse,
                                                                               std::move(storage));

  const auto push_pair = [&](std::size_t l, std::size_t r) {
    if (l == kNone || r == kNone) return;
    if (x[l] == 0.0) return;  // the zero atom stays put
    const double d = x[r] - x[l];
    const double cost = w[l] * w[r] / (w[l] + w[r]) * d * d;
    heap.push({cost, l, r, version[l], version[r]});
  };
  for (std::size_t i = 0; i + 1 < n; ++i) push_pair(i, i + 1);

  std::size_t active = n;
  CompressionReport report;
  CompensatedSum bound;
  while (active > max_atoms && !heap.empty()) {
    const Candidate c = heap.top();
    heap.pop();
    if (!alive[c.left] || !alive[c.right] || version[c.left] != c.vl ||
        version[c.right] != c.vr) {
      continue;
    }
    const std::size_t l = c.left;
    const std::size_t r = c.right;
    const double wl = w[l];
    const double wr = w[r];
    const double wsum = wl + wr;
    const double d = x[r] - x[l];
    double xm = (wl * x[l] + wr * x[r]) / wsum;
    xm = std::clamp(xm, x[l], x[r]);
    // Exact transport cost of moving both atoms to their barycenter.
    bound.add(2.0 * wl * wr / wsum * d);

    x[l] = xm;
    w[l] = wsum;
    ++version[l];
    alive[r] = false;
    next[l] = next[r];
    if (next[r] != kNone) prev[next[r]] = l;
    --active;
    ++report.merges_performed;
    push_pair(prev[l], l);
    push_pair(l, next[l]);
  }
  report.w1_error_bound = bound.value();

  std::vector<Atom> out;
  out.reserve(active);
  for (std::size_t i = 0; i != kNone; i = next[i]) out.push_back({x[i], w[i]});
  return {adopt_canonical(std::move(out)), report};
}

double w1_distance(const AtomicMeasure& u, const AtomicMeasure& v) {
  const double mu = u.mass();
  const double mv = v.mass();
  if (std::abs(mu - mv) > 1e-9 * std::max(mu, mv)) {
    throw UnequalMass("w1_distance: masses differ (" + std::to_string(mu) + " vs " +
                      std::to_string(mv) + ")");
  }
  const auto a = u.atoms();
  const auto b = v.atoms();
  std::size_t i = 0;
  std::size_t j = 0;
  CompensatedSum fu;
  CompensatedSum fv;
  CompensatedSum integral;
  double x_prev = 0.0;
  bool started = false;
  while (i < a.size() || j < b.size()) {
    const double xa = i < a.size() ? a[i].location : INFINITY;
    const double xb = j < b.size() ? b[j].location : INFINITY;
    const double x = std::min(xa, xb);
    if (started) integral.add(std::abs(fu.value() - fv.value()) * (x - x_prev));
    if (xa == x) fu.add(a[i++].weight);
    if (xb == x) fv.add(b[j++].weight);
    x_prev = x;
    started = true;
  }
  return integral.value();
}

double normalized_w1(const AtomicMeasure& u, const AtomicMeasure& v) {
  const double mu = u.mass();
  const double mv = v.mass();
  if (!(mu > 0.0) || !(mv > 0.0)) throw EmptyMeasure("normalized_w1: zero-mass measure");
  return w1_distance(u.scaled(1.0 / mu), v.scaled(1.0 / mv));
}

double tv_distance(const AtomicMeasure& u, const AtomicMeasure& v) {
  const auto a = u.atoms();
  const auto b = v.atoms();
  std::size_t i = 0;
  std::size_t j = 0;
  CompensatedSum acc;
  while (i < a.size() || j < b.size()) {
    const double xa = i < a.size() ? a[i].location : INFINITY;
    const double xb = j < b.size() ? b[j].location : INFINITY;
    const double x = std::min(xa, xb);
    const double wa = xa == x ? a[i++].weight : 0.0;
    const double wb = xb == x ? b[j++].weight : 0.0;
    acc.add(std::abs(wa - wb));
  }
  return acc.value();
}

std::vector<double> sample(const AtomicMeasure& u, std::size_t n, Rng& rng) {
  const auto atoms = u.atoms();
  if (atoms.empty()) throw EmptyMeasure("sample: zero-mass measure");
  std::vector<double> cdf(atoms.size());
  CompensatedSum acc;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    acc.add(atoms[k].weight);
    cdf[k] = acc.value();
  }
  const double total = cdf.back();
  std::uniform_real_distribution<double> unif(0.0, total);
  std::vector<double> out(n);
  for (double& s : out) {
    const double r = unif(rng);
    auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
    if (it == cdf.end()) --it;
    s = atoms[static_cast<std::size_t>(it - cdf.begin())].location;
  }
  return out;
}

AtomicMeasure add(const AtomicMeasure& u, const AtomicMeasure& v) {
  std::vector<Atom> all(u.atoms().begin(), u.atoms().end());
  all.insert(all.end(), v.atoms().begin(), v.atoms().end());
  return AtomicMeasure(std::move(all));
}

}  // namespace xfer
