#include <cmath>
#include <limits>
#include <map>

#include "cauchy_common.hpp"
#include "xfer/cauchy.hpp"
#include "xfer/errors.hpp"
#include "xfer/measure_io.hpp"
#include "xfer/transfer.hpp"

namespace xfer {

namespace {

// Antiderivative of the triangular bump on (1, 2), peak 2 at 1.5.
double bump_cdf(double s) {
  if (s <= 1.0) return 0.0;
  if (s <= 1.5) return 2.0 * (s - 1.0) * (s - 1.0);
  if (s < 2.0) return 1.0 - 2.0 * (2.0 - s) * (2.0 - s);
  return 1.0;
}

class Grid {
 public:
  Grid(double eps, std::size_t nx, bool mirrored)
      : eps_(eps), lo_(eps), width_((1.0 / eps - eps) / static_cast<double>(nx)), nx_(nx),
        mirrored_(mirrored) {}

  [[nodiscard]] std::size_t size() const { return nx_; }
  [[nodiscard]] double width() const { return width_; }
  [[nodiscard]] double edge(std::size_t i) const {
    return i == nx_ ? 1.0 / eps_ : lo_ + static_cast<double>(i) * width_;
  }
  [[nodiscard]] double mid(std::size_t i) const { return lo_ + (static_cast<double>(i) + 0.5) * width_; }

  // Adds the cell masses of (Gamma_eps * mu) restricted to [eps, 1/eps].
  // Written orientation: the integral over y of Gamma_eps(y - x) d mu(y), which
  // places an atom at y on (y - 2 eps, y - eps). Mass leaving the grid is lost.
  void deposit(const AtomicMeasure& mu, double scale, std::vector<double>& cells) const {
    for (const Atom& a : mu.atoms()) deposit_atom(a.location, a.weight * scale, cells);
  }

  void deposit_atom(double y, double w, std::vector<double>& cells) const {
    const double from = mirrored_ ? y + eps_ : y - 2.0 * eps_;
    const double to = mirrored_ ? y + 2.0 * eps_ : y - eps_;
    if (to <= lo_ || from >= edge(nx_)) return;
    const auto cell_of = [&](double x) {
      const double r = std::floor((x - lo_) / width_);
      return static_cast<std::size_t>(std::clamp(r, 0.0, static_cast<double>(nx_ - 1)));
    };
    const std::size_t first = cell_of(std::max(from, lo_));
    const std::size_t last = cell_of(std::min(to, edge(nx_)));
    for (std::size_t i = first; i <= last; ++i) {
      const double a = edge(i);
      const double b = edge(i + 1);
      const double part = mirrored_ ? bump_cdf((b - y) / eps_) - bump_cdf((a - y) / eps_)
                                    : bump_cdf((y - a) / eps_) - bump_cdf((y - b) / eps_);
      if (part > 0.0) cells[i] += w * part;
    }
  }

  [[nodiscard]] AtomicMeasure to_measure(const std::vector<double>& cells) const {
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < nx_; ++i) {
      if (cells[i] > 0.0) atoms.push_back({mid(i), cells[i]});
    }
    return adopt_canonical(std::move(atoms));
  }

 private:
  double eps_;
  double lo_;
  double width_;
  std::size_t nx_;
  bool mirrored_;
};

double total(const std::vector<double>& cells) {
  CompensatedSum acc;
  for (double c : cells) acc.add(c);
  return acc.value();
}

class GridSolver {
 public:
  explicit GridSolver(const Scenario& s)
      : s_(s), v_(s.solver), kernel_(make_kernel(s.kernel)), grid_(v_.eps, v_.nx, v_.mirrored),
        times_(v_) {
  }

  Trajectory run() {
    std::vector<double> state(grid_.size(), 0.0);
    grid_.deposit(s_.initial, 1.0, state);

    Trajectory traj;
    AtomicMeasure last = grid_.to_measure(state);
    detail::record(traj, 0.0, last, 0.0);
    double last_t = 0.0;

    std::size_t per_window =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(v_.window / v_.dt)));
    std::size_t k0 = 0;
    while (k0 < times_.steps) {
      const std::size_t len = std::min(per_window, times_.steps - k0);
      std::vector<std::vector<double>> nodes;
      if (!solve_window(k0, len, state, nodes)) {
        if (per_window == 1) {
          throw WindowTooLarge("Picard iteration does not contract at t = " +
                               format_double(times_.time(k0)) + " even with a single-step window; "
                               "reduce dt");
        }
        per_window = std::max<std::size_t>(1, per_window / 2);
        continue;
      }
      for (std::size_t l = 1; l <= len; ++l) {
        const std::size_t k = k0 + l;
        if (!detail::snapshot_due(k, times_, v_.snapshot_every)) continue;
        const double t = times_.time(k);
        AtomicMeasure snap = grid_.to_measure(nodes[l]);
        if (!(snap.mass() >= 1e-12)) {
          throw DegenerateMass("grid mass fell to " + format_double(snap.mass()) + " at t = " + format_double(t));
        }
        const double rate = tv_distance(last, snap) / (t - last_t);
        detail::record(traj, t, snap, rate);
        last = std::move(snap);
        last_t = t;
      }
      state = nodes[len];
      k0 += len;
    }
    return traj;
  }

 private:
  // (Gamma_eps * T_B[n, n]) / |n| on the grid.
  std::vector<double> transfer_term(const std::vector<double>& cells) const {
    std::vector<double> out(grid_.size(), 0.0);
    const double mass = total(cells);
    if (!(mass >= 1e-12)) throw DegenerateMass("grid mass fell to " + format_double(mass));
    const AtomicMeasure u = grid_.to_measure(cells);
    const std::size_t m = kernel_.atoms.size();
    const double count = static_cast<double>(m) * static_cast<double>(m) * static_cast<double>(u.size()) *
                         static_cast<double>(u.size());
    const AtomicMeasure tb = count <= static_cast<double>(kDefaultProductCap)
                                 ? t_b_exact(kernel_, u, u)
                                 : t_b(kernel_, u, u, v_.max_atoms,
                                       detail::transfer_options(v_, kernel_.atoms.size(), u.size()))
                                       .measure;
    grid_.deposit(tb, 1.0 / mass, out);
    return out;
  }

  const std::vector<double>& source_term(double t) {
    const AtomicMeasure* g = s_.source.at(t);
    if (g == nullptr) return zeros_;
    auto it = source_cache_.find(g);
    if (it == source_cache_.end()) {
      std::vector<double> cells(grid_.size(), 0.0);
      grid_.deposit(*g, 1.0, cells);
      it = source_cache_.emplace(g, std::move(cells)).first;
    }
    return it->second;
  }

  // Picard iteration on nodes k0 .. k0 + len. Returns false when the
  // iteration stops contracting or runs out of iterations.
  bool solve_window(std::size_t k0, std::size_t len, const std::vector<double>& start,
                    std::vector<std::vector<double>>& nodes) {
    const std::size_t nx = grid_.size();
    zeros_.assign(nx, 0.0);
    std::vector<double> t(len + 1);
    for (std::size_t l = 0; l <= len; ++l) t[l] = times_.time(k0 + l);

    // cum[l][i] = integral of h over [t0, t_l] at the midpoint of cell i.
    std::vector<std::vector<double>> cum(len + 1, std::vector<double>(nx, 0.0));
    for (std::size_t l = 1; l <= len; ++l) {
      for (std::size_t i = 0; i < nx; ++i) {
        cum[l][i] = cum[l - 1][i] + growth_integral(s_.growth, grid_.mid(i), t[l - 1], t[l]);
      }
    }

    nodes.assign(len + 1, start);
    std::vector<std::vector<double>> forcing(len + 1);
    std::vector<std::vector<double>> next(len + 1);
    double prev_change = std::numeric_limits<double>::infinity();
    int growing = 0;

    for (std::size_t iter = 0; iter < v_.picard_max; ++iter) {
      for (std::size_t l = 0; l <= len; ++l) {
        if (iter > 0 && l == 0) continue;
        forcing[l] = transfer_term(nodes[l]);
        const auto& g = source_term(t[l]);
        for (std::size_t i = 0; i < nx; ++i) forcing[l][i] += g[i];
      }

      double change = 0.0;
      next[0] = start;
      for (std::size_t l = 1; l <= len; ++l) {
        std::vector<double>& out = next[l];
        out.assign(nx, 0.0);
        for (std::size_t i = 0; i < nx; ++i) out[i] = std::exp(cum[l][i]) * start[i];
        for (std::size_t q = 0; q <= l; ++q) {
          // trapezoid weights on the nodes 0..l
          double w = 0.0;
          if (q > 0) w += 0.5 * (t[q] - t[q - 1]);
          if (q < l) w += 0.5 * (t[q + 1] - t[q]);
          for (std::size_t i = 0; i < nx; ++i) {
            if (forcing[q][i] != 0.0) out[i] += w * std::exp(cum[l][i] - cum[q][i]) * forcing[q][i];
          }
        }
        for (std::size_t i = 0; i < nx; ++i) {
          change = std::max(change, std::abs(out[i] - nodes[l][i]) / grid_.width());
        }
      }
      nodes.swap(next);
      if (change <= v_.picard_tol) return true;
      growing = change > prev_change ? growing + 1 : 0;
      if (growing >= 3) return false;
      prev_change = change;
    }
    return false;
  }

  const Scenario& s_;
  const SolverSettings& v_;
  TransferKernel kernel_;
  Grid grid_;
  detail::TimeGrid times_;
  std::vector<double> zeros_;
  std::map<const AtomicMeasure*, std::vector<double>> source_cache_;
};

}  // namespace

Trajectory evolve_grid_picard(const Scenario& s) {
  validate_scenario(s);
  return GridSolver(s).run();
}

}  // namespace xfer
