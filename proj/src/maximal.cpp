#include "mwlab/maximal.hpp"

#include "mwlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mwlab {

GridScalarFn::GridScalarFn(int depth, std::vector<double> cells)
    : tree_(depth), cells_(std::move(cells)) {
  if (static_cast<std::int64_t>(cells_.size()) != tree_.cell_count())
    throw std::invalid_argument("GridScalarFn: expected " +
                                std::to_string(tree_.cell_count()) +
                                " cells, got " + std::to_string(cells_.size()));
  for (double v : cells_)
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument("GridScalarFn: cells must be finite and >= 0");
}

GridScalarFn GridScalarFn::zero(int depth) {
  return GridScalarFn(depth, std::vector<double>(
                                 static_cast<std::size_t>(std::int64_t{1} << depth), 0.0));
}

double GridScalarFn::l2_norm() const {
  double sum = 0.0;
  for (double v : cells_) sum += v * v;
  return std::sqrt(sum * std::ldexp(1.0, -depth()));
}

double GridScalarFn::l1_norm() const {
  double sum = 0.0;
  for (double v : cells_) sum += v;
  return sum * std::ldexp(1.0, -depth());
}

double GridScalarFn::max() const {
  double best = 0.0;
  for (double v : cells_) best = std::max(best, v);
  return best;
}

namespace {

// Shared per-weight precomputation so the norm search does not redo the
// d x d eigen work on every objective evaluation.
struct MwTables {
  const MatrixWeight* w;
  std::vector<Matrix> sqrt_cells;      // W_c^{1/2}
  std::vector<Matrix> inv_sqrt_nodes;  // <W>_I^{-1/2}, heap order

  explicit MwTables(const MatrixWeight& weight) : w(&weight) {
    const DyadicTree& tree = weight.tree();
    sqrt_cells.reserve(static_cast<std::size_t>(tree.cell_count()));
    for (std::int64_t c = 0; c < tree.cell_count(); ++c)
      sqrt_cells.push_back(psd_sqrt(weight.cell(c)));
    const IntervalTable<Matrix> avg(tree, weight.cells());
    inv_sqrt_nodes.resize(static_cast<std::size_t>(tree.node_count()));
    for (const DyadicIndex& idx : tree.all_intervals())
      inv_sqrt_nodes[static_cast<std::size_t>(tree.node_id(idx))] =
          spd_power(avg.at(idx), -0.5);
  }

  // ||<W>_I^{-1/2} <W^{1/2} f>_I|| per node, heap order.
  std::vector<double> node_values(const GridVectorFn& f) const {
    const DyadicTree& tree = w->tree();
    std::vector<Vector> prod;
    prod.reserve(static_cast<std::size_t>(tree.cell_count()));
    for (std::int64_t c = 0; c < tree.cell_count(); ++c)
      prod.push_back(sqrt_cells[static_cast<std::size_t>(c)] * f.cell(c));
    const IntervalTable<Vector> avg(tree, prod);
    std::vector<double> vals(static_cast<std::size_t>(tree.node_count()));
    for (const DyadicIndex& idx : tree.all_intervals()) {
      const auto id = static_cast<std::size_t>(tree.node_id(idx));
      vals[id] = (inv_sqrt_nodes[id] * avg.at(idx)).norm();
    }
    return vals;
  }

  GridScalarFn apply(const GridVectorFn& f, int level_cap) const {
    const DyadicTree& tree = w->tree();
    const std::vector<double> vals = node_values(f);
    const int cap = level_cap < 0 ? tree.depth() : level_cap;
    std::vector<double> out(static_cast<std::size_t>(tree.cell_count()), 0.0);
    for (std::int64_t c = 0; c < tree.cell_count(); ++c) {
      double best = 0.0;
      for (const DyadicIndex& anc : tree.ancestors(tree.cell(c)))
        if (anc.level <= cap)
          best = std::max(best, vals[static_cast<std::size_t>(tree.node_id(anc))]);
      out[static_cast<std::size_t>(c)] = best;
    }
    return GridScalarFn(tree.depth(), std::move(out));
  }
};

struct AuxTables {
  const MatrixWeight* v;
  std::vector<Matrix> inv_sqrt_cells;  // V_c^{-1/2}
  std::vector<Matrix> sqrt_nodes;      // <V>_I^{1/2}, heap order

  explicit AuxTables(const MatrixWeight& weight) : v(&weight) {
    const DyadicTree& tree = weight.tree();
    inv_sqrt_cells.reserve(static_cast<std::size_t>(tree.cell_count()));
    for (std::int64_t c = 0; c < tree.cell_count(); ++c)
      inv_sqrt_cells.push_back(spd_power(weight.cell(c), -0.5));
    const IntervalTable<Matrix> avg(tree, weight.cells());
    sqrt_nodes.resize(static_cast<std::size_t>(tree.node_count()));
    for (const DyadicIndex& idx : tree.all_intervals())
      sqrt_nodes[static_cast<std::size_t>(tree.node_id(idx))] =
          psd_sqrt(avg.at(idx));
  }

  GridScalarFn apply(const GridVectorFn& f, int level_cap) const {
    const DyadicTree& tree = v->tree();
    const int cap = level_cap < 0 ? tree.depth() : level_cap;
    std::vector<Vector> y;
    y.reserve(static_cast<std::size_t>(tree.cell_count()));
    for (std::int64_t c = 0; c < tree.cell_count(); ++c)
      y.push_back(inv_sqrt_cells[static_cast<std::size_t>(c)] * f.cell(c));

    // value(I) = mean over cells c in I of ||<V>_I^{1/2} y_c||.
    std::vector<double> vals(static_cast<std::size_t>(tree.node_count()), 0.0);
    for (int k = 0; k <= std::min(cap, tree.depth()); ++k) {
      for (std::int64_t p = 0; p < (std::int64_t{1} << k); ++p) {
        const DyadicIndex idx{k, p};
        const auto id = static_cast<std::size_t>(tree.node_id(idx));
        const Matrix& s = sqrt_nodes[id];
        const auto [first, last] = tree.cell_range(idx);
        double sum = 0.0;
        for (std::int64_t c = first; c < last; ++c)
          sum += (s * y[static_cast<std::size_t>(c)]).norm();
        vals[id] = sum / static_cast<double>(last - first);
      }
    }

    std::vector<double> out(static_cast<std::size_t>(tree.cell_count()), 0.0);
    for (std::int64_t c = 0; c < tree.cell_count(); ++c) {
      double best = 0.0;
      for (const DyadicIndex& anc : tree.ancestors(tree.cell(c)))
        if (anc.level <= cap)
          best = std::max(best, vals[static_cast<std::size_t>(tree.node_id(anc))]);
      out[static_cast<std::size_t>(c)] = best;
    }
    return GridScalarFn(tree.depth(), std::move(out));
  }
};

}  // namespace

std::vector<double> mw_interval_values(const MatrixWeight& w,
                                       const GridVectorFn& f) {
  detail::require_same_grid(f.depth(), f.dim(), w.depth(), w.dim(),
                            "mw_interval_values");
  return MwTables(w).node_values(f);
}

GridScalarFn maximal_mw(const MatrixWeight& w, const GridVectorFn& f,
                        int level_cap) {
  detail::require_same_grid(f.depth(), f.dim(), w.depth(), w.dim(), "maximal_mw");
  return MwTables(w).apply(f, level_cap);
}

GridScalarFn maximal_aux(const MatrixWeight& v, const GridVectorFn& f,
                         int level_cap) {
  detail::require_same_grid(f.depth(), f.dim(), v.depth(), v.dim(), "maximal_aux");
  return AuxTables(v).apply(f, level_cap);
}

double check_domination(const MatrixWeight& w, const GridVectorFn& f) {
  const GridScalarFn lhs = maximal_mw(w, f);
  const GridScalarFn rhs = maximal_aux(inverse_weight(w), f);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::int64_t c = 0; c < lhs.cell_count(); ++c)
    worst = std::max(worst, lhs.cell(c) - rhs.cell(c));
  return worst;
}

namespace {

template <typename Eval>
MaximalSearchResult search_lower_bound(const MatrixWeight& w, int trials,
                                       std::uint64_t seed, const Eval& eval) {
  if (trials < 1)
    throw std::invalid_argument("maximal_norm_lower_bound: trials must be >= 1");
  const int depth = w.depth();
  const int dim = w.dim();
  const std::int64_t n = std::int64_t{1} << depth;

  MaximalSearchResult best{0.0, GridVectorFn::zero(depth, dim)};
  const auto consider = [&](const GridVectorFn& f) {
    const double denom = f.l2_norm();
    if (denom <= 0.0) return 0.0;
    const double ratio = eval(f).l2_norm() / denom;
    if (ratio > best.value) {
      best.value = ratio;
      best.argmax = f;
    }
    return ratio;
  };

  constexpr int kMaxSweeps = 50;
  constexpr double kStall = 1e-9;

  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(trial)));
    std::vector<Vector> cells(static_cast<std::size_t>(n));
    for (auto& cell : cells) {
      cell = Vector(dim);
      for (int j = 0; j < dim; ++j) cell[j] = rng.normal();
    }
    GridVectorFn f(depth, dim, std::move(cells));
    double current = consider(f);

    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
      const double before = current;
      for (std::int64_t c = 0; c < n; ++c) {
        // Perturb one cell along a random direction, coarse line search.
        Vector dir(dim);
        for (int j = 0; j < dim; ++j) dir[j] = rng.normal();
        const double dn = dir.norm();
        if (dn == 0.0) continue;
        dir /= dn;
        const double scale = std::max(f.cell(c).norm(), 0.5);
        const Vector saved = f.cell(c);
        double best_t = 0.0;
        for (double t : {-1.0, -0.25, 0.25, 1.0}) {
          f.cell(c) = saved + (t * scale) * dir;
          const double r = consider(f);
          if (r > current) {
            current = r;
            best_t = t;
          }
        }
        if (best_t != 0.0) {
          // Expand while it keeps paying off.
          double t = best_t;
          for (int grow = 0; grow < 3; ++grow) {
            t *= 2.0;
            f.cell(c) = saved + (t * scale) * dir;
            const double r = consider(f);
            if (r > current) {
              current = r;
              best_t = t;
            } else {
              break;
            }
          }
          f.cell(c) = saved + (best_t * scale) * dir;
        } else {
          f.cell(c) = saved;
        }
      }
      if (current - before <= kStall * std::max(current, 1.0)) break;
    }
  }
  return best;
}

}  // namespace

MaximalSearchResult maximal_norm_lower_bound_detail(MaximalKind kind,
                                                    const MatrixWeight& w,
                                                    int trials,
                                                    std::uint64_t seed) {
  if (kind == MaximalKind::mw) {
    const MwTables tables(w);
    return search_lower_bound(w, trials, seed, [&](const GridVectorFn& f) {
      return tables.apply(f, -1);
    });
  }
  const AuxTables tables(w);
  return search_lower_bound(w, trials, seed, [&](const GridVectorFn& f) {
    return tables.apply(f, -1);
  });
}

double maximal_norm_lower_bound(MaximalKind kind, const MatrixWeight& w,
                                int trials, std::uint64_t seed) {
  return maximal_norm_lower_bound_detail(kind, w, trials, seed).value;
}

}  // namespace mwlab
