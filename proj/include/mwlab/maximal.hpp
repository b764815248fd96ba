#pragma once

#include "mwlab/weights.hpp"

#include <cstdint>
#include <vector>

namespace mwlab {

/// A nonnegative scalar function, piecewise constant on the cells.
class GridScalarFn {
 public:
  GridScalarFn(int depth, std::vector<double> cells);

  static GridScalarFn zero(int depth);

  int depth() const { return tree_.depth(); }
  const DyadicTree& tree() const { return tree_; }
  std::int64_t cell_count() const { return tree_.cell_count(); }
  double cell(std::int64_t i) const { return cells_[static_cast<std::size_t>(i)]; }
  double& cell(std::int64_t i) { return cells_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& cells() const { return cells_; }

  double l2_norm() const;
  double l1_norm() const;
  double max() const;

 private:
  DyadicTree tree_;
  std::vector<double> cells_;
};

/// M_W f(x) = max over intervals I containing x of
/// ||<W>_I^{-1/2} <W^{1/2} f>_I||.  `level_cap` < 0 means all levels; a cap m
/// restricts the max to intervals with level <= m.
GridScalarFn maximal_mw(const MatrixWeight& w, const GridVectorFn& f,
                        int level_cap = -1);

/// Auxiliary (Christ-Goldberg) maximal function
/// M~_V f(x) = max over I containing x of
/// (1/|I|) * integral over I of ||<V>_I^{1/2} V^{-1/2}(y) f(y)|| dy.
GridScalarFn maximal_aux(const MatrixWeight& v, const GridVectorFn& f,
                         int level_cap = -1);

/// max over cells of (M_W f - M~_{W^-1} f); nonpositive up to roundoff.
double check_domination(const MatrixWeight& w, const GridVectorFn& f);

enum class MaximalKind { mw, aux };

struct MaximalSearchResult {
  double value = 0.0;      // best ratio ||M f|| / ||f|| found
  GridVectorFn argmax;     // the f achieving it
};

/// Certified lower bound on ||M||_{L2 -> L2} by random starts plus
/// cell-wise ascent with line search (50 sweeps or 1e-9 relative stall).
/// The returned value is a ratio actually attained by `argmax`.
MaximalSearchResult maximal_norm_lower_bound_detail(MaximalKind kind,
                                                    const MatrixWeight& w,
                                                    int trials,
                                                    std::uint64_t seed);

double maximal_norm_lower_bound(MaximalKind kind, const MatrixWeight& w,
                                int trials, std::uint64_t seed);

/// Per-interval values ||<W>_I^{-1/2} <W^{1/2} f>_I|| in heap order;
/// the building block shared by the maximal function and the stopping time.
std::vector<double> mw_interval_values(const MatrixWeight& w,
                                       const GridVectorFn& f);

}  // namespace mwlab
