#pragma once

#include "mwlab/dyadic.hpp"
#include "mwlab/spd.hpp"
#include "mwlab/types.hpp"

#include <cstdint>
#include <vector>

namespace mwlab {

/// A matrix weight: one symmetric positive definite dim x dim matrix per
/// level-`depth` cell of [0,1). Immutable after construction.
class MatrixWeight {
 public:
  MatrixWeight(int depth, int dim, std::vector<Matrix> cells);

  static MatrixWeight identity(int depth, int dim);

  int depth() const { return tree_.depth(); }
  int dim() const { return dim_; }
  const DyadicTree& tree() const { return tree_; }
  std::int64_t cell_count() const { return tree_.cell_count(); }
  const Matrix& cell(std::int64_t i) const { return cells_[static_cast<std::size_t>(i)]; }
  const std::vector<Matrix>& cells() const { return cells_; }

 private:
  DyadicTree tree_;
  int dim_;
  std::vector<Matrix> cells_;
};

/// An R^dim-valued function, piecewise constant on the cells.
class GridVectorFn {
 public:
  GridVectorFn(int depth, int dim, std::vector<Vector> cells);

  static GridVectorFn zero(int depth, int dim);
  static GridVectorFn constant(int depth, const Vector& value);

  int depth() const { return tree_.depth(); }
  int dim() const { return dim_; }
  const DyadicTree& tree() const { return tree_; }
  std::int64_t cell_count() const { return tree_.cell_count(); }
  const Vector& cell(std::int64_t i) const { return cells_[static_cast<std::size_t>(i)]; }
  Vector& cell(std::int64_t i) { return cells_[static_cast<std::size_t>(i)]; }
  const std::vector<Vector>& cells() const { return cells_; }

  /// Unweighted L^2([0,1)) norm: sqrt(sum ||f_c||^2 * 2^-depth).
  double l2_norm() const;

 private:
  DyadicTree tree_;
  int dim_;
  std::vector<Vector> cells_;
};

/// Per-interval averages <X>_I of a cell field, for every interval of the
/// tree at once. Built bottom-up, so the tower property
/// <X>_I = (<X>_left + <X>_right) / 2 holds exactly in floating point.
template <typename T>
class IntervalTable {
 public:
  IntervalTable(const DyadicTree& tree, const std::vector<T>& cells)
      : tree_(tree), nodes_(static_cast<std::size_t>(tree.node_count())) {
    const std::int64_t n = tree.cell_count();
    const std::int64_t base = n - 1;
    for (std::int64_t p = 0; p < n; ++p)
      nodes_[static_cast<std::size_t>(base + p)] = cells[static_cast<std::size_t>(p)];
    for (std::int64_t id = base - 1; id >= 0; --id)
      nodes_[static_cast<std::size_t>(id)] =
          0.5 * (nodes_[static_cast<std::size_t>(2 * id + 1)] +
                 nodes_[static_cast<std::size_t>(2 * id + 2)]);
  }

  const T& at(const DyadicIndex& idx) const {
    return nodes_[static_cast<std::size_t>(tree_.node_id(idx))];
  }

  const DyadicTree& tree() const { return tree_; }

 private:
  DyadicTree tree_;
  std::vector<T> nodes_;
};

/// <W>_I = (1/|I|) * integral of W over I, as an exact cell sum.
Matrix average(const MatrixWeight& w, const DyadicIndex& idx);
Vector average(const GridVectorFn& f, const DyadicIndex& idx);

/// Cell-wise matrix inverse; involutive.
MatrixWeight inverse_weight(const MatrixWeight& w);

/// [W]_{A2} = max over intervals of ||<W>_I^{1/2} <W^{-1}>_I^{1/2}||^2.
double a2_characteristic(const MatrixWeight& w);

/// sqrt( sum_cells <W_c f_c, f_c> * 2^-depth ).
double weighted_l2_norm(const GridVectorFn& f, const MatrixWeight& w);

/// ||<W>_I^{-1/2} <W^{-1}>_I^{-1/2}||; at most 1 for any weight.
double contraction_check(const MatrixWeight& w, const DyadicIndex& idx);

/// (1/|I|) * integral over I of ||V^{-1/2}(y) <V>_I^{1/2}||^{2+2*eps} dy.
double reverse_holder_integral(const MatrixWeight& v, const DyadicIndex& idx,
                               double eps);

/// Cell-wise W^{1/2} f, the integrand of <W^{1/2} f>_I.
GridVectorFn sqrt_apply(const MatrixWeight& w, const GridVectorFn& f);

namespace detail {
void require_same_grid(int depth_a, int dim_a, int depth_b, int dim_b,
                       const char* where);
}

}  // namespace mwlab
