#include "mwlab/weights.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mwlab {

namespace detail {

void require_same_grid(int depth_a, int dim_a, int depth_b, int dim_b,
                       const char* where) {
  if (depth_a != depth_b || dim_a != dim_b)
    throw DimensionMismatchError(std::string(where) + ": grids disagree (depth " +
                                 std::to_string(depth_a) + " vs " +
                                 std::to_string(depth_b) + ", dim " +
                                 std::to_string(dim_a) + " vs " +
                                 std::to_string(dim_b) + ")");
}

namespace {

// Pairwise sum over a cell range. Matches the bottom-up IntervalTable
// association, so `average` and the tables agree bit for bit.
template <typename T, typename Get>
T pairwise_sum(std::int64_t first, std::int64_t last, const Get& get) {
  if (last - first == 1) return get(first);
  const std::int64_t mid = first + (last - first) / 2;
  return pairwise_sum<T>(first, mid, get) + pairwise_sum<T>(mid, last, get);
}

}  // namespace
}  // namespace detail

MatrixWeight::MatrixWeight(int depth, int dim, std::vector<Matrix> cells)
    : tree_(depth), dim_(dim), cells_(std::move(cells)) {
  if (dim < 1) throw std::invalid_argument("MatrixWeight: dim must be >= 1");
  if (static_cast<std::int64_t>(cells_.size()) != tree_.cell_count())
    throw std::invalid_argument("MatrixWeight: expected " +
                                std::to_string(tree_.cell_count()) +
                                " cells, got " + std::to_string(cells_.size()));
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    Matrix& m = cells_[i];
    if (m.rows() != dim || m.cols() != dim)
      throw std::invalid_argument("MatrixWeight: cell " + std::to_string(i) +
                                  " is not " + std::to_string(dim) + "x" +
                                  std::to_string(dim));
    if (!m.allFinite())
      throw std::invalid_argument("MatrixWeight: cell " + std::to_string(i) +
                                  " has non-finite entries");
    if (!is_symmetric(m))
      throw NotSpdError("MatrixWeight: cell " + std::to_string(i) +
                        " is not symmetric");
    m = symmetrized(m);
    if (!is_spd(m))
      throw NotSpdError("MatrixWeight: cell " + std::to_string(i) +
                        " is not positive definite");
  }
}

MatrixWeight MatrixWeight::identity(int depth, int dim) {
  std::vector<Matrix> cells(static_cast<std::size_t>(std::int64_t{1} << depth),
                            Matrix::Identity(dim, dim));
  return MatrixWeight(depth, dim, std::move(cells));
}

GridVectorFn::GridVectorFn(int depth, int dim, std::vector<Vector> cells)
    : tree_(depth), dim_(dim), cells_(std::move(cells)) {
  if (dim < 1) throw std::invalid_argument("GridVectorFn: dim must be >= 1");
  if (static_cast<std::int64_t>(cells_.size()) != tree_.cell_count())
    throw std::invalid_argument("GridVectorFn: expected " +
                                std::to_string(tree_.cell_count()) +
                                " cells, got " + std::to_string(cells_.size()));
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    if (cells_[i].size() != dim)
      throw std::invalid_argument("GridVectorFn: cell " + std::to_string(i) +
                                  " has wrong dimension");
    if (!cells_[i].allFinite())
      throw std::invalid_argument("GridVectorFn: cell " + std::to_string(i) +
                                  " has non-finite entries");
  }
}

GridVectorFn GridVectorFn::zero(int depth, int dim) {
  std::vector<Vector> cells(static_cast<std::size_t>(std::int64_t{1} << depth),
                            Vector::Zero(dim));
  return GridVectorFn(depth, dim, std::move(cells));
}

GridVectorFn GridVectorFn::constant(int depth, const Vector& value) {
  std::vector<Vector> cells(static_cast<std::size_t>(std::int64_t{1} << depth),
                            value);
  return GridVectorFn(depth, static_cast<int>(value.size()), std::move(cells));
}

double GridVectorFn::l2_norm() const {
  double sum = 0.0;
  for (const Vector& v : cells_) sum += v.squaredNorm();
  return std::sqrt(sum * std::ldexp(1.0, -depth()));
}

Matrix average(const MatrixWeight& w, const DyadicIndex& idx) {
  const auto [first, last] = w.tree().cell_range(idx);
  Matrix sum = detail::pairwise_sum<Matrix>(
      first, last, [&](std::int64_t i) { return w.cell(i); });
  return sum * std::ldexp(1.0, idx.level - w.depth());
}

Vector average(const GridVectorFn& f, const DyadicIndex& idx) {
  const auto [first, last] = f.tree().cell_range(idx);
  Vector sum = detail::pairwise_sum<Vector>(
      first, last, [&](std::int64_t i) { return f.cell(i); });
  return sum * std::ldexp(1.0, idx.level - f.depth());
}

MatrixWeight inverse_weight(const MatrixWeight& w) {
  std::vector<Matrix> cells;
  cells.reserve(static_cast<std::size_t>(w.cell_count()));
  for (std::int64_t i = 0; i < w.cell_count(); ++i)
    cells.push_back(spd_power(w.cell(i), -1.0));
  return MatrixWeight(w.depth(), w.dim(), std::move(cells));
}

double a2_characteristic(const MatrixWeight& w) {
  const MatrixWeight inv = inverse_weight(w);
  const IntervalTable<Matrix> avg_w(w.tree(), w.cells());
  const IntervalTable<Matrix> avg_inv(w.tree(), inv.cells());
  double best = 0.0;
  for (const DyadicIndex& idx : w.tree().all_intervals())
    best = std::max(best, sym_product_norm_sq(avg_w.at(idx), avg_inv.at(idx)));
  return best;
}

double weighted_l2_norm(const GridVectorFn& f, const MatrixWeight& w) {
  detail::require_same_grid(f.depth(), f.dim(), w.depth(), w.dim(),
                            "weighted_l2_norm");
  double sum = 0.0;
  for (std::int64_t i = 0; i < f.cell_count(); ++i)
    sum += f.cell(i).dot(w.cell(i) * f.cell(i));
  return std::sqrt(std::max(0.0, sum) * std::ldexp(1.0, -f.depth()));
}

double contraction_check(const MatrixWeight& w, const DyadicIndex& idx) {
  const Matrix avg_w = average(w, idx);
  const Matrix avg_inv = average(inverse_weight(w), idx);
  // ||<W>^{-1/2} <W^{-1}>^{-1/2}|| via the symmetric product.
  return std::sqrt(
      sym_product_norm_sq(spd_power(avg_w, -1.0), spd_power(avg_inv, -1.0)));
}

double reverse_holder_integral(const MatrixWeight& v, const DyadicIndex& idx,
                               double eps) {
  if (!(eps > 0.0))
    throw std::invalid_argument("reverse_holder_integral: eps must be > 0");
  const Matrix avg_half = psd_sqrt(average(v, idx));
  const auto [first, last] = v.tree().cell_range(idx);
  double sum = 0.0;
  for (std::int64_t c = first; c < last; ++c) {
    // ||V_c^{-1/2} <V>^{1/2}||^2 = lambda_max(<V>^{1/2} V_c^{-1} <V>^{1/2})
    const double norm_sq =
        lambda_max(avg_half * spd_power(v.cell(c), -1.0) * avg_half);
    sum += std::pow(std::max(0.0, norm_sq), 1.0 + eps);
  }
  return sum / static_cast<double>(last - first);
}

GridVectorFn sqrt_apply(const MatrixWeight& w, const GridVectorFn& f) {
  detail::require_same_grid(f.depth(), f.dim(), w.depth(), w.dim(), "sqrt_apply");
  std::vector<Vector> cells;
  cells.reserve(static_cast<std::size_t>(f.cell_count()));
  for (std::int64_t i = 0; i < f.cell_count(); ++i)
    cells.push_back(psd_sqrt(w.cell(i)) * f.cell(i));
  return GridVectorFn(f.depth(), f.dim(), std::move(cells));
}

}  // namespace mwlab
