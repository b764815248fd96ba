#include "mwlab/carleson.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mwlab {

namespace {

void validate_psd_entry(const DyadicTree& tree, int dim, const DyadicIndex& idx,
                        const Matrix& a) {
  tree.require_valid(idx);
  if (a.rows() != dim || a.cols() != dim)
    throw std::invalid_argument("CarlesonSequence: entry at " + idx.str() +
                                " is not " + std::to_string(dim) + "x" +
                                std::to_string(dim));
  if (!a.allFinite())
    throw std::invalid_argument("CarlesonSequence: entry at " + idx.str() +
                                " has non-finite entries");
  if (!is_symmetric(a))
    throw NotSpdError("CarlesonSequence: entry at " + idx.str() +
                      " is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(a),
                                           Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  const double norm = std::max(std::abs(lo), std::abs(hi));
  if (lo < -1e-12 * norm)
    throw NotSpdError("CarlesonSequence: entry at " + idx.str() +
                      " has eigenvalue " + std::to_string(lo) +
                      " below the PSD tolerance");
}

void require_match(const MatrixWeight& w, const CarlesonSequence& a,
                   const char* where) {
  detail::require_same_grid(w.depth(), w.dim(), a.depth(), a.dim(), where);
}

// max over J of 2^{J.level} * subtree_sum(J) where subtree_sum accumulates
// per-interval scalar terms bottom-up in heap order.
double max_normalized_subtree_sum(const DyadicTree& tree,
                                  const std::vector<double>& term) {
  std::vector<double> acc(term);
  const std::int64_t base = tree.cell_count() - 1;
  for (std::int64_t id = base - 1; id >= 0; --id)
    acc[static_cast<std::size_t>(id)] +=
        acc[static_cast<std::size_t>(2 * id + 1)] +
        acc[static_cast<std::size_t>(2 * id + 2)];
  double best = 0.0;
  for (const DyadicIndex& j : tree.all_intervals())
    best = std::max(best, std::ldexp(acc[static_cast<std::size_t>(
                              tree.node_id(j))],
                          j.level));
  return best;
}

}  // namespace

CarlesonSequence::CarlesonSequence(int depth, int dim)
    : tree_(depth), dim_(dim) {
  if (dim < 1) throw std::invalid_argument("CarlesonSequence: dim must be >= 1");
}

CarlesonSequence::CarlesonSequence(int depth, int dim,
                                   std::map<DyadicIndex, Matrix> entries)
    : CarlesonSequence(depth, dim) {
  for (auto& [idx, a] : entries) {
    validate_psd_entry(tree_, dim_, idx, a);
    entries_[idx] = symmetrized(a);
  }
}

void CarlesonSequence::set(const DyadicIndex& idx, const Matrix& a) {
  validate_psd_entry(tree_, dim_, idx, a);
  entries_[idx] = symmetrized(a);
}

double testing_constant_norm(const MatrixWeight& w, const CarlesonSequence& a) {
  require_match(w, a, "testing_constant_norm");
  const DyadicTree& tree = w.tree();
  const IntervalTable<Matrix> avg(tree, w.cells());
  std::vector<double> term(static_cast<std::size_t>(tree.node_count()), 0.0);
  for (const auto& [idx, mat] : a.entries()) {
    const Matrix half = psd_sqrt(avg.at(idx));
    term[static_cast<std::size_t>(tree.node_id(idx))] =
        std::max(0.0, lambda_max(half * mat * half));
  }
  return max_normalized_subtree_sum(tree, term);
}

double testing_constant_matrix(const MatrixWeight& w, const CarlesonSequence& a) {
  require_match(w, a, "testing_constant_matrix");
  const DyadicTree& tree = w.tree();
  const int d = w.dim();
  const IntervalTable<Matrix> avg(tree, w.cells());

  std::vector<Matrix> acc(static_cast<std::size_t>(tree.node_count()),
                          Matrix::Zero(d, d));
  for (const auto& [idx, mat] : a.entries()) {
    const Matrix& m = avg.at(idx);
    acc[static_cast<std::size_t>(tree.node_id(idx))] = m * mat * m;
  }
  const std::int64_t base = tree.cell_count() - 1;
  for (std::int64_t id = base - 1; id >= 0; --id)
    acc[static_cast<std::size_t>(id)] +=
        acc[static_cast<std::size_t>(2 * id + 1)] +
        acc[static_cast<std::size_t>(2 * id + 2)];

  double best = 0.0;
  for (const DyadicIndex& j : tree.all_intervals()) {
    const Matrix inv_half = spd_power(avg.at(j), -0.5);
    const Matrix& sum = acc[static_cast<std::size_t>(tree.node_id(j))];
    const double normalized =
        std::ldexp(1.0, j.level) * lambda_max(inv_half * sum * inv_half);
    best = std::max(best, normalized);
  }
  return best;
}

double embedding_constant(const MatrixWeight& w, const CarlesonSequence& a) {
  require_match(w, a, "embedding_constant");
  if (a.size() == 0) return 0.0;
  const DyadicTree& tree = w.tree();
  const int d = w.dim();
  const std::int64_t n_cells = tree.cell_count();
  const Eigen::Index cols = static_cast<Eigen::Index>(d) * n_cells;
  const Eigen::Index rows =
      static_cast<Eigen::Index>(d) * static_cast<Eigen::Index>(a.size());

  std::vector<Matrix> w_half;
  w_half.reserve(static_cast<std::size_t>(n_cells));
  for (std::int64_t c = 0; c < n_cells; ++c)
    w_half.push_back(psd_sqrt(w.cell(c)));

  // In the orthonormal basis u_c = 2^{-N/2} f_c the form is ||K u||^2 with
  // one row block per entry: 2^{level - N/2} A_I^{1/2} [W_c^{1/2}]_{c in I}.
  Matrix k = Matrix::Zero(rows, cols);
  Eigen::Index row = 0;
  for (const auto& [idx, mat] : a.entries()) {
    const Matrix a_half = psd_sqrt(mat);
    const double scale = std::exp2(idx.level - 0.5 * tree.depth());
    const auto [first, last] = tree.cell_range(idx);
    for (std::int64_t c = first; c < last; ++c)
      k.block(row, static_cast<Eigen::Index>(c) * d, d, d) =
          scale * (a_half * w_half[static_cast<std::size_t>(c)]);
    row += d;
  }

  Eigen::SelfAdjointEigenSolver<Matrix> es(
      Matrix(k.transpose() * k), Eigen::EigenvaluesOnly);
  return std::max(0.0, es.eigenvalues().maxCoeff());
}

double scalar_testing_constant(const MatrixWeight& w, const CarlesonSequence& a) {
  require_match(w, a, "scalar_testing_constant");
  if (w.dim() != 1)
    throw std::invalid_argument("scalar_testing_constant: requires dim 1");
  const DyadicTree& tree = w.tree();
  const IntervalTable<Matrix> avg(tree, w.cells());

  std::vector<double> term(static_cast<std::size_t>(tree.node_count()), 0.0);
  for (const auto& [idx, mat] : a.entries()) {
    const double mean = avg.at(idx)(0, 0);
    term[static_cast<std::size_t>(tree.node_id(idx))] = mat(0, 0) * mean * mean;
  }
  std::vector<double> acc(term);
  const std::int64_t base = tree.cell_count() - 1;
  for (std::int64_t id = base - 1; id >= 0; --id)
    acc[static_cast<std::size_t>(id)] +=
        acc[static_cast<std::size_t>(2 * id + 1)] +
        acc[static_cast<std::size_t>(2 * id + 2)];

  double best = 0.0;
  for (const DyadicIndex& j : tree.all_intervals()) {
    const double sum = acc[static_cast<std::size_t>(tree.node_id(j))];
    best = std::max(best, std::ldexp(sum, j.level) / avg.at(j)(0, 0));
  }
  return best;
}

double scalar_cet_ratio(const MatrixWeight& w, const CarlesonSequence& a) {
  const double c2 = scalar_testing_constant(w, a);
  const double c1 = embedding_constant(w, a);
  if (c1 == 0.0 && c2 == 0.0) return 1.0;
  return c1 / c2;
}

namespace {

// band k holds values in (2^{k-1}, 2^k]; the loops absorb log2 roundoff so
// the bracketing is exact on the actual doubles.
int band_of(double v) {
  int k = static_cast<int>(std::ceil(std::log2(v)));
  while (std::exp2(static_cast<double>(k - 1)) >= v) --k;
  while (std::exp2(static_cast<double>(k)) < v) ++k;
  return k;
}

}  // namespace

StoppingDecomposition stopping_time(const MatrixWeight& w, const GridVectorFn& f) {
  detail::require_same_grid(w.depth(), w.dim(), f.depth(), f.dim(),
                            "stopping_time");
  const DyadicTree& tree = w.tree();
  const std::vector<double> vals = mw_interval_values(w, f);

  constexpr int kUnselected = std::numeric_limits<int>::min();
  std::vector<int> selected(static_cast<std::size_t>(tree.node_count()),
                            kUnselected);

  StoppingDecomposition out{{}, {}, GridScalarFn::zero(tree.depth())};

  // levels top-down, so selected ancestors are known when a level is scanned
  for (const DyadicIndex& idx : tree.all_intervals()) {
    const auto id = static_cast<std::size_t>(tree.node_id(idx));
    const double v = vals[id];
    if (!(v > 0.0)) continue;
    const int k = band_of(v);
    bool maximal = true;
    DyadicIndex cur = idx;
    while (cur.level > 0) {
      cur = cur.parent();
      if (selected[static_cast<std::size_t>(tree.node_id(cur))] == k) {
        maximal = false;
        break;
      }
    }
    if (maximal) {
      selected[id] = k;
      out.bands[k].push_back(idx);
    }
  }

  // star assignment and g, both by ancestor scans
  for (const DyadicIndex& idx : tree.all_intervals()) {
    if (!(vals[static_cast<std::size_t>(tree.node_id(idx))] > 0.0)) continue;
    int best = kUnselected;
    for (const DyadicIndex& anc : tree.ancestors(idx)) {
      const int k = selected[static_cast<std::size_t>(tree.node_id(anc))];
      if (k != kUnselected) best = std::max(best, k);
    }
    if (best != kUnselected) out.star[idx] = best;
  }

  for (std::int64_t c = 0; c < tree.cell_count(); ++c) {
    double sum = 0.0;
    for (const DyadicIndex& anc : tree.ancestors(tree.cell(c))) {
      const auto id = static_cast<std::size_t>(tree.node_id(anc));
      if (selected[id] != kUnselected) sum += vals[id];
    }
    out.g.cell(c) = sum;
  }
  return out;
}

double check_g_domination(const MatrixWeight& w, const GridVectorFn& f) {
  const StoppingDecomposition dec = stopping_time(w, f);
  const GridScalarFn m = maximal_mw(w, f);
  double worst = 0.0;
  for (std::int64_t c = 0; c < m.cell_count(); ++c) {
    if (m.cell(c) > 0.0)
      worst = std::max(worst, dec.g.cell(c) / m.cell(c));
  }
  return worst;
}

}  // namespace mwlab
