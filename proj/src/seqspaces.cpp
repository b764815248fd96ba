#include "mwlab/seqspaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mwlab {

namespace {

void validate_entry(const DyadicTree& tree, int dim, const DyadicIndex& idx,
                    const Matrix& m) {
  tree.require_valid(idx);
  if (m.rows() != dim || m.cols() != dim)
    throw std::invalid_argument("MatrixSequence: entry at " + idx.str() +
                                " is not " + std::to_string(dim) + "x" +
                                std::to_string(dim));
  if (!m.allFinite())
    throw std::invalid_argument("MatrixSequence: entry at " + idx.str() +
                                " has non-finite entries");
}

}  // namespace

MatrixSequence::MatrixSequence(int depth, int dim) : tree_(depth), dim_(dim) {
  if (dim < 1) throw std::invalid_argument("MatrixSequence: dim must be >= 1");
}

MatrixSequence::MatrixSequence(int depth, int dim,
                               std::map<DyadicIndex, Matrix> entries)
    : MatrixSequence(depth, dim) {
  for (const auto& [idx, m] : entries) validate_entry(tree_, dim_, idx, m);
  entries_ = std::move(entries);
}

void MatrixSequence::set(const DyadicIndex& idx, const Matrix& m) {
  validate_entry(tree_, dim_, idx, m);
  entries_[idx] = m;
}

GridScalarFn square_function(const MatrixSequence& s) {
  const DyadicTree& tree = s.tree();
  std::vector<double> norm_sq(static_cast<std::size_t>(tree.node_count()), 0.0);
  for (const auto& [idx, m] : s.entries()) {
    const double nrm = spectral_norm(m);
    norm_sq[static_cast<std::size_t>(tree.node_id(idx))] = nrm * nrm;
  }
  GridScalarFn out = GridScalarFn::zero(tree.depth());
  for (std::int64_t c = 0; c < tree.cell_count(); ++c) {
    double sum = 0.0;
    for (const DyadicIndex& anc : tree.ancestors(tree.cell(c)))
      sum += std::ldexp(
          norm_sq[static_cast<std::size_t>(tree.node_id(anc))], anc.level);
    out.cell(c) = std::sqrt(sum);
  }
  return out;
}

double s_norm(const MatrixSequence& s) { return square_function(s).l1_norm(); }

double t_norm(const MatrixSequence& t) {
  const DyadicTree& tree = t.tree();
  const int d = t.dim();
  std::vector<Matrix> acc(static_cast<std::size_t>(tree.node_count()),
                          Matrix::Zero(d, d));
  for (const auto& [idx, m] : t.entries())
    acc[static_cast<std::size_t>(tree.node_id(idx))] = m * m.transpose();
  const std::int64_t base = tree.cell_count() - 1;
  for (std::int64_t id = base - 1; id >= 0; --id)
    acc[static_cast<std::size_t>(id)] +=
        acc[static_cast<std::size_t>(2 * id + 1)] +
        acc[static_cast<std::size_t>(2 * id + 2)];
  double best = 0.0;
  for (const DyadicIndex& j : tree.all_intervals())
    best = std::max(
        best, std::ldexp(1.0, j.level) *
                  lambda_max(acc[static_cast<std::size_t>(tree.node_id(j))]));
  return std::sqrt(std::max(0.0, best));
}

double pairing(const MatrixSequence& s, const MatrixSequence& t) {
  detail::require_same_grid(s.depth(), s.dim(), t.depth(), t.dim(), "pairing");
  double sum = 0.0;
  for (const auto& [idx, m] : s.entries()) {
    const auto it = t.entries().find(idx);
    if (it != t.entries().end())
      sum += (m.array() * it->second.array()).sum();  // Tr(S T^T)
  }
  return sum;
}

namespace {

// |I cap omega| in cell counts, bottom-up over the indicator.
std::vector<std::int64_t> subtree_counts(const DyadicTree& tree,
                                         const std::vector<bool>& cell_in) {
  std::vector<std::int64_t> counts(
      static_cast<std::size_t>(tree.node_count()), 0);
  const std::int64_t base = tree.cell_count() - 1;
  for (std::int64_t c = 0; c < tree.cell_count(); ++c)
    counts[static_cast<std::size_t>(base + c)] =
        cell_in[static_cast<std::size_t>(c)] ? 1 : 0;
  for (std::int64_t id = base - 1; id >= 0; --id)
    counts[static_cast<std::size_t>(id)] =
        counts[static_cast<std::size_t>(2 * id + 1)] +
        counts[static_cast<std::size_t>(2 * id + 2)];
  return counts;
}

}  // namespace

OmegaDecomposition omega_decomposition(const MatrixSequence& s) {
  const DyadicTree& tree = s.tree();
  const GridScalarFn sq = square_function(s);

  double max_val = 0.0;
  double min_pos = std::numeric_limits<double>::infinity();
  for (std::int64_t c = 0; c < tree.cell_count(); ++c) {
    const double v = sq.cell(c);
    max_val = std::max(max_val, v);
    if (v > 0.0) min_pos = std::min(min_pos, v);
  }
  OmegaDecomposition out;
  if (max_val == 0.0) return out;

  const int k_lo = static_cast<int>(std::floor(std::log2(min_pos))) - 1;
  const int k_hi = static_cast<int>(std::ceil(std::log2(max_val)));

  // indicator of omega_k per k, cells beyond k_hi are all out
  const auto omega_cells = [&](int k) {
    std::vector<bool> in(static_cast<std::size_t>(tree.cell_count()), false);
    const double threshold = std::exp2(static_cast<double>(k));
    for (std::int64_t c = 0; c < tree.cell_count(); ++c)
      in[static_cast<std::size_t>(c)] = sq.cell(c) > threshold;
    return in;
  };

  std::vector<bool> cur = omega_cells(k_lo);
  for (int k = k_lo; k <= k_hi; ++k) {
    std::vector<bool> next =
        (k + 1 <= k_hi)
            ? omega_cells(k + 1)
            : std::vector<bool>(static_cast<std::size_t>(tree.cell_count()),
                                false);
    const std::vector<std::int64_t> cur_counts = subtree_counts(tree, cur);
    const std::vector<std::int64_t> next_counts = subtree_counts(tree, next);

    OmegaBand band;
    for (std::int64_t c = 0; c < tree.cell_count(); ++c)
      if (cur[static_cast<std::size_t>(c)]) band.omega.push_back(c);

    // omega_tilde: max over ancestors of the covered fraction exceeds 1/2;
    // counts are integers, so the comparison 2*count > cells is exact
    for (std::int64_t c = 0; c < tree.cell_count(); ++c) {
      bool in = false;
      for (const DyadicIndex& anc : tree.ancestors(tree.cell(c))) {
        const std::int64_t covered =
            cur_counts[static_cast<std::size_t>(tree.node_id(anc))];
        const std::int64_t cells = std::int64_t{1} << (tree.depth() - anc.level);
        if (2 * covered > cells) {
          in = true;
          break;
        }
      }
      if (in) band.omega_tilde.push_back(c);
    }

    for (const DyadicIndex& idx : tree.all_intervals()) {
      const auto id = static_cast<std::size_t>(tree.node_id(idx));
      const std::int64_t cells = std::int64_t{1} << (tree.depth() - idx.level);
      if (2 * cur_counts[id] > cells && 2 * next_counts[id] <= cells)
        band.b_set.push_back(idx);
    }

    out.bands[k] = std::move(band);
    cur = std::move(next);
  }
  return out;
}

double check_sest(const MatrixSequence& s) {
  const DyadicTree& tree = s.tree();
  const OmegaDecomposition dec = omega_decomposition(s);

  std::vector<double> norm_sq(static_cast<std::size_t>(tree.node_count()), 0.0);
  for (const auto& [idx, m] : s.entries()) {
    const double nrm = spectral_norm(m);
    norm_sq[static_cast<std::size_t>(tree.node_id(idx))] = nrm * nrm;
  }

  double worst = 0.0;
  for (const auto& [k, band] : dec.bands) {
    if (band.omega_tilde.empty()) continue;
    double sum = 0.0;
    for (const DyadicIndex& idx : band.b_set)
      sum += norm_sq[static_cast<std::size_t>(tree.node_id(idx))];
    const double measure =
        std::ldexp(static_cast<double>(band.omega_tilde.size()), -tree.depth());
    worst = std::max(worst, sum / (std::exp2(2.0 * k + 3.0) * measure));
  }
  return worst;
}

double duality_ratio(const MatrixSequence& s, const MatrixSequence& t) {
  const double p = pairing(s, t);
  if (p == 0.0) return 0.0;
  const double denom = t_norm(t) * s_norm(s);
  if (denom == 0.0)
    throw std::runtime_error(
        "duality_ratio: nonzero pairing with a zero norm");
  return std::abs(p) / denom;
}

}  // namespace mwlab
