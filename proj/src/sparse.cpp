#include "mwlab/sparse.hpp"

#include "mwlab/carleson.hpp"
#include "mwlab/rng.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>

namespace mwlab {

namespace {

// Nearest member strictly containing idx. In a dyadic grid containment is
// ancestry, so walking parents visits every candidate.
std::optional<DyadicIndex> nearest_member_ancestor(
    const std::set<DyadicIndex>& members, DyadicIndex idx) {
  while (idx.level > 0) {
    idx = idx.parent();
    if (members.count(idx) > 0) return idx;
  }
  return std::nullopt;
}

void require_sparsity_constant(double c) {
  if (!(c > 0.0 && c < 1.0))
    throw std::invalid_argument("sparsity constant must lie in (0, 1)");
}

}  // namespace

SparsityWitness is_sparse(int depth, const std::set<DyadicIndex>& members,
                          double c) {
  require_sparsity_constant(c);
  const DyadicTree tree(depth);
  for (const DyadicIndex& i : members) tree.require_valid(i);

  // J is a maximal member inside I exactly when I is J's nearest member
  // ancestor. The children of one member are disjoint, so each sum is a sum
  // of disjoint dyadic measures: a multiple of 2^-depth not exceeding 1,
  // hence exact in floating point, as is the comparison against c * |I|.
  std::map<DyadicIndex, double> child_sum;
  for (const DyadicIndex& i : members) child_sum[i] = 0.0;
  for (const DyadicIndex& j : members)
    if (auto a = nearest_member_ancestor(members, j))
      child_sum[*a] += j.measure();
  for (const DyadicIndex& i : members)
    if (child_sum[i] > c * i.measure()) return {false, i, child_sum[i]};
  return {};
}

SparseFamily::SparseFamily(int depth, std::set<DyadicIndex> members, double c)
    : tree_(depth), members_(std::move(members)), c_(c) {
  const SparsityWitness w = is_sparse(depth, members_, c);
  if (!w.sparse)
    throw std::invalid_argument(
        "family is not sparse: interval " + w.violator.str() +
        " carries child measure " + std::to_string(w.child_measure));
}

std::vector<DyadicIndex> sparse_children(const SparseFamily& f,
                                         const DyadicIndex& i) {
  f.tree().require_valid(i);
  if (!f.contains(i))
    throw std::invalid_argument("sparse_children: " + i.str() +
                                " is not a member of the family");
  std::vector<DyadicIndex> out;
  for (const DyadicIndex& j : f.members()) {
    if (j == i || !i.contains(j)) continue;
    if (nearest_member_ancestor(f.members(), j) == i) out.push_back(j);
  }
  return out;
}

double packing_constant(const SparseFamily& f) {
  // Inner sums are multiples of 2^-depth bounded by 2, hence exact; the
  // normalization is a power-of-two scaling, also exact.
  double best = 0.0;
  for (const DyadicIndex& j : f.members()) {
    double sum = 0.0;
    for (const DyadicIndex& i : f.members())
      if (j.contains(i)) sum += i.measure();
    best = std::max(best, std::ldexp(sum, j.level));
  }
  return best;
}

SparseFamily generate_sparse(int depth, SparseStrategy strategy,
                             std::uint64_t seed, double c) {
  require_sparsity_constant(c);
  const DyadicTree tree(depth);
  std::set<DyadicIndex> members;
  switch (strategy) {
    case SparseStrategy::chain:
      for (int k = 0; k <= depth; ++k) members.insert({k, 0});
      break;

    case SparseStrategy::random: {
      Rng rng(seed);
      std::deque<DyadicIndex> queue{DyadicTree::root()};
      members.insert(DyadicTree::root());
      while (!queue.empty()) {
        const DyadicIndex i = queue.front();
        queue.pop_front();
        if (i.level == depth) continue;
        double used = 0.0;
        std::vector<DyadicIndex> accepted;
        for (int attempt = 0; attempt < 8; ++attempt) {
          const int lvl = static_cast<int>(rng.uniform_int(i.level + 1, depth));
          const std::int64_t width = std::int64_t{1} << (lvl - i.level);
          const DyadicIndex j{lvl, (i.pos << (lvl - i.level)) +
                                       rng.uniform_int(0, width - 1)};
          if (used + j.measure() > c * i.measure()) continue;
          bool clear = true;
          for (const DyadicIndex& k : accepted)
            if (k.contains(j) || j.contains(k)) {
              clear = false;
              break;
            }
          if (!clear) continue;
          accepted.push_back(j);
          used += j.measure();
          members.insert(j);
          queue.push_back(j);
        }
      }
      break;
    }

    case SparseStrategy::greedy_maximal: {
      // Scanning in (level, position) order, a candidate never contains an
      // existing member strictly, so it only enters the child budget of its
      // nearest member ancestor.
      std::map<DyadicIndex, double> child_sum;
      for (const DyadicIndex& x : tree.all_intervals()) {
        const auto a = nearest_member_ancestor(members, x);
        if (a && child_sum[*a] + x.measure() > c * a->measure()) continue;
        if (a) child_sum[*a] += x.measure();
        members.insert(x);
        child_sum[x] = 0.0;
      }
      break;
    }
  }
  return SparseFamily(depth, std::move(members), c);
}

GridVectorFn apply_sparse(const SparseFamily& f, const GridVectorFn& fn) {
  if (fn.depth() != f.depth())
    throw DimensionMismatchError("apply_sparse: depth mismatch");
  const DyadicTree& tree = fn.tree();
  const IntervalTable<Vector> means(tree, fn.cells());
  GridVectorFn out = GridVectorFn::zero(fn.depth(), fn.dim());
  for (std::int64_t p = 0; p < tree.cell_count(); ++p) {
    Vector acc = Vector::Zero(fn.dim());
    for (const DyadicIndex& i : tree.ancestors(tree.cell(p)))
      if (f.contains(i)) acc += means.at(i);
    out.cell(p) = acc;
  }
  return out;
}

namespace {

// W^{1/2} S W^{-1/2} in cell coordinates. All cells carry equal measure, so
// the Euclidean operator norm of this matrix equals the L2 operator norm.
Eigen::MatrixXd sparse_operator_matrix(const SparseFamily& f,
                                       const MatrixWeight& w) {
  const DyadicTree& tree = w.tree();
  const int d = w.dim();
  const std::int64_t nc = tree.cell_count();

  // kappa(c, c') = sum of 2^(level - depth) over members containing both.
  Eigen::MatrixXd kappa = Eigen::MatrixXd::Zero(nc, nc);
  for (const DyadicIndex& i : f.members()) {
    const auto [lo, hi] = tree.cell_range(i);
    kappa.block(lo, lo, hi - lo, hi - lo).array() +=
        std::ldexp(1.0, i.level - tree.depth());
  }

  std::vector<Matrix> sqrts(static_cast<std::size_t>(nc));
  std::vector<Matrix> inv_sqrts(static_cast<std::size_t>(nc));
  for (std::int64_t p = 0; p < nc; ++p) {
    sqrts[static_cast<std::size_t>(p)] = psd_sqrt(w.cell(p));
    inv_sqrts[static_cast<std::size_t>(p)] = spd_power(w.cell(p), -0.5);
  }

  Eigen::MatrixXd m(nc * d, nc * d);
  for (std::int64_t col = 0; col < nc; ++col) {
    for (std::int64_t row = 0; row < nc; ++row) {
      m.block(row * d, col * d, d, d) =
          kappa(row, col) * (sqrts[static_cast<std::size_t>(row)] *
                             inv_sqrts[static_cast<std::size_t>(col)]);
    }
  }
  return m;
}

// Matvec-free application of the same operator (and its transpose, using
// that kappa is symmetric) for sizes where the dense matrix is too large.
struct SparseOperatorApply {
  const SparseFamily& family;
  const DyadicTree& tree;
  std::vector<Matrix> sqrts, inv_sqrts;
  int d;

  SparseOperatorApply(const SparseFamily& f, const MatrixWeight& w)
      : family(f), tree(w.tree()), d(w.dim()) {
    const std::int64_t nc = tree.cell_count();
    sqrts.resize(static_cast<std::size_t>(nc));
    inv_sqrts.resize(static_cast<std::size_t>(nc));
    for (std::int64_t p = 0; p < nc; ++p) {
      sqrts[static_cast<std::size_t>(p)] = psd_sqrt(w.cell(p));
      inv_sqrts[static_cast<std::size_t>(p)] = spd_power(w.cell(p), -0.5);
    }
  }

  Vector sparse_part(const Vector& v) const {
    const std::int64_t nc = tree.cell_count();
    std::vector<Vector> cells(static_cast<std::size_t>(nc));
    for (std::int64_t p = 0; p < nc; ++p)
      cells[static_cast<std::size_t>(p)] = v.segment(p * d, d);
    const IntervalTable<Vector> means(tree, cells);
    Vector out(nc * d);
    for (std::int64_t p = 0; p < nc; ++p) {
      Vector acc = Vector::Zero(d);
      for (const DyadicIndex& i : tree.ancestors(tree.cell(p)))
        if (family.contains(i)) acc += means.at(i);
      out.segment(p * d, d) = acc;
    }
    return out;
  }

  Vector block_apply(const std::vector<Matrix>& blocks, const Vector& v) const {
    Vector out(v.size());
    for (std::int64_t p = 0; p < tree.cell_count(); ++p)
      out.segment(p * d, d) =
          blocks[static_cast<std::size_t>(p)] * v.segment(p * d, d);
    return out;
  }

  Vector forward(const Vector& v) const {
    return block_apply(sqrts, sparse_part(block_apply(inv_sqrts, v)));
  }
  Vector transpose(const Vector& v) const {
    return block_apply(inv_sqrts, sparse_part(block_apply(sqrts, v)));
  }
};

}  // namespace

SparseNormResult sparse_weighted_norm_detail(const SparseFamily& f,
                                             const MatrixWeight& w) {
  if (w.depth() != f.depth())
    throw DimensionMismatchError("sparse_weighted_norm: depth mismatch");
  const std::int64_t n = w.cell_count() * w.dim();
  if (n <= 4096) {
    const Eigen::MatrixXd m = sparse_operator_matrix(f, w);
    const Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    return {svd.singularValues()(0), false};
  }

  const SparseOperatorApply op(f, w);
  Rng rng(mix_seed(0x5eed, static_cast<std::uint64_t>(n)));
  Vector v(n);
  for (std::int64_t i = 0; i < n; ++i) v(i) = rng.normal();
  v.normalize();
  double sigma = 0.0;
  for (int it = 0; it < 10000; ++it) {
    const Vector u = op.forward(v);
    const double est = u.norm();
    const Vector z = op.transpose(u);
    const double zn = z.norm();
    if (zn == 0.0) return {0.0, true};
    v = z / zn;
    if (it > 0 && std::abs(est - sigma) <= 1e-10 * est) return {est, true};
    sigma = est;
  }
  return {sigma, true};
}

double sparse_weighted_norm(const SparseFamily& f, const MatrixWeight& w) {
  return sparse_weighted_norm_detail(f, w).value;
}

ProofChainDiagnostic proof_chain_diagnostic(const SparseFamily& f,
                                            const MatrixWeight& w) {
  if (w.depth() != f.depth())
    throw DimensionMismatchError("proof_chain_diagnostic: depth mismatch");
  const MatrixWeight winv = inverse_weight(w);
  CarlesonSequence fwd(w.depth(), w.dim());
  CarlesonSequence dual(w.depth(), w.dim());
  for (const DyadicIndex& i : f.members()) {
    fwd.set(i, i.measure() * spd_power(average(winv, i), -1.0));
    dual.set(i, i.measure() * spd_power(average(w, i), -1.0));
  }

  ProofChainDiagnostic out;
  out.testing_forward = testing_constant_norm(winv, fwd);
  out.testing_dual = testing_constant_norm(w, dual);
  out.embedding_forward = embedding_constant(winv, fwd);
  out.embedding_dual = embedding_constant(w, dual);
  out.a2 = a2_characteristic(w);
  out.end_to_end =
      std::sqrt(out.a2 * out.embedding_forward * out.embedding_dual);
  const SparseNormResult nr = sparse_weighted_norm_detail(f, w);
  out.norm = nr.value;
  out.norm_estimated = nr.estimated;
  return out;
}

double bound_ratio(const SparseFamily& f, const MatrixWeight& w) {
  const double a2 = a2_characteristic(w);
  return sparse_weighted_norm(f, w) / (a2 * std::sqrt(a2));
}

}  // namespace mwlab
