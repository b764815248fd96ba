#pragma once

#include "mwlab/weights.hpp"

#include <cstdint>
#include <set>
#include <vector>

namespace mwlab {

struct SparsityWitness {
  bool sparse = true;
  DyadicIndex violator{};      // meaningful when !sparse
  double child_measure = 0.0;  // total measure of the violator's children
};

/// Checks the sparsity condition: for every member I, the maximal members
/// strictly inside I have total measure at most c * |I|.
SparsityWitness is_sparse(int depth, const std::set<DyadicIndex>& members,
                          double c = 0.5);

/// A set of intervals satisfying the sparsity condition; validated at
/// construction, immutable afterwards.
class SparseFamily {
 public:
  SparseFamily(int depth, std::set<DyadicIndex> members, double c = 0.5);

  int depth() const { return tree_.depth(); }
  const DyadicTree& tree() const { return tree_; }
  const std::set<DyadicIndex>& members() const { return members_; }
  bool contains(const DyadicIndex& idx) const { return members_.count(idx) > 0; }
  std::size_t size() const { return members_.size(); }
  double sparsity_constant() const { return c_; }

 private:
  DyadicTree tree_;
  std::set<DyadicIndex> members_;
  double c_;
};

/// The maximal members strictly contained in I (I must be a member);
/// pairwise disjoint.
std::vector<DyadicIndex> sparse_children(const SparseFamily& f,
                                         const DyadicIndex& i);

/// max over members J of (1/|J|) * sum of |I| over members I inside J;
/// at most 1/(1-c) by the geometric-sum argument (2 for c = 1/2).
double packing_constant(const SparseFamily& f);

enum class SparseStrategy { chain, random, greedy_maximal };

/// chain: the nested left chain {(k, 0)}. random: top-down, drawing
/// disjoint children for each member until the c-budget blocks them.
/// greedy_maximal: scan intervals in (level, position) order, adding each
/// one that keeps the family sparse.
SparseFamily generate_sparse(int depth, SparseStrategy strategy,
                             std::uint64_t seed, double c = 0.5);

/// (S f)(x) = sum over members I containing x of <f>_I.
GridVectorFn apply_sparse(const SparseFamily& f, const GridVectorFn& fn);

struct SparseNormResult {
  double value = 0.0;
  bool estimated = false;  // true when computed by power iteration
};

/// Exact L2(W) -> L2(W) operator norm of the sparse operator: the largest
/// singular value of W^{1/2} S W^{-1/2} assembled on the measure-weighted
/// cell basis. Dense SVD up to d * 2^depth = 4096, power iteration above.
SparseNormResult sparse_weighted_norm_detail(const SparseFamily& f,
                                             const MatrixWeight& w);
double sparse_weighted_norm(const SparseFamily& f, const MatrixWeight& w);

/// The quantities of the testing-based norm bound, all computed exactly:
/// the two induced sequences A_I = <W^{-1}>_I^{-1} |I| (tested against
/// W^{-1}) and B_I = <W>_I^{-1} |I| (tested against W), their exact
/// embedding constants, and the end-to-end bound
/// sqrt([W]_{A2} * C1_forward * C1_dual) which dominates the true norm.
struct ProofChainDiagnostic {
  double testing_forward = 0.0;   // <= 2 always
  double testing_dual = 0.0;      // <= 2 always
  double embedding_forward = 0.0;
  double embedding_dual = 0.0;
  double a2 = 0.0;
  double end_to_end = 0.0;
  double norm = 0.0;              // sparse_weighted_norm, for comparison
  bool norm_estimated = false;
};

ProofChainDiagnostic proof_chain_diagnostic(const SparseFamily& f,
                                            const MatrixWeight& w);

/// sparse_weighted_norm / [W]_{A2}^{3/2}; tracked against recorded corpus
/// maxima, never against an absolute constant.
double bound_ratio(const SparseFamily& f, const MatrixWeight& w);

}  // namespace mwlab
