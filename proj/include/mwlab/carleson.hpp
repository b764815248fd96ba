#pragma once

#include "mwlab/maximal.hpp"
#include "mwlab/weights.hpp"

#include <map>
#include <vector>

namespace mwlab {

/// A finitely supported map DyadicIndex -> positive semidefinite d x d
/// matrix; absent indices mean the zero matrix.
class CarlesonSequence {
 public:
  CarlesonSequence(int depth, int dim);
  CarlesonSequence(int depth, int dim, std::map<DyadicIndex, Matrix> entries);

  /// Inserts or replaces an entry; the matrix must be symmetric with
  /// min eigenvalue >= -1e-12 * ||A||.
  void set(const DyadicIndex& idx, const Matrix& a);

  int depth() const { return tree_.depth(); }
  int dim() const { return dim_; }
  const DyadicTree& tree() const { return tree_; }
  const std::map<DyadicIndex, Matrix>& entries() const { return entries_; }
  bool contains(const DyadicIndex& idx) const { return entries_.count(idx) > 0; }
  std::size_t size() const { return entries_.size(); }

 private:
  DyadicTree tree_;
  int dim_;
  std::map<DyadicIndex, Matrix> entries_;
};

/// Testing constant, norm form:
/// C2 = max_J (1/|J|) sum_{I subseteq J} ||<W>_I^{1/2} A_I <W>_I^{1/2}||.
double testing_constant_norm(const MatrixWeight& w, const CarlesonSequence& a);

/// Testing constant, matrix form: the least C2 with
/// (1/|J|) sum_{I subseteq J} <W>_I A_I <W>_I  'at most'  C2 <W>_J
/// in the Loewner order, i.e. max_J lambda_max of the <W>_J^{-1/2}-conjugated
/// normalized sum.
double testing_constant_matrix(const MatrixWeight& w, const CarlesonSequence& a);

/// The exact least C1 with
/// sum_I <A_I <W^{1/2}f>_I, <W^{1/2}f>_I>  <=  C1 ||f||_{L2}^2 :
/// the top eigenvalue of the quadratic form in the measure-weighted cell
/// basis (dimension d * 2^depth).
double embedding_constant(const MatrixWeight& w, const CarlesonSequence& a);

/// Scalar (d = 1) testing constant
/// C2 = max_J (1/|J|) sum_{I subseteq J} a_I <w>_I^2 / <w>_J.
double scalar_testing_constant(const MatrixWeight& w, const CarlesonSequence& a);

/// C1 / C2 for d = 1, with the convention 0/0 = 1. Lies in [1, 4].
double scalar_cet_ratio(const MatrixWeight& w, const CarlesonSequence& a);

/// Level-set decomposition of the interval values
/// v_I = ||<W>_I^{-1/2} <W^{1/2}f>_I|| by dyadic bands 2^{k-1} < v <= 2^k.
struct StoppingDecomposition {
  /// k -> the maximal intervals whose value lies in band k, in
  /// (level, position) order; intervals within one band are pairwise disjoint.
  std::map<int, std::vector<DyadicIndex>> bands;
  /// J -> the largest k such that J lies inside some band-k maximal interval.
  /// Keyed only by intervals with nonzero average.
  std::map<DyadicIndex, int> star;
  /// g(x) = sum over selected intervals I containing x of v_I.
  GridScalarFn g;
};

StoppingDecomposition stopping_time(const MatrixWeight& w, const GridVectorFn& f);

/// max over cells of g(x) / M_W f(x), skipping cells where M_W f = 0;
/// 0 when nothing is evaluated. Below 4 by the band geometric sum.
double check_g_domination(const MatrixWeight& w, const GridVectorFn& f);

}  // namespace mwlab
