#pragma once

#include "mwlab/maximal.hpp"
#include "mwlab/weights.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace mwlab {

/// A finitely supported map DyadicIndex -> arbitrary real d x d matrix;
/// absent indices mean the zero matrix.
class MatrixSequence {
 public:
  MatrixSequence(int depth, int dim);
  MatrixSequence(int depth, int dim, std::map<DyadicIndex, Matrix> entries);

  void set(const DyadicIndex& idx, const Matrix& m);

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

/// S(x) = sqrt( sum_{I contains x} ||S_I||^2 / |I| ), spectral norms.
GridScalarFn square_function(const MatrixSequence& s);

/// L^1 norm of the square function.
double s_norm(const MatrixSequence& s);

/// sqrt( max_J || (1/|J|) sum_{I subseteq J} T_I T_I^T || ).
double t_norm(const MatrixSequence& t);

/// sum over the shared support of trace(S_I T_I^T); bilinear.
double pairing(const MatrixSequence& s, const MatrixSequence& t);

/// One band of the level-set decomposition of S(x).
struct OmegaBand {
  std::vector<std::int64_t> omega;        // cells with S(x) > 2^k
  std::vector<std::int64_t> omega_tilde;  // cells where M(1_omega) > 1/2
  std::vector<DyadicIndex> b_set;         // I with |I cap omega_k| > |I|/2
                                          // and |I cap omega_{k+1}| <= |I|/2
};

/// Bands for k from floor(log2 min positive S) - 1 to ceil(log2 max S);
/// outside that range every defining set is empty. Empty when S is zero.
struct OmegaDecomposition {
  std::map<int, OmegaBand> bands;
};

OmegaDecomposition omega_decomposition(const MatrixSequence& s);

/// max over k of sum_{I in B_k} ||S_I||^2 / (2^{2k+3} |omega_tilde_k|),
/// skipping empty enlargements; at most 1 by the half-measure argument.
double check_sest(const MatrixSequence& s);

/// |pairing| / (t_norm * s_norm); 0 when the pairing is 0.
double duality_ratio(const MatrixSequence& s, const MatrixSequence& t);

}  // namespace mwlab
