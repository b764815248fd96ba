#include "mwlab/spd.hpp"

#include <cmath>

namespace mwlab {

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

bool is_symmetric(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

bool is_spd(const Matrix& m, double rel_tol) {
  if (!is_symmetric(m)) return false;
  if (!m.allFinite()) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m),
                                           Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return ev.minCoeff() > rel_tol * std::max(0.0, ev.maxCoeff());
}

Matrix spd_power(const Matrix& m, double s) {
  if (!is_symmetric(m))
    throw NotSpdError("spd_power: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m));
  const Vector& ev = es.eigenvalues();
  const double floor = kSpdRelTol * std::max(0.0, ev.maxCoeff());
  if (!(ev.minCoeff() > floor))
    throw NotSpdError("spd_power: eigenvalue " + std::to_string(ev.minCoeff()) +
                      " at or below SPD floor");
  Vector powered(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) powered[i] = std::pow(ev[i], s);
  return es.eigenvectors() * powered.asDiagonal() * es.eigenvectors().transpose();
}

Matrix psd_sqrt(const Matrix& m) {
  if (!is_symmetric(m))
    throw NotSpdError("psd_sqrt: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m));
  const Vector& ev = es.eigenvalues();
  const double scale = std::max(1.0, std::abs(ev.maxCoeff()));
  Vector roots(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -kSpdRelTol * scale)
      throw NotSpdError("psd_sqrt: eigenvalue " + std::to_string(ev[i]) +
                        " below PSD tolerance");
    roots[i] = std::sqrt(std::max(0.0, ev[i]));
  }
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

double lambda_max(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double lambda_min(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  // sigma_max^2 = lambda_max(M^T M); fine at the d x d sizes used here.
  return std::sqrt(std::max(0.0, lambda_max(m.transpose() * m)));
}

double sym_product_norm_sq(const Matrix& a, const Matrix& b) {
  const Matrix b_half = spd_power(b, 0.5);
  return std::max(0.0, lambda_max(b_half * a * b_half));
}

}  // namespace mwlab
