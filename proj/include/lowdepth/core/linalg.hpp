#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "lowdepth/core/errors.hpp"

namespace lowdepth {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

inline std::uint64_t pow2(int e) { return std::uint64_t{1} << e; }

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Largest entrywise deviation of U^dagger U from the identity.
inline double unitarity_defect(const Matrix& u) {
  if (u.rows() != u.cols()) return INFINITY;
  const Matrix g = u.adjoint() * u - Matrix::Identity(u.rows(), u.cols());
  return g.cwiseAbs().maxCoeff();
}

inline RealVector hermitian_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed");
  return es.eigenvalues();
}

/// Schatten-1 norm. Hermitian inputs use the eigenvalue route, others SVD.
inline double trace_norm(const Matrix& m) {
  const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (asym <= 1e-12 * scale) {
    const Matrix h = 0.5 * (m + m.adjoint());
    return hermitian_eigenvalues(h).cwiseAbs().sum();
  }
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().sum();
}

inline double spectral_norm(const Matrix& m) {
  const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (asym <= 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    const Matrix h = 0.5 * (m + m.adjoint());
    return hermitian_eigenvalues(h).cwiseAbs().maxCoeff();
  }
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

using MatVec = std::function<void(const Vector& in, Vector& out)>;

/// Spectral norm of a Hermitian operator known only through its action,
/// via Lanczos with full reorthogonalisation. The Krylov space closes
/// after as many steps as the operator has distinct eigenvalues seen by
/// the start vector, which is small for permutation-sum operators.
inline double lanczos_spectral_norm(const MatVec& apply, Eigen::Index dim, int max_iter = 200,
                                    std::uint64_t seed = 12345) {
  std::vector<Vector> basis;
  std::vector<double> alpha;
  std::vector<double> beta;
  Vector q(dim);
  // Deterministic generic start vector.
  std::uint64_t s = seed;
  for (Eigen::Index i = 0; i < dim; ++i) {
    s = s * 6364136223846793005ULL + 1442695040888963407ULL;
    const double re = static_cast<double>(s >> 11) * 0x1.0p-53 - 0.5;
    s = s * 6364136223846793005ULL + 1442695040888963407ULL;
    const double im = static_cast<double>(s >> 11) * 0x1.0p-53 - 0.5;
    q(i) = cplx(re, im);
  }
  q.normalize();
  Vector w(dim);
  const int iters = static_cast<int>(std::min<Eigen::Index>(max_iter, dim));
  for (int j = 0; j < iters; ++j) {
    basis.push_back(q);
    apply(q, w);
    const double a = q.dot(w).real();
    alpha.push_back(a);
    for (int rep = 0; rep < 2; ++rep)
      for (const auto& v : basis) w -= v.dot(w) * v;
    const double b = w.norm();
    if (b < 1e-12 * std::max(1.0, std::abs(a))) break;
    beta.push_back(b);
    q = w / b;
  }
  const auto m = static_cast<Eigen::Index>(alpha.size());
  RealMatrix t = RealMatrix::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    t(i, i) = alpha[i];
    if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
  }
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(t, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Distance between two unitaries modulo a global phase: max entrywise
/// deviation after aligning phase by the overlap tr(A^dagger B).
inline double phase_aligned_deviation(const Matrix& a, const Matrix& b) {
  const cplx overlap = (a.adjoint() * b).trace();
  cplx phase = 1.0;
  if (std::abs(overlap) > 1e-300) phase = overlap / std::abs(overlap);
  return (a * phase - b).cwiseAbs().maxCoeff();
}

}  // namespace lowdepth
