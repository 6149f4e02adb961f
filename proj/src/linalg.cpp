#include "sqladder/linalg.hpp"

#include <Eigen/Eigenvalues>

#include "sqladder/errors.hpp"

namespace sqladder {

double max_abs(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double max_abs_block(const CMatrix& m, int size) {
  if (size <= 0) return 0.0;
  return m.topLeftCorner(size, size).cwiseAbs().maxCoeff();
}

double hermiticity_error(const CMatrix& m) {
  return max_abs(m - m.adjoint());
}

HermitianPropagator::HermitianPropagator(const CMatrix& hamiltonian) {
  if (hamiltonian.rows() != hamiltonian.cols()) {
    throw DimensionError("propagator requires a square matrix");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hamiltonian);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition of Hamiltonian failed");
  }
  eigenvalues_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();
}

CMatrix HermitianPropagator::unitary(double t) const {
  CVector phases = (-kI * t * eigenvalues_.cast<Complex>()).array().exp();
  return eigenvectors_ * phases.asDiagonal() * eigenvectors_.adjoint();
}

CVector HermitianPropagator::to_eigenbasis(const CVector& psi) const {
  return eigenvectors_.adjoint() * psi;
}

CVector HermitianPropagator::evolve_from_eigenbasis(const CVector& coeffs,
                                                    double t) const {
  CVector phased = coeffs.array() *
                   (-kI * t * eigenvalues_.cast<Complex>()).array().exp();
  return eigenvectors_ * phased;
}

CVector HermitianPropagator::apply(const CVector& psi, double t) const {
  return evolve_from_eigenbasis(to_eigenbasis(psi), t);
}

DiagonalMatrix::DiagonalMatrix(const CMatrix& dense, double zero_tol)
    : size_(static_cast<int>(dense.rows())) {
  if (dense.rows() != dense.cols()) {
    throw DimensionError("diagonal storage requires a square matrix");
  }
  const int n = size_;
  for (int offset = -(n - 1); offset <= n - 1; ++offset) {
    const int len = n - std::abs(offset);
    const int row0 = offset >= 0 ? 0 : -offset;
    CVector values(len);
    bool nonzero = false;
    for (int i = 0; i < len; ++i) {
      values[i] = dense(row0 + i, row0 + i + offset);
      if (std::abs(values[i]) > zero_tol) nonzero = true;
    }
    if (nonzero) diagonals_.push_back({offset, std::move(values)});
  }
}

void DiagonalMatrix::add_left_product(const CMatrix& b, CMatrix& out) const {
  // (M b)(i, :) += M(i, i + k) b(i + k, :)
  for (const auto& band : diagonals_) {
    const int k = band.offset;
    const int len = static_cast<int>(band.values.size());
    if (k >= 0) {
      out.middleRows(0, len) += band.values.asDiagonal() * b.middleRows(k, len);
    } else {
      out.middleRows(-k, len) += band.values.asDiagonal() * b.middleRows(0, len);
    }
  }
}

void DiagonalMatrix::add_right_product(const CMatrix& b, CMatrix& out) const {
  // (b M)(:, m + k) += b(:, m) M(m, m + k)
  for (const auto& band : diagonals_) {
    const int k = band.offset;
    const int len = static_cast<int>(band.values.size());
    if (k >= 0) {
      out.middleCols(k, len) += b.middleCols(0, len) * band.values.asDiagonal();
    } else {
      out.middleCols(0, len) += b.middleCols(-k, len) * band.values.asDiagonal();
    }
  }
}

CMatrix expm_antihermitian(const CMatrix& generator) {
  CMatrix hermitian = kI * generator;
  hermitian = 0.5 * (hermitian + hermitian.adjoint()).eval();
  // exp(G) = exp(-i (iG)).
  return HermitianPropagator(hermitian).unitary(1.0);
}

}  // namespace sqladder
