#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace sqladder {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

// Largest absolute entry.
double max_abs(const CMatrix& m);

// Largest absolute entry of the leading `size` x `size` block.
double max_abs_block(const CMatrix& m, int size);

double hermiticity_error(const CMatrix& m);

// Spectral representation of a Hermitian matrix, used to evaluate
// exp(-i H t) for many t from a single decomposition.
class HermitianPropagator {
 public:
  explicit HermitianPropagator(const CMatrix& hamiltonian);

  CMatrix unitary(double t) const;
  CVector apply(const CVector& psi, double t) const;
  // Expands psi in the eigenbasis once; evolve() then costs one mat-vec.
  CVector to_eigenbasis(const CVector& psi) const;
  CVector evolve_from_eigenbasis(const CVector& coeffs, double t) const;

  const RVector& eigenvalues() const { return eigenvalues_; }
  const CMatrix& eigenvectors() const { return eigenvectors_; }

 private:
  RVector eigenvalues_;
  CMatrix eigenvectors_;
};

// Square matrix stored by its nonzero diagonals.
class DiagonalMatrix {
 public:
  explicit DiagonalMatrix(const CMatrix& dense, double zero_tol = 0.0);

  int size() const { return size_; }
  int diagonal_count() const { return static_cast<int>(diagonals_.size()); }

  // out += M * b
  void add_left_product(const CMatrix& b, CMatrix& out) const;
  // out += b * M
  void add_right_product(const CMatrix& b, CMatrix& out) const;

 private:
  struct Band {
    int offset;  // column - row
    CVector values;
  };
  int size_;
  std::vector<Band> diagonals_;
};

// exp(G) for anti-Hermitian G, via the Hermitian matrix iG.
CMatrix expm_antihermitian(const CMatrix& generator);

}  // namespace sqladder
