#pragma once

// Reference values computed without the library: closed-form expressions and
// brute-force matrix functions on plain Eigen matrices.

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline Matrix destroy(int dim) {
  Matrix a = Matrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

inline double factorial(int n) { return std::tgamma(n + 1.0); }

// <2m| S(zeta) |0> for S = exp[(zeta a+^2 - zeta* a^2) / 2].
inline Complex squeezed_vacuum_amplitude(double r, double phi, int k) {
  if (k % 2 != 0) return 0.0;
  const int m = k / 2;
  const double ratio =
      std::exp(0.5 * std::lgamma(2.0 * m + 1.0) - m * std::log(2.0) - std::lgamma(m + 1.0));
  const double mag = std::sqrt(1.0 / std::cosh(r)) * std::pow(std::tanh(r), m) * ratio;
  return mag * std::polar(1.0, m * phi);
}

inline double squeezed_vacuum_population(double r, int k) {
  return std::norm(squeezed_vacuum_amplitude(r, 0.0, k));
}

// |zeta, n> from the analytic vacuum and repeated application of
// K+ = cosh r a+ - e^{-i phi} sinh r a, built in a padded space.
inline Vector squeezed_fock(double r, double phi, int n, int dim) {
  const int big = dim + 80;
  Vector psi = Vector::Zero(big);
  for (int k = 0; k < big; k += 2) psi(k) = squeezed_vacuum_amplitude(r, phi, k);
  const Matrix a = destroy(big);
  const Matrix kdag = std::cosh(r) * a.adjoint() - std::polar(std::sinh(r), -phi) * a;
  for (int j = 0; j < n; ++j) psi = kdag * psi / std::sqrt(j + 1.0);
  return psi.head(dim);
}

inline std::vector<double> squeezed_fock_populations(double r, int n, int count) {
  const Vector psi = squeezed_fock(r, 0.0, n, count);
  std::vector<double> out(count);
  for (int k = 0; k < count; ++k) out[k] = std::norm(psi(k));
  return out;
}

// S(zeta) as the dense exponential of its generator, truncated after the fact.
inline Matrix squeeze_expm(double r, double phi, int dim) {
  const int big = dim + 80;
  const Matrix a = destroy(big);
  const Complex zeta = std::polar(r, phi);
  const Matrix gen = 0.5 * (zeta * a.adjoint() * a.adjoint() - std::conj(zeta) * a * a);
  return gen.exp().topLeftCorner(dim, dim);
}

// e^{-eta^2/2} L_n^1(eta^2) / sqrt(n+1): <n+1|exp(i eta (a + a+))|n> / (i eta).
inline double ld_element(double eta, int n) {
  const double x = eta * eta;
  return std::exp(-x / 2.0) * std::assoc_laguerre(n, 1, x) / std::sqrt(n + 1.0);
}

// Same element read off the dense exponential.
inline double ld_element_expm(double eta, int n, int dim = 80) {
  const Matrix a = destroy(dim);
  const Matrix gen = Complex(0.0, eta) * (a + a.adjoint());
  const Matrix u = gen.exp();
  return std::abs(u(n + 1, n)) / eta;
}

inline double poisson(double mean, int n) {
  return std::exp(-mean) * std::pow(mean, n) / factorial(n);
}

// Coherence <m|rho|n> under a+a dephasing at rate gamma.
inline double dephased_coherence(double gamma, int m, int n, double t) {
  const double d = m - n;
  return std::exp(-gamma * d * d * t / 2.0);
}

}  // namespace oracle
