#include "sqladder/hilbert.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "sqladder/errors.hpp"

namespace sqladder {

namespace {

double wrap_phase(double phi) {
  const double two_pi = 2.0 * std::numbers::pi;
  double wrapped = std::fmod(phi, two_pi);
  if (wrapped < 0.0) wrapped += two_pi;
  if (wrapped >= two_pi) wrapped = 0.0;
  return wrapped;
}

double column_tail(const CMatrix& m, int column, int interior) {
  const int band = static_cast<int>(m.rows()) - interior;
  if (band <= 0) return 0.0;
  return m.col(column).tail(band).squaredNorm();
}

void check_tail(double tail, const char* what, int level) {
  if (tail > kTailTol) {
    std::ostringstream msg;
    msg << what << " level " << level << " puts weight " << tail
        << " in the guard band (limit " << kTailTol
        << "); increase the Fock dimension";
    throw TruncationError(msg.str());
  }
}

}  // namespace

FockSpace::FockSpace(int dim) : dim_(dim) {
  if (dim < 2) {
    throw ValidationError("Fock dimension must be >= 2, got " +
                          std::to_string(dim));
  }
}

void require_same_space(const FockSpace& a, const FockSpace& b) {
  if (!(a == b)) {
    throw DimensionError("Fock dimension mismatch: " + std::to_string(a.dim()) +
                         " vs " + std::to_string(b.dim()));
  }
}

OscillatorOperator::OscillatorOperator(FockSpace space, CMatrix matrix,
                                       bool unitary)
    : space_(space), matrix_(std::move(matrix)), unitary_(unitary) {
  if (matrix_.rows() != space_.dim() || matrix_.cols() != space_.dim()) {
    throw DimensionError("operator matrix does not match Fock dimension");
  }
}

OscillatorOperator OscillatorOperator::adjoint() const {
  return OscillatorOperator(space_, matrix_.adjoint(), unitary_);
}

double OscillatorOperator::unitarity_error() const {
  const CMatrix product = matrix_.adjoint() * matrix_;
  const int n = space_.interior();
  return max_abs_block(product - CMatrix::Identity(product.rows(), product.cols()),
                       n);
}

OscillatorOperator operator*(const OscillatorOperator& lhs,
                             const OscillatorOperator& rhs) {
  require_same_space(lhs.space(), rhs.space());
  return OscillatorOperator(lhs.space(), lhs.matrix() * rhs.matrix(),
                            lhs.is_unitary() && rhs.is_unitary());
}

SqueezeParams::SqueezeParams(double r_, double phi_) : r(r_), phi(0.0) {
  if (!std::isfinite(r_) || r_ < 0.0) {
    throw ValidationError("squeezing magnitude r must be finite and >= 0");
  }
  if (!std::isfinite(phi_)) {
    throw ValidationError("squeezing phase must be finite");
  }
  phi = wrap_phase(phi_);
}

Complex SqueezeParams::zeta() const { return std::polar(r, phi); }

BogoliubovParams::BogoliubovParams(Complex mu_, Complex nu_, Complex alpha_)
    : mu(mu_), nu(nu_), alpha(alpha_) {
  const double commutator = std::norm(mu) - std::norm(nu);
  if (std::abs(commutator - 1.0) > 1e-9 * std::max(1.0, std::norm(mu))) {
    throw ValidationError("Bogoliubov parameters violate |mu|^2 - |nu|^2 = 1");
  }
}

OscillatorState::OscillatorState(FockSpace space, CVector amplitudes)
    : space_(space), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != space_.dim()) {
    throw DimensionError("state length does not match Fock dimension");
  }
  if (std::abs(amplitudes_.norm() - 1.0) > 1e-8) {
    throw ValidationError("oscillator state is not normalized");
  }
}

std::vector<double> OscillatorState::populations() const {
  std::vector<double> p(static_cast<size_t>(space_.dim()));
  for (int k = 0; k < space_.dim(); ++k) p[k] = std::norm(amplitudes_[k]);
  return p;
}

double OscillatorState::tail_mass() const {
  return amplitudes_.tail(space_.guard_band()).squaredNorm();
}

SpinOscState::SpinOscState(FockSpace space, CVector amplitudes)
    : space_(space), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != 2 * space_.dim()) {
    throw DimensionError("spin-oscillator state length must be 2 * dim");
  }
  if (std::abs(amplitudes_.norm() - 1.0) > 1e-8) {
    throw ValidationError("spin-oscillator state is not normalized");
  }
}

SpinOscState::SpinOscState(Spin spin, const OscillatorState& oscillator)
    : space_(oscillator.space()),
      amplitudes_(CVector::Zero(2 * oscillator.space().dim())) {
  amplitudes_.segment(static_cast<int>(spin) * space_.dim(), space_.dim()) =
      oscillator.amplitudes();
}

double SpinOscState::probability(Spin spin) const {
  return block(spin).squaredNorm();
}

CVector SpinOscState::block(Spin spin) const {
  return amplitudes_.segment(static_cast<int>(spin) * space_.dim(),
                             space_.dim());
}

std::vector<double> SpinOscState::populations() const {
  const int d = space_.dim();
  std::vector<double> p(static_cast<size_t>(d));
  for (int k = 0; k < d; ++k) {
    p[k] = std::norm(amplitudes_[k]) + std::norm(amplitudes_[d + k]);
  }
  return p;
}

OscillatorOperator make_destroy(const FockSpace& space) {
  const int d = space.dim();
  CMatrix a = CMatrix::Zero(d, d);
  for (int k = 1; k < d; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return OscillatorOperator(space, std::move(a));
}

OscillatorOperator make_create(const FockSpace& space) {
  return make_destroy(space).adjoint();
}

OscillatorOperator make_number(const FockSpace& space) {
  const int d = space.dim();
  CMatrix n = CMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) n(k, k) = static_cast<double>(k);
  return OscillatorOperator(space, std::move(n));
}

OscillatorOperator make_identity(const FockSpace& space) {
  return OscillatorOperator(space, CMatrix::Identity(space.dim(), space.dim()),
                            true);
}

OscillatorOperator make_squeeze(const SqueezeParams& zeta,
                                const FockSpace& space) {
  if (zeta.r == 0.0) return make_identity(space);
  const CMatrix a = make_destroy(space).matrix();
  const CMatrix ad = a.adjoint();
  const Complex z = zeta.zeta();
  const CMatrix generator = 0.5 * (z * ad * ad - std::conj(z) * a * a);
  CMatrix s = expm_antihermitian(generator);
  check_tail(column_tail(s, 0, space.interior()), "squeezed vacuum", 0);
  return OscillatorOperator(space, std::move(s), true);
}

OscillatorOperator make_displace(Complex alpha, const FockSpace& space) {
  if (alpha == Complex(0.0)) return make_identity(space);
  const CMatrix a = make_destroy(space).matrix();
  const CMatrix generator = alpha * a.adjoint() - std::conj(alpha) * a;
  CMatrix disp = expm_antihermitian(generator);
  check_tail(column_tail(disp, 0, space.interior()), "coherent state", 0);
  return OscillatorOperator(space, std::move(disp), true);
}

BogoliubovParams bogoliubov_params(const SqueezeParams& zeta, Complex alpha) {
  return BogoliubovParams(std::cosh(zeta.r),
                          -std::polar(std::sinh(zeta.r), zeta.phi), alpha);
}

EngineeredLowering engineered_lowering(const SqueezeParams& zeta,
                                       Complex alpha, const FockSpace& space) {
  BogoliubovParams params = bogoliubov_params(zeta, alpha);
  // The basis ground state must be representable for K to be meaningful.
  if (zeta.r > 0.0) (void)make_squeeze(zeta, space);
  const CMatrix a = make_destroy(space).matrix();
  CMatrix k = params.mu * a + params.nu * a.adjoint() -
              params.alpha * CMatrix::Identity(space.dim(), space.dim());
  return {OscillatorOperator(space, std::move(k)), params};
}

SqueezedBasis::SqueezedBasis(const SqueezeParams& zeta, const FockSpace& space)
    : zeta_(zeta), space_(space), squeeze_(make_squeeze(zeta, space).matrix()) {}

OscillatorState SqueezedBasis::state(int n) const {
  if (n < 0 || n >= space_.dim()) {
    throw ValidationError("squeezed Fock level " + std::to_string(n) +
                          " outside the truncated space");
  }
  check_tail(column_tail(squeeze_, n, space_.interior()), "squeezed Fock", n);
  CVector column = squeeze_.col(n);
  column /= column.norm();
  return OscillatorState(space_, std::move(column));
}

OscillatorState squeezed_fock_state(const SqueezeParams& zeta, int n,
                                    const FockSpace& space) {
  if (n < 0 || n >= space.dim()) {
    throw ValidationError("squeezed Fock level " + std::to_string(n) +
                          " outside the truncated space");
  }
  return SqueezedBasis(zeta, space).state(n);
}

OscillatorState fock_state(int n, const FockSpace& space) {
  if (n < 0 || n >= space.dim()) {
    throw ValidationError("Fock level " + std::to_string(n) +
                          " outside the truncated space");
  }
  CVector v = CVector::Zero(space.dim());
  v[n] = 1.0;
  return OscillatorState(space, std::move(v));
}

double parity(std::span<const double> populations) {
  double sum = 0.0;
  for (size_t k = 0; k < populations.size(); ++k) {
    sum += (k % 2 == 0 ? 1.0 : -1.0) * populations[k];
  }
  return sum;
}

double parity(const OscillatorState& state) {
  const auto p = state.populations();
  return parity(std::span<const double>(p));
}

double quadrature_variance(const OscillatorState& state, double angle) {
  const CMatrix a = make_destroy(state.space()).matrix();
  const Complex phase = std::polar(1.0, -angle);
  const CMatrix x = 0.5 * (phase * a + std::conj(phase) * a.adjoint());
  const CVector& psi = state.amplitudes();
  const CVector x_psi = x * psi;
  const double mean = psi.dot(x_psi).real();
  const double second = x_psi.squaredNorm();
  return second - mean * mean;
}

double squeezed_quadrature_angle(const SqueezeParams& zeta) {
  return 0.5 * (zeta.phi + std::numbers::pi);
}

double variance_to_db(double variance) {
  return 10.0 * std::log10(variance / 0.25);
}

}  // namespace sqladder
