#include "sqladder/hamiltonians.hpp"

#include <cmath>
#include <numbers>

#include "sqladder/errors.hpp"

namespace sqladder {

namespace {

CMatrix lift_oscillator(const CMatrix& op) {
  const auto d = op.rows();
  CMatrix full = CMatrix::Zero(2 * d, 2 * d);
  full.topLeftCorner(d, d) = op;
  full.bottomRightCorner(d, d) = op;
  return full;
}

CMatrix dense_displacement_exponential(double eta, const FockSpace& space) {
  const CMatrix a = make_destroy(space).matrix();
  // exp(i eta X) with X = a + a+ real symmetric, via eigendecomposition of X.
  const CMatrix x = a + a.adjoint();
  return HermitianPropagator(x).unitary(-eta);
}

}  // namespace

DriveParams::DriveParams(double omega_, double phase_)
    : omega(omega_), phase(phase_) {
  if (!std::isfinite(omega_) || omega_ < 0.0) {
    throw ValidationError("drive Rabi frequency must be finite and >= 0");
  }
  if (!std::isfinite(phase_)) throw ValidationError("drive phase must be finite");
}

LambDicke::LambDicke(double eta_) : eta(eta_) {
  if (!std::isfinite(eta_) || eta_ < 0.0 || eta_ >= 1.0) {
    throw ValidationError("Lamb-Dicke parameter must lie in [0, 1)");
  }
}

NoiseParams::NoiseParams(double delta_, double gamma_amp_, double gamma_phase_)
    : delta(delta_), gamma_amp(gamma_amp_), gamma_phase(gamma_phase_) {
  if (!std::isfinite(delta_)) throw ValidationError("detuning must be finite");
  if (!(gamma_amp_ >= 0.0) || !(gamma_phase_ >= 0.0) ||
      !std::isfinite(gamma_amp_) || !std::isfinite(gamma_phase_)) {
    throw ValidationError("reservoir rates must be finite and >= 0");
  }
}

Hamiltonian::Hamiltonian(FockSpace space, CMatrix matrix, std::string label)
    : space_(space), matrix_(std::move(matrix)), label_(std::move(label)) {
  if (matrix_.rows() != 2 * space_.dim() || matrix_.cols() != 2 * space_.dim()) {
    throw DimensionError("Hamiltonian must be 2 dim x 2 dim");
  }
  const double scale = std::max(1.0, max_abs(matrix_));
  if (hermiticity_error(matrix_) > kTol * scale) {
    throw ValidationError("Hamiltonian '" + label_ + "' is not Hermitian");
  }
}

Hamiltonian Hamiltonian::zero(const FockSpace& space) {
  return Hamiltonian(space, CMatrix::Zero(2 * space.dim(), 2 * space.dim()),
                     "zero");
}

Hamiltonian operator+(const Hamiltonian& lhs, const Hamiltonian& rhs) {
  require_same_space(lhs.space(), rhs.space());
  return Hamiltonian(lhs.space(), lhs.matrix() + rhs.matrix(),
                     lhs.label() + " + " + rhs.label());
}

Hamiltonian spin_flip_coupling(const CMatrix& op, const DriveParams& drive,
                               const FockSpace& space, std::string label) {
  const int d = space.dim();
  if (op.rows() != d || op.cols() != d) {
    throw DimensionError("coupling operator does not match Fock dimension");
  }
  CMatrix h = CMatrix::Zero(2 * d, 2 * d);
  const Complex coef = 0.5 * drive.omega * std::polar(1.0, drive.phase);
  // sigma+ maps the down block (columns [0, d)) into the up block (rows [d, 2d)).
  h.bottomLeftCorner(d, d) = coef * op;
  h.topRightCorner(d, d) = std::conj(coef) * op.adjoint();
  return Hamiltonian(space, std::move(h), std::move(label));
}

Hamiltonian jaynes_cummings(const DriveParams& drive, const FockSpace& space) {
  const DriveParams reversed{drive.omega, -drive.phase};
  return spin_flip_coupling(make_destroy(space).matrix(), reversed, space,
                            "jaynes-cummings");
}

Hamiltonian engineered(EngineeredSign sign, const DriveParams& drive,
                       const OscillatorOperator& K) {
  if (sign == EngineeredSign::minus) {
    return spin_flip_coupling(K.matrix(), drive, K.space(), "H-");
  }
  return spin_flip_coupling(K.matrix().adjoint(), drive, K.space(), "H+");
}

Hamiltonian carrier(const DriveParams& drive, const FockSpace& space) {
  return spin_flip_coupling(CMatrix::Identity(space.dim(), space.dim()), drive,
                            space, "carrier");
}

SidebandOperators sideband_operators(const LambDicke& eta,
                                     const FockSpace& space) {
  const int d = space.dim();
  if (eta.eta == 0.0) {
    const CMatrix a = make_destroy(space).matrix();
    return {a.adjoint(), a};
  }
  const CMatrix e = dense_displacement_exponential(eta.eta, space);
  CMatrix raising = CMatrix::Zero(d, d);
  const Complex norm = kI * eta.eta;
  for (int n = 0; n + 1 < d; ++n) raising(n + 1, n) = e(n + 1, n) / norm;
  CMatrix lowering = raising.transpose();
  return {std::move(raising), std::move(lowering)};
}

Hamiltonian red_sideband(const DriveParams& drive, const LambDicke& eta,
                         LdOrder order, const FockSpace& space) {
  const CMatrix op = order == LdOrder::linear
                         ? make_destroy(space).matrix()
                         : sideband_operators(eta, space).lowering;
  return spin_flip_coupling(op, drive, space, "red");
}

Hamiltonian blue_sideband(const DriveParams& drive, const LambDicke& eta,
                          LdOrder order, const FockSpace& space) {
  const CMatrix op = order == LdOrder::linear
                         ? make_create(space).matrix()
                         : sideband_operators(eta, space).raising;
  return spin_flip_coupling(op, drive, space, "blue");
}

Hamiltonian bichromatic(const DriveParams& red, const DriveParams& blue,
                        const LambDicke& eta, LdOrder order,
                        const FockSpace& space) {
  if (!(blue.omega < red.omega)) {
    throw RatioError("bichromatic drive needs Omega_b < Omega_r (got " +
                     std::to_string(blue.omega) + " >= " +
                     std::to_string(red.omega) + ")");
  }
  CMatrix lowering;
  CMatrix raising;
  if (order == LdOrder::linear) {
    lowering = make_destroy(space).matrix();
    raising = lowering.adjoint();
  } else {
    auto ops = sideband_operators(eta, space);
    lowering = std::move(ops.lowering);
    raising = std::move(ops.raising);
  }
  // Both tones share sigma+; fold them into one coupling with unit drive.
  const CMatrix combined = red.omega * std::polar(1.0, red.phase) * lowering +
                           blue.omega * std::polar(1.0, blue.phase) * raising;
  return spin_flip_coupling(combined, DriveParams{1.0, 0.0}, space,
                            "bichromatic");
}

EngineeredEquivalent bichromatic_equivalent(const DriveParams& red,
                                            const DriveParams& blue) {
  if (!(blue.omega < red.omega)) {
    throw RatioError("bichromatic drive needs Omega_b < Omega_r");
  }
  const double r = std::atanh(blue.omega / red.omega);
  const double phi_s = blue.phase - red.phase;
  return {SqueezeParams(r, phi_s - std::numbers::pi),
          DriveParams(red.omega / std::cosh(r), red.phase)};
}

std::pair<DriveParams, DriveParams> bichromatic_drives(
    const DriveParams& minus_drive, const SqueezeParams& zeta) {
  const double phi_s = zeta.phi + std::numbers::pi;
  return {DriveParams(minus_drive.omega * std::cosh(zeta.r), minus_drive.phase),
          DriveParams(minus_drive.omega * std::sinh(zeta.r),
                      minus_drive.phase + phi_s)};
}

OscillatorOperator ld_engineered_lowering(const BogoliubovParams& params,
                                          const LambDicke& eta,
                                          const FockSpace& space) {
  const auto ops = sideband_operators(eta, space);
  CMatrix k = params.mu * ops.lowering + params.nu * ops.raising -
              params.alpha * CMatrix::Identity(space.dim(), space.dim());
  return OscillatorOperator(space, std::move(k));
}

Hamiltonian detuning_term(double delta, const FockSpace& space) {
  return Hamiltonian(space, lift_oscillator(delta * make_number(space).matrix()),
                     "detuning");
}

Hamiltonian detuning_squeezed_form(double delta, const SqueezeParams& zeta,
                                   const OscillatorOperator& K) {
  const CMatrix& k = K.matrix();
  const CMatrix kd = k.adjoint();
  const auto d = k.rows();
  const double r = zeta.r;
  const Complex phase = std::polar(1.0, zeta.phi);
  CMatrix osc = std::cosh(2.0 * r) * (kd * k) +
                std::sinh(r) * std::sinh(r) * CMatrix::Identity(d, d);
  osc += 0.5 * std::sinh(2.0 * r) * (phase * kd * kd + std::conj(phase) * k * k);
  return Hamiltonian(K.space(), lift_oscillator(delta * osc),
                     "detuning (squeezed form)");
}

std::vector<double> sideband_matrix_elements(const SidebandBasis& basis,
                                             int n_max, const LambDicke& eta,
                                             const FockSpace& space) {
  if (n_max < 0) throw ValidationError("n_max must be >= 0");
  if (n_max + 1 >= space.interior()) {
    throw TruncationError("sideband element n = " + std::to_string(n_max) +
                          " reaches the guard band of dim " +
                          std::to_string(space.dim()));
  }
  std::vector<double> out(static_cast<size_t>(n_max + 1));
  if (!basis.is_squeezed) {
    const CMatrix raising = sideband_operators(eta, space).raising;
    for (int n = 0; n <= n_max; ++n) out[n] = std::abs(raising(n + 1, n));
    return out;
  }
  // Restrict to the resonant sideband in the energy basis, then conjugate.
  const SqueezedBasis ladder(basis.zeta, space);
  const OscillatorOperator k =
      ld_engineered_lowering(bogoliubov_params(basis.zeta), eta, space);
  const CMatrix kd = k.matrix().adjoint();
  std::vector<CVector> states;
  states.reserve(static_cast<size_t>(n_max + 2));
  for (int n = 0; n <= n_max + 1; ++n) states.push_back(ladder.state(n).amplitudes());
  for (int n = 0; n <= n_max; ++n) {
    out[n] = std::abs(states[n + 1].dot(kd * states[n]));
  }
  return out;
}

double sideband_matrix_element(const SidebandBasis& basis, int n,
                               const LambDicke& eta, const FockSpace& space) {
  return sideband_matrix_elements(basis, n, eta, space).at(n);
}

double block_rabi_frequency(const Hamiltonian& h, const SpinOscState& first,
                            const SpinOscState& second) {
  require_same_space(h.space(), first.space());
  require_same_space(h.space(), second.space());
  const CVector& u = first.amplitudes();
  const CVector& v = second.amplitudes();
  const Complex h11 = u.dot(h.matrix() * u);
  const Complex h22 = v.dot(h.matrix() * v);
  const Complex h12 = u.dot(h.matrix() * v);
  const double diff = (h11 - h22).real();
  return std::sqrt(diff * diff + 4.0 * std::norm(h12));
}

}  // namespace sqladder
