#pragma once

// Spin-oscillator Hamiltonians in angular-frequency units (hbar = 1).
//
// Spin couplings take the form (Omega/2) [e^{i phase} A sigma+ + h.c.] with
// sigma+ = |up><down|:
//   red sideband       A = a        (|down,n> <-> |up,n-1>)
//   blue sideband      A = a+       (|down,n> <-> |up,n+1>)
//   engineered minus   A = K
//   engineered plus    A = K+
//   carrier            A = 1
// The Jaynes-Cummings form (Omega/2)(a+ sigma- e^{i phi} + h.c.) is the red
// sideband with the phase reversed.

#include <string>
#include <vector>

#include "sqladder/hilbert.hpp"

namespace sqladder {

struct DriveParams {
  DriveParams() = default;
  DriveParams(double omega, double phase);

  double omega = 0.0;  // rad/s
  double phase = 0.0;  // rad
};

struct LambDicke {
  LambDicke() = default;
  explicit LambDicke(double eta);

  double eta = 0.0;
};

enum class LdOrder { linear, all_orders };
enum class EngineeredSign { plus, minus };

class Hamiltonian {
 public:
  Hamiltonian(FockSpace space, CMatrix matrix, std::string label);

  const CMatrix& matrix() const { return matrix_; }
  const FockSpace& space() const { return space_; }
  const std::string& label() const { return label_; }

  static Hamiltonian zero(const FockSpace& space);

 private:
  FockSpace space_;
  CMatrix matrix_;
  std::string label_;
};

Hamiltonian operator+(const Hamiltonian& lhs, const Hamiltonian& rhs);

struct NoiseParams {
  NoiseParams() = default;
  NoiseParams(double delta, double gamma_amp, double gamma_phase);

  double delta = 0.0;        // rad/s
  double gamma_amp = 0.0;    // rad/s
  double gamma_phase = 0.0;  // rad/s
};

struct ExperimentConfig {
  double trap_frequency = 0.0;  // rad/s, metadata only
  LambDicke lamb_dicke;
  SqueezeParams squeeze;
  FockSpace space;
};

// Lifts an oscillator operator A to (Omega/2)[e^{i phase} A sigma+ + h.c.].
Hamiltonian spin_flip_coupling(const CMatrix& op, const DriveParams& drive,
                               const FockSpace& space, std::string label);

Hamiltonian jaynes_cummings(const DriveParams& drive, const FockSpace& space);

Hamiltonian engineered(EngineeredSign sign, const DriveParams& drive,
                       const OscillatorOperator& K);

Hamiltonian carrier(const DriveParams& drive, const FockSpace& space);
Hamiltonian red_sideband(const DriveParams& drive, const LambDicke& eta,
                         LdOrder order, const FockSpace& space);
Hamiltonian blue_sideband(const DriveParams& drive, const LambDicke& eta,
                          LdOrder order, const FockSpace& space);

// Throws RatioError when Omega_b >= Omega_r.
Hamiltonian bichromatic(const DriveParams& red, const DriveParams& blue,
                        const LambDicke& eta, LdOrder order,
                        const FockSpace& space);

// Squeeze parameters and H_- drive reproduced by a red/blue pair in the
// Lamb-Dicke limit: r = artanh(Omega_b/Omega_r), Omega_- = Omega_r/cosh r.
struct EngineeredEquivalent {
  SqueezeParams squeeze;
  DriveParams drive;
};
EngineeredEquivalent bichromatic_equivalent(const DriveParams& red,
                                            const DriveParams& blue);
// Red/blue pair (first, second) realizing H_- for the given basis.
std::pair<DriveParams, DriveParams> bichromatic_drives(
    const DriveParams& minus_drive, const SqueezeParams& zeta);

// Resonant first-sideband parts of exp(i eta (a + a+)), divided by i eta so
// that both reduce to a+ and a as eta -> 0.
struct SidebandOperators {
  CMatrix raising;
  CMatrix lowering;
};
SidebandOperators sideband_operators(const LambDicke& eta,
                                     const FockSpace& space);

// mu B_- + nu B_+ - alpha: K with sideband operators kept to all orders in eta.
OscillatorOperator ld_engineered_lowering(const BogoliubovParams& params,
                                          const LambDicke& eta,
                                          const FockSpace& space);

Hamiltonian detuning_term(double delta, const FockSpace& space);

// delta (K+K cosh 2r + sinh^2 r) + delta sinh(2r)/2 (e^{i phi} K+^2 + e^{-i phi} K^2)
Hamiltonian detuning_squeezed_form(double delta, const SqueezeParams& zeta,
                                   const OscillatorOperator& K);

struct SidebandBasis {
  static SidebandBasis fock() { return {}; }
  static SidebandBasis squeezed(SqueezeParams zeta) { return {true, zeta}; }

  bool is_squeezed = false;
  SqueezeParams zeta;
};

// |<b, n+1| E_res |b, n>| normalized to sqrt(n+1) at eta -> 0, for n = 0..n_max.
std::vector<double> sideband_matrix_elements(const SidebandBasis& basis,
                                             int n_max, const LambDicke& eta,
                                             const FockSpace& space);
double sideband_matrix_element(const SidebandBasis& basis, int n,
                               const LambDicke& eta, const FockSpace& space);

// Full Rabi splitting of H restricted to span{first, second}.
double block_rabi_frequency(const Hamiltonian& h, const SpinOscState& first,
                            const SpinOscState& second);

}  // namespace sqladder
