#pragma once

// Truncated Fock-space operators and states for a single oscillator coupled
// to a two-level spin.
//
// Conventions:
//  * Composite vectors are ordered spin-outermost: the |down> block occupies
//    indices [0, dim), the |up> block [dim, 2 dim).
//  * The squeeze operator is S(zeta) = exp[(zeta a+^2 - zeta* a^2) / 2] with
//    zeta = r e^{i phi}. The induced lowering operator
//    K = S a S+ = cosh(r) a - e^{i phi} sinh(r) a+, so the relative sideband
//    phase of the equivalent two-tone drive is phi_s = phi + pi.
//  * Truncation artefacts live in the top dim/8 levels (the guard band);
//    operator identities are checked on the complementary interior block.

#include <span>
#include <vector>

#include "sqladder/linalg.hpp"

namespace sqladder {

inline constexpr int kDefaultDim = 160;
inline constexpr double kTailTol = 1e-8;
inline constexpr double kTol = 1e-9;

class FockSpace {
 public:
  explicit FockSpace(int dim = kDefaultDim);

  int dim() const { return dim_; }
  int guard_band() const { return dim_ / 8; }
  // Number of leading levels unaffected by truncation.
  int interior() const { return dim_ - guard_band(); }

  friend bool operator==(const FockSpace&, const FockSpace&) = default;

 private:
  int dim_;
};

void require_same_space(const FockSpace& a, const FockSpace& b);

class OscillatorOperator {
 public:
  OscillatorOperator(FockSpace space, CMatrix matrix, bool unitary = false);

  const CMatrix& matrix() const { return matrix_; }
  const FockSpace& space() const { return space_; }
  bool is_unitary() const { return unitary_; }

  OscillatorOperator adjoint() const;
  // Max deviation of U+U from identity on the interior block.
  double unitarity_error() const;

 private:
  FockSpace space_;
  CMatrix matrix_;
  bool unitary_;
};

OscillatorOperator operator*(const OscillatorOperator& lhs,
                             const OscillatorOperator& rhs);

struct SqueezeParams {
  SqueezeParams() = default;
  SqueezeParams(double r, double phi);

  double r = 0.0;
  double phi = 0.0;  // stored in [0, 2 pi)

  Complex zeta() const;
  friend bool operator==(const SqueezeParams&, const SqueezeParams&) = default;
};

// K = mu a + nu a+ - alpha.
struct BogoliubovParams {
  BogoliubovParams(Complex mu, Complex nu, Complex alpha);

  Complex mu;
  Complex nu;
  Complex alpha;
};

class OscillatorState {
 public:
  OscillatorState(FockSpace space, CVector amplitudes);

  const FockSpace& space() const { return space_; }
  const CVector& amplitudes() const { return amplitudes_; }
  std::vector<double> populations() const;
  // Probability weight inside the guard band.
  double tail_mass() const;

 private:
  FockSpace space_;
  CVector amplitudes_;
};

enum class Spin { down = 0, up = 1 };

class SpinOscState {
 public:
  SpinOscState(FockSpace space, CVector amplitudes);
  SpinOscState(Spin spin, const OscillatorState& oscillator);

  const FockSpace& space() const { return space_; }
  const CVector& amplitudes() const { return amplitudes_; }

  double probability(Spin spin) const;
  // Oscillator populations summed over the spin.
  std::vector<double> populations() const;
  CVector block(Spin spin) const;

 private:
  FockSpace space_;
  CVector amplitudes_;
};

OscillatorOperator make_destroy(const FockSpace& space);
OscillatorOperator make_create(const FockSpace& space);
OscillatorOperator make_number(const FockSpace& space);
OscillatorOperator make_identity(const FockSpace& space);

// Throws TruncationError when S|0> puts more than kTailTol in the guard band.
OscillatorOperator make_squeeze(const SqueezeParams& zeta,
                                const FockSpace& space);
OscillatorOperator make_displace(Complex alpha, const FockSpace& space);

BogoliubovParams bogoliubov_params(const SqueezeParams& zeta,
                                   Complex alpha = 0.0);

struct EngineeredLowering {
  OscillatorOperator K;
  BogoliubovParams params;
};

EngineeredLowering engineered_lowering(const SqueezeParams& zeta,
                                       Complex alpha, const FockSpace& space);

// Columns of S(zeta): the squeezed Fock ladder |zeta, n> = S(zeta)|n>.
class SqueezedBasis {
 public:
  SqueezedBasis(const SqueezeParams& zeta, const FockSpace& space);

  const SqueezeParams& zeta() const { return zeta_; }
  const FockSpace& space() const { return space_; }
  const CMatrix& squeeze_matrix() const { return squeeze_; }

  // Throws TruncationError if the requested level leaks into the guard band.
  OscillatorState state(int n) const;

 private:
  SqueezeParams zeta_;
  FockSpace space_;
  CMatrix squeeze_;
};

OscillatorState squeezed_fock_state(const SqueezeParams& zeta, int n,
                                    const FockSpace& space);
OscillatorState fock_state(int n, const FockSpace& space);

double parity(const OscillatorState& state);
double parity(std::span<const double> populations);

// Variance of x_theta = (a e^{-i theta} + a+ e^{i theta}) / 2.
double quadrature_variance(const OscillatorState& state, double angle);
// Angle of minimum variance for |zeta, n>.
double squeezed_quadrature_angle(const SqueezeParams& zeta);
// 10 log10(V / V_vac), V_vac = 1/4.
double variance_to_db(double variance);

}  // namespace sqladder
