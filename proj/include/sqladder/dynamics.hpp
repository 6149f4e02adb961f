#pragma once

#include <vector>

#include "sqladder/hamiltonians.hpp"
#include "sqladder/hilbert.hpp"

namespace sqladder {

class SpinOscDensity {
 public:
  SpinOscDensity(FockSpace space, CMatrix matrix);
  static SpinOscDensity from_pure(const SpinOscState& psi);

  const FockSpace& space() const { return space_; }
  const CMatrix& matrix() const { return matrix_; }

  double trace() const;
  double probability(Spin spin) const;
  // Diagonal of Tr_spin(rho).
  std::vector<double> populations() const;
  CMatrix oscillator_reduced() const;
  double min_eigenvalue() const;

 private:
  FockSpace space_;
  CMatrix matrix_;
};

template <typename State>
struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<double> p_down;
};

using StateTrajectory = Trajectory<SpinOscState>;
using DensityTrajectory = Trajectory<SpinOscDensity>;

// Samples at t_k = k * duration / (sample_count - 1); a single sample is taken
// at t = duration.
std::vector<double> sample_times(double duration, int sample_count);

StateTrajectory evolve_unitary(const Hamiltonian& h, const SpinOscState& psi0,
                               double duration, int sample_count);

// exp(-i H t) psi.
SpinOscState propagate(const Hamiltonian& h, const SpinOscState& psi, double t);

struct JumpOperator {
  OscillatorOperator op;
  double rate;  // rad/s; the collapse operator is sqrt(rate) * op
};

// Amplitude reservoir (heating a+ and cooling a at equal rate) and phase
// reservoir (a+ a), given the physical lowering operator of the frame.
std::vector<JumpOperator> reservoir_jumps(const OscillatorOperator& lowering,
                                          double gamma_amp, double gamma_phase);

struct LindbladOptions {
  double integ_tol = 1e-8;
  double initial_step = 0.0;  // 0 selects an automatic first step
  long max_steps = 5'000'000;
  // Minimum eigenvalue is checked on every n-th sample and on the last one.
  int positivity_stride = 10;
};

// Adaptive Dormand-Prince 5(4) on the density matrix; Hermiticity is restored
// after every accepted step and positivity is monitored at the samples.
DensityTrajectory evolve_lindblad(const Hamiltonian& h,
                                  const std::vector<JumpOperator>& jumps,
                                  const SpinOscDensity& rho0, double duration,
                                  int sample_count,
                                  const LindbladOptions& options = {});

// rho -> |down><down| (x) Tr_spin(rho).
SpinOscDensity spin_repump(const SpinOscDensity& rho);

}  // namespace sqladder
