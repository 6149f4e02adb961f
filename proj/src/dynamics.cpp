#include "sqladder/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "sqladder/errors.hpp"

namespace sqladder {

SpinOscDensity::SpinOscDensity(FockSpace space, CMatrix matrix)
    : space_(space), matrix_(std::move(matrix)) {
  const int n = 2 * space_.dim();
  if (matrix_.rows() != n || matrix_.cols() != n) {
    throw DimensionError("density matrix must be 2 dim x 2 dim");
  }
  if (std::abs(trace() - 1.0) > 1e-6) {
    throw ValidationError("density matrix trace differs from 1");
  }
  if (hermiticity_error(matrix_) > 1e-8) {
    throw ValidationError("density matrix is not Hermitian");
  }
}

SpinOscDensity SpinOscDensity::from_pure(const SpinOscState& psi) {
  return SpinOscDensity(psi.space(), psi.amplitudes() * psi.amplitudes().adjoint());
}

double SpinOscDensity::trace() const { return matrix_.trace().real(); }

double SpinOscDensity::probability(Spin spin) const {
  const int d = space_.dim();
  const int offset = static_cast<int>(spin) * d;
  return matrix_.block(offset, offset, d, d).trace().real();
}

CMatrix SpinOscDensity::oscillator_reduced() const {
  const int d = space_.dim();
  return matrix_.topLeftCorner(d, d) + matrix_.bottomRightCorner(d, d);
}

std::vector<double> SpinOscDensity::populations() const {
  const CMatrix reduced = oscillator_reduced();
  std::vector<double> p(static_cast<size_t>(space_.dim()));
  for (int k = 0; k < space_.dim(); ++k) p[k] = reduced(k, k).real();
  return p;
}

double SpinOscDensity::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(matrix_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

std::vector<double> sample_times(double duration, int sample_count) {
  if (!(duration >= 0.0) || !std::isfinite(duration)) {
    throw ValidationError("duration must be finite and >= 0");
  }
  if (sample_count < 1) throw ValidationError("sample_count must be >= 1");
  if (sample_count == 1) return {duration};
  std::vector<double> times(static_cast<size_t>(sample_count));
  for (int k = 0; k < sample_count; ++k) {
    times[k] = duration * static_cast<double>(k) / (sample_count - 1);
  }
  times.back() = duration;
  return times;
}

StateTrajectory evolve_unitary(const Hamiltonian& h, const SpinOscState& psi0,
                               double duration, int sample_count) {
  require_same_space(h.space(), psi0.space());
  StateTrajectory traj;
  traj.times = sample_times(duration, sample_count);
  const HermitianPropagator prop(h.matrix());
  const CVector coeffs = prop.to_eigenbasis(psi0.amplitudes());
  for (double t : traj.times) {
    CVector psi = prop.evolve_from_eigenbasis(coeffs, t);
    // Rounding drift only; the evolution itself is exactly unitary.
    psi /= psi.norm();
    traj.states.emplace_back(psi0.space(), std::move(psi));
    traj.p_down.push_back(traj.states.back().probability(Spin::down));
  }
  return traj;
}

SpinOscState propagate(const Hamiltonian& h, const SpinOscState& psi, double t) {
  require_same_space(h.space(), psi.space());
  CVector out = HermitianPropagator(h.matrix()).apply(psi.amplitudes(), t);
  out /= out.norm();
  return SpinOscState(psi.space(), std::move(out));
}

std::vector<JumpOperator> reservoir_jumps(const OscillatorOperator& lowering,
                                          double gamma_amp, double gamma_phase) {
  std::vector<JumpOperator> jumps;
  if (gamma_amp > 0.0) {
    jumps.push_back({lowering.adjoint(), gamma_amp});
    jumps.push_back({lowering, gamma_amp});
  }
  if (gamma_phase > 0.0) {
    jumps.push_back({lowering.adjoint() * lowering, gamma_phase});
  }
  return jumps;
}

namespace {

// Right-hand side of the master equation, using the Hermiticity of rho:
// -i (H_eff rho - rho H_eff+) = -i (X - X+) with X = H_eff rho.
// The output is symmetrized so it is exactly Hermitian; any anti-Hermitian
// rounding residue would otherwise grow at the dissipative rates.
class LindbladRhs {
 public:
  LindbladRhs(const Hamiltonian& h, const std::vector<JumpOperator>& jumps)
      : d_(h.space().dim()) {
    CMatrix h_eff = h.matrix();
    for (const auto& jump : jumps) {
      if (jump.rate < 0.0) throw ValidationError("jump rate must be >= 0");
      require_same_space(h.space(), jump.op.space());
      if (jump.rate == 0.0) continue;
      const CMatrix l = std::sqrt(jump.rate) * jump.op.matrix();
      const CMatrix ldl = l.adjoint() * l;
      h_eff.topLeftCorner(d_, d_) -= 0.5 * kI * ldl;
      h_eff.bottomRightCorner(d_, d_) -= 0.5 * kI * ldl;
      jumps_.emplace_back(l);
      jumps_adj_.emplace_back(l.adjoint());
    }
    scale_ = h_eff.cwiseAbs().rowwise().sum().maxCoeff();
    h_eff_banded_.emplace(h_eff);
    // Dense products win once the band structure is gone.
    if (h_eff_banded_->diagonal_count() > h_eff.rows() / 4) {
      h_eff_banded_.reset();
      h_eff_dense_ = std::move(h_eff);
    }
  }

  void evaluate(const CMatrix& rho, CMatrix& out) {
    const auto n = rho.rows();
    if (h_eff_banded_) {
      x_.setZero(n, n);
      h_eff_banded_->add_left_product(rho, x_);
    } else {
      x_.noalias() = h_eff_dense_ * rho;
    }
    out = -kI * x_;
    out += kI * x_.adjoint();
    for (size_t j = 0; j < jumps_.size(); ++j) {
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
          tmp_.setZero(d_, d_);
          jumps_[j].add_left_product(rho.block(r * d_, c * d_, d_, d_), tmp_);
          block_.setZero(d_, d_);
          jumps_adj_[j].add_right_product(tmp_, block_);
          out.block(r * d_, c * d_, d_, d_) += block_;
        }
      }
    }
    if (!jumps_.empty()) {
      x_ = out.adjoint();
      out += x_;
      out *= 0.5;
    }
  }

  // Row-sum norm of H_eff, used to pick the first step.
  double scale() const { return scale_; }

 private:
  int d_;
  std::optional<DiagonalMatrix> h_eff_banded_;
  CMatrix h_eff_dense_;
  std::vector<DiagonalMatrix> jumps_;
  std::vector<DiagonalMatrix> jumps_adj_;
  double scale_ = 0.0;
  CMatrix x_;
  CMatrix tmp_;
  CMatrix block_;
};

void hermitize(CMatrix& m) { m = 0.5 * (m + m.adjoint()).eval(); }

}  // namespace

DensityTrajectory evolve_lindblad(const Hamiltonian& h,
                                  const std::vector<JumpOperator>& jumps,
                                  const SpinOscDensity& rho0, double duration,
                                  int sample_count,
                                  const LindbladOptions& options) {
  require_same_space(h.space(), rho0.space());
  if (!(options.integ_tol > 0.0)) throw ValidationError("integ_tol must be > 0");

  // Dormand-Prince 5(4) tableau.
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  LindbladRhs rhs(h, jumps);
  DensityTrajectory traj;
  traj.times = sample_times(duration, sample_count);

  CMatrix rho = rho0.matrix();
  const auto n = rho.rows();
  std::array<CMatrix, 7> k;
  for (auto& m : k) m.resize(n, n);
  CMatrix stage(n, n), next(n, n), err(n, n);

  double t = 0.0;
  double step = options.initial_step > 0.0
                    ? options.initial_step
                    : 0.01 / std::max(rhs.scale(), 1e-300);
  long steps = 0;
  bool have_k1 = false;

  const auto sample_total = traj.times.size();
  auto record = [&](double time) {
    hermitize(rho);
    SpinOscDensity state(rho0.space(), rho);
    const auto index = traj.states.size();
    const bool check = options.positivity_stride > 0 &&
                       (index % static_cast<size_t>(options.positivity_stride) == 0 ||
                        index + 1 == sample_total);
    const double min_eig = check ? state.min_eigenvalue() : 0.0;
    if (min_eig < -100.0 * options.integ_tol) {
      std::ostringstream msg;
      msg << "density matrix lost positivity at t = " << time
          << " (min eigenvalue " << min_eig << ")";
      throw IntegrationError(msg.str());
    }
    traj.p_down.push_back(state.probability(Spin::down));
    traj.states.push_back(std::move(state));
  };

  for (double target : traj.times) {
    while (t < target) {
      if (++steps > options.max_steps) {
        throw IntegrationError("Lindblad integration exceeded max_steps");
      }
      const double remaining = target - t;
      const bool last = step >= remaining;
      const double hstep = last ? remaining : step;
      if (!have_k1) {
        rhs.evaluate(rho, k[0]);
        have_k1 = true;
      }
      stage = rho + hstep * a21 * k[0];
      rhs.evaluate(stage, k[1]);
      stage = rho + hstep * (a31 * k[0] + a32 * k[1]);
      rhs.evaluate(stage, k[2]);
      stage = rho + hstep * (a41 * k[0] + a42 * k[1] + a43 * k[2]);
      rhs.evaluate(stage, k[3]);
      stage = rho + hstep * (a51 * k[0] + a52 * k[1] + a53 * k[2] + a54 * k[3]);
      rhs.evaluate(stage, k[4]);
      stage = rho + hstep * (a61 * k[0] + a62 * k[1] + a63 * k[2] + a64 * k[3] +
                             a65 * k[4]);
      rhs.evaluate(stage, k[5]);
      next = rho + hstep * (b1 * k[0] + b3 * k[2] + b4 * k[3] + b5 * k[4] +
                            b6 * k[5]);
      rhs.evaluate(next, k[6]);
      err = hstep * (e1 * k[0] + e3 * k[2] + e4 * k[3] + e5 * k[4] + e6 * k[5] +
                     e7 * k[6]);
      const double scale =
          options.integ_tol * std::max({rho.norm(), next.norm(), 1e-12});
      const double ratio = err.norm() / scale;
      if (!std::isfinite(ratio)) {
        throw IntegrationError("non-finite error estimate in Lindblad step");
      }
      if (ratio <= 1.0) {
        t = last ? target : t + hstep;
        rho.swap(next);
        hermitize(rho);
        k[0].swap(k[6]);
        const double grow = ratio == 0.0 ? 5.0 : 0.9 * std::pow(ratio, -0.2);
        // A step clipped to hit a sample says nothing about the natural size.
        if (!last || hstep >= step) step = hstep * std::clamp(grow, 0.2, 5.0);
      } else {
        step = hstep * std::clamp(0.9 * std::pow(ratio, -0.2), 0.1, 1.0);
      }
      if (step < 1e-14 * std::max(target, 1e-300)) {
        throw IntegrationError("Lindblad step size underflow: cannot meet integ_tol");
      }
    }
    record(target);
  }
  if (traj.times.empty()) record(0.0);
  for (const auto& state : traj.states) {
    if (std::abs(state.trace() - 1.0) > options.integ_tol) {
      throw IntegrationError("trace drifted beyond tolerance");
    }
  }
  return traj;
}

SpinOscDensity spin_repump(const SpinOscDensity& rho) {
  const int d = rho.space().dim();
  CMatrix out = CMatrix::Zero(2 * d, 2 * d);
  out.topLeftCorner(d, d) = rho.oscillator_reduced();
  return SpinOscDensity(rho.space(), std::move(out));
}

}  // namespace sqladder
