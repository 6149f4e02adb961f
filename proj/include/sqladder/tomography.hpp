#pragma once

// Blue-sideband population tomography and Rabi-oscillation fits.

#include <cmath>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sqladder/hamiltonians.hpp"
#include "sqladder/hilbert.hpp"
#include "sqladder/linalg.hpp"

namespace sqladder {

struct DecayModel {
  enum class Kind {
    none,
    shared,     // e^{-gamma^2 t^2} for every level
    per_level,  // e^{-gamma_k^2 t^2}, gamma_k = gamma (k+1)^0.7
  };

  Kind kind = Kind::none;
  double gamma = 0.0;  // 1/s

  static DecayModel none_model() { return {}; }
  static DecayModel shared_model(double gamma) { return {Kind::shared, gamma}; }
  static DecayModel per_level_model(double gamma) { return {Kind::per_level, gamma}; }

  double envelope(int k, double t) const;
};

struct PopulationEstimate {
  std::vector<double> probabilities;  // raw least-squares values, may dip below 0
  std::vector<double> sigmas;
  double gamma = 0.0;                 // fitted decay parameter
  double condition_number = 0.0;
  double residual_rms = 0.0;

  double total() const;
  double parity() const;
  // Negatives set to zero and the rest rescaled to unit sum.
  PopulationEstimate clipped() const;
};

// Blue-sideband Rabi frequencies Omega_b |<k+1|B+|k>| for k = 0..k_max.
std::vector<double> blue_sideband_frequencies(double omega_b, const LambDicke& eta,
                                              int k_max);

// P(down, t) = 1/2 sum_k p(k) (1 + envelope_k(t) cos(Omega_{k,k+1} t)).
std::vector<double> bsb_forward(const std::vector<double>& populations,
                                double omega_b, const LambDicke& eta,
                                const DecayModel& decay,
                                const std::vector<double>& times);

struct ExtractionOptions {
  DecayModel::Kind decay = DecayModel::Kind::shared;
  // Fit gamma when unset; otherwise hold it fixed.
  std::optional<double> fixed_gamma;
  bool clip = false;
  double max_condition = 1e8;
};

// Linear least squares for p(k) at the known sideband frequencies. Throws
// IllConditionedError when the design matrix cannot separate the levels.
PopulationEstimate extract_populations(const std::vector<double>& times,
                                       const std::vector<double>& values,
                                       double omega_b, const LambDicke& eta,
                                       int k_max,
                                       const ExtractionOptions& options = {});

struct RabiFit {
  double omega = 0.0;     // rad/s
  double gamma = 0.0;     // 1/s, envelope e^{-gamma^2 t^2}
  double contrast = 0.0;
  int parity_flag = 0;
  // Over (omega, gamma, contrast).
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
  double residual_rms = 0.0;
  // Omega is within 10% of the Nyquist frequency of the sampling grid.
  bool alias_warning = false;

  double sigma_omega() const { return std::sqrt(covariance(0, 0)); }
};

// P(t) = 1/2 + (-1)^p (contrast/2) e^{-gamma^2 t^2} cos(Omega t); p = 0 starts
// at the top of the oscillation.
double rabi_model(double t, double omega, double gamma, double contrast,
                  int parity_flag);

RabiFit fit_rabi(const std::vector<double>& times, const std::vector<double>& values,
                 int parity_flag);

enum class RatioMode { sqrt_n, ld_corrected };

struct RatioRow {
  int n;
  double ratio;            // Omega_{n-1,n} / Omega_{0,1} in the requested basis
  double fock_ratio;       // same for the bare Fock ladder
  double correction;       // |element / sqrt(n) - 1| of the squeezed ladder
  double fock_correction;  // same for the bare Fock ladder
};

std::vector<RatioRow> rabi_ratio_table(int n_max, const SqueezeParams& zeta,
                                       const LambDicke& eta, RatioMode mode,
                                       const FockSpace& space = FockSpace());

struct Trace {
  std::vector<double> times;
  std::vector<double> values;
};

// "t_seconds,p_down" rows; lines starting with '#' are skipped.
Trace read_trace_csv(std::istream& in);
void write_trace_csv(std::ostream& out, const Trace& trace);
void write_populations_csv(std::ostream& out, const PopulationEstimate& estimate);

}  // namespace sqladder
