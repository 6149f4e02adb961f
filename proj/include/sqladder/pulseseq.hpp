#pragma once

// Pulse schedules: preparation, rectangular pulses, repumps, probes and a
// final-phase scan, plus the text format used by sequence files.
//
// Sequence parameters are kept in the units of the file format: drive and
// noise frequencies in Hz (ordinary frequency), angles in radians, times in
// seconds. The angular values used by the dynamics are derived on demand.

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sqladder/dynamics.hpp"
#include "sqladder/hamiltonians.hpp"
#include "sqladder/hilbert.hpp"

namespace sqladder {

enum class PulseKind { carrier, plus, minus, blue, red, bichromatic, wait };

std::string_view to_string(PulseKind kind);
std::optional<PulseKind> pulse_kind_from_string(std::string_view name);

struct SequenceParams {
  int dim = kDefaultDim;
  double eta = 0.0;
  double r = 1.0;
  double phi = 0.0;
  double omega_plus = 4300.0;     // Hz
  double omega_minus = 4300.0;    // Hz
  double omega_carrier = 4300.0;  // Hz
  double omega_red = 4300.0;      // Hz
  double omega_blue = 2000.0;     // Hz
  double delta = 0.0;             // Hz
  double gamma_amp = 0.0;         // Hz
  double gamma_phase = 0.0;       // Hz
  LdOrder ld_order = LdOrder::linear;
  // Angles become durations through the Rabi frequency of the transition the
  // state occupies; otherwise theta / Omega of the bare drive.
  bool calibrated = true;

  FockSpace space() const;
  SqueezeParams squeeze() const;
  ExperimentConfig config() const;
  // Detuning and reservoir rates in rad/s.
  NoiseParams noise() const;

  friend bool operator==(const SequenceParams&, const SequenceParams&) = default;
};

void validate(const SequenceParams& params);

struct Pulse {
  PulseKind kind = PulseKind::carrier;
  std::optional<double> theta;     // rad of effective rotation
  std::optional<double> duration;  // s
  double phase = 0.0;

  static Pulse rotation(PulseKind kind, double theta, double phase = 0.0);
  static Pulse timed(PulseKind kind, double duration, double phase = 0.0);

  friend bool operator==(const Pulse&, const Pulse&) = default;
};

struct Repump {
  friend bool operator==(const Repump&, const Repump&) = default;
};

struct Probe {
  PulseKind kind = PulseKind::plus;  // plus, minus or blue
  double tmax = 0.0;
  int points = 2;

  friend bool operator==(const Probe&, const Probe&) = default;
};

// Repeats the last pulse with its phase stepped over [from, to].
struct PhaseScan {
  double from = 0.0;
  double to = 0.0;
  int points = 2;

  std::vector<double> phases() const;

  friend bool operator==(const PhaseScan&, const PhaseScan&) = default;
};

using Directive = std::variant<Pulse, Repump, Probe, PhaseScan>;

struct Preparation {
  enum class Kind { squeezed_vacuum, fock, squeezed_fock, explicit_state };

  Kind kind = Kind::squeezed_vacuum;
  int n = 0;
  // Only for explicit_state; not expressible in sequence files.
  std::optional<SpinOscState> state;

  static Preparation squeezed_vacuum() { return {}; }
  static Preparation fock(int n) { return {Kind::fock, n, std::nullopt}; }
  static Preparation squeezed_fock(int n) {
    return {Kind::squeezed_fock, n, std::nullopt};
  }
  static Preparation explicit_state(SpinOscState state) {
    return {Kind::explicit_state, 0, std::move(state)};
  }

  friend bool operator==(const Preparation& a, const Preparation& b);
};

struct Schedule {
  SequenceParams params;
  Preparation prep;
  std::vector<Directive> directives;

  std::vector<Pulse> pulses() const;

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

// Checks parameter ranges, directive placement and that every angle-specified
// pulse has an unambiguous transition to calibrate against.
void validate(const Schedule& schedule);

// Durations of the schedule's pulses, in order.
std::vector<double> pulse_durations(const Schedule& schedule);

Schedule parse_sequence(std::string_view text);
std::string emit(const Schedule& schedule);

// Formats an angle as a multiple of pi when that parses back exactly.
std::string format_angle(double value);
// Parses "pi", "pi/2", "3*pi/4", "-0.25", "1e-3", ...
double parse_expression(std::string_view text);

Schedule ladder_sequence(int n_target, const SequenceParams& params);
// |down>(|zeta,0> + e^{i phi_s}|zeta,2>)/sqrt 2.
Schedule superposition_sequence(const SequenceParams& params,
                                double phi_s = 0.0);
// Minus pi pulse then a plus pi/2 pulse at phase phi_a.
std::vector<Pulse> analysis_pulses(double phi_a);

enum class Observable { p_down, p_up, populations_fock, populations_squeezed, parity };

std::string_view to_string(Observable observable);

struct MeasurementRecord {
  MeasurementRecord(Observable observable, std::vector<double> times,
                    std::vector<double> values, std::string axis = "t_seconds");

  Observable observable;
  // Abscissa: times in seconds, scan phases in rad, or level index.
  std::vector<double> times;
  std::vector<double> values;
  std::string axis;
};

struct ExecutionMode {
  enum class Kind { unitary, lindblad };

  Kind kind = Kind::unitary;
  NoiseParams noise;  // rad/s; used in lindblad mode only
  LindbladOptions options;
  // When > 1, P(down) is sampled this many times across every pulse and
  // returned as a trajectory record.
  int pulse_samples = 0;

  static ExecutionMode unitary() { return {}; }
  static ExecutionMode lindblad(const NoiseParams& noise,
                                const LindbladOptions& options = {}) {
    return {Kind::lindblad, noise, options};
  }
  // Lindblad mode with the schedule's own detuning and reservoir rates.
  static ExecutionMode lindblad_from(const Schedule& schedule,
                                     const LindbladOptions& options = {}) {
    return lindblad(schedule.params.noise(), options);
  }
};

struct ScanSummary {
  double contrast = 0.0;
  double phase_offset = 0.0;  // rad, location of the P(down) maximum
};

struct ExecutionResult {
  std::optional<SpinOscState> pure;      // unitary mode
  std::optional<SpinOscDensity> density; // lindblad mode
  std::vector<MeasurementRecord> records;
  std::optional<ScanSummary> scan;

  double probability(Spin spin) const;
  std::vector<double> populations() const;
  // Populations in the squeezed Fock basis of the schedule.
  std::vector<double> squeezed_populations(const SqueezedBasis& basis) const;
};

SpinOscState prepare(const Schedule& schedule);

// Unitary mode keeps the schedule's detuning and ignores its reservoir rates.
ExecutionResult execute(const Schedule& schedule,
                        const ExecutionMode& mode = ExecutionMode::unitary());

// Contrast and phase of P(phi) = A + B cos phi + C sin phi.
ScanSummary summarize_scan(const std::vector<double>& phases,
                           const std::vector<double>& values);

struct PhaseScanResult {
  MeasurementRecord record;
  ScanSummary summary;
};

// Appends the analysis pulses to a superposition schedule and scans phi_a.
PhaseScanResult phase_scan(const Schedule& schedule,
                           const std::vector<double>& phi_values,
                           const ExecutionMode& mode = ExecutionMode::unitary());

}  // namespace sqladder
