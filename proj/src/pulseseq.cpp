#include "sqladder/pulseseq.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "sqladder/errors.hpp"

namespace sqladder {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

std::string_view to_string(PulseKind kind) {
  switch (kind) {
    case PulseKind::carrier: return "carrier";
    case PulseKind::plus: return "plus";
    case PulseKind::minus: return "minus";
    case PulseKind::blue: return "blue";
    case PulseKind::red: return "red";
    case PulseKind::bichromatic: return "bichromatic";
    case PulseKind::wait: return "wait";
  }
  return "?";
}

std::optional<PulseKind> pulse_kind_from_string(std::string_view name) {
  for (auto kind : {PulseKind::carrier, PulseKind::plus, PulseKind::minus,
                    PulseKind::blue, PulseKind::red, PulseKind::bichromatic,
                    PulseKind::wait}) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

std::string_view to_string(Observable observable) {
  switch (observable) {
    case Observable::p_down: return "p_down";
    case Observable::p_up: return "p_up";
    case Observable::populations_fock: return "populations_fock";
    case Observable::populations_squeezed: return "populations_squeezed";
    case Observable::parity: return "parity";
  }
  return "?";
}

FockSpace SequenceParams::space() const { return FockSpace(dim); }

SqueezeParams SequenceParams::squeeze() const { return SqueezeParams(r, phi); }

ExperimentConfig SequenceParams::config() const {
  return {0.0, LambDicke(eta), squeeze(), space()};
}

NoiseParams SequenceParams::noise() const {
  return NoiseParams(kTwoPi * delta, kTwoPi * gamma_amp, kTwoPi * gamma_phase);
}

void validate(const SequenceParams& params) {
  (void)params.space();
  (void)params.squeeze();
  (void)LambDicke(params.eta);
  (void)params.noise();
  const double omegas[] = {params.omega_plus, params.omega_minus,
                           params.omega_carrier, params.omega_red,
                           params.omega_blue};
  for (double omega : omegas) {
    if (!(omega >= 0.0) || !std::isfinite(omega)) {
      throw ValidationError("drive frequencies must be finite and >= 0");
    }
  }
}

Pulse Pulse::rotation(PulseKind kind, double theta, double phase) {
  return {kind, theta, std::nullopt, phase};
}

Pulse Pulse::timed(PulseKind kind, double duration, double phase) {
  return {kind, std::nullopt, duration, phase};
}

std::vector<double> PhaseScan::phases() const {
  std::vector<double> out(static_cast<size_t>(points));
  for (int i = 0; i < points; ++i) {
    out[i] = points == 1 ? from : from + (to - from) * i / (points - 1);
  }
  return out;
}

bool operator==(const Preparation& a, const Preparation& b) {
  if (a.kind != b.kind || a.n != b.n) return false;
  if (a.state.has_value() != b.state.has_value()) return false;
  if (!a.state) return true;
  return a.state->space() == b.state->space() &&
         a.state->amplitudes() == b.state->amplitudes();
}

std::vector<Pulse> Schedule::pulses() const {
  std::vector<Pulse> out;
  for (const auto& d : directives) {
    if (const auto* p = std::get_if<Pulse>(&d)) out.push_back(*p);
  }
  return out;
}

MeasurementRecord::MeasurementRecord(Observable obs, std::vector<double> t,
                                     std::vector<double> v, std::string ax)
    : observable(obs), times(std::move(t)), values(std::move(v)), axis(std::move(ax)) {
  const double lo = observable == Observable::parity ? -1.0 : 0.0;
  for (double& value : values) {
    if (!(value >= lo - 1e-9 && value <= 1.0 + 1e-9)) {
      throw NumericalError("measurement value outside its range");
    }
    value = std::clamp(value, lo, 1.0);
  }
}

// ---------------------------------------------------------------------------
// Calibration: follows which nominal levels the state occupies so that an
// angle can be converted with the Rabi frequency of the addressed transition.

namespace {

struct Level {
  Spin spin;
  int n;
  auto operator<=>(const Level&) const = default;
};

enum class LevelBasis { fock, squeezed, both };

struct Coupling {
  Level low;   // spin down member
  Level high;  // spin up member
  int m;       // sideband index: rate scales as the (m, m+1) element
};

std::optional<Coupling> coupling_of(PulseKind kind, const Level& level) {
  const bool down = level.spin == Spin::down;
  switch (kind) {
    case PulseKind::carrier:
      return Coupling{{Spin::down, level.n}, {Spin::up, level.n}, level.n};
    case PulseKind::plus:
    case PulseKind::blue:
      // |down, m> <-> |up, m+1>
      if (down) return Coupling{level, {Spin::up, level.n + 1}, level.n};
      if (level.n == 0) return std::nullopt;
      return Coupling{{Spin::down, level.n - 1}, level, level.n - 1};
    case PulseKind::minus:
    case PulseKind::red:
    case PulseKind::bichromatic:
      // |up, m> <-> |down, m+1>
      if (!down) return Coupling{{Spin::down, level.n + 1}, level, level.n};
      if (level.n == 0) return std::nullopt;
      return Coupling{level, {Spin::up, level.n - 1}, level.n - 1};
    case PulseKind::wait:
      return std::nullopt;
  }
  return std::nullopt;
}

std::pair<DriveParams, DriveParams> bichromatic_tones(const SequenceParams& p,
                                                      double phase) {
  const double phi_s = p.phi + std::numbers::pi;
  return {DriveParams(kTwoPi * p.omega_red, phase),
          DriveParams(kTwoPi * p.omega_blue, phase + phi_s)};
}

// Squeeze parameter implied by the two tones of a bichromatic pulse.
SqueezeParams bichromatic_squeeze(const SequenceParams& p) {
  const auto tones = bichromatic_tones(p, 0.0);
  return bichromatic_equivalent(tones.first, tones.second).squeeze;
}

class Calibrator {
 public:
  explicit Calibrator(const Schedule& s) : params_(s.params), space_(s.params.space()) {
    const bool unsqueezed = params_.r == 0.0;
    switch (s.prep.kind) {
      case Preparation::Kind::squeezed_vacuum:
        levels_ = std::set<Level>{{Spin::down, 0}};
        basis_ = unsqueezed ? LevelBasis::both : LevelBasis::squeezed;
        break;
      case Preparation::Kind::squeezed_fock:
        levels_ = std::set<Level>{{Spin::down, s.prep.n}};
        basis_ = unsqueezed ? LevelBasis::both : LevelBasis::squeezed;
        break;
      case Preparation::Kind::fock:
        levels_ = std::set<Level>{{Spin::down, s.prep.n}};
        basis_ = unsqueezed ? LevelBasis::both : LevelBasis::fock;
        break;
      case Preparation::Kind::explicit_state:
        break;
    }
  }

  double duration(const Pulse& pulse, int index) {
    if (pulse.kind == PulseKind::wait) {
      if (!pulse.duration) {
        throw ValidationError(where(index) + "wait needs an explicit duration");
      }
      return *pulse.duration;
    }
    if (pulse.duration) {
      advance(pulse, *pulse.duration, index);
      return *pulse.duration;
    }
    const double theta = *pulse.theta;
    if (!params_.calibrated) {
      const double omega = bare_rate(pulse.kind);
      if (omega <= 0.0) {
        throw ValidationError(where(index) + "zero drive cannot realize an angle");
      }
      return theta / omega;
    }
    const auto pairs = coupled_pairs(pulse.kind, index, true);
    if (pairs.empty()) {
      throw ValidationError(where(index) +
                            "angle given but the pulse addresses no occupied level");
    }
    const double rate = pairs.begin()->second;
    for (const auto& [m, other] : pairs) {
      if (std::abs(other - rate) > 1e-12 * rate) {
        throw ValidationError(where(index) +
                              "occupied levels flop at different rates; give a duration");
      }
    }
    if (rate <= 0.0) {
      throw ValidationError(where(index) + "zero Rabi frequency cannot realize an angle");
    }
    const double t = theta / rate;
    advance(pulse, t, index);
    return t;
  }

  void repump() {
    if (!levels_) return;
    std::set<Level> out;
    for (const auto& l : *levels_) out.insert({Spin::down, l.n});
    levels_ = std::move(out);
  }

 private:
  static std::string where(int index) {
    return "pulse " + std::to_string(index + 1) + ": ";
  }

  double bare_rate(PulseKind kind) const {
    switch (kind) {
      case PulseKind::carrier: return kTwoPi * params_.omega_carrier;
      case PulseKind::plus: return kTwoPi * params_.omega_plus;
      case PulseKind::minus: return kTwoPi * params_.omega_minus;
      case PulseKind::blue: return kTwoPi * params_.omega_blue;
      case PulseKind::red: return kTwoPi * params_.omega_red;
      case PulseKind::bichromatic: {
        const auto tones = bichromatic_tones(params_, 0.0);
        return bichromatic_equivalent(tones.first, tones.second).drive.omega;
      }
      case PulseKind::wait: return 0.0;
    }
    return 0.0;
  }

  bool basis_matches(PulseKind kind) const {
    if (kind == PulseKind::carrier) return true;
    if (kind == PulseKind::bichromatic) {
      const SqueezeParams z = bichromatic_squeeze(params_);
      if (std::abs(z.r - params_.r) > 1e-6) return false;
    }
    const bool fock_kind = kind == PulseKind::blue || kind == PulseKind::red;
    if (basis_ == LevelBasis::both) return true;
    return fock_kind ? basis_ == LevelBasis::fock : basis_ == LevelBasis::squeezed;
  }

  // Relative strength of the (m, m+1) sideband element.
  double element(PulseKind kind, int m) {
    if (m + 1 >= space_.interior()) {
      throw TruncationError("transition " + std::to_string(m) + " <-> " +
                            std::to_string(m + 1) + " reaches the guard band");
    }
    if (kind == PulseKind::carrier) return 1.0;
    if (params_.ld_order == LdOrder::linear) return std::sqrt(m + 1.0);
    SidebandBasis basis = SidebandBasis::fock();
    if (kind == PulseKind::plus || kind == PulseKind::minus) {
      basis = SidebandBasis::squeezed(params_.squeeze());
    } else if (kind == PulseKind::bichromatic) {
      basis = SidebandBasis::squeezed(bichromatic_squeeze(params_));
    }
    auto& cache = elements_[kind];
    if (static_cast<int>(cache.size()) <= m) {
      const int n_max = std::min(std::max(m, 2 * static_cast<int>(cache.size())),
                                 space_.interior() - 2);
      cache = sideband_matrix_elements(basis, n_max, LambDicke(params_.eta), space_);
    }
    return cache[m];
  }

  // Coupled pairs keyed by the down-spin member, with their Rabi frequency.
  std::map<Level, double> coupled_pairs(PulseKind kind, int index, bool strict) {
    std::map<Level, double> out;
    if (!levels_) {
      if (strict) {
        throw ValidationError(where(index) +
                              "cannot calibrate an angle for an explicit state; give a duration");
      }
      return out;
    }
    if (!basis_matches(kind)) {
      if (strict) {
        throw ValidationError(where(index) + "pulse acts in a different basis than "
                              "the occupied levels; give a duration");
      }
      levels_.reset();
      return out;
    }
    for (const auto& level : *levels_) {
      const auto c = coupling_of(kind, level);
      if (!c) continue;
      out[c->low] = bare_rate(kind) * element(kind, c->m);
    }
    return out;
  }

  void advance(const Pulse& pulse, double t, int index) {
    if (!params_.calibrated) return;
    const auto pairs = coupled_pairs(pulse.kind, index, false);
    if (!levels_) return;
    std::set<Level> next;
    for (const auto& level : *levels_) {
      const auto c = coupling_of(pulse.kind, level);
      if (!c) {
        next.insert(level);
        continue;
      }
      const double angle = std::fmod(pairs.at(c->low) * t, kTwoPi);
      const Level partner = level == c->low ? c->high : c->low;
      const bool swapped = std::abs(angle - std::numbers::pi) < 1e-9;
      const bool identity = angle < 1e-9 || kTwoPi - angle < 1e-9;
      if (!swapped) next.insert(level);
      if (!identity) next.insert(partner);
    }
    levels_ = std::move(next);
  }

  const SequenceParams& params_;
  FockSpace space_;
  std::optional<std::set<Level>> levels_;
  LevelBasis basis_ = LevelBasis::both;
  std::map<PulseKind, std::vector<double>> elements_;
};

void validate_directive_order(const Schedule& s) {
  bool seen_pulse = false;
  for (size_t i = 0; i < s.directives.size(); ++i) {
    const auto& d = s.directives[i];
    if (const auto* p = std::get_if<Pulse>(&d)) {
      seen_pulse = true;
      if (p->theta.has_value() == p->duration.has_value()) {
        throw ValidationError("pulse needs exactly one of theta and duration");
      }
      if (p->theta && !(*p->theta >= 0.0 && std::isfinite(*p->theta))) {
        throw ValidationError("pulse angle must be finite and >= 0");
      }
      if (p->duration && !(*p->duration >= 0.0 && std::isfinite(*p->duration))) {
        throw ValidationError("pulse duration must be finite and >= 0");
      }
      if (!std::isfinite(p->phase)) throw ValidationError("pulse phase must be finite");
      if (p->kind == PulseKind::bichromatic) {
        (void)bichromatic_squeeze(s.params);
      }
    } else if (const auto* probe = std::get_if<Probe>(&d)) {
      if (probe->kind != PulseKind::plus && probe->kind != PulseKind::minus &&
          probe->kind != PulseKind::blue) {
        throw ValidationError("probe kind must be plus, minus or blue");
      }
      if (!(probe->tmax > 0.0) || probe->points < 2) {
        throw ValidationError("probe needs tmax > 0 and points >= 2");
      }
    } else if (const auto* scan = std::get_if<PhaseScan>(&d)) {
      if (i + 1 != s.directives.size()) {
        throw ValidationError("scan must be the last directive");
      }
      if (!seen_pulse) throw ValidationError("scan needs a preceding pulse");
      if (scan->points < 2) throw ValidationError("scan needs points >= 2");
      if (!std::isfinite(scan->from) || !std::isfinite(scan->to)) {
        throw ValidationError("scan bounds must be finite");
      }
    }
  }
}

}  // namespace

void validate(const Schedule& schedule) {
  validate(schedule.params);
  const FockSpace space = schedule.params.space();
  const auto& prep = schedule.prep;
  if (prep.kind == Preparation::Kind::explicit_state) {
    if (!prep.state) throw ValidationError("explicit preparation without a state");
    require_same_space(space, prep.state->space());
  } else if (prep.n < 0 || prep.n >= space.dim()) {
    throw DimensionError("prepared level " + std::to_string(prep.n) +
                         " outside dim " + std::to_string(space.dim()));
  }
  validate_directive_order(schedule);
  (void)pulse_durations(schedule);
}

std::vector<double> pulse_durations(const Schedule& schedule) {
  Calibrator calibrator(schedule);
  std::vector<double> out;
  int index = 0;
  for (const auto& d : schedule.directives) {
    if (const auto* p = std::get_if<Pulse>(&d)) {
      out.push_back(calibrator.duration(*p, index++));
    } else if (std::holds_alternative<Repump>(d)) {
      calibrator.repump();
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generators

Schedule ladder_sequence(int n_target, const SequenceParams& params) {
  validate(params);
  const FockSpace space = params.space();
  if (n_target < 0) throw ValidationError("n_target must be >= 0");
  if (n_target >= space.interior()) {
    throw TruncationError("n_target " + std::to_string(n_target) +
                          " lies in the guard band of dim " + std::to_string(space.dim()));
  }
  (void)squeezed_fock_state(params.squeeze(), n_target, space);
  Schedule s{params, Preparation::squeezed_vacuum(), {}};
  for (int m = 0; m < n_target; ++m) {
    const PulseKind kind = m % 2 == 0 ? PulseKind::plus : PulseKind::minus;
    s.directives.emplace_back(Pulse::rotation(kind, std::numbers::pi, 0.0));
  }
  return s;
}

Schedule superposition_sequence(const SequenceParams& params, double phi_s) {
  validate(params);
  Schedule s{params, Preparation::squeezed_vacuum(), {}};
  s.directives.emplace_back(Pulse::rotation(PulseKind::plus, std::numbers::pi / 2, 0.0));
  double phase = std::fmod(std::numbers::pi - phi_s, kTwoPi);
  if (phase < 0.0) phase += kTwoPi;
  s.directives.emplace_back(Pulse::rotation(PulseKind::minus, std::numbers::pi, phase));
  return s;
}

std::vector<Pulse> analysis_pulses(double phi_a) {
  return {Pulse::rotation(PulseKind::minus, std::numbers::pi, std::numbers::pi),
          Pulse::rotation(PulseKind::plus, std::numbers::pi / 2, phi_a)};
}

// ---------------------------------------------------------------------------
// Execution

SpinOscState prepare(const Schedule& schedule) {
  const FockSpace space = schedule.params.space();
  const auto& prep = schedule.prep;
  switch (prep.kind) {
    case Preparation::Kind::squeezed_vacuum:
      return SpinOscState(Spin::down, squeezed_fock_state(schedule.params.squeeze(), 0, space));
    case Preparation::Kind::squeezed_fock:
      return SpinOscState(Spin::down,
                          squeezed_fock_state(schedule.params.squeeze(), prep.n, space));
    case Preparation::Kind::fock:
      return SpinOscState(Spin::down, fock_state(prep.n, space));
    case Preparation::Kind::explicit_state:
      return *prep.state;
  }
  throw ValidationError("unknown preparation");
}

double ExecutionResult::probability(Spin spin) const {
  return pure ? pure->probability(spin) : density->probability(spin);
}

std::vector<double> ExecutionResult::populations() const {
  return pure ? pure->populations() : density->populations();
}

std::vector<double> ExecutionResult::squeezed_populations(const SqueezedBasis& basis) const {
  const CMatrix& s = basis.squeeze_matrix();
  const auto d = s.rows();
  Eigen::VectorXd p = Eigen::VectorXd::Zero(d);
  if (pure) {
    for (Spin spin : {Spin::down, Spin::up}) {
      p += (s.adjoint() * pure->block(spin)).cwiseAbs2();
    }
  } else {
    p = (s.adjoint() * density->oscillator_reduced() * s).diagonal().real();
  }
  return {p.data(), p.data() + d};
}

namespace {

class Executor {
 public:
  Executor(const Schedule& s, const ExecutionMode& mode)
      : params_(s.params), mode_(mode), space_(s.params.space()) {
    const bool lindblad = mode.kind == ExecutionMode::Kind::lindblad;
    const double delta = lindblad ? mode.noise.delta : params_.noise().delta;
    if (delta != 0.0) detuning_ = detuning_term(delta, space_);
    if (lindblad) {
      jumps_ = reservoir_jumps(make_destroy(space_), mode.noise.gamma_amp,
                               mode.noise.gamma_phase);
    }
    const SqueezeParams zeta = params_.squeeze();
    if (params_.ld_order == LdOrder::linear) {
      k_.emplace(engineered_lowering(zeta, 0.0, space_).K);
    } else {
      k_.emplace(ld_engineered_lowering(bogoliubov_params(zeta),
                                        LambDicke(params_.eta), space_));
    }
  }

  bool lindblad() const { return mode_.kind == ExecutionMode::Kind::lindblad; }

  Hamiltonian hamiltonian(PulseKind kind, double phase) const {
    const LambDicke eta(params_.eta);
    Hamiltonian h = Hamiltonian::zero(space_);
    switch (kind) {
      case PulseKind::carrier:
        h = carrier(DriveParams(kTwoPi * params_.omega_carrier, phase), space_);
        break;
      case PulseKind::plus:
        h = engineered(EngineeredSign::plus,
                       DriveParams(kTwoPi * params_.omega_plus, phase), *k_);
        break;
      case PulseKind::minus:
        h = engineered(EngineeredSign::minus,
                       DriveParams(kTwoPi * params_.omega_minus, phase), *k_);
        break;
      case PulseKind::blue:
        h = blue_sideband(DriveParams(kTwoPi * params_.omega_blue, phase), eta,
                          params_.ld_order, space_);
        break;
      case PulseKind::red:
        h = red_sideband(DriveParams(kTwoPi * params_.omega_red, phase), eta,
                         params_.ld_order, space_);
        break;
      case PulseKind::bichromatic: {
        const auto tones = bichromatic_tones(params_, phase);
        h = bichromatic(tones.first, tones.second, eta, params_.ld_order, space_);
        break;
      }
      case PulseKind::wait:
        break;
    }
    if (detuning_) h = h + *detuning_;
    return h;
  }

  // Advances the state by one pulse, optionally sampling P(down) on the way.
  void apply(PulseKind kind, double phase, double duration,
             std::optional<SpinOscState>& pure,
             std::optional<SpinOscDensity>& density,
             std::vector<double>* p_down = nullptr) const {
    const Hamiltonian h = hamiltonian(kind, phase);
    const int samples = p_down ? std::max(mode_.pulse_samples, 2) : 1;
    if (pure) {
      if (!p_down) {
        pure = propagate(h, *pure, duration);
        return;
      }
      auto traj = evolve_unitary(h, *pure, duration, samples);
      p_down->assign(traj.p_down.begin(), traj.p_down.end());
      pure = std::move(traj.states.back());
    } else {
      auto traj = evolve_lindblad(h, jumps_, *density, duration, samples, mode_.options);
      if (p_down) p_down->assign(traj.p_down.begin(), traj.p_down.end());
      density = std::move(traj.states.back());
    }
  }

  std::vector<double> probe(PulseKind kind, double tmax, int points,
                            const std::optional<SpinOscState>& pure,
                            const std::optional<SpinOscDensity>& density) const {
    const Hamiltonian h = hamiltonian(kind, 0.0);
    if (pure) return evolve_unitary(h, *pure, tmax, points).p_down;
    return evolve_lindblad(h, jumps_, *density, tmax, points, mode_.options).p_down;
  }

 private:
  const SequenceParams& params_;
  const ExecutionMode& mode_;
  FockSpace space_;
  std::optional<Hamiltonian> detuning_;
  std::vector<JumpOperator> jumps_;
  std::optional<OscillatorOperator> k_;
};

}  // namespace

ScanSummary summarize_scan(const std::vector<double>& phases,
                           const std::vector<double>& values) {
  if (phases.size() != values.size() || phases.size() < 2) {
    throw ValidationError("phase scan needs >= 2 matching samples");
  }
  if (phases.size() == 2) {
    const bool first = values[0] >= values[1];
    return {std::abs(values[0] - values[1]), first ? phases[0] : phases[1]};
  }
  const auto n = static_cast<Eigen::Index>(phases.size());
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = std::cos(phases[i]);
    a(i, 2) = std::sin(phases[i]);
    b(i) = values[i];
  }
  const Eigen::Vector3d x = a.colPivHouseholderQr().solve(b);
  double offset = std::atan2(x(2), x(1));
  if (offset < 0.0) offset += kTwoPi;
  if (offset >= kTwoPi) offset -= kTwoPi;
  return {2.0 * std::hypot(x(1), x(2)), offset};
}

ExecutionResult execute(const Schedule& schedule, const ExecutionMode& mode) {
  validate(schedule);
  const bool lindblad = mode.kind == ExecutionMode::Kind::lindblad;
  if (!lindblad) {
    for (const auto& d : schedule.directives) {
      if (std::holds_alternative<Repump>(d)) {
        throw ModeError("repump requires lindblad mode");
      }
    }
  }
  const auto durations = pulse_durations(schedule);
  const Executor executor(schedule, mode);

  ExecutionResult result;
  const SpinOscState psi0 = prepare(schedule);
  if (lindblad) {
    result.density.emplace(SpinOscDensity::from_pure(psi0));
  } else {
    result.pure.emplace(psi0);
  }

  double clock = 0.0;
  size_t pulse_index = 0;
  const bool sample_pulses = mode.pulse_samples > 1;
  std::vector<double> trajectory_t;
  std::vector<double> trajectory_p;
  if (sample_pulses) {
    trajectory_t.push_back(0.0);
    trajectory_p.push_back(result.probability(Spin::down));
  }
  std::optional<Pulse> last_pulse;
  std::optional<SpinOscState> pure_before_last;
  std::optional<SpinOscDensity> density_before_last;
  for (const auto& d : schedule.directives) {
    if (const auto* p = std::get_if<Pulse>(&d)) {
      const double t = durations[pulse_index++];
      pure_before_last = result.pure;
      density_before_last = result.density;
      last_pulse = *p;
      last_pulse->duration = t;
      if (sample_pulses) {
        std::vector<double> samples;
        executor.apply(p->kind, p->phase, t, result.pure, result.density, &samples);
        const auto grid = sample_times(t, static_cast<int>(samples.size()));
        for (size_t i = 1; i < samples.size(); ++i) {
          trajectory_t.push_back(clock + grid[i]);
          trajectory_p.push_back(samples[i]);
        }
      } else {
        executor.apply(p->kind, p->phase, t, result.pure, result.density);
      }
      clock += t;
    } else if (std::holds_alternative<Repump>(d)) {
      result.density = spin_repump(*result.density);
    } else if (const auto* probe = std::get_if<Probe>(&d)) {
      auto values = executor.probe(probe->kind, probe->tmax, probe->points,
                                   result.pure, result.density);
      result.records.emplace_back(Observable::p_down,
                                  sample_times(probe->tmax, probe->points),
                                  std::move(values));
    } else if (const auto* scan = std::get_if<PhaseScan>(&d)) {
      const auto phases = scan->phases();
      std::vector<double> values;
      for (double phase : phases) {
        auto pure = pure_before_last;
        auto density = density_before_last;
        executor.apply(last_pulse->kind, phase, *last_pulse->duration, pure, density);
        values.push_back(pure ? pure->probability(Spin::down)
                              : density->probability(Spin::down));
      }
      result.scan = summarize_scan(phases, values);
      result.records.emplace_back(Observable::p_down, phases, std::move(values),
                                  "phase_rad");
    }
  }

  if (sample_pulses) {
    result.records.emplace_back(Observable::p_down, std::move(trajectory_t),
                                std::move(trajectory_p), "t_seconds");
  }
  const auto populations = result.populations();
  std::vector<double> levels(populations.size());
  for (size_t k = 0; k < levels.size(); ++k) levels[k] = static_cast<double>(k);
  result.records.emplace_back(Observable::populations_fock, levels, populations, "k");
  result.records.emplace_back(Observable::parity, std::vector<double>{clock},
                              std::vector<double>{parity(populations)});
  return result;
}

PhaseScanResult phase_scan(const Schedule& schedule,
                           const std::vector<double>& phi_values,
                           const ExecutionMode& mode) {
  if (phi_values.size() < 2) throw ValidationError("phase scan needs >= 2 phases");
  Schedule s = schedule;
  for (const auto& d : s.directives) {
    if (std::holds_alternative<PhaseScan>(d)) {
      throw ValidationError("schedule already contains a scan");
    }
  }
  const auto analysis = analysis_pulses(0.0);
  s.directives.emplace_back(analysis[0]);
  s.directives.emplace_back(analysis[1]);
  std::vector<double> values;
  values.reserve(phi_values.size());
  Schedule prefix = s;
  prefix.directives.pop_back();
  const ExecutionResult before = execute(prefix, mode);
  const auto durations = pulse_durations(s);
  const Executor executor(s, mode);
  for (double phi : phi_values) {
    auto pure = before.pure;
    auto density = before.density;
    executor.apply(PulseKind::plus, phi, durations.back(), pure, density);
    values.push_back(pure ? pure->probability(Spin::down)
                          : density->probability(Spin::down));
  }
  ScanSummary summary = summarize_scan(phi_values, values);
  return {MeasurementRecord(Observable::p_down, phi_values, std::move(values), "phase_rad"),
          summary};
}

}  // namespace sqladder
