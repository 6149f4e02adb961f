#include "sqladder/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include "sqladder/errors.hpp"
#include "sqladder/pulseseq.hpp"
#include "sqladder/tomography.hpp"

namespace sqladder::cli {

namespace {

using nlohmann::ordered_json;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Reservoir and detuning values used when --noise is given without overrides.
constexpr double kNoiseDeltaHz = 30.0;
constexpr double kNoiseGammaAmpHz = 10.7;
constexpr double kNoiseGammaPhaseHz = 5.0;

std::string number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

class Report {
 public:
  explicit Report(std::string subcommand) : subcommand_(std::move(subcommand)) {}

  void add(const std::string& key, ordered_json value) {
    summary_.emplace_back(key, std::move(value));
  }
  Table& table(std::string name, std::vector<std::string> columns) {
    tables_.push_back({std::move(name), std::move(columns), {}});
    return tables_.back();
  }

  std::string header() const { return "# squeezed-ladder v1, " + subcommand_; }

  std::string csv() const {
    std::ostringstream out;
    out << header() << '\n';
    for (const auto& [key, value] : summary_) out << "# " << key << '=' << scalar(value) << '\n';
    for (const auto& t : tables_) {
      out << "# table: " << t.name << '\n';
      for (size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << t.columns[c];
      out << '\n';
      for (const auto& row : t.rows) {
        for (size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << number(row[c]);
        out << '\n';
      }
    }
    return out.str();
  }

  std::string json() const {
    ordered_json doc;
    doc["header"] = header();
    doc["subcommand"] = subcommand_;
    ordered_json summary = ordered_json::object();
    for (const auto& [key, value] : summary_) {
      summary[key] = value.is_number_float() ? ordered_json(std::stod(number(value.get<double>())))
                                             : value;
    }
    doc["summary"] = summary;
    ordered_json tables = ordered_json::array();
    for (const auto& t : tables_) {
      ordered_json rows = ordered_json::array();
      for (const auto& row : t.rows) {
        ordered_json r = ordered_json::array();
        for (double v : row) r.push_back(std::stod(number(v)));
        rows.push_back(r);
      }
      tables.push_back({{"name", t.name}, {"columns", t.columns}, {"rows", rows}});
    }
    doc["tables"] = tables;
    return doc.dump(2) + "\n";
  }

 private:
  static std::string scalar(const ordered_json& value) {
    if (value.is_number_float()) return number(value.get<double>());
    if (value.is_string()) return value.get<std::string>();
    return value.dump();
  }

  std::string subcommand_;
  std::vector<std::pair<std::string, ordered_json>> summary_;
  std::vector<Table> tables_;
};

struct Globals {
  int dim = kDefaultDim;
  bool dim_given = false;
  std::string out;
  std::string format = "csv";
  unsigned long seed = 0;
};

struct PhysicsOptions {
  double r = 1.0;
  double phi = 0.0;
  double eta = 0.0;
  std::string ld_order = "linear";
  double omega_plus = 4300.0;
  double omega_minus = 4300.0;
  bool noise = false;
  std::optional<double> delta;
  std::optional<double> gamma_amp;
  std::optional<double> gamma_phase;

  void attach(CLI::App* app, bool with_delta = true) {
    app->add_option("--r", r, "squeeze magnitude")->capture_default_str();
    app->add_option("--phi", phi, "squeeze angle (rad)")->capture_default_str();
    app->add_option("--eta", eta, "Lamb-Dicke parameter")->capture_default_str();
    app->add_option("--ld-order", ld_order, "linear or all_orders")
        ->check(CLI::IsMember({"linear", "all_orders"}))
        ->capture_default_str();
    app->add_option("--omega-plus", omega_plus, "H+ Rabi frequency (Hz)")->capture_default_str();
    app->add_option("--omega-minus", omega_minus, "H- Rabi frequency (Hz)")->capture_default_str();
    app->add_flag("--noise", noise,
                  "Lindblad run with delta 30 Hz, gamma_amp 10.7 Hz, gamma_phase 5 Hz");
    if (with_delta) app->add_option("--delta", delta, "detuning (Hz)");
    app->add_option("--gamma-amp", gamma_amp, "amplitude reservoir rate (Hz)");
    app->add_option("--gamma-phase", gamma_phase, "phase reservoir rate (Hz)");
  }

  SequenceParams params(int dim) const {
    SequenceParams p;
    p.dim = dim;
    p.r = r;
    p.phi = phi;
    p.eta = eta;
    p.ld_order = ld_order == "linear" ? LdOrder::linear : LdOrder::all_orders;
    p.omega_plus = omega_plus;
    p.omega_minus = omega_minus;
    p.delta = delta.value_or(noise ? kNoiseDeltaHz : 0.0);
    p.gamma_amp = gamma_amp.value_or(noise ? kNoiseGammaAmpHz : 0.0);
    p.gamma_phase = gamma_phase.value_or(noise ? kNoiseGammaPhaseHz : 0.0);
    validate(p);
    return p;
  }

  ExecutionMode mode(const SequenceParams& p) const {
    if (!noise) return ExecutionMode::unitary();
    return ExecutionMode::lindblad(p.noise());
  }

  void describe(Report& report, const SequenceParams& p) const {
    report.add("dim", p.dim);
    report.add("r", p.r);
    report.add("phi", p.phi);
    report.add("eta", p.eta);
    report.add("ld_order", ld_order);
    report.add("mode", noise ? "lindblad" : "unitary");
    report.add("delta_hz", p.delta);
    report.add("gamma_amp_hz", p.gamma_amp);
    report.add("gamma_phase_hz", p.gamma_phase);
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

Trace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  return read_trace_csv(in);
}

double fidelity(const ExecutionResult& result, const SpinOscState& target) {
  if (result.pure) return std::norm(target.amplitudes().dot(result.pure->amplitudes()));
  const CVector& v = target.amplitudes();
  return v.dot(result.density->matrix() * v).real();
}

void populations_table(Report& report, const ExecutionResult& result,
                       const SequenceParams& p, int k_max) {
  const auto fock = result.populations();
  const auto squeezed = result.squeezed_populations(SqueezedBasis(p.squeeze(), p.space()));
  auto& t = report.table("populations", {"k", "p_fock", "p_squeezed"});
  const int last = std::min<int>(k_max, static_cast<int>(fock.size()) - 1);
  for (int k = 0; k <= last; ++k) {
    t.rows.push_back({static_cast<double>(k), fock[k], squeezed[k]});
  }
}

// ---------------------------------------------------------------------------

struct StateCmd {
  int n = 0;
  double r = 1.0;
  double phi = 0.0;
  int k_max = 30;

  Report run(const Globals& g) const {
    const FockSpace space(g.dim);
    const SqueezeParams zeta(r, phi);
    const OscillatorState state = squeezed_fock_state(zeta, n, space);
    const auto pops = state.populations();
    const double variance = quadrature_variance(state, squeezed_quadrature_angle(zeta));
    Report report("state");
    report.add("n", n);
    report.add("r", r);
    report.add("phi", zeta.phi);
    report.add("dim", g.dim);
    report.add("parity", parity(state));
    report.add("variance", variance);
    report.add("squeezing_db", variance_to_db(variance));
    report.add("tail_mass", state.tail_mass());
    auto& t = report.table("populations", {"k", "p"});
    for (int k = 0; k <= std::min(k_max, g.dim - 1); ++k) {
      t.rows.push_back({static_cast<double>(k), pops[k]});
    }
    return report;
  }
};

struct LadderCmd {
  int n = 0;
  int points = 21;
  PhysicsOptions physics;

  Report run(const Globals& g) const {
    const SequenceParams p = physics.params(g.dim);
    const Schedule schedule = ladder_sequence(n, p);
    ExecutionMode mode = physics.mode(p);
    mode.pulse_samples = points;
    const ExecutionResult result = execute(schedule, mode);
    const Spin spin = n % 2 == 0 ? Spin::down : Spin::up;
    const SpinOscState target(spin, squeezed_fock_state(p.squeeze(), n, p.space()));

    Report report("ladder");
    report.add("n_target", n);
    physics.describe(report, p);
    report.add("pulses", static_cast<int>(schedule.directives.size()));
    report.add("fidelity", fidelity(result, target));
    report.add("p_down", result.probability(Spin::down));
    report.add("parity", parity(result.populations()));
    auto& t = report.table("trajectory", {"t_seconds", "p_down"});
    if (n == 0) {
      t.rows.push_back({0.0, result.probability(Spin::down)});
    } else {
      for (const auto& rec : result.records) {
        if (rec.observable != Observable::p_down || rec.axis != "t_seconds") continue;
        for (size_t i = 0; i < rec.times.size(); ++i) t.rows.push_back({rec.times[i], rec.values[i]});
      }
    }
    populations_table(report, result, p, 30);
    return report;
  }
};

struct ScanDetuningCmd {
  int pair = 0;
  std::vector<double> deltas{0.0, 10.0, 20.0, 30.0};
  double tmax = 2e-3;
  int points = 201;
  PhysicsOptions physics;

  Report run(const Globals& g) const {
    Report report("scan-detuning");
    report.add("pair", std::to_string(pair) + "<->" + std::to_string(pair + 1));
    report.add("tmax", tmax);
    std::vector<std::string> columns{"t_seconds"};
    std::vector<std::vector<double>> traces;
    std::vector<double> times;
    for (double delta : deltas) {
      PhysicsOptions opts = physics;
      opts.delta = delta;
      const SequenceParams p = opts.params(g.dim);
      if (columns.size() == 1) opts.describe(report, p);
      Schedule s{p, Preparation::squeezed_fock(pair), {}};
      s.directives.emplace_back(Probe{PulseKind::plus, tmax, points});
      const ExecutionResult result = execute(s, opts.mode(p));
      times = result.records.front().times;
      traces.push_back(result.records.front().values);
      columns.push_back("p_down_delta_" + number(delta) + "hz");
    }
    auto& t = report.table("flopping", columns);
    for (size_t i = 0; i < times.size(); ++i) {
      std::vector<double> row{times[i]};
      for (const auto& trace : traces) row.push_back(trace[i]);
      t.rows.push_back(std::move(row));
    }
    return report;
  }
};

struct FitCmd {
  std::string trace;
  int parity_flag = 0;

  Report run(const Globals&, std::ostream& err) const {
    const Trace data = load_trace(trace);
    const RabiFit fit = fit_rabi(data.times, data.values, parity_flag);
    if (fit.alias_warning) {
      err << "warning: fitted frequency is within 10% of the Nyquist limit\n";
    }
    Report report("fit");
    report.add("omega_rad_s", fit.omega);
    report.add("omega_hz", fit.omega / kTwoPi);
    report.add("gamma", fit.gamma);
    report.add("contrast", fit.contrast);
    report.add("parity_flag", fit.parity_flag);
    report.add("sigma_omega", std::sqrt(std::max(fit.covariance(0, 0), 0.0)));
    report.add("sigma_gamma", std::sqrt(std::max(fit.covariance(1, 1), 0.0)));
    report.add("sigma_contrast", std::sqrt(std::max(fit.covariance(2, 2), 0.0)));
    report.add("residual_rms", fit.residual_rms);
    report.add("alias_warning", fit.alias_warning);
    return report;
  }
};

struct TomoCmd {
  std::string trace;
  double omega_b = 0.0;
  double eta = 0.0;
  int k_max = 30;
  std::string decay = "shared";
  bool clip = false;
  double max_condition = 1e8;

  Report run(const Globals&) const {
    const Trace data = load_trace(trace);
    ExtractionOptions options;
    options.decay = decay == "none"     ? DecayModel::Kind::none
                    : decay == "shared" ? DecayModel::Kind::shared
                                        : DecayModel::Kind::per_level;
    options.clip = clip;
    options.max_condition = max_condition;
    const PopulationEstimate est = extract_populations(
        data.times, data.values, kTwoPi * omega_b, LambDicke(eta), k_max, options);
    Report report("tomo");
    report.add("omega_b_hz", omega_b);
    report.add("eta", eta);
    report.add("k_max", k_max);
    report.add("decay", decay);
    report.add("gamma", est.gamma);
    report.add("condition_number", est.condition_number);
    report.add("total", est.total());
    report.add("parity", est.parity());
    report.add("residual_rms", est.residual_rms);
    auto& t = report.table("populations", {"k", "p", "sigma"});
    for (size_t k = 0; k < est.probabilities.size(); ++k) {
      t.rows.push_back({static_cast<double>(k), est.probabilities[k], est.sigmas[k]});
    }
    return report;
  }
};

struct PhaseScanCmd {
  int points = 16;
  double phi_s = 0.0;
  PhysicsOptions physics;

  Report run(const Globals& g) const {
    if (points < 2) throw ValidationError("--points must be >= 2");
    const SequenceParams p = physics.params(g.dim);
    const Schedule s = superposition_sequence(p, phi_s);
    std::vector<double> phases;
    for (int i = 0; i < points; ++i) phases.push_back(phi_s + kTwoPi * i / points);
    const PhaseScanResult scan = phase_scan(s, phases, physics.mode(p));
    Report report("phase-scan");
    physics.describe(report, p);
    report.add("phi_s", phi_s);
    report.add("contrast", scan.summary.contrast);
    report.add("phase_offset", scan.summary.phase_offset);
    auto& t = report.table("scan", {"phi_a", "p_down"});
    for (size_t i = 0; i < phases.size(); ++i) {
      t.rows.push_back({scan.record.times[i], scan.record.values[i]});
    }
    return report;
  }
};

struct RunCmd {
  std::string file;
  std::string mode = "unitary";
  int pulse_samples = 0;

  Report run(const Globals& g) const {
    Schedule s = parse_sequence(read_file(file));
    if (g.dim_given) {
      s.params.dim = g.dim;
      validate(s);
    }
    ExecutionMode m = mode == "unitary" ? ExecutionMode::unitary()
                                        : ExecutionMode::lindblad_from(s);
    m.pulse_samples = pulse_samples;
    const ExecutionResult result = execute(s, m);
    Report report("run");
    report.add("file", file);
    report.add("mode", mode);
    report.add("dim", s.params.dim);
    report.add("p_down", result.probability(Spin::down));
    report.add("parity", parity(result.populations()));
    if (result.scan) {
      report.add("contrast", result.scan->contrast);
      report.add("phase_offset", result.scan->phase_offset);
    }
    int index = 0;
    for (const auto& rec : result.records) {
      if (rec.observable == Observable::populations_fock ||
          rec.observable == Observable::parity) {
        continue;
      }
      auto& t = report.table("record" + std::to_string(index++) + "_" +
                                 std::string(to_string(rec.observable)),
                             {rec.axis, std::string(to_string(rec.observable))});
      for (size_t i = 0; i < rec.times.size(); ++i) t.rows.push_back({rec.times[i], rec.values[i]});
    }
    populations_table(report, result, s.params, 30);
    return report;
  }
};

int default_dim() {
  if (const char* env = std::getenv("SQLADDER_DIM")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || value < 2 || value > 100000) {
      throw ValidationError("SQLADDER_DIM must be an integer >= 2");
    }
    return static_cast<int>(value);
  }
  return kDefaultDim;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Globals g;
  try {
    g.dim = default_dim();
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  CLI::App app{"Spin-oscillator simulations in squeezed Fock bases", "sqladder"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--dim", g.dim, "Fock-space truncation (default 160 or $SQLADDER_DIM)")
      ->check(CLI::Range(2, 100000));
  app.add_option("--out", g.out, "write output to this file instead of stdout");
  app.add_option("--format", g.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_option("--seed", g.seed, "recorded in the output; all algorithms are deterministic");

  StateCmd state;
  auto* state_app = app.add_subcommand("state", "populations, parity and squeezing of |zeta, n>");
  state_app->add_option("--n", state.n, "squeezed Fock level")->capture_default_str();
  state_app->add_option("--r", state.r, "squeeze magnitude")->capture_default_str();
  state_app->add_option("--phi", state.phi, "squeeze angle (rad)")->capture_default_str();
  state_app->add_option("--kmax", state.k_max, "last level to print")->capture_default_str();

  LadderCmd ladder;
  auto* ladder_app = app.add_subcommand("ladder", "climb to |zeta, n> with alternating H+/H- pulses");
  ladder_app->add_option("--n", ladder.n, "target level")->capture_default_str();
  ladder_app->add_option("--points", ladder.points, "samples per pulse")->capture_default_str();
  ladder.physics.attach(ladder_app);

  ScanDetuningCmd scan;
  auto* scan_app = app.add_subcommand("scan-detuning", "H+ flopping from |down, zeta, n> per detuning");
  scan_app->add_option("--pair", scan.pair, "lower level n of the n <-> n+1 transition")
      ->capture_default_str();
  scan_app->add_option("--delta", scan.deltas, "detunings in Hz")->delimiter(',');
  scan_app->add_option("--tmax", scan.tmax, "probe duration (s)")->capture_default_str();
  scan_app->add_option("--points", scan.points, "samples")->capture_default_str();
  scan.physics.attach(scan_app, false);

  FitCmd fit;
  auto* fit_app = app.add_subcommand("fit", "fit a decaying cosine to a t_seconds,p_down trace");
  fit_app->add_option("trace", fit.trace, "CSV trace")->required();
  fit_app->add_option("--parity", fit.parity_flag, "0: trace starts high, 1: starts low")
      ->check(CLI::IsMember({0, 1}))
      ->capture_default_str();

  TomoCmd tomo;
  auto* tomo_app = app.add_subcommand("tomo", "number-state populations from a blue-sideband trace");
  tomo_app->add_option("trace", tomo.trace, "CSV trace")->required();
  tomo_app->add_option("--omega-b", tomo.omega_b, "blue-sideband Rabi frequency (Hz)")->required();
  tomo_app->add_option("--eta", tomo.eta, "Lamb-Dicke parameter")->capture_default_str();
  tomo_app->add_option("--kmax", tomo.k_max, "highest level fitted")->capture_default_str();
  tomo_app->add_option("--decay", tomo.decay, "none, shared or per_level")
      ->check(CLI::IsMember({"none", "shared", "per_level"}))
      ->capture_default_str();
  tomo_app->add_flag("--clip", tomo.clip, "clip negatives and renormalize");
  tomo_app->add_option("--max-condition", tomo.max_condition, "condition number limit")
      ->capture_default_str();

  PhaseScanCmd phase;
  auto* phase_app = app.add_subcommand("phase-scan", "analysis-phase scan of the |zeta,0>/|zeta,2> superposition");
  phase_app->add_option("--points", phase.points, "phases over one period")->capture_default_str();
  phase_app->add_option("--phi-s", phase.phi_s, "superposition phase (rad)")->capture_default_str();
  phase.physics.attach(phase_app);

  RunCmd run_cmd;
  auto* run_app = app.add_subcommand("run", "execute a sequence file");
  run_app->add_option("file", run_cmd.file, "sequence file")->required();
  run_app->add_option("--mode", run_cmd.mode, "unitary or lindblad")
      ->check(CLI::IsMember({"unitary", "lindblad"}))
      ->capture_default_str();
  run_app->add_option("--pulse-samples", run_cmd.pulse_samples, "P(down) samples per pulse")
      ->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  g.dim_given = app.count("--dim") > 0;

  try {
    std::optional<Report> report;
    if (*state_app) {
      report = state.run(g);
    } else if (*ladder_app) {
      report = ladder.run(g);
    } else if (*scan_app) {
      report = scan.run(g);
    } else if (*fit_app) {
      report = fit.run(g, err);
    } else if (*tomo_app) {
      report = tomo.run(g);
    } else if (*phase_app) {
      report = phase.run(g);
    } else if (*run_app) {
      report = run_cmd.run(g);
    }
    if (app.count("--seed")) report->add("seed", g.seed);
    const std::string text = g.format == "json" ? report->json() : report->csv();
    if (g.out.empty()) {
      out << text;
    } else {
      std::ofstream file(g.out, std::ios::binary);
      if (!file) throw ValidationError("cannot write '" + g.out + "'");
      file << text;
      if (!file) throw ValidationError("failed writing '" + g.out + "'");
    }
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace sqladder::cli
