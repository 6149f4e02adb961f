#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <sstream>

#include "sqladder/errors.hpp"
#include "sqladder/pulseseq.hpp"

namespace sqladder {

namespace {

struct Token {
  std::string_view text;
  int column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    const size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
  }
  return out;
}

// [sign] factor (('*' | '/') factor)*, factor = number | "pi".
// On failure returns the offending offset.
struct ExprResult {
  double value = 0.0;
  std::optional<size_t> error_at;
};

ExprResult evaluate(std::string_view text) {
  size_t i = 0;
  double sign = 1.0;
  if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
    if (text[i] == '-') sign = -1.0;
    ++i;
  }
  auto factor = [&](double& out) -> bool {
    if (text.substr(i, 2) == "pi") {
      out = std::numbers::pi;
      i += 2;
      return true;
    }
    if (i < text.size() && text[i] == '-') return false;
    const char* begin = text.data() + i;
    const auto res = std::from_chars(begin, text.data() + text.size(), out);
    if (res.ec != std::errc() || res.ptr == begin) return false;
    i += static_cast<size_t>(res.ptr - begin);
    return true;
  };
  double value = 0.0;
  if (!factor(value)) return {0.0, i};
  while (i < text.size()) {
    const char op = text[i];
    if (op != '*' && op != '/') return {0.0, i};
    ++i;
    double rhs = 0.0;
    if (!factor(rhs)) return {0.0, i};
    value = op == '*' ? value * rhs : value / rhs;
  }
  if (!std::isfinite(value)) return {0.0, size_t{0}};
  return {sign * value, std::nullopt};
}

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  double back = 0.0;
  std::from_chars(buf, buf + std::char_traits<char>::length(buf), back);
  if (back == value) return buf;
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Schedule run() {
    int line_no = 0;
    size_t pos = 0;
    while (pos <= text_.size()) {
      const size_t end = std::min(text_.find('\n', pos), text_.size());
      std::string_view line = text_.substr(pos, end - pos);
      ++line_no;
      line_ = line_no;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) {
        line = line.substr(0, hash);
      }
      const auto tokens = tokenize(line);
      if (!tokens.empty()) statement(tokens);
      pos = end + 1;
    }
    if (!prepared_) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": sequence ends without a prepare directive");
    }
    validate(schedule_);
    return schedule_;
  }

 private:
  [[noreturn]] void fail(const std::string& what, const Token& at) const {
    throw ParseError(what, line_, at.column);
  }
  [[noreturn]] void invalid(const std::string& what) const {
    throw ValidationError("line " + std::to_string(line_) + ": " + what);
  }

  double expression(const Token& t, std::string_view text, int offset) const {
    const auto res = evaluate(text);
    if (res.error_at) {
      throw ParseError("malformed expression '" + std::string(text) + "'", line_,
                       t.column + offset + static_cast<int>(*res.error_at));
    }
    return res.value;
  }

  int integer(const Token& t, std::string_view text, int offset) const {
    int out = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
      throw ParseError("expected an integer, got '" + std::string(text) + "'", line_,
                       t.column + offset);
    }
    return out;
  }

  void expect_count(const std::vector<Token>& tokens, size_t count) const {
    if (tokens.size() > count) fail("unexpected token '" + std::string(tokens[count].text) + "'", tokens[count]);
    if (tokens.size() < count) {
      fail("missing argument to '" + std::string(tokens[0].text) + "'", tokens.back());
    }
  }

  // Parses key=value arguments starting at index `first`.
  template <typename Handler>
  void arguments(const std::vector<Token>& tokens, size_t first, Handler&& handle) {
    for (size_t i = first; i < tokens.size(); ++i) {
      const auto& t = tokens[i];
      const auto eq = t.text.find('=');
      if (eq == std::string_view::npos || eq == 0 || eq + 1 == t.text.size()) {
        fail("expected key=value, got '" + std::string(t.text) + "'", t);
      }
      const std::string_view key = t.text.substr(0, eq);
      const std::string_view value = t.text.substr(eq + 1);
      if (!handle(key, value, t, static_cast<int>(eq) + 1)) {
        fail("unknown argument '" + std::string(key) + "'", t);
      }
    }
  }

  void statement(const std::vector<Token>& tokens) {
    const std::string_view head = tokens[0].text;
    if (head == "set") {
      set(tokens);
    } else if (head == "prepare") {
      prepare(tokens);
    } else if (head == "pulse") {
      require_prepared("pulse");
      pulse(tokens);
    } else if (head == "repump") {
      require_prepared("repump");
      expect_count(tokens, 1);
      schedule_.directives.emplace_back(Repump{});
    } else if (head == "probe") {
      require_prepared("probe");
      probe(tokens);
    } else if (head == "scan") {
      require_prepared("scan");
      scan(tokens);
    } else {
      fail("unknown directive '" + std::string(head) + "'", tokens[0]);
    }
  }

  void require_prepared(const char* what) const {
    if (!prepared_) invalid(std::string(what) + " before the prepare directive");
  }

  void set(const std::vector<Token>& tokens) {
    if (prepared_) invalid("set after the prepare directive");
    expect_count(tokens, 3);
    const std::string_view key = tokens[1].text;
    const Token& vt = tokens[2];
    auto& p = schedule_.params;
    auto number = [&] { return expression(vt, vt.text, 0); };
    if (key == "dim") {
      p.dim = integer(vt, vt.text, 0);
    } else if (key == "eta") {
      p.eta = number();
    } else if (key == "r") {
      p.r = number();
    } else if (key == "phi") {
      p.phi = number();
    } else if (key == "omega_plus") {
      p.omega_plus = number();
    } else if (key == "omega_minus") {
      p.omega_minus = number();
    } else if (key == "omega_carrier") {
      p.omega_carrier = number();
    } else if (key == "omega_red") {
      p.omega_red = number();
    } else if (key == "omega_blue") {
      p.omega_blue = number();
    } else if (key == "delta") {
      p.delta = number();
    } else if (key == "gamma_amp") {
      p.gamma_amp = number();
    } else if (key == "gamma_phase") {
      p.gamma_phase = number();
    } else if (key == "ld_order") {
      if (vt.text == "linear") {
        p.ld_order = LdOrder::linear;
      } else if (vt.text == "all_orders") {
        p.ld_order = LdOrder::all_orders;
      } else {
        fail("ld_order must be linear or all_orders", vt);
      }
    } else if (key == "calibrated") {
      if (vt.text == "true") {
        p.calibrated = true;
      } else if (vt.text == "false") {
        p.calibrated = false;
      } else {
        fail("calibrated must be true or false", vt);
      }
    } else {
      fail("unknown key '" + std::string(key) + "'", tokens[1]);
    }
    try {
      validate(p);
    } catch (const ValidationError& e) {
      invalid(e.what());
    }
  }

  void prepare(const std::vector<Token>& tokens) {
    if (prepared_) invalid("duplicate prepare directive");
    if (tokens.size() < 2) fail("prepare needs a state", tokens[0]);
    const std::string_view kind = tokens[1].text;
    auto& prep = schedule_.prep;
    if (kind == "squeezed_vacuum") {
      expect_count(tokens, 2);
      prep = Preparation::squeezed_vacuum();
    } else if (kind == "fock" || kind == "squeezed_fock") {
      expect_count(tokens, 3);
      const int n = integer(tokens[2], tokens[2].text, 0);
      if (n < 0 || n >= schedule_.params.dim) {
        invalid("level " + std::to_string(n) + " outside dim " +
                std::to_string(schedule_.params.dim));
      }
      prep = kind == "fock" ? Preparation::fock(n) : Preparation::squeezed_fock(n);
    } else {
      fail("unknown preparation '" + std::string(kind) + "'", tokens[1]);
    }
    prepared_ = true;
  }

  void pulse(const std::vector<Token>& tokens) {
    if (tokens.size() < 2) fail("pulse needs a kind", tokens[0]);
    const auto kind = pulse_kind_from_string(tokens[1].text);
    if (!kind) fail("unknown pulse kind '" + std::string(tokens[1].text) + "'", tokens[1]);
    Pulse p;
    p.kind = *kind;
    arguments(tokens, 2, [&](std::string_view key, std::string_view value,
                             const Token& t, int offset) {
      if (key == "theta") {
        p.theta = expression(t, value, offset);
      } else if (key == "duration") {
        p.duration = expression(t, value, offset);
      } else if (key == "phase") {
        p.phase = expression(t, value, offset);
      } else {
        return false;
      }
      return true;
    });
    if (p.theta.has_value() == p.duration.has_value()) {
      invalid("pulse needs exactly one of theta= and duration=");
    }
    if (p.theta && *p.theta < 0.0) invalid("pulse angle must be >= 0");
    if (p.duration && *p.duration < 0.0) invalid("pulse duration must be >= 0");
    schedule_.directives.emplace_back(p);
  }

  void probe(const std::vector<Token>& tokens) {
    if (tokens.size() < 2) fail("probe needs a kind", tokens[0]);
    const auto kind = pulse_kind_from_string(tokens[1].text);
    if (!kind || (*kind != PulseKind::plus && *kind != PulseKind::minus &&
                  *kind != PulseKind::blue)) {
      fail("probe kind must be plus, minus or blue", tokens[1]);
    }
    Probe p;
    p.kind = *kind;
    bool have_tmax = false, have_points = false;
    arguments(tokens, 2, [&](std::string_view key, std::string_view value,
                             const Token& t, int offset) {
      if (key == "tmax") {
        p.tmax = expression(t, value, offset);
        have_tmax = true;
      } else if (key == "points") {
        p.points = integer(t, value, offset);
        have_points = true;
      } else {
        return false;
      }
      return true;
    });
    if (!have_tmax || !have_points) invalid("probe needs tmax= and points=");
    if (!(p.tmax > 0.0) || p.points < 2) invalid("probe needs tmax > 0 and points >= 2");
    schedule_.directives.emplace_back(p);
  }

  void scan(const std::vector<Token>& tokens) {
    if (tokens.size() < 2 || tokens[1].text != "phase") {
      fail("only 'scan phase' is supported", tokens.size() < 2 ? tokens[0] : tokens[1]);
    }
    PhaseScan s;
    bool have_from = false, have_to = false, have_points = false;
    arguments(tokens, 2, [&](std::string_view key, std::string_view value,
                             const Token& t, int offset) {
      if (key == "from") {
        s.from = expression(t, value, offset);
        have_from = true;
      } else if (key == "to") {
        s.to = expression(t, value, offset);
        have_to = true;
      } else if (key == "points") {
        s.points = integer(t, value, offset);
        have_points = true;
      } else {
        return false;
      }
      return true;
    });
    if (!have_from || !have_to || !have_points) invalid("scan needs from=, to= and points=");
    if (s.points < 2) invalid("scan needs points >= 2");
    schedule_.directives.emplace_back(s);
  }

  std::string_view text_;
  int line_ = 0;
  bool prepared_ = false;
  Schedule schedule_;
};

}  // namespace

double parse_expression(std::string_view text) {
  const auto res = evaluate(text);
  if (res.error_at) {
    throw ParseError("malformed expression '" + std::string(text) + "'", 1,
                     static_cast<int>(*res.error_at) + 1);
  }
  return res.value;
}

std::string format_angle(double value) {
  if (value == 0.0) return "0";
  for (long q = 1; q <= 64; ++q) {
    const double p_real = value * static_cast<double>(q) / std::numbers::pi;
    const long p = std::lround(p_real);
    if (p == 0 || std::abs(p_real - static_cast<double>(p)) > 1e-9) continue;
    if (std::gcd(p, q) != 1) continue;
    std::string text = p < 0 ? "-" : "";
    if (std::abs(p) != 1) text += std::to_string(std::abs(p)) + "*";
    text += "pi";
    if (q != 1) text += "/" + std::to_string(q);
    const auto back = evaluate(text);
    if (!back.error_at && back.value == value) return text;
    break;
  }
  return format_number(value);
}

Schedule parse_sequence(std::string_view text) { return Parser(text).run(); }

std::string emit(const Schedule& schedule) {
  if (schedule.prep.kind == Preparation::Kind::explicit_state) {
    throw ValidationError("explicit preparations cannot be written as a sequence file");
  }
  const auto& p = schedule.params;
  std::ostringstream out;
  out << "set dim " << p.dim << '\n'
      << "set eta " << format_number(p.eta) << '\n'
      << "set r " << format_number(p.r) << '\n'
      << "set phi " << format_angle(p.phi) << '\n'
      << "set omega_plus " << format_number(p.omega_plus) << '\n'
      << "set omega_minus " << format_number(p.omega_minus) << '\n'
      << "set omega_carrier " << format_number(p.omega_carrier) << '\n'
      << "set omega_red " << format_number(p.omega_red) << '\n'
      << "set omega_blue " << format_number(p.omega_blue) << '\n'
      << "set delta " << format_number(p.delta) << '\n'
      << "set gamma_amp " << format_number(p.gamma_amp) << '\n'
      << "set gamma_phase " << format_number(p.gamma_phase) << '\n'
      << "set ld_order " << (p.ld_order == LdOrder::linear ? "linear" : "all_orders") << '\n'
      << "set calibrated " << (p.calibrated ? "true" : "false") << '\n';
  switch (schedule.prep.kind) {
    case Preparation::Kind::squeezed_vacuum:
      out << "prepare squeezed_vacuum\n";
      break;
    case Preparation::Kind::fock:
      out << "prepare fock " << schedule.prep.n << '\n';
      break;
    case Preparation::Kind::squeezed_fock:
      out << "prepare squeezed_fock " << schedule.prep.n << '\n';
      break;
    case Preparation::Kind::explicit_state:
      break;
  }
  for (const auto& d : schedule.directives) {
    if (const auto* pulse = std::get_if<Pulse>(&d)) {
      out << "pulse " << to_string(pulse->kind);
      if (pulse->theta) out << " theta=" << format_angle(*pulse->theta);
      if (pulse->duration) out << " duration=" << format_number(*pulse->duration);
      out << " phase=" << format_angle(pulse->phase) << '\n';
    } else if (std::holds_alternative<Repump>(d)) {
      out << "repump\n";
    } else if (const auto* probe = std::get_if<Probe>(&d)) {
      out << "probe " << to_string(probe->kind) << " tmax=" << format_number(probe->tmax)
          << " points=" << probe->points << '\n';
    } else if (const auto* scan = std::get_if<PhaseScan>(&d)) {
      out << "scan phase from=" << format_angle(scan->from)
          << " to=" << format_angle(scan->to) << " points=" << scan->points << '\n';
    }
  }
  return out.str();
}

}  // namespace sqladder
