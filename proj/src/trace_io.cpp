#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "sqladder/errors.hpp"
#include "sqladder/tomography.hpp"

namespace sqladder {

namespace {

std::string format(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

double parse_field(const std::string& text, int line) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  while (used < text.size() && (text[used] == ' ' || text[used] == '\r')) ++used;
  if (used == 0 || used != text.size()) {
    throw ParseError("expected a number, got '" + text + "'", line, 1);
  }
  return value;
}

}  // namespace

Trace read_trace_csv(std::istream& in) {
  Trace trace;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    if (line.compare(first, 9, "t_seconds") == 0) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ParseError("expected 't_seconds,p_down'", line_no, 1);
    }
    trace.times.push_back(parse_field(line.substr(first, comma - first), line_no));
    auto rest = line.substr(comma + 1);
    rest.erase(0, rest.find_first_not_of(' '));
    trace.values.push_back(parse_field(rest, line_no));
  }
  if (trace.times.empty()) throw ValidationError("trace file holds no samples");
  return trace;
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << "t_seconds,p_down\n";
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    out << format(trace.times[i]) << ',' << format(trace.values[i]) << '\n';
  }
}

void write_populations_csv(std::ostream& out, const PopulationEstimate& estimate) {
  out << "k,p,sigma\n";
  for (std::size_t k = 0; k < estimate.probabilities.size(); ++k) {
    out << k << ',' << format(estimate.probabilities[k]) << ','
        << format(estimate.sigmas[k]) << '\n';
  }
}

}  // namespace sqladder
