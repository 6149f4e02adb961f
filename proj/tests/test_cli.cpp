#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "sqladder/cli.hpp"
#include "sqladder/tomography.hpp"

namespace fs = std::filesystem;
using sqladder::cli::run;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

// Value of a "# key=value" summary line.
std::string summary(const std::string& csv, const std::string& key) {
  std::istringstream in(csv);
  std::string line;
  const std::string prefix = "# " + key + "=";
  while (std::getline(in, line)) {
    if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
  }
  return {};
}

double summary_number(const std::string& csv, const std::string& key) {
  return std::stod(summary(csv, key));
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "sqladder_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

void write_trace(const fs::path& path, const sqladder::Trace& trace) {
  std::ofstream f(path);
  sqladder::write_trace_csv(f, trace);
}

}  // namespace

TEST_CASE("state subcommand") {
  const auto vac = invoke({"state", "--n", "0", "--r", "1", "--dim", "100"});
  REQUIRE(vac.code == 0);
  CHECK(vac.out.rfind("# squeezed-ladder v1, state\n", 0) == 0);
  CHECK(summary_number(vac.out, "parity") == doctest::Approx(1.0));
  CHECK(summary_number(vac.out, "squeezing_db") == doctest::Approx(-8.69).epsilon(1e-3));
  CHECK(vac.out.find("\n0,0.648054") != std::string::npos);

  const auto three = invoke({"state", "--n", "3", "--r", "0", "--dim", "10"});
  REQUIRE(three.code == 0);
  CHECK(three.out.find("\n3,1\n") != std::string::npos);

  const auto odd = invoke({"state", "--n", "3", "--r", "1", "--dim", "120"});
  REQUIRE(odd.code == 0);
  CHECK(summary_number(odd.out, "parity") == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("exit codes") {
  CHECK(invoke({"state", "--n", "200", "--dim", "100"}).code == sqladder::cli::kExitValidation);
  CHECK(invoke({"state", "--r", "-1"}).code == sqladder::cli::kExitValidation);
  CHECK(invoke({"state", "--n", "0", "--r", "2", "--dim", "20"}).code ==
        sqladder::cli::kExitNumerical);
  CHECK(invoke({"bogus"}).code == sqladder::cli::kExitValidation);
  CHECK(invoke({}).code == sqladder::cli::kExitValidation);
  CHECK(invoke({"state", "--format", "xml"}).code == sqladder::cli::kExitValidation);
  CHECK(invoke({"fit", "/nonexistent/trace.csv"}).code == sqladder::cli::kExitValidation);
  const auto help = invoke({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("scan-detuning") != std::string::npos);
}

TEST_CASE("failed runs leave no output file") {
  const fs::path out = scratch("never.csv");
  fs::remove(out);
  const auto bad = invoke({"state", "--n", "0", "--r", "2", "--dim", "20", "--out", out.string()});
  CHECK(bad.code == sqladder::cli::kExitNumerical);
  CHECK(!fs::exists(out));
  const auto good = invoke({"state", "--dim", "100", "--out", out.string()});
  CHECK(good.code == 0);
  CHECK(good.out.empty());
  CHECK(fs::exists(out));
}

TEST_CASE("json mirrors csv and output is deterministic") {
  const auto a = invoke({"state", "--dim", "80", "--format", "json", "--seed", "5"});
  const auto b = invoke({"state", "--dim", "80", "--format", "json", "--seed", "5"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const auto doc = nlohmann::json::parse(a.out);
  CHECK(doc["header"] == "# squeezed-ladder v1, state");
  CHECK(doc["summary"]["seed"] == 5);
  CHECK(doc["tables"][0]["name"] == "populations");
  CHECK(doc["tables"][0]["columns"][1] == "p");
  CHECK(doc["tables"][0]["rows"][0][1].get<double>() == doctest::Approx(0.648054).epsilon(1e-5));
}

TEST_CASE("SQLADDER_DIM sets the default truncation") {
  ::setenv("SQLADDER_DIM", "90", 1);
  const auto env = invoke({"state"});
  const auto flag = invoke({"state", "--dim", "100"});
  const auto plain = invoke({"state", "--n", "0", "--r", "0"});
  ::setenv("SQLADDER_DIM", "abc", 1);
  const auto junk = invoke({"state"});
  ::unsetenv("SQLADDER_DIM");
  REQUIRE(env.code == 0);
  CHECK(summary_number(env.out, "dim") == 90);
  CHECK(summary_number(flag.out, "dim") == 100);
  CHECK(plain.code == 0);
  CHECK(junk.code == sqladder::cli::kExitValidation);
  CHECK(summary_number(invoke({"state"}).out, "dim") == sqladder::kDefaultDim);
}

TEST_CASE("ladder subcommand") {
  const auto zero = invoke({"ladder", "--n", "0", "--dim", "80"});
  REQUIRE(zero.code == 0);
  CHECK(summary_number(zero.out, "fidelity") == doctest::Approx(1.0));

  const auto two = invoke({"ladder", "--n", "2", "--dim", "100", "--points", "5"});
  REQUIRE(two.code == 0);
  CHECK(summary_number(two.out, "fidelity") > 1.0 - 1e-6);
  CHECK(two.out.find("# table: trajectory") != std::string::npos);

  const auto noisy = invoke({"ladder", "--n", "2", "--dim", "48", "--r", "0.5", "--noise",
                             "--points", "2"});
  REQUIRE(noisy.code == 0);
  CHECK(summary(noisy.out, "mode") == "lindblad");
  CHECK(summary_number(noisy.out, "fidelity") < 1.0 - 1e-4);
}

TEST_CASE("scan-detuning subcommand") {
  const auto res = invoke({"scan-detuning", "--pair", "0", "--delta", "0,30", "--tmax", "5e-4",
                           "--points", "11", "--dim", "80"});
  REQUIRE(res.code == 0);
  CHECK(res.out.find("t_seconds,p_down_delta_0hz,p_down_delta_30hz") != std::string::npos);
  CHECK(summary(res.out, "pair") == "0<->1");
}

TEST_CASE("fit and tomo subcommands read traces") {
  const double omega = 2 * std::numbers::pi * 4300.0;
  sqladder::Trace trace;
  for (int i = 0; i <= 200; ++i) {
    const double t = 1e-3 * i / 200;
    trace.times.push_back(t);
    trace.values.push_back(sqladder::rabi_model(t, omega, 300.0, 0.95, 0));
  }
  const fs::path path = scratch("rabi.csv");
  write_trace(path, trace);
  const auto fit = invoke({"fit", path.string(), "--parity", "0"});
  REQUIRE(fit.code == 0);
  CHECK(summary_number(fit.out, "omega_hz") == doctest::Approx(4300.0).epsilon(1e-6));
  CHECK(summary_number(fit.out, "contrast") == doctest::Approx(0.95).epsilon(1e-6));
  CHECK(invoke({"fit", path.string(), "--parity", "2"}).code == sqladder::cli::kExitValidation);

  std::vector<double> pops(11, 0.0);
  pops[0] = 0.6;
  pops[2] = 0.3;
  pops[4] = 0.1;
  sqladder::Trace bsb;
  for (int i = 0; i <= 400; ++i) bsb.times.push_back(4e-3 * i / 400);
  bsb.values = sqladder::bsb_forward(pops, 2 * std::numbers::pi * 2000.0, sqladder::LambDicke(0.0),
                                     sqladder::DecayModel::none_model(), bsb.times);
  const fs::path bpath = scratch("bsb.csv");
  write_trace(bpath, bsb);
  const auto tomo = invoke({"tomo", bpath.string(), "--omega-b", "2000", "--kmax", "10"});
  REQUIRE(tomo.code == 0);
  CHECK(summary_number(tomo.out, "parity") == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(tomo.out.find("k,p,sigma") != std::string::npos);
  CHECK(invoke({"tomo", bpath.string()}).code == sqladder::cli::kExitValidation);
  const auto ill = invoke({"tomo", bpath.string(), "--omega-b", "2000", "--kmax", "10",
                           "--max-condition", "2"});
  CHECK(ill.code == sqladder::cli::kExitNumerical);
}

TEST_CASE("phase-scan subcommand") {
  const auto res = invoke({"phase-scan", "--points", "8", "--dim", "96"});
  REQUIRE(res.code == 0);
  CHECK(summary_number(res.out, "contrast") == doctest::Approx(1.0).epsilon(1e-6));
  const auto two = invoke({"phase-scan", "--points", "2", "--dim", "96", "--phi-s", "0.5"});
  REQUIRE(two.code == 0);
  CHECK(summary_number(two.out, "contrast") == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("run subcommand") {
  const fs::path path = scratch("seq.txt");
  {
    std::ofstream f(path);
    f << "# two steps up the ladder\n"
         "set dim 100\n"
         "set r 1\n"
         "prepare squeezed_vacuum\n"
         "pulse plus theta=pi\n"
         "pulse minus theta=pi\n"
         "probe plus tmax=2e-4 points=5\n";
  }
  const auto res = invoke({"run", path.string()});
  REQUIRE(res.code == 0);
  CHECK(summary_number(res.out, "p_down") == doctest::Approx(1.0));
  CHECK(summary_number(res.out, "dim") == 100);
  CHECK(res.out.find("# table: record0_p_down") != std::string::npos);

  const auto override_dim = invoke({"run", path.string(), "--dim", "90"});
  REQUIRE(override_dim.code == 0);
  CHECK(summary_number(override_dim.out, "dim") == 90);

  const fs::path bad = scratch("bad.txt");
  {
    std::ofstream f(bad);
    f << "set r 1\npulse plus theta=pi\n";
  }
  const auto err = invoke({"run", bad.string()});
  CHECK(err.code == sqladder::cli::kExitValidation);
  CHECK(err.err.find("line 2") != std::string::npos);

  const fs::path pump = scratch("pump.txt");
  {
    std::ofstream f(pump);
    f << "set dim 40\nset r 0.5\nprepare squeezed_vacuum\npulse plus theta=pi\nrepump\n";
  }
  CHECK(invoke({"run", pump.string()}).code == sqladder::cli::kExitValidation);
  CHECK(invoke({"run", pump.string(), "--mode", "lindblad"}).code == 0);
}

TEST_CASE("long closed-system Lindblad run stays positive") {
  const fs::path path = scratch("long.txt");
  {
    std::ofstream f(path);
    f << "set r 1\nset delta 30\nprepare squeezed_vacuum\npulse plus theta=pi\n"
         "pulse minus theta=pi\nrepump\nprobe plus tmax=2e-3 points=201\n";
  }
  const auto res = invoke({"run", path.string(), "--mode", "lindblad"});
  CHECK(res.err.empty());
  CHECK(res.code == 0);
}
