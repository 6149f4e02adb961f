#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "sqladder/dynamics.hpp"
#include "sqladder/errors.hpp"
#include "sqladder/tomography.hpp"

using namespace sqladder;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kOmegaB = kTwoPi * 2000.0;

std::vector<double> grid(double t_max, int points) {
  std::vector<double> t(static_cast<size_t>(points));
  for (int i = 0; i < points; ++i) t[i] = t_max * i / (points - 1);
  return t;
}

}  // namespace

TEST_CASE("blue sideband forward model") {
  const auto t = grid(2e-3, 101);
  const auto v = bsb_forward({1.0}, kOmegaB, LambDicke(0.0), DecayModel::none_model(), t);
  for (size_t i = 0; i < t.size(); ++i) {
    CHECK(v[i] == doctest::Approx(0.5 * (1.0 + std::cos(kOmegaB * t[i]))));
  }

  const auto f = blue_sideband_frequencies(kOmegaB, LambDicke(0.0), 3);
  CHECK(f[0] == doctest::Approx(kOmegaB));
  CHECK(f[3] == doctest::Approx(2.0 * kOmegaB));

  // Uniform weight over many levels dephases to 1/2.
  std::vector<double> flat(400, 1.0 / 400);
  const auto late = bsb_forward(flat, kOmegaB, LambDicke(0.0), DecayModel::none_model(), {0.05});
  CHECK(late[0] == doctest::Approx(0.5).epsilon(0.02));
  const auto damped = bsb_forward({1.0}, kOmegaB, LambDicke(0.0),
                                  DecayModel::shared_model(1e4), {1e-3});
  CHECK(damped[0] == doctest::Approx(0.5).epsilon(1e-12));

  CHECK_THROWS_AS(bsb_forward({1.5}, kOmegaB, LambDicke(0.0), {}, t), ValidationError);
  CHECK_THROWS_AS(blue_sideband_frequencies(0.0, LambDicke(0.0), 3), ValidationError);
}

TEST_CASE("decay envelopes") {
  CHECK(DecayModel::none_model().envelope(3, 1.0) == 1.0);
  CHECK(DecayModel::shared_model(2.0).envelope(5, 0.5) == doctest::Approx(std::exp(-1.0)));
  CHECK(DecayModel::per_level_model(2.0).envelope(1, 0.5) ==
        doctest::Approx(std::exp(-std::pow(2.0, 1.4))));
}

TEST_CASE("population round trip") {
  const int k_max = 30;
  const auto t = grid(4e-3, 801);
  SUBCASE("squeezed single excitation") {
    auto pops = oracle::squeezed_fock_populations(1.0, 1, k_max + 1);
    const auto v = bsb_forward(pops, kOmegaB, LambDicke(0.0), DecayModel::none_model(), t);
    const auto est = extract_populations(t, v, kOmegaB, LambDicke(0.0), k_max);
    for (int k = 0; k <= k_max; ++k) CHECK(std::abs(est.probabilities[k] - pops[k]) < 1e-3);
    CHECK(est.condition_number < 100.0);
    CHECK(est.residual_rms < 1e-10);
  }
  SUBCASE("ground state") {
    std::vector<double> pops(k_max + 1, 0.0);
    pops[0] = 1.0;
    const auto v = bsb_forward(pops, kOmegaB, LambDicke(0.05), DecayModel::none_model(), t);
    const auto est = extract_populations(t, v, kOmegaB, LambDicke(0.05), k_max);
    CHECK(est.probabilities[0] == doctest::Approx(1.0).epsilon(1e-6));
    for (int k = 1; k <= k_max; ++k) CHECK(std::abs(est.probabilities[k]) < 1e-6);
  }
  SUBCASE("odd state parity with decay") {
    auto pops = oracle::squeezed_fock_populations(1.0, 3, k_max + 1);
    const auto v = bsb_forward(pops, kOmegaB, LambDicke(0.0), DecayModel::shared_model(150.0), t);
    const auto est = extract_populations(t, v, kOmegaB, LambDicke(0.0), k_max);
    CHECK(est.gamma == doctest::Approx(150.0).epsilon(1e-4));
    CHECK(std::abs(est.parity() - parity(std::span<const double>(pops))) < 1e-3);
    CHECK(est.parity() < 0.0);
  }
  SUBCASE("arbitrary populations on low levels") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> pops(13);
    double sum = 0.0;
    for (double& p : pops) sum += (p = u(rng));
    for (double& p : pops) p /= sum;
    const auto v = bsb_forward(pops, kOmegaB, LambDicke(0.0), DecayModel::none_model(), t);
    const auto est = extract_populations(t, v, kOmegaB, LambDicke(0.0), 12);
    for (int k = 0; k <= 12; ++k) CHECK(std::abs(est.probabilities[k] - pops[k]) < 1e-3);
    CHECK(est.total() <= 1.0 + 1e-9);
  }
}

TEST_CASE("short traces cannot separate high levels") {
  const auto pops = oracle::squeezed_fock_populations(1.0, 1, 31);
  const auto t = grid(4e-4, 801);
  const auto v = bsb_forward(pops, kOmegaB, LambDicke(0.0), DecayModel::none_model(), t);
  CHECK_THROWS_AS(extract_populations(t, v, kOmegaB, LambDicke(0.0), 30), IllConditionedError);
}

TEST_CASE("noisy extraction reports raw values and sigmas") {
  auto pops = oracle::squeezed_fock_populations(1.0, 0, 11);
  const auto t = grid(4e-3, 401);
  auto v = bsb_forward(pops, kOmegaB, LambDicke(0.0), DecayModel::none_model(), t);
  std::mt19937 rng(3);
  std::normal_distribution<double> noise(0.0, 0.02);
  for (double& x : v) x += noise(rng);
  ExtractionOptions opts;
  opts.decay = DecayModel::Kind::none;
  const auto est = extract_populations(t, v, kOmegaB, LambDicke(0.0), 10, opts);
  for (int k = 0; k <= 10; ++k) {
    CHECK(est.sigmas[k] > 0.0);
    CHECK(std::abs(est.probabilities[k] - pops[k]) < 5 * est.sigmas[k]);
  }
  double var = 0.0;
  for (double sg : est.sigmas) var += sg * sg;
  CHECK(std::abs(est.parity()) <= 1.0 + 3.0 * std::sqrt(var));
  const auto clipped = est.clipped();
  double sum = 0.0;
  for (double p : clipped.probabilities) {
    CHECK(p >= 0.0);
    sum += p;
  }
  CHECK(sum == doctest::Approx(1.0));
}

TEST_CASE("Rabi fit on synthetic traces") {
  const double omega = kTwoPi * 4300.0;
  const auto t = grid(1e-3, 201);
  std::vector<double> v;
  for (double x : t) v.push_back(rabi_model(x, omega, 0.0, 1.0, 0));
  const auto fit = fit_rabi(t, v, 0);
  CHECK(std::abs(fit.omega / omega - 1.0) < 1e-4);
  CHECK(fit.contrast == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(!fit.alias_warning);

  // Contrast halves by the end of the trace.
  const double gamma = std::sqrt(std::log(2.0)) / 1e-3;
  std::vector<double> d;
  for (double x : t) d.push_back(rabi_model(x, omega, gamma, 0.9, 1));
  const auto dfit = fit_rabi(t, d, 1);
  CHECK(dfit.gamma == doctest::Approx(gamma).epsilon(0.02));
  CHECK(dfit.contrast == doctest::Approx(0.9).epsilon(1e-4));
  CHECK(dfit.parity_flag == 1);
  CHECK(rabi_model(0.0, omega, gamma, 1.0, 0) == 1.0);
  CHECK(rabi_model(0.0, omega, gamma, 1.0, 1) == 0.0);

  std::vector<double> flat(t.size(), 0.5);
  CHECK_THROWS_AS(fit_rabi(t, flat, 0), FitError);
  CHECK_THROWS_AS(fit_rabi(t, v, 1), FitError);
  CHECK_THROWS_AS(fit_rabi(t, v, 2), ValidationError);
  const std::vector<double> short_t(t.begin(), t.begin() + 7);
  CHECK_THROWS_AS(fit_rabi(short_t, std::vector<double>(v.begin(), v.begin() + 7), 0),
                  ValidationError);
}

TEST_CASE("Rabi fit flags frequencies near the sampling limit") {
  const double omega = kTwoPi * 4300.0;
  // About 2.1 samples per period.
  const auto t = grid(2e-3, 19);
  std::vector<double> v;
  for (double x : t) v.push_back(rabi_model(x, omega, 0.0, 1.0, 0));
  try {
    const auto fit = fit_rabi(t, v, 0);
    CHECK(fit.alias_warning);
  } catch (const FitError&) {
    // An aliased trace may also fail outright.
  }
}

TEST_CASE("Rabi fit recovers engineered transition frequencies") {
  const FockSpace space(kDefaultDim);
  const SqueezeParams zeta(1.0, 0.0);
  const auto k = engineered_lowering(zeta, 0.0, space).K;
  const double omega = kTwoPi * 4300.0;
  const auto h = engineered(EngineeredSign::plus, DriveParams(omega, 0.0), k);
  for (int n : {0, 3}) {
    const SpinOscState down(Spin::down, squeezed_fock_state(zeta, n, space));
    const SpinOscState up(Spin::up, squeezed_fock_state(zeta, n + 1, space));
    const double split = block_rabi_frequency(h, down, up);
    const auto traj = evolve_unitary(h, down, 1e-3, 301);
    const auto fit = fit_rabi(traj.times, traj.p_down, 0);
    CHECK(std::abs(fit.omega / split - 1.0) < 1e-3);
  }
}

TEST_CASE("Rabi ratio table") {
  const SqueezeParams zeta(1.0, 0.0);
  const auto plain = rabi_ratio_table(7, zeta, LambDicke(0.05), RatioMode::sqrt_n);
  CHECK(plain[0].ratio == 1.0);
  CHECK(plain[3].n == 4);
  CHECK(plain[3].ratio == doctest::Approx(2.0));

  const auto ld = rabi_ratio_table(7, zeta, LambDicke(0.05), RatioMode::ld_corrected);
  CHECK(ld[0].ratio == doctest::Approx(1.0));
  double gap = 0.0;
  for (const auto& row : ld) {
    if (row.n == 1) continue;
    const double g = std::sqrt(static_cast<double>(row.n)) - row.ratio;
    CHECK(g > gap);
    gap = g;
    CHECK(row.correction > row.fock_correction);
  }

  const auto degenerate = rabi_ratio_table(7, SqueezeParams(), LambDicke(0.05),
                                           RatioMode::ld_corrected);
  for (const auto& row : degenerate) {
    CHECK(row.ratio == doctest::Approx(row.fock_ratio).epsilon(1e-12));
  }
  CHECK_THROWS_AS(rabi_ratio_table(0, zeta, LambDicke(0.0), RatioMode::sqrt_n), ValidationError);
}

TEST_CASE("trace files") {
  Trace trace{{0.0, 1e-4, 2e-4}, {1.0, 0.75, 0.25}};
  std::ostringstream out;
  write_trace_csv(out, trace);
  CHECK(out.str().rfind("t_seconds,p_down\n", 0) == 0);
  std::istringstream in("# comment\n" + out.str());
  const Trace back = read_trace_csv(in);
  CHECK(back.times == trace.times);
  CHECK(back.values == trace.values);

  std::istringstream bad("t_seconds,p_down\n0,abc\n");
  CHECK_THROWS_AS(read_trace_csv(bad), ParseError);
  std::istringstream empty("# nothing\n");
  CHECK_THROWS_AS(read_trace_csv(empty), ValidationError);

  PopulationEstimate est;
  est.probabilities = {0.5, 0.5};
  est.sigmas = {0.01, 0.02};
  std::ostringstream pops;
  write_populations_csv(pops, est);
  CHECK(pops.str() == "k,p,sigma\n0,0.5,0.01\n1,0.5,0.02\n");
}
