#include "sqladder/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>
#include <sstream>

#include <unsupported/Eigen/LevenbergMarquardt>

#include "sqladder/errors.hpp"

namespace sqladder {

double DecayModel::envelope(int k, double t) const {
  switch (kind) {
    case Kind::none:
      return 1.0;
    case Kind::shared:
      return std::exp(-gamma * gamma * t * t);
    case Kind::per_level: {
      const double g = gamma * std::pow(k + 1.0, 0.7);
      return std::exp(-g * g * t * t);
    }
  }
  return 1.0;
}

double PopulationEstimate::total() const {
  return std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
}

double PopulationEstimate::parity() const { return sqladder::parity(probabilities); }

PopulationEstimate PopulationEstimate::clipped() const {
  PopulationEstimate out = *this;
  double sum = 0.0;
  for (double& p : out.probabilities) {
    p = std::max(p, 0.0);
    sum += p;
  }
  if (sum > 0.0) {
    for (double& p : out.probabilities) p /= sum;
    for (double& s : out.sigmas) s /= sum;
  }
  return out;
}

std::vector<double> blue_sideband_frequencies(double omega_b, const LambDicke& eta,
                                              int k_max) {
  if (k_max < 0) throw ValidationError("k_max must be >= 0");
  if (!(omega_b > 0.0)) throw ValidationError("omega_b must be > 0");
  const FockSpace space(std::max(64, 2 * (k_max + 2) + 16));
  auto out = sideband_matrix_elements(SidebandBasis::fock(), k_max, eta, space);
  for (double& f : out) f *= omega_b;
  return out;
}

std::vector<double> bsb_forward(const std::vector<double>& populations,
                                double omega_b, const LambDicke& eta,
                                const DecayModel& decay,
                                const std::vector<double>& times) {
  if (populations.empty()) throw ValidationError("no populations given");
  for (double p : populations) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("populations must lie in [0, 1]");
  }
  const int k_max = static_cast<int>(populations.size()) - 1;
  const auto freqs = blue_sideband_frequencies(omega_b, eta, k_max);
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    if (!(t >= 0.0)) throw ValidationError("times must be >= 0");
    double sum = 0.0;
    for (int k = 0; k <= k_max; ++k) {
      sum += populations[k] * (1.0 + decay.envelope(k, t) * std::cos(freqs[k] * t));
    }
    out.push_back(0.5 * sum);
  }
  return out;
}

namespace {

void check_trace(const std::vector<double>& times, const std::vector<double>& values,
                 size_t min_samples) {
  if (times.size() != values.size()) {
    throw ValidationError("times and values differ in length");
  }
  if (times.size() < min_samples) {
    throw ValidationError("need at least " + std::to_string(min_samples) + " samples");
  }
  for (size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || !std::isfinite(values[i]) || times[i] < 0.0) {
      throw ValidationError("trace contains invalid samples");
    }
  }
}

struct LinearSolve {
  Eigen::VectorXd p;
  double rss = 0.0;
};

Eigen::MatrixXd design_matrix(const std::vector<double>& times,
                              const std::vector<double>& freqs,
                              const DecayModel& decay) {
  const auto n = static_cast<Eigen::Index>(times.size());
  const auto k = static_cast<Eigen::Index>(freqs.size());
  Eigen::MatrixXd a(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      const double t = times[i];
      a(i, j) = 0.5 * (1.0 + decay.envelope(static_cast<int>(j), t) * std::cos(freqs[j] * t));
    }
  }
  return a;
}

LinearSolve solve_linear(const Eigen::MatrixXd& a, const Eigen::VectorXd& y) {
  LinearSolve out;
  out.p = a.colPivHouseholderQr().solve(y);
  out.rss = (a * out.p - y).squaredNorm();
  return out;
}

}  // namespace

PopulationEstimate extract_populations(const std::vector<double>& times,
                                       const std::vector<double>& values,
                                       double omega_b, const LambDicke& eta,
                                       int k_max, const ExtractionOptions& options) {
  check_trace(times, values, static_cast<size_t>(k_max) + 3);
  const auto freqs = blue_sideband_frequencies(omega_b, eta, k_max);
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(
      values.data(), static_cast<Eigen::Index>(values.size()));
  const double t_max = *std::max_element(times.begin(), times.end());
  if (!(t_max > 0.0)) throw ValidationError("trace has zero duration");

  auto model = [&](double gamma) {
    if (options.decay == DecayModel::Kind::none) return DecayModel::none_model();
    return DecayModel{options.decay, gamma};
  };
  auto rss_at = [&](double gamma) {
    return solve_linear(design_matrix(times, freqs, model(gamma)), y).rss;
  };

  double gamma = 0.0;
  if (options.fixed_gamma) {
    gamma = *options.fixed_gamma;
  } else if (options.decay != DecayModel::Kind::none) {
    // Coarse scan then golden-section refinement of the shared decay.
    const int grid = 32;
    const double hi = 4.0 / t_max;
    int best = 0;
    double best_rss = rss_at(0.0);
    for (int i = 1; i <= grid; ++i) {
      const double r = rss_at(hi * i / grid);
      if (r < best_rss) {
        best_rss = r;
        best = i;
      }
    }
    double lo_g = hi * std::max(best - 1, 0) / grid;
    double hi_g = hi * std::min(best + 1, grid) / grid;
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi_g - ratio * (hi_g - lo_g), x2 = lo_g + ratio * (hi_g - lo_g);
    double f1 = rss_at(x1), f2 = rss_at(x2);
    for (int it = 0; it < 80 && hi_g - lo_g > 1e-12 * hi; ++it) {
      if (f1 < f2) {
        hi_g = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi_g - ratio * (hi_g - lo_g);
        f1 = rss_at(x1);
      } else {
        lo_g = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo_g + ratio * (hi_g - lo_g);
        f2 = rss_at(x2);
      }
    }
    gamma = 0.5 * (lo_g + hi_g);
    if (best_rss <= std::min(f1, f2) && best == 0) gamma = 0.0;
  }

  const Eigen::MatrixXd a = design_matrix(times, freqs, model(gamma));
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                              : std::numeric_limits<double>::infinity();
  if (!(cond <= options.max_condition)) {
    std::ostringstream msg;
    msg << "sideband frequencies up to k = " << k_max
        << " are not separable over t_max = " << t_max
        << " s (condition number " << cond << ")";
    throw IllConditionedError(msg.str(), cond);
  }
  const Eigen::VectorXd p = svd.solve(y);
  const auto n = a.rows();
  const auto k = a.cols();
  const double rss = (a * p - y).squaredNorm();
  const double s2 = n > k ? rss / static_cast<double>(n - k) : 0.0;
  // (A^T A)^{-1} = V S^{-2} V^T
  const Eigen::MatrixXd v = svd.matrixV();
  const Eigen::VectorXd inv_s2 = sv.cwiseAbs2().cwiseInverse();
  const Eigen::VectorXd var = (v.array().square().matrix() * inv_s2) * s2;

  PopulationEstimate out;
  out.probabilities.assign(p.data(), p.data() + k);
  out.sigmas.resize(static_cast<size_t>(k));
  for (Eigen::Index j = 0; j < k; ++j) out.sigmas[j] = std::sqrt(var(j));
  out.gamma = gamma;
  out.condition_number = cond;
  out.residual_rms = std::sqrt(rss / static_cast<double>(n));
  return options.clip ? out.clipped() : out;
}

double rabi_model(double t, double omega, double gamma, double contrast,
                  int parity_flag) {
  const double sign = parity_flag == 0 ? 1.0 : -1.0;
  return 0.5 + sign * 0.5 * contrast * std::exp(-gamma * gamma * t * t) * std::cos(omega * t);
}

namespace {

struct RabiFunctor : Eigen::DenseFunctor<double> {
  RabiFunctor(const std::vector<double>& t, const std::vector<double>& y, int p)
      : Eigen::DenseFunctor<double>(3, static_cast<int>(t.size())),
        times_(t), values_(y), sign(p == 0 ? 1.0 : -1.0) {}

  int operator()(const InputType& x, ValueType& f) const {
    for (size_t i = 0; i < times_.size(); ++i) {
      const double t = times_[i];
      f(i) = 0.5 + sign * 0.5 * x(2) * std::exp(-x(1) * x(1) * t * t) * std::cos(x(0) * t) -
             values_[i];
    }
    return 0;
  }

  int df(const InputType& x, JacobianType& j) const {
    for (size_t i = 0; i < times_.size(); ++i) {
      const double t = times_[i];
      const double env = std::exp(-x(1) * x(1) * t * t);
      const double c = std::cos(x(0) * t);
      const double s = std::sin(x(0) * t);
      j(i, 0) = -sign * 0.5 * x(2) * env * s * t;
      j(i, 1) = -sign * x(2) * env * c * x(1) * t * t;
      j(i, 2) = sign * 0.5 * env * c;
    }
    return 0;
  }

  const std::vector<double>& times_;
  const std::vector<double>& values_;
  double sign;
};

// Candidate frequencies at the strongest local maxima of the periodogram.
std::vector<double> periodogram_peaks(const std::vector<double>& times,
                                      const std::vector<double>& values,
                                      double nyquist, double span, size_t count) {
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                      static_cast<double>(values.size());
  const double step = 2.0 * std::numbers::pi / (16.0 * span);
  const int bins = static_cast<int>(std::ceil(nyquist / step));
  std::vector<double> power(static_cast<size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b) {
    const double w = b * step;
    double re = 0.0, im = 0.0;
    for (size_t i = 0; i < times.size(); ++i) {
      re += (values[i] - mean) * std::cos(w * times[i]);
      im += (values[i] - mean) * std::sin(w * times[i]);
    }
    power[b] = re * re + im * im;
  }
  std::vector<std::pair<double, int>> maxima;
  for (int b = 1; b <= bins; ++b) {
    const bool left = power[b] >= power[b - 1];
    const bool right = b == bins || power[b] >= power[b + 1];
    if (left && right) maxima.emplace_back(power[b], b);
  }
  std::sort(maxima.rbegin(), maxima.rend());
  std::vector<double> out;
  for (size_t i = 0; i < std::min(count, maxima.size()); ++i) {
    const int b = maxima[i].second;
    double w = b * step;
    // Parabolic interpolation of the peak.
    if (b > 0 && b < bins) {
      const double ym = power[b - 1], y0 = power[b], yp = power[b + 1];
      const double denom = ym - 2.0 * y0 + yp;
      if (denom < 0.0) w += 0.5 * step * (ym - yp) / denom;
    }
    out.push_back(w);
  }
  return out;
}

}  // namespace

RabiFit fit_rabi(const std::vector<double>& times, const std::vector<double>& values,
                 int parity_flag) {
  if (parity_flag != 0 && parity_flag != 1) {
    throw ValidationError("parity flag must be 0 or 1");
  }
  check_trace(times, values, 8);
  std::vector<double> sorted = times;
  std::sort(sorted.begin(), sorted.end());
  const double span = sorted.back() - sorted.front();
  if (!(span > 0.0)) throw ValidationError("trace has zero duration");
  const double mean_step = span / static_cast<double>(sorted.size() - 1);
  const double nyquist = std::numbers::pi / mean_step;

  const double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                      static_cast<double>(values.size());
  double spread = 0.0;
  for (double v : values) spread = std::max(spread, std::abs(v - mean));
  if (spread < 1e-9) {
    double rss = 0.0;
    for (double v : values) rss += (v - 0.5) * (v - 0.5);
    throw FitError("signal is flat; no oscillation to fit",
                   std::sqrt(rss / static_cast<double>(values.size())));
  }

  const RabiFunctor functor(times, values, parity_flag);
  const auto peaks = periodogram_peaks(times, values, nyquist, span, 3);
  Eigen::Vector3d best_x = Eigen::Vector3d::Zero();
  double best_rss = std::numeric_limits<double>::infinity();
  for (double w0 : peaks) {
    for (double g0 : {0.1 / span, 1.0 / span}) {
      Eigen::VectorXd x(3);
      x << w0, g0, std::min(1.0, 2.0 * spread);
      RabiFunctor f = functor;
      Eigen::LevenbergMarquardt<RabiFunctor> lm(f);
      lm.setXtol(1e-15);
      lm.setFtol(1e-15);
      lm.setGtol(0.0);
      lm.setMaxfev(4000);
      lm.minimize(x);
      Eigen::VectorXd res(values.size());
      functor(x, res);
      const double rss = res.squaredNorm();
      if (std::isfinite(rss) && rss < best_rss && x(0) > 0.0) {
        best_rss = rss;
        best_x = x;
      }
    }
  }
  const double best_rms = std::sqrt(best_rss / static_cast<double>(values.size()));
  if (!std::isfinite(best_rss)) throw FitError("fit did not converge", best_rms);

  RabiFit fit;
  fit.omega = best_x(0);
  fit.gamma = std::abs(best_x(1));
  fit.parity_flag = parity_flag;
  fit.residual_rms = best_rms;
  fit.alias_warning = fit.omega > 0.9 * nyquist;

  Eigen::MatrixXd jac(values.size(), 3);
  Eigen::VectorXd xs = best_x;
  xs(1) = fit.gamma;
  functor.df(xs, jac);
  const auto n = static_cast<double>(values.size());
  const double s2 = best_rss / (n - 3.0);
  const Eigen::Matrix3d jtj = jac.transpose() * jac;
  fit.covariance = s2 * jtj.completeOrthogonalDecomposition().pseudoInverse();

  const double c = best_x(2);
  const double c_sigma = std::sqrt(std::max(fit.covariance(2, 2), 0.0));
  const double slack = std::max(3.0 * c_sigma, 1e-6);
  if (c < -slack || c > 1.0 + slack) {
    throw FitError("fitted contrast outside [0, 1]; check the parity flag", best_rms);
  }
  fit.contrast = std::clamp(c, 0.0, 1.0);
  if (fit.omega * span < 2.0 * 2.0 * std::numbers::pi) {
    throw FitError("trace spans fewer than two oscillation periods", best_rms);
  }
  return fit;
}

std::vector<RatioRow> rabi_ratio_table(int n_max, const SqueezeParams& zeta,
                                       const LambDicke& eta, RatioMode mode,
                                       const FockSpace& space) {
  if (n_max < 1) throw ValidationError("n_max must be >= 1");
  std::vector<double> sq(static_cast<size_t>(n_max)), fock(static_cast<size_t>(n_max));
  if (mode == RatioMode::sqrt_n) {
    for (int m = 0; m < n_max; ++m) sq[m] = fock[m] = std::sqrt(m + 1.0);
  } else {
    sq = sideband_matrix_elements(SidebandBasis::squeezed(zeta), n_max - 1, eta, space);
    fock = sideband_matrix_elements(SidebandBasis::fock(), n_max - 1, eta, space);
  }
  std::vector<RatioRow> out;
  for (int n = 1; n <= n_max; ++n) {
    const double root = std::sqrt(static_cast<double>(n));
    out.push_back({n, sq[n - 1] / sq[0], fock[n - 1] / fock[0],
                   std::abs(sq[n - 1] / root - 1.0), std::abs(fock[n - 1] / root - 1.0)});
  }
  return out;
}

}  // namespace sqladder
