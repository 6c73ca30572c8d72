#include "cptmag/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "cptmag/fastmath.hpp"

namespace cptmag {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kSqrt2Pi = 2.5066282746310005024;

double trapz(const std::vector<double>& v, double h) {
  double acc = 0.5 * (v.front() + v.back());
  for (std::size_t i = 1; i + 1 < v.size(); ++i) acc += v[i];
  return acc * h;
}
}  // namespace

Posterior::Posterior(double b_lo, double b_hi, std::vector<double> density)
    : b_lo_(b_lo), b_hi_(b_hi), density_(std::move(density)) {
  if (!(b_lo_ < b_hi_)) throw std::invalid_argument("posterior: requires b_lo < b_hi");
  if (density_.size() < 2) throw std::invalid_argument("posterior: needs >= 2 grid points");
  spacing_ = (b_hi_ - b_lo_) / static_cast<double>(density_.size() - 1);
  double z = 0.0;
  for (double w : density_) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw std::invalid_argument("posterior: density must be finite and non-negative");
  }
  z = trapz(density_, spacing_);
  if (!(z > 0.0) || !std::isfinite(z))
    throw std::invalid_argument("posterior: density integrates to zero");
  const double inv = 1.0 / z;
  for (double& w : density_) w *= inv;
}

double Posterior::trapz_w(std::size_t i) const {
  return trapz_weight(i, density_.size(), spacing_);
}

double Posterior::integral() const { return trapz(density_, spacing_); }

std::pair<std::size_t, std::size_t> Posterior::support(double rel_eps) const {
  const double peak = *std::max_element(density_.begin(), density_.end());
  const double cut = peak * rel_eps;
  std::size_t first = 0;
  while (first + 1 < density_.size() && density_[first] <= cut) ++first;
  std::size_t last = density_.size();
  while (last > first + 1 && density_[last - 1] <= cut) --last;
  if (first > 0) --first;
  if (last < density_.size()) ++last;
  return {first, last};
}

Posterior uniform_prior(double center_nt, double t_first_s, const PhysicsParams& params,
                        std::size_t n_points) {
  if (n_points < 16) throw std::invalid_argument("uniform_prior: n_points must be >= 16");
  if (!(t_first_s > 0.0)) throw std::invalid_argument("uniform_prior: t_first must be > 0");
  const double width = 1.0 / (params.abs_zeeman_rate() * t_first_s);
  std::vector<double> d(n_points, 1.0 / width);
  return Posterior(center_nt - 0.5 * width, center_nt + 0.5 * width, std::move(d));
}

Posterior gaussian_prior(const Estimate& est, double b_lo, double b_hi, std::size_t n_points) {
  if (n_points < 16) throw std::invalid_argument("gaussian_prior: n_points must be >= 16");
  if (!(b_lo < est.b_est && est.b_est < b_hi))
    throw std::invalid_argument("gaussian_prior: estimate lies outside the new interval");
  if (!(est.delta_b > 0.0))
    throw std::invalid_argument("gaussian_prior: needs a positive spread");
  const double h = (b_hi - b_lo) / static_cast<double>(n_points - 1);
  const double inv2s2 = 1.0 / (2.0 * est.delta_b * est.delta_b);
  std::vector<double> d(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    const double x = b_lo + h * static_cast<double>(i) - est.b_est;
    d[i] = std::exp(-x * x * inv2s2);
  }
  return Posterior(b_lo, b_hi, std::move(d));
}

double likelihood_sigma(double p_e, double n_eff) {
  const double eps = 1.0 / (2.0 * n_eff);
  const double p = std::clamp(p_e, eps, 1.0 - eps);
  return std::sqrt(p * (1.0 - p) / n_eff);
}

double likelihood(const PhysicsParams& params, double p_e, double b_nt, const RamseyConfig& cfg,
                  double n_eff) {
  if (!(n_eff > 0.0)) throw std::invalid_argument("likelihood: n_eff must be > 0");
  const double sigma = likelihood_sigma(p_e, n_eff);
  const double d = p_e - ideal_probability(params, cfg, b_nt);
  return std::exp(-d * d / (2.0 * sigma * sigma)) / (kSqrt2Pi * sigma);
}

UpdateResult bayes_update(const Posterior& prior, const PhysicsParams& params,
                          const MeasurementOutcome& outcome, const RamseyConfig& cfg) {
  const std::size_t n = prior.size();
  const double sigma = likelihood_sigma(outcome.p_e, outcome.n_eff);
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  const double zr = params.zeeman_rate();
  const auto& p = prior.density();

  // Full log-domain product, shifted by its peak before exponentiating, so
  // the unnormalized mass is O(1) no matter how incompatible the outcome is.
  std::vector<double> logw(n);
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double b = prior.grid_b(i);
    const double phase = kTwoPi * (cfg.detuning - zr * b) * cfg.t_ramsey + cfg.aux_phase;
    const double d = outcome.p_e - 0.5 * (1.0 - std::cos(phase));
    logw[i] = std::log(p[i]) - d * d * inv2s2;
    if (logw[i] > peak) peak = logw[i];
  }
  if (!std::isfinite(peak)) return {prior, true};

  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = fast_exp(logw[i] - peak);
  double z = 0.5 * (w.front() + w.back());
  for (std::size_t i = 1; i + 1 < n; ++i) z += w[i];
  z *= prior.spacing();
  if (!(z > 0.0) || !std::isfinite(z)) return {prior, true};

  const double inv = 1.0 / z;
  for (double& x : w) x *= inv;
  return {Posterior(prior.b_lo(), prior.b_hi(), std::move(w)), false};
}

Estimate moments(const Posterior& post) {
  const std::size_t n = post.size();
  const auto& d = post.density();
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += post.trapz_w(i) * d[i] * post.grid_b(i);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = post.grid_b(i) - mean;
    var += post.trapz_w(i) * d[i] * x * x;
  }
  return {mean, std::sqrt(std::max(var, 0.0))};
}

Posterior recentre(const Posterior& post, const Estimate& est, double t_ramsey_s,
                   const PhysicsParams& params, std::size_t n_points) {
  if (!(t_ramsey_s > 0.0)) throw std::invalid_argument("recentre: t_ramsey must be > 0");
  if (n_points == 0) n_points = post.size();
  const double width = 1.0 / (params.abs_zeeman_rate() * t_ramsey_s);
  // The reset spread never drops below one grid cell of the new interval:
  // a sub-cell spike cannot be represented and would zero the density.
  Estimate reset = est;
  reset.delta_b = std::max(est.delta_b, width / static_cast<double>(n_points - 1));
  return gaussian_prior(reset, est.b_est - 0.5 * width, est.b_est + 0.5 * width, n_points);
}

}  // namespace cptmag
