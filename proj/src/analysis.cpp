#include "cptmag/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cptmag {

std::vector<SensitivityRecord> trace_from_run(const std::vector<IterationPoint>& points,
                                              double cycle_period_s, int cycles_per_iteration) {
  if (points.empty()) throw std::invalid_argument("trace_from_run: empty run log");
  std::vector<SensitivityRecord> out;
  out.reserve(points.size());
  double t_total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    t_total += static_cast<double>(cycles_per_iteration) * points[i].t_interrogation;
    SensitivityRecord r;
    r.iteration = static_cast<int>(i) + 1;
    r.t_total = t_total;
    r.tau = static_cast<double>(r.iteration) * static_cast<double>(cycles_per_iteration) *
            cycle_period_s;
    r.delta_b = points[i].delta_b;
    r.eta_t = r.delta_b * std::sqrt(r.t_total);
    r.eta_tau = r.delta_b * std::sqrt(r.tau);
    out.push_back(r);
  }
  return out;
}

ScalingFit fit_scaling(const std::vector<SensitivityRecord>& records, int i_lo, int i_hi,
                       bool fit_eta) {
  std::vector<double> xs, ys;
  for (const auto& r : records) {
    if (r.iteration < i_lo || r.iteration > i_hi) continue;
    const double y = fit_eta ? r.eta_t : r.delta_b;
    if (!(r.t_total > 0.0) || !(y > 0.0)) continue;
    xs.push_back(std::log(r.t_total));
    ys.push_back(std::log(y));
  }
  const std::size_t n = xs.size();
  if (n < 5 || i_hi - i_lo < 4)
    throw std::invalid_argument("fit_scaling: window must span at least 5 iterations");
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / static_cast<double>(n);
  const double my = sy / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_scaling: degenerate window");
  ScalingFit fit;
  fit.exponent = sxy / sxx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double resid = ys[i] - my - fit.exponent * (xs[i] - mx);
    rss += resid * resid;
  }
  fit.exponent_err = n > 2 ? std::sqrt(rss / (static_cast<double>(n - 2) * sxx)) : 0.0;
  fit.prefactor = std::exp(my - fit.exponent * mx);
  return fit;
}

double BayesAsymptotics::delta_b_limit(double total_interrogation_s) const {
  return coefficient / std::sqrt(n_plateau * t_max * total_interrogation_s);
}

BayesAsymptotics bayes_asymptotics(const Schedule& sched, const PhysicsParams& params) {
  sched.validate();
  BayesAsymptotics a;
  a.coefficient = 1.0 / (2.0 * std::numbers::pi * params.abs_zeeman_rate());
  a.n_plateau = effective_atoms(params, sched.t_max);
  a.t_max = sched.t_max;
  a.eta_limit = a.coefficient / std::sqrt(a.n_plateau * sched.t_max);
  a.eta_avg_limit =
      a.coefficient * std::sqrt(params.t_cycle) / (std::sqrt(a.n_plateau) * sched.t_max);
  return a;
}

double gain_db(double eta_ref, double eta_new) {
  if (!(eta_ref > 0.0 && eta_new > 0.0))
    throw std::invalid_argument("gain_db: sensitivities must be positive");
  return 10.0 * std::log10(eta_ref / eta_new);
}

namespace {
// Residual sum of squares of the fringe model at envelope decay rate
// kappa = 1/t_chi^2.
double coherence_rss(const std::vector<std::pair<double, double>>& fringe,
                     const PhysicsParams& params, double detuning_hz, double b_nt,
                     double kappa) {
  const double f_b = params.zeeman_rate() * b_nt;
  double rss = 0.0;
  for (const auto& [t_r, s] : fringe) {
    const double omega = rabi_at_fall(params, t_r);
    const double a = alpha_factor(params, omega, detuning_hz);
    const double prep = 1.0 - std::exp(-a * params.decay_rate * params.t_prep);
    const double det = std::exp(-a * params.decay_rate * params.t_detect);
    const double fringe_cos =
        std::cos(2.0 * std::numbers::pi * (detuning_hz - f_b) * t_r);
    const double model =
        1.0 - a * det * (1.0 - prep * std::exp(-kappa * t_r * t_r) * fringe_cos);
    const double resid = s - model;
    rss += resid * resid;
  }
  return rss;
}
}  // namespace

CoherenceFit fit_coherence(const std::vector<std::pair<double, double>>& fringe,
                           const PhysicsParams& params, double detuning_hz, double b_nt) {
  if (fringe.size() < 20)
    throw std::invalid_argument("fit_coherence: needs at least 20 fringe samples");
  double t_span = 0.0;
  for (const auto& [t_r, s] : fringe) t_span = std::max(t_span, t_r);
  if (!(t_span > 0.0)) throw std::invalid_argument("fit_coherence: degenerate scan");

  // Coarse log scan over decay rates, then golden-section refinement.
  // kappa = 0 (no decay) is always a candidate.
  const double kappa_hi = 400.0 / (t_span * t_span);
  double best_kappa = 0.0;
  double best_rss = coherence_rss(fringe, params, detuning_hz, b_nt, 0.0);
  const int n_scan = 240;
  const double k_lo = 1e-3 / (t_span * t_span);
  for (int i = 0; i <= n_scan; ++i) {
    const double k = k_lo * std::pow(kappa_hi / k_lo, static_cast<double>(i) / n_scan);
    const double rss = coherence_rss(fringe, params, detuning_hz, b_nt, k);
    if (rss < best_rss) {
      best_rss = rss;
      best_kappa = k;
    }
  }

  CoherenceFit fit;
  if (best_kappa > 0.0) {
    const double ratio = std::pow(kappa_hi / k_lo, 1.0 / n_scan);
    double lo = best_kappa / ratio;
    double hi = best_kappa * ratio;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - gr * (hi - lo);
    double d = lo + gr * (hi - lo);
    double fc = coherence_rss(fringe, params, detuning_hz, b_nt, c);
    double fd = coherence_rss(fringe, params, detuning_hz, b_nt, d);
    for (int it = 0; it < 80; ++it) {
      if (fc < fd) {
        hi = d;
        d = c;
        fd = fc;
        c = hi - gr * (hi - lo);
        fc = coherence_rss(fringe, params, detuning_hz, b_nt, c);
      } else {
        lo = c;
        c = d;
        fc = fd;
        d = lo + gr * (hi - lo);
        fd = coherence_rss(fringe, params, detuning_hz, b_nt, d);
      }
    }
    best_kappa = 0.5 * (lo + hi);
    best_rss = coherence_rss(fringe, params, detuning_hz, b_nt, best_kappa);
    // Decay rates the scan range cannot distinguish from its ends did not
    // converge; report the residual for diagnosis.
    if (best_kappa > 0.97 * kappa_hi)
      throw std::runtime_error("fit_coherence: no convergence, rss=" + std::to_string(best_rss));
  }
  fit.decay_rate2 = best_kappa;
  fit.t_chi = best_kappa > 0.0 ? 1.0 / std::sqrt(best_kappa)
                               : std::numeric_limits<double>::infinity();
  fit.rss = best_rss;
  fit.converged = true;
  return fit;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - std::floor(pos);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace cptmag
