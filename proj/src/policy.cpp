#include "cptmag/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "cptmag/fastmath.hpp"

namespace cptmag {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kSqrt2Pi = 2.5066282746310005024;

struct PhaseWorkspace {
  // Prior restricted to its support window.
  std::vector<double> b;        // grid points
  std::vector<double> mass;     // trapz weight * density
  std::vector<PeNode> nodes;
  double inv2s2 = 0.0;          // 1/(2 sigma^2) of the hypothetical outcomes
  double log_norm = 0.0;        // log of the Gaussian prefactor
  double fringe_rate = 0.0;     // d(phase)/dB
  double detuning_phase = 0.0;  // 2pi * detuning * t_ramsey
};

PhaseWorkspace make_workspace(const Posterior& prior, double t_ramsey_s, double n_eff,
                              const PhaseSearchConfig& cfg, const PhysicsParams& params,
                              double detuning_hz) {
  PhaseWorkspace ws;
  const auto [first, last] = prior.support();
  ws.b.reserve(last - first);
  ws.mass.reserve(last - first);
  for (std::size_t i = first; i < last; ++i) {
    ws.b.push_back(prior.grid_b(i));
    ws.mass.push_back(prior.trapz_w(i) * prior.density()[i]);
  }
  ws.nodes = pe_quadrature(cfg.n_pe);
  // Hypothetical outcomes carry the worst-case shot variance 1/(4 n_eff),
  // the half-fringe value. An outcome-dependent width would claim sub-count
  // precision for rail outcomes, where a Gaussian stands in for a few-count
  // binomial, and would steer the phase onto fringe extrema that the real
  // channel cannot distinguish at that accuracy.
  const double s = 0.5 / std::sqrt(n_eff);
  ws.inv2s2 = 1.0 / (2.0 * s * s);
  ws.log_norm = -std::log(kSqrt2Pi * s);
  ws.fringe_rate = -kTwoPi * params.zeeman_rate() * t_ramsey_s;
  ws.detuning_phase = kTwoPi * detuning_hz * t_ramsey_s;
  return ws;
}

// Expected information gain at one phase:
//   U = sum_k w_k ( S_k - m_k ln m_k ),
// with m_k the prior-predictive mass of outcome k and S_k the mass-weighted
// log-likelihood sum; S_k - m_k ln m_k = m_k * KL(posterior_k || prior) >= 0.
double utility_at(const PhaseWorkspace& ws, double phi_c) {
  const std::size_t nb = ws.b.size();
  std::vector<double> p0(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    const double phase = ws.detuning_phase + ws.fringe_rate * ws.b[i] + phi_c;
    p0[i] = 0.5 * (1.0 - std::cos(phase));
  }
  double u = 0.0;
  for (std::size_t k = 0; k < ws.nodes.size(); ++k) {
    const double pk = ws.nodes[k].p;
    const double inv2s2 = ws.inv2s2;
    const double log_norm = ws.log_norm;
    double m = 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < nb; ++i) {
      const double d = pk - p0[i];
      const double logl = log_norm - d * d * inv2s2;
      const double lw = ws.mass[i] * fast_exp(logl);
      m += lw;
      s += lw * logl;
    }
    if (m > 1e-300) u += ws.nodes[k].w * (s - m * std::log(m));
  }
  return u;
}
}  // namespace

int Schedule::ramp_length() const {
  return static_cast<int>(std::lround(std::log(t_max / t_min) / std::log(growth))) + 1;
}

double Schedule::first_time() const { return time_at(1); }

double Schedule::time_at(int i) const {
  if (i < 1 || i > iterations) throw std::out_of_range("schedule: iteration out of range");
  const int j = ramp_length();
  if (i >= j) return t_max;
  return t_max / std::pow(growth, static_cast<double>(j - i));
}

void Schedule::validate() const {
  if (!(growth > 1.0)) throw std::invalid_argument("schedule: growth must be > 1");
  if (!(t_min > 0.0 && t_min <= t_max))
    throw std::invalid_argument("schedule: requires 0 < t_min <= t_max");
  if (iterations < ramp_length())
    throw std::invalid_argument("schedule: iterations must cover the ramp");
}

void PhaseSearchConfig::validate() const {
  if (n_phases < 8) throw std::invalid_argument("phase_search: n_phases must be >= 8");
  if (n_pe < 11) throw std::invalid_argument("phase_search: n_pe must be >= 11");
}

std::vector<PeNode> pe_quadrature(int n_pe) {
  // Plain midpoint rule. The outcome grid granularity deliberately bounds the
  // finest claimed measurement precision: the clamped-variance surrogate
  // concentrates spurious sub-grid mass next to the rails, where a Gaussian
  // stands in for a few-count binomial, and resolving it would reward
  // operating points the channel cannot actually distinguish.
  std::vector<PeNode> nodes(static_cast<std::size_t>(n_pe));
  const double dp = 1.0 / static_cast<double>(n_pe);
  for (int k = 0; k < n_pe; ++k)
    nodes[static_cast<std::size_t>(k)] = {(static_cast<double>(k) + 0.5) * dp, dp};
  return nodes;
}

double utility(double phi_c, const Posterior& prior, double t_ramsey_s, double n_eff,
               const PhaseSearchConfig& cfg, const PhysicsParams& params, double detuning_hz) {
  cfg.validate();
  if (!(n_eff > 0.0)) throw std::invalid_argument("utility: n_eff must be > 0");
  const auto ws = make_workspace(prior, t_ramsey_s, n_eff, cfg, params, detuning_hz);
  // Phase enters only through a cosine; reduce mod 2pi so shifted arguments
  // evaluate identically.
  const double phi = phi_c - kTwoPi * std::floor(phi_c / kTwoPi);
  return utility_at(ws, phi);
}

double optimal_phase(const Posterior& prior, double t_ramsey_s, double n_eff,
                     const PhaseSearchConfig& cfg, const PhysicsParams& params,
                     double detuning_hz) {
  cfg.validate();
  if (!(n_eff > 0.0)) throw std::invalid_argument("optimal_phase: n_eff must be > 0");
  const auto ws = make_workspace(prior, t_ramsey_s, n_eff, cfg, params, detuning_hz);
  double best_phi = 0.0;
  double best_u = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < cfg.n_phases; ++j) {
    const double phi = kTwoPi * static_cast<double>(j) / static_cast<double>(cfg.n_phases);
    const double u = utility_at(ws, phi);
    if (u > best_u) {
      best_u = u;
      best_phi = phi;
    }
  }
  return best_phi;
}

}  // namespace cptmag
