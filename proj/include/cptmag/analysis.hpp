#pragma once

#include <utility>
#include <vector>

#include "cptmag/physics.hpp"
#include "cptmag/policy.hpp"

namespace cptmag {

// One point of an (uncertainty, total interrogation time, averaging time) trace.
struct SensitivityRecord {
  int iteration = 0;
  double t_total = 0.0;   // s, cumulative interrogation time
  double tau = 0.0;       // s, cumulative wall-clock (averaging) time
  double delta_b = 0.0;   // nT
  double eta_t = 0.0;     // nT/sqrt(Hz), delta_b * sqrt(t_total)
  double eta_tau = 0.0;   // nT/sqrt(Hz), delta_b * sqrt(tau)
};

// Per-iteration inputs of a run: interrogation time and posterior spread.
struct IterationPoint {
  double t_interrogation = 0.0;  // s
  double delta_b = 0.0;          // nT
};

// Builds cumulative records from per-iteration points. cycles_per_iteration
// is 1 for Bayesian updates and 2 for two-probe lock determinations.
std::vector<SensitivityRecord> trace_from_run(const std::vector<IterationPoint>& points,
                                              double cycle_period_s,
                                              int cycles_per_iteration = 1);

struct ScalingFit {
  double exponent = 0.0;
  double exponent_err = 0.0;
  double prefactor = 0.0;  // nT * s^(-exponent)
};

// Unweighted least-squares line through log(delta_b) (or log(eta_t)) versus
// log(t_total) over iterations [i_lo, i_hi] inclusive.
ScalingFit fit_scaling(const std::vector<SensitivityRecord>& records, int i_lo, int i_hi,
                       bool fit_eta = false);

// Closed-form large-iteration limits of the adaptive estimate.
struct BayesAsymptotics {
  double coefficient = 0.0;    // nT * s, 1 / (2 pi |zeeman|)
  double n_plateau = 0.0;      // effective atoms at t_max
  double eta_limit = 0.0;      // nT/sqrt(Hz) vs total interrogation time
  double eta_avg_limit = 0.0;  // nT/sqrt(Hz) vs averaging time
  double t_max = 0.0;          // s

  double delta_b_limit(double total_interrogation_s) const;
};

BayesAsymptotics bayes_asymptotics(const Schedule& sched, const PhysicsParams& params);

// Sensitivity gain in dB of eta_ref over eta_new. Reported as 10 log10 of the
// amplitude ratio: the conventional quality factor Q maps to 10 log10(Q) dB.
double gain_db(double eta_ref, double eta_new);

struct CoherenceFit {
  double t_chi = 0.0;        // s; infinity when no decay is resolved
  double decay_rate2 = 0.0;  // 1/s^2, fitted 1/t_chi^2
  double rss = 0.0;          // residual sum of squares at the optimum
  bool converged = false;
};

// Least-squares fit of the Gaussian envelope decay of a time-domain fringe
// scan (t_ramsey, signal). The fringe geometry (detuning, field, pulse
// factors) is taken from params/detuning/b_nt; only the decay is free.
// Throws std::runtime_error with a residual report when the scan cannot
// constrain the envelope.
CoherenceFit fit_coherence(const std::vector<std::pair<double, double>>& fringe,
                           const PhysicsParams& params, double detuning_hz, double b_nt);

// Percentile of a sample by linear interpolation (q in [0, 1]).
double quantile(std::vector<double> values, double q);

}  // namespace cptmag
