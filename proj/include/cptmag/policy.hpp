#pragma once

#include <vector>

#include "cptmag/posterior.hpp"

namespace cptmag {

// Exponential interrogation-time ramp followed by a plateau at t_max.
struct Schedule {
  double growth = 1.4;       // ramp factor a, > 1
  double t_min = 0.245e-3;   // s
  double t_max = 7.1e-3;     // s
  int iterations = 247;      // updates per estimate

  // Number of distinct ramp values j = log_a(t_max / t_min) + 1, rounded to
  // the nearest integer so the ramp is integral.
  int ramp_length() const;
  // First interrogation time t_max / a^(j-1), recomputed from the rounded j.
  double first_time() const;
  // 1-based interrogation time: t_max / a^(j-i) on the ramp, t_max after.
  double time_at(int i) const;

  void validate() const;
};

struct PhaseSearchConfig {
  int n_phases = 64;  // grid size over [0, 2pi)
  int n_pe = 101;     // quadrature points over outcomes in [0, 1]

  void validate() const;
};

struct PeNode {
  double p;  // outcome abscissa in (0, 1)
  double w;  // quadrature weight
};

// Midpoint rule over the outcome axis.
std::vector<PeNode> pe_quadrature(int n_pe);

// Expected Shannon-information gain (expected relative entropy of the
// hypothetical posterior against the prior) of a cycle run at aux phase
// phi_c, interrogation time t_ramsey and n_eff effective atoms. Hypothetical
// outcomes are weighted with the worst-case shot variance 1/(4 n_eff), which
// keeps the selected operating point on a fringe slope.
double utility(double phi_c, const Posterior& prior, double t_ramsey_s, double n_eff,
               const PhaseSearchConfig& cfg, const PhysicsParams& params, double detuning_hz);

// Grid arg-max of the utility over [0, 2pi); ties break to the smaller phase.
double optimal_phase(const Posterior& prior, double t_ramsey_s, double n_eff,
                     const PhaseSearchConfig& cfg, const PhysicsParams& params,
                     double detuning_hz);

}  // namespace cptmag
