#pragma once

#include "cptmag/physics.hpp"

namespace cptmag {

// Two-point fringe lock: the conventional baseline. The loop alternately
// probes the half-maximum points of the central fringe and servos the
// frequency estimate onto its centre.
struct LockState {
  double freq_offset = 0.0;  // Hz, current estimate of the Zeeman shift
  double loop_gain = 1.0;    // in (0, 2]; 1 nulls a small error in one step
  long cycle_count = 0;
  int saturated_steps = 0;   // consecutive steps with a railed error signal
  bool lock_loss = false;    // 10 consecutive saturated steps

  void validate() const;
};

struct LockStepResult {
  LockState state;
  double b_estimate = 0.0;    // nT
  double error_signal = 0.0;  // p_plus - p_minus, in [-1, 1]
  MeasurementOutcome probe_plus;
  MeasurementOutcome probe_minus;
};

// One frequency determination: two cycles probed at the estimate +- a quarter
// fringe, error signal from the population difference, proportional update of
// the frequency estimate. The second probe runs one cycle period after the
// first; the caller advances wall time by two cycle periods.
LockStepResult lock_step(const LockState& state, double t_ramsey_s, const FieldProfile& profile,
                         double wall_time_s, const PhysicsParams& params, RngStream& rng);

// Shot-noise-limited sensitivity versus averaging time (dead time included),
// nT / sqrt(Hz).
double frequentist_sensitivity_avg(double t_ramsey_s, const PhysicsParams& params);

// Sensitivity versus total interrogation time (dead time ignored), nT / sqrt(Hz).
double frequentist_sensitivity_interrogation(double t_ramsey_s, const PhysicsParams& params);

// Uncertainty after a total interrogation time T, nT; scales as T^-0.5.
double frequentist_uncertainty(double t_ramsey_s, double total_interrogation_s,
                               const PhysicsParams& params);

}  // namespace cptmag
