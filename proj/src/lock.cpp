#include "cptmag/lock.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cptmag {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

void LockState::validate() const {
  if (!(loop_gain > 0.0 && loop_gain <= 2.0))
    throw std::invalid_argument("lock: loop_gain must be in (0, 2]");
}

LockStepResult lock_step(const LockState& state, double t_ramsey_s, const FieldProfile& profile,
                         double wall_time_s, const PhysicsParams& params, RngStream& rng) {
  state.validate();
  if (!(t_ramsey_s > 0.0)) throw std::invalid_argument("lock: t_ramsey must be > 0");
  const double quarter_fringe = 1.0 / (4.0 * t_ramsey_s);

  RamseyConfig plus{t_ramsey_s, 0.0, state.freq_offset + quarter_fringe};
  RamseyConfig minus{t_ramsey_s, 0.0, state.freq_offset - quarter_fringe};

  LockStepResult res;
  res.probe_plus =
      sample_measurement(params, plus, profile, wall_time_s, rng, state.cycle_count);
  res.probe_minus = sample_measurement(params, minus, profile, wall_time_s + params.t_cycle,
                                       rng, state.cycle_count + 1);

  const double e = res.probe_plus.p_e - res.probe_minus.p_e;
  res.error_signal = e;
  res.state = state;
  res.state.cycle_count += 2;
  // e ~ sin(2pi * offset_error * T_R): subtracting e / (2pi T_R) nulls a
  // small error in one step at unit gain.
  res.state.freq_offset -= state.loop_gain * e / (kTwoPi * t_ramsey_s);
  if (std::abs(e) >= 0.95) {
    if (++res.state.saturated_steps >= 10) res.state.lock_loss = true;
  } else {
    res.state.saturated_steps = 0;
  }
  res.b_estimate = res.state.freq_offset / params.zeeman_rate();
  return res;
}

double frequentist_sensitivity_avg(double t_ramsey_s, const PhysicsParams& params) {
  if (!(t_ramsey_s > 0.0)) throw std::invalid_argument("sensitivity: t_ramsey must be > 0");
  const double n_eff = effective_atoms(params, t_ramsey_s);
  return std::sqrt(params.t_cycle) /
         (std::numbers::pi * params.abs_zeeman_rate() * t_ramsey_s * std::sqrt(n_eff));
}

double frequentist_sensitivity_interrogation(double t_ramsey_s, const PhysicsParams& params) {
  if (!(t_ramsey_s > 0.0)) throw std::invalid_argument("sensitivity: t_ramsey must be > 0");
  const double n_eff = effective_atoms(params, t_ramsey_s);
  return 1.0 /
         (std::numbers::pi * params.abs_zeeman_rate() * std::sqrt(t_ramsey_s) * std::sqrt(n_eff));
}

double frequentist_uncertainty(double t_ramsey_s, double total_interrogation_s,
                               const PhysicsParams& params) {
  if (!(total_interrogation_s >= 2.0 * t_ramsey_s))
    throw std::invalid_argument("uncertainty: total time must cover one determination");
  const double n_eff = effective_atoms(params, t_ramsey_s);
  return 1.0 / (std::numbers::pi * params.abs_zeeman_rate() * std::sqrt(n_eff) *
                std::sqrt(t_ramsey_s * total_interrogation_s));
}

}  // namespace cptmag
