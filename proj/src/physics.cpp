#include "cptmag/physics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cptmag {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

void PhysicsParams::validate() const {
  if (!(gyro > 0.0)) throw std::invalid_argument("physics: gyro must be > 0");
  if (delta_m_f == 0) throw std::invalid_argument("physics: delta_m_f must be nonzero");
  if (!(decay_rate > 0.0)) throw std::invalid_argument("physics: decay_rate must be > 0");
  if (!(t_coherence > 0.0)) throw std::invalid_argument("physics: t_coherence must be > 0");
  if (!(atom_amp > 0.0)) throw std::invalid_argument("physics: atom_amp must be > 0");
  if (!(readout_quality > 0.0 && readout_quality <= 1.0))
    throw std::invalid_argument("physics: readout_quality must be in (0, 1]");
  if (!(t_cycle > 0.0)) throw std::invalid_argument("physics: t_cycle must be > 0");
  if (!(beam_width > 0.0)) throw std::invalid_argument("physics: beam_width must be > 0");
}

double FieldProfile::value_at(double wall_time_s) const {
  double b = segments.front().b_nt;
  for (const auto& seg : segments) {
    if (seg.start_s <= wall_time_s) b = seg.b_nt;
    else break;
  }
  return b;
}

void FieldProfile::validate() const {
  if (segments.empty()) throw std::invalid_argument("field: needs at least one segment");
  if (segments.front().start_s != 0.0)
    throw std::invalid_argument("field: first segment must start at t = 0");
  for (std::size_t i = 1; i < segments.size(); ++i) {
    if (!(segments[i].start_s > segments[i - 1].start_s))
      throw std::invalid_argument("field: segment start times must be strictly increasing");
  }
}

double rabi_at_fall(const PhysicsParams& params, double t_fall_s) {
  const double z = 0.5 * params.gravity * t_fall_s * t_fall_s;
  const double k = 1.0 / (2.0 * params.beam_width * params.beam_width);
  return std::max(0.0, params.rabi0 * (1.0 - k * z * z));
}

double alpha_factor(const PhysicsParams& params, double omega_hz, double detuning_hz) {
  const double o2 = omega_hz * omega_hz;
  const double g2 = params.decay_rate * params.decay_rate;
  return o2 / (g2 + 3.0 * o2 + 4.0 * detuning_hz * detuning_hz);
}

double transmitted_signal(const PhysicsParams& params, const RamseyConfig& cfg, double b_nt) {
  const double f_b = params.zeeman_rate() * b_nt;
  const double omega = rabi_at_fall(params, cfg.t_ramsey);
  const double a = alpha_factor(params, omega, cfg.detuning);
  const double chi = cfg.t_ramsey / params.t_coherence;
  const double envelope = std::exp(-chi * chi);
  const double prep = 1.0 - std::exp(-a * params.decay_rate * params.t_prep);
  const double sec_ls = 1.0 / std::abs(std::cos(params.light_shift_phase));
  const double fringe =
      std::cos(kTwoPi * (cfg.detuning - f_b) * cfg.t_ramsey - params.light_shift_phase);
  return 1.0 - a * std::exp(-a * params.decay_rate * params.t_detect) *
                   (1.0 - prep * envelope * sec_ls * fringe);
}

double ideal_probability(const PhysicsParams& params, const RamseyConfig& cfg, double b_nt) {
  const double f_b = params.zeeman_rate() * b_nt;
  const double phase = kTwoPi * (cfg.detuning - f_b) * cfg.t_ramsey + cfg.aux_phase;
  return 0.5 * (1.0 - std::cos(phase));
}

double effective_atoms(const PhysicsParams& params, double t_ramsey_s) {
  const double chi = t_ramsey_s / params.t_coherence;
  return params.atom_amp * std::exp(-2.0 * chi * chi);
}

MeasurementOutcome sample_measurement(const PhysicsParams& params, const RamseyConfig& cfg,
                                      const FieldProfile& profile, double wall_time_s,
                                      RngStream& rng, long cycle_index) {
  const double d2 = params.readout_quality * params.readout_quality;
  const long n = std::lround(d2 * effective_atoms(params, cfg.t_ramsey));
  if (n < 1)
    throw std::invalid_argument(
        "sample_measurement: interrogation time leaves no effective atoms");
  const double b = profile.value_at(wall_time_s);
  const double p_true = ideal_probability(params, cfg, b);
  const long k = rng.binomial(n, p_true);
  MeasurementOutcome out;
  out.p_e = static_cast<double>(k) / static_cast<double>(n);
  out.n_eff = static_cast<double>(n);
  out.cycle_index = cycle_index;
  out.wall_time = wall_time_s;
  return out;
}

double normalize_raw(double raw, double s_min, double s_max) {
  if (!(s_max > s_min))
    throw std::invalid_argument("normalize_raw: calibration requires s_max > s_min");
  return std::clamp((raw - s_min) / (s_max - s_min), 0.0, 1.0);
}

}  // namespace cptmag
