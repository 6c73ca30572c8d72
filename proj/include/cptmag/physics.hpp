#pragma once

#include <utility>
#include <vector>

#include "cptmag/random.hpp"

namespace cptmag {

// Sensor model constants. Units: field in nT, frequencies in Hz, times in s,
// lengths in m; converters live at the CLI edge only.
struct PhysicsParams {
  double gyro = 7.0;              // gyromagnetic ratio, Hz per nT
  int delta_m_f = -2;             // difference of magnetic quantum numbers
  double decay_rate = 5.75e6;     // excited-state decay rate, Hz (D1 natural linewidth scale)
  double rabi0 = 0.18e6;          // initial average Rabi frequency, Hz
  double beam_width = 1.83e-3;    // probe beam width, m
  double gravity = 9.81;          // m/s^2
  double t_coherence = 10.0e-3;   // Gaussian fringe-envelope decay time, s
  double atom_amp = 10755.0;      // effective-atom-number amplitude
  double readout_quality = 1.0;   // readout quality factor D, in (0, 1]
  double t_cycle = 73e-3;         // fixed cycle period, s
  double t_prep = 300e-6;         // preparation pulse length, s
  double t_detect = 50e-6;        // detection pulse length, s
  double light_shift_phase = 0.0; // rad; 0 when preparation fully pumps the dark state

  // Signed Zeeman rate df_B/dB, Hz per nT.
  double zeeman_rate() const { return static_cast<double>(delta_m_f) * gyro; }
  double abs_zeeman_rate() const { return zeeman_rate() < 0 ? -zeeman_rate() : zeeman_rate(); }

  void validate() const;  // throws std::invalid_argument
};

// True magnetic field as a piecewise-constant function of wall-clock time.
struct FieldProfile {
  struct Segment {
    double start_s;
    double b_nt;
  };
  std::vector<Segment> segments{{0.0, 30.0}};

  double value_at(double wall_time_s) const;
  void validate() const;
};

// Controls of one interferometry cycle.
struct RamseyConfig {
  double t_ramsey = 0.0;   // interrogation time, s
  double aux_phase = 0.0;  // auxiliary phase, rad in [0, 2pi)
  double detuning = 0.0;   // two-photon detuning, Hz
};

struct MeasurementOutcome {
  double p_e = 0.0;       // normalized population probability in [0, 1]
  double n_eff = 0.0;     // effective atom number used for the draw
  long cycle_index = 0;
  double wall_time = 0.0; // s
};

// Average Rabi frequency after free fall of duration t_fall, clamped at 0.
double rabi_at_fall(const PhysicsParams& params, double t_fall_s);

// Saturation factor Omega^2 / (Gamma^2 + 3 Omega^2 + 4 df^2), in [0, 1/3).
double alpha_factor(const PhysicsParams& params, double omega_hz, double detuning_hz);

// Transmitted-signal model: pulse-shaped contrast with a Gaussian coherence
// envelope and a fringe in the two-photon detuning. Proportionality fixed to 1.
double transmitted_signal(const PhysicsParams& params, const RamseyConfig& cfg, double b_nt);

// Normalized fringe probability (1 - cos)/2 of the phase-domain signal.
double ideal_probability(const PhysicsParams& params, const RamseyConfig& cfg, double b_nt);

// Effective atom number A exp(-2 (T_R / T_coh)^2); sets the shot-noise scale.
double effective_atoms(const PhysicsParams& params, double t_ramsey_s);

// One stochastic cycle: evaluates the field at wall_time, draws the atom count
// from a binomial shot-noise channel and returns the normalized estimate k/n.
// Throws std::invalid_argument when the interrogation time is so long that no
// effective atoms remain (n < 1).
MeasurementOutcome sample_measurement(const PhysicsParams& params, const RamseyConfig& cfg,
                                      const FieldProfile& profile, double wall_time_s,
                                      RngStream& rng, long cycle_index = 0);

// Maps a raw signal onto [0, 1] given calibration extremes. Throws
// std::invalid_argument when s_max <= s_min.
double normalize_raw(double raw, double s_min, double s_max);

}  // namespace cptmag
