#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cptmag/analysis.hpp"
#include "cptmag/lock.hpp"
#include "cptmag/physics.hpp"
#include "cptmag/policy.hpp"
#include "cptmag/posterior.hpp"

namespace cptmag {

// Full description of one experiment campaign. An all-defaults config
// reproduces the headline adaptive run: static 30 nT field, 247 updates,
// growth 1.4 between 0.245 ms and 7.1 ms.
struct ScenarioConfig {
  std::string scenario = "bayesian";  // coherence|frequentist|bayesian|track|scaling|compare
  std::uint64_t seed = 1;
  int runs = 1;

  PhysicsParams physics;
  Schedule schedule;
  PhaseSearchConfig phase_search;
  std::size_t grid_points = 8192;
  FieldProfile field;

  double detuning = 0.0;        // Hz, working two-photon detuning
  double prior_center = 0.0;    // nT, centre of the initial estimation interval
  int track_blocks = 4;         // consecutive estimates in the track scenario
  double lock_t_ramsey = 7.1e-3;
  double lock_gain = 1.0;
  int lock_pairs = 500;         // frequency determinations per lock run

  double coherence_detuning = -95300.0;  // Hz
  double coherence_t_max = 20e-3;        // s, scan end
  int coherence_points = 8000;
  bool coherence_noise = false;

  std::vector<double> compare_t_first = {0.245e-3, 0.49e-3, 0.98e-3};
  int sweep_points = 25;

  void validate() const;
};

// The field profile used by the tracking demonstration: two +20 nT steps at
// one-estimate intervals, then a -40 nT restoration.
FieldProfile default_track_profile(double b0_nt = 30.0);

struct RunRow {
  int iteration = 0;
  double t_i = 0.0;       // s
  double phi_c = 0.0;     // rad
  double p_e = 0.0;
  double n_eff = 0.0;
  double b_est = 0.0;     // nT
  double delta_b = 0.0;   // nT
  double t_total = 0.0;   // s
  double tau = 0.0;       // s
  double eta_t_pt = 0.0;  // pT/sqrt(Hz)
  double eta_tau_pt = 0.0;
};

struct RunLog {
  std::uint64_t seed = 0;
  std::uint64_t run_index = 0;
  std::vector<RunRow> rows;
  int degenerate_updates = 0;
  bool aliased = false;  // lock settled a fringe period away from the truth
};

// One adaptive estimate of `iterations` updates. Throws std::invalid_argument
// when the true field lies outside the initial interval.
RunLog run_bayesian(const ScenarioConfig& cfg, std::uint64_t run_index = 0);

// Consecutive adaptive estimates against a stepping field profile.
RunLog run_track(const ScenarioConfig& cfg, std::uint64_t run_index = 0);

// Two-point lock run over the profile, one row per frequency determination.
RunLog run_frequentist(const ScenarioConfig& cfg, std::uint64_t run_index = 0);

struct CoherenceScan {
  std::vector<std::pair<double, double>> fringe;  // (t_ramsey s, signal)
  CoherenceFit fit;
};

// Time-domain fringe sweep plus the envelope fit.
CoherenceScan run_coherence(const ScenarioConfig& cfg, std::uint64_t run_index = 0);

struct ScalingBandRow {
  int iteration = 0;
  double t_i = 0.0, t_total = 0.0, tau = 0.0;
  double db_med = 0.0, db_lo = 0.0, db_hi = 0.0;
  double eta_t_med = 0.0, eta_t_lo = 0.0, eta_t_hi = 0.0;
  double eta_tau_med = 0.0, eta_tau_lo = 0.0, eta_tau_hi = 0.0;
  // Shot-noise-limited lock references at the ramp ends, same total time.
  double db_sql_t1 = 0.0, db_sql_tmax = 0.0;
  double eta_sql_t1 = 0.0, eta_sql_tmax = 0.0;
};

struct ScalingTable {
  int runs = 0;
  std::vector<ScalingBandRow> rows;  // per iteration: median and 68.3% band

  std::vector<SensitivityRecord> median_records() const;
};

// Ensemble of adaptive runs; per-iteration median and 68.3% percentile band.
ScalingTable run_scaling(const ScenarioConfig& cfg);

struct CompareRow {
  std::string label;
  double t_r = 0.0;          // s
  double eta_closed_pt = 0;  // pT/sqrt(Hz), closed form
  double eta_mc_pt = 0;      // pT/sqrt(Hz), Monte Carlo (NaN when runs < 2)
  double b_max = 0.0;        // nT, dynamic range
};

struct CompareResult {
  std::array<CompareRow, 3> table;  // lock at t_first, lock at t_max, adaptive
  std::vector<std::array<double, 3>> sweep;        // t_r, b_max, eta_fmm_pt
  std::vector<std::array<double, 4>> bayes_points;  // t_first, b_max, eta_mc_pt, eta_closed_pt
};

// Sensitivity/dynamic-range comparison table and the sensitivity-vs-range sweep.
CompareResult run_compare(const ScenarioConfig& cfg);

}  // namespace cptmag
