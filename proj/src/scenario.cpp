#include "cptmag/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "cptmag/random.hpp"

namespace cptmag {

namespace {

double quiet_nan() { return std::numeric_limits<double>::quiet_NaN(); }

long rounded_atoms(const PhysicsParams& params, double t_ramsey) {
  const double d2 = params.readout_quality * params.readout_quality;
  return std::lround(d2 * effective_atoms(params, t_ramsey));
}

// One adaptive estimate appended to `log`; wall time and cycle index continue
// across blocks.
void bayes_block(const ScenarioConfig& cfg, RngStream& rng, double& wall_time,
                 long& cycle_index, RunLog& log) {
  const Schedule& sched = cfg.schedule;
  const double t_first = sched.first_time();
  const double width = 1.0 / (cfg.physics.abs_zeeman_rate() * t_first);
  const double b_true = cfg.field.value_at(wall_time);
  if (!(std::abs(b_true - cfg.prior_center) < 0.5 * width))
    throw std::invalid_argument("run: true field outside the initial estimation interval");

  Posterior posterior = uniform_prior(cfg.prior_center, t_first, cfg.physics, cfg.grid_points);
  double t_total = log.rows.empty() ? 0.0 : log.rows.back().t_total;
  for (int i = 1; i <= sched.iterations; ++i) {
    const double t_i = sched.time_at(i);
    const long n_i = rounded_atoms(cfg.physics, t_i);
    if (n_i < 1) throw std::invalid_argument("run: no effective atoms left at this time");

    if (i > 1) {
      // The interval shrinks to one fringe period of t_i only once the
      // posterior fits inside it; while the estimate is still delocalized
      // over several alias candidates the raw posterior is inherited on the
      // original interval, so no candidate is truncated away.
      const Estimate est = moments(posterior);
      const double width = 1.0 / (cfg.physics.abs_zeeman_rate() * t_i);
      if (8.0 * est.delta_b <= width)
        posterior = recentre(posterior, est, t_i, cfg.physics, cfg.grid_points);
    }
    const double phi = optimal_phase(posterior, t_i, static_cast<double>(n_i),
                                     cfg.phase_search, cfg.physics, cfg.detuning);
    const RamseyConfig rc{t_i, phi, cfg.detuning};
    const MeasurementOutcome out =
        sample_measurement(cfg.physics, rc, cfg.field, wall_time, rng, cycle_index);
    auto [updated, degenerate] = bayes_update(posterior, cfg.physics, out, rc);
    posterior = std::move(updated);
    if (degenerate) ++log.degenerate_updates;
    const Estimate est = moments(posterior);

    wall_time += cfg.physics.t_cycle;
    ++cycle_index;
    t_total += t_i;
    const double tau = static_cast<double>(cycle_index) * cfg.physics.t_cycle;

    RunRow row;
    row.iteration = static_cast<int>(log.rows.size()) + 1;
    row.t_i = t_i;
    row.phi_c = phi;
    row.p_e = out.p_e;
    row.n_eff = out.n_eff;
    row.b_est = est.b_est;
    row.delta_b = est.delta_b;
    row.t_total = t_total;
    row.tau = tau;
    row.eta_t_pt = est.delta_b * std::sqrt(t_total) * 1e3;
    row.eta_tau_pt = est.delta_b * std::sqrt(tau) * 1e3;
    log.rows.push_back(row);
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  physics.validate();
  schedule.validate();
  phase_search.validate();
  field.validate();
  if (grid_points < 16) throw std::invalid_argument("config: grid_points must be >= 16");
  if (runs < 1) throw std::invalid_argument("config: runs must be >= 1");
  if (track_blocks < 1) throw std::invalid_argument("config: track_blocks must be >= 1");
  if (lock_pairs < 1) throw std::invalid_argument("config: lock_pairs must be >= 1");
  if (!(lock_t_ramsey > 0.0)) throw std::invalid_argument("config: lock_t_ramsey must be > 0");
  if (coherence_points < 20)
    throw std::invalid_argument("config: coherence_points must be >= 20");
  if (sweep_points < 2) throw std::invalid_argument("config: sweep_points must be >= 2");
  if (compare_t_first.empty())
    throw std::invalid_argument("config: compare_t_first must not be empty");
  static const char* known[] = {"coherence", "frequentist", "bayesian",
                                "track", "scaling", "compare"};
  if (std::find(std::begin(known), std::end(known), scenario) == std::end(known))
    throw std::invalid_argument("config: unknown scenario '" + scenario + "'");
}

FieldProfile default_track_profile(double b0_nt) {
  FieldProfile p;
  p.segments = {{0.0, b0_nt},
                {18.031, b0_nt + 20.0},
                {36.062, b0_nt + 40.0},
                {54.093, b0_nt}};
  return p;
}

RunLog run_bayesian(const ScenarioConfig& cfg, std::uint64_t run_index) {
  cfg.validate();
  RunLog log;
  log.seed = cfg.seed;
  log.run_index = run_index;
  RngStream rng = RngStream::for_run(cfg.seed, run_index);
  double wall_time = 0.0;
  long cycle_index = 0;
  bayes_block(cfg, rng, wall_time, cycle_index, log);
  return log;
}

RunLog run_track(const ScenarioConfig& cfg, std::uint64_t run_index) {
  cfg.validate();
  if (cfg.field.segments.size() < 2)
    throw std::invalid_argument("track: field profile needs at least 2 segments");
  RunLog log;
  log.seed = cfg.seed;
  log.run_index = run_index;
  RngStream rng = RngStream::for_run(cfg.seed, run_index);
  double wall_time = 0.0;
  long cycle_index = 0;
  for (int b = 0; b < cfg.track_blocks; ++b) bayes_block(cfg, rng, wall_time, cycle_index, log);
  return log;
}

RunLog run_frequentist(const ScenarioConfig& cfg, std::uint64_t run_index) {
  cfg.validate();
  RunLog log;
  log.seed = cfg.seed;
  log.run_index = run_index;
  RngStream rng = RngStream::for_run(cfg.seed, run_index);

  const double t_r = cfg.lock_t_ramsey;
  const double period = 1.0 / (cfg.physics.abs_zeeman_rate() * t_r);
  LockState state;
  state.loop_gain = cfg.lock_gain;
  // The lock starts acquired on the initial field; acquisition is not modelled.
  state.freq_offset = cfg.physics.zeeman_rate() * cfg.field.value_at(0.0);

  double wall_time = 0.0;
  double t_total = 0.0;
  int off_fringe = 0;
  for (int m = 1; m <= cfg.lock_pairs; ++m) {
    const LockStepResult step =
        lock_step(state, t_r, cfg.field, wall_time, cfg.physics, rng);
    state = step.state;
    wall_time += 2.0 * cfg.physics.t_cycle;
    t_total += 2.0 * t_r;

    const double truth = cfg.field.value_at(step.probe_minus.wall_time);
    if (std::abs(step.b_estimate - truth) > 0.5 * period) {
      if (++off_fringe >= 5) log.aliased = true;
    } else {
      off_fringe = 0;
    }

    RunRow row;
    row.iteration = m;
    row.t_i = t_r;
    row.phi_c = 0.0;
    row.p_e = step.probe_plus.p_e;
    row.n_eff = step.probe_plus.n_eff;
    row.b_est = step.b_estimate;
    row.delta_b = frequentist_uncertainty(t_r, t_total, cfg.physics);
    row.t_total = t_total;
    row.tau = static_cast<double>(state.cycle_count) * cfg.physics.t_cycle;
    row.eta_t_pt = row.delta_b * std::sqrt(row.t_total) * 1e3;
    row.eta_tau_pt = row.delta_b * std::sqrt(row.tau) * 1e3;
    log.rows.push_back(row);
  }
  return log;
}

CoherenceScan run_coherence(const ScenarioConfig& cfg, std::uint64_t run_index) {
  cfg.validate();
  CoherenceScan scan;
  RngStream rng = RngStream::for_run(cfg.seed, run_index);
  const double b = cfg.field.value_at(0.0);
  const int n = cfg.coherence_points;
  scan.fringe.reserve(static_cast<std::size_t>(n));
  // Reference fringe amplitude at zero fall for the shot-noise mapping.
  const double a0 = alpha_factor(cfg.physics, cfg.physics.rabi0, cfg.coherence_detuning);
  const double amp0 = a0 * std::exp(-a0 * cfg.physics.decay_rate * cfg.physics.t_detect) *
                      (1.0 - std::exp(-a0 * cfg.physics.decay_rate * cfg.physics.t_prep));
  for (int i = 1; i <= n; ++i) {
    const double t_r = cfg.coherence_t_max * static_cast<double>(i) / static_cast<double>(n);
    RamseyConfig rc{t_r, 0.0, cfg.coherence_detuning};
    double s = transmitted_signal(cfg.physics, rc, b);
    if (cfg.coherence_noise) {
      const double n_eff = effective_atoms(cfg.physics, t_r);
      s += rng.normal(0.0, amp0 * 0.5 / std::sqrt(std::max(n_eff, 1.0)));
    }
    scan.fringe.emplace_back(t_r, s);
  }
  scan.fit = fit_coherence(scan.fringe, cfg.physics, cfg.coherence_detuning, b);
  return scan;
}

std::vector<SensitivityRecord> ScalingTable::median_records() const {
  std::vector<SensitivityRecord> recs;
  recs.reserve(rows.size());
  for (const auto& r : rows) {
    SensitivityRecord rec;
    rec.iteration = r.iteration;
    rec.t_total = r.t_total;
    rec.tau = r.tau;
    rec.delta_b = r.db_med;
    rec.eta_t = r.eta_t_med;
    rec.eta_tau = r.eta_tau_med;
    recs.push_back(rec);
  }
  return recs;
}

ScalingTable run_scaling(const ScenarioConfig& cfg) {
  cfg.validate();
  const int n_iter = cfg.schedule.iterations;
  std::vector<std::vector<double>> db(static_cast<std::size_t>(n_iter));
  for (auto& v : db) v.reserve(static_cast<std::size_t>(cfg.runs));
  RunLog first_log;
  for (int r = 0; r < cfg.runs; ++r) {
    RunLog log = run_bayesian(cfg, static_cast<std::uint64_t>(r));
    for (int i = 0; i < n_iter; ++i)
      db[static_cast<std::size_t>(i)].push_back(log.rows[static_cast<std::size_t>(i)].delta_b);
    if (r == 0) first_log = std::move(log);
  }

  ScalingTable table;
  table.runs = cfg.runs;
  const double t1 = cfg.schedule.first_time();
  const double tmax = cfg.schedule.t_max;
  for (int i = 0; i < n_iter; ++i) {
    const auto& row0 = first_log.rows[static_cast<std::size_t>(i)];
    ScalingBandRow row;
    row.iteration = i + 1;
    row.t_i = row0.t_i;
    row.t_total = row0.t_total;
    row.tau = row0.tau;
    const auto& sample = db[static_cast<std::size_t>(i)];
    row.db_med = quantile(sample, 0.5);
    row.db_lo = quantile(sample, 0.1585);
    row.db_hi = quantile(sample, 0.8415);
    row.eta_t_med = row.db_med * std::sqrt(row.t_total);
    row.eta_t_lo = row.db_lo * std::sqrt(row.t_total);
    row.eta_t_hi = row.db_hi * std::sqrt(row.t_total);
    row.eta_tau_med = row.db_med * std::sqrt(row.tau);
    row.eta_tau_lo = row.db_lo * std::sqrt(row.tau);
    row.eta_tau_hi = row.db_hi * std::sqrt(row.tau);
    row.db_sql_t1 = row.t_total >= 2.0 * t1
                        ? frequentist_uncertainty(t1, row.t_total, cfg.physics)
                        : quiet_nan();
    row.db_sql_tmax = row.t_total >= 2.0 * tmax
                          ? frequentist_uncertainty(tmax, row.t_total, cfg.physics)
                          : quiet_nan();
    row.eta_sql_t1 = frequentist_sensitivity_interrogation(t1, cfg.physics);
    row.eta_sql_tmax = frequentist_sensitivity_interrogation(tmax, cfg.physics);
    table.rows.push_back(row);
  }
  return table;
}

CompareResult run_compare(const ScenarioConfig& cfg) {
  cfg.validate();
  CompareResult res;
  const double t1 = cfg.schedule.first_time();
  const double tmax = cfg.schedule.t_max;
  const double abs_z = cfg.physics.abs_zeeman_rate();
  const BayesAsymptotics asym = bayes_asymptotics(cfg.schedule, cfg.physics);

  // Monte Carlo sensitivity of a lock at t_r: ensemble spread of the
  // time-averaged estimate, referenced to the averaging time.
  auto lock_mc = [&](double t_r) -> double {
    if (cfg.runs < 2) return quiet_nan();
    ScenarioConfig sub = cfg;
    sub.lock_t_ramsey = t_r;
    sub.lock_pairs = std::max(8, static_cast<int>(std::lround(2.0 / (2.0 * t_r))));
    std::vector<double> means;
    means.reserve(static_cast<std::size_t>(cfg.runs));
    for (int r = 0; r < cfg.runs; ++r) {
      const RunLog log = run_frequentist(sub, static_cast<std::uint64_t>(r));
      double acc = 0.0;
      for (const auto& row : log.rows) acc += row.b_est;
      means.push_back(acc / static_cast<double>(log.rows.size()));
    }
    double m = 0.0;
    for (double v : means) m += v;
    m /= static_cast<double>(means.size());
    double var = 0.0;
    for (double v : means) var += (v - m) * (v - m);
    var /= static_cast<double>(means.size() - 1);
    const double tau = 2.0 * static_cast<double>(sub.lock_pairs) * cfg.physics.t_cycle;
    return std::sqrt(var) * std::sqrt(tau) * 1e3;
  };

  // Adaptive Monte Carlo sensitivity for a given first interrogation time.
  auto bayes_mc = [&](double t_first) -> double {
    if (cfg.runs < 2) return quiet_nan();
    ScenarioConfig sub = cfg;
    sub.scenario = "bayesian";
    sub.schedule.t_min = t_first;
    std::vector<double> eta;
    eta.reserve(static_cast<std::size_t>(cfg.runs));
    for (int r = 0; r < cfg.runs; ++r) {
      const RunLog log = run_bayesian(sub, static_cast<std::uint64_t>(r));
      eta.push_back(log.rows.back().eta_tau_pt);
    }
    return quantile(eta, 0.5);
  };

  res.table[0] = {"lock_t_first", t1, frequentist_sensitivity_avg(t1, cfg.physics) * 1e3,
                  lock_mc(t1), 1.0 / (2.0 * abs_z * t1)};
  res.table[1] = {"lock_t_max", tmax, frequentist_sensitivity_avg(tmax, cfg.physics) * 1e3,
                  lock_mc(tmax), 1.0 / (2.0 * abs_z * tmax)};
  res.table[2] = {"adaptive", t1, asym.eta_avg_limit * 1e3, bayes_mc(cfg.schedule.t_min),
                  1.0 / (2.0 * abs_z * t1)};

  for (int i = 0; i < cfg.sweep_points; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(cfg.sweep_points - 1);
    const double t_r = t1 * std::pow(1.2 * tmax / t1, f);
    res.sweep.push_back({t_r, 1.0 / (2.0 * abs_z * t_r),
                         frequentist_sensitivity_avg(t_r, cfg.physics) * 1e3});
  }

  for (double t_first : cfg.compare_t_first) {
    ScenarioConfig sub = cfg;
    sub.schedule.t_min = t_first;
    const double t1_eff = sub.schedule.first_time();
    res.bayes_points.push_back({t1_eff, 1.0 / (2.0 * abs_z * t1_eff), bayes_mc(t_first),
                                bayes_asymptotics(sub.schedule, cfg.physics).eta_avg_limit * 1e3});
  }
  return res;
}

}  // namespace cptmag
