// Acceptance suite: end-to-end checks of the headline quantities, one test
// case per criterion, each printing a single PASS/FAIL line. The default
// ensemble is computed once and shared by the sensitivity/scaling criteria.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cptmag/config_io.hpp"
#include "cptmag/scenario.hpp"

using namespace cptmag;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const PhysicsParams kP{};

void announce(int idx, bool pass, const std::string& detail) {
  std::printf("[acceptance] criterion %02d %s — %s\n", idx, pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

// 100 default adaptive runs, shared across criteria 1-3.
const ScalingTable& ensemble() {
  static const ScalingTable table = [] {
    ScenarioConfig cfg;
    cfg.scenario = "scaling";
    cfg.runs = 100;
    return run_scaling(cfg);
  }();
  return table;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Brute-force expected-information-gain evaluation used by criterion 9,
// independent of the library's fused loops. Hypothetical outcomes carry the
// worst-case shot width 1/(2 sqrt(n)), matching the utility definition.
double utility_oracle(double phi_c, const Posterior& prior, double t_r, double n_eff, int n_pe,
                      const PhysicsParams& params, double detuning) {
  const auto nodes = pe_quadrature(n_pe);
  const auto [first, last] = prior.support();
  RamseyConfig cfg{t_r, phi_c, detuning};
  const double sigma = 0.5 / std::sqrt(n_eff);
  const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sigma);
  double total = 0.0;
  std::vector<double> l(last - first);
  for (const auto& node : nodes) {
    double m = 0.0;
    for (std::size_t i = first; i < last; ++i) {
      const double d = node.p - ideal_probability(params, cfg, prior.grid_b(i));
      l[i - first] = norm * std::exp(-d * d / (2.0 * sigma * sigma));
      m += prior.trapz_w(i) * l[i - first] * prior.density()[i];
    }
    if (!(m > 1e-300)) continue;
    const double log_m = std::log(m);
    double kl = 0.0;
    for (std::size_t i = first; i < last; ++i) {
      const double p = prior.density()[i];
      const double li = l[i - first];
      if (p <= 0.0 || li <= 0.0) continue;
      const double q = li * p / m;
      if (q <= 0.0) continue;
      kl += prior.trapz_w(i) * q * (std::log(li) - log_m);
    }
    total += node.w * m * kl;
  }
  return total;
}

// Direct prior * likelihood product with log-domain accumulation, used by
// criterion 8 as the reference for single updates and compositions.
Posterior product_oracle(const Posterior& prior, const PhysicsParams& params,
                         const std::vector<MeasurementOutcome>& outcomes,
                         const std::vector<RamseyConfig>& cfgs) {
  std::vector<double> logw(prior.size());
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < prior.size(); ++i) {
    double acc = std::log(prior.density()[i]);
    for (std::size_t k = 0; k < outcomes.size(); ++k)
      acc += std::log(
          likelihood(params, outcomes[k].p_e, prior.grid_b(i), cfgs[k], outcomes[k].n_eff));
    logw[i] = acc;
    peak = std::max(peak, acc);
  }
  std::vector<double> w(prior.size());
  for (std::size_t i = 0; i < prior.size(); ++i) w[i] = std::exp(logw[i] - peak);
  return Posterior(prior.b_lo(), prior.b_hi(), std::move(w));
}

}  // namespace

TEST_CASE("criterion 01: asymptotic sensitivity") {
  const auto asym = bayes_asymptotics(Schedule{}, kP);
  const double closed_pt = asym.eta_avg_limit * 1e3;
  const bool closed_ok = closed_pt >= 6.5 && closed_pt <= 7.3;

  const auto t0 = std::chrono::steady_clock::now();
  const auto& table = ensemble();
  const auto elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto& final_row = table.rows.back();
  REQUIRE(final_row.tau == doctest::Approx(18.031).epsilon(1e-9));
  const double mc_pt = final_row.eta_tau_med * 1e3;
  const bool mc_ok = std::abs(mc_pt / closed_pt - 1.0) <= 0.10;

  const bool pass = closed_ok && mc_ok;
  announce(1, pass,
           fmt("eta_avg limit %.3f pT/sqrtHz in [6.5, 7.3]; ensemble median %.3f pT/sqrtHz "
               "at tau=18.031 s (%.1f%% off, 100 runs in %.0f s)",
               closed_pt, mc_pt, 100.0 * (mc_pt / closed_pt - 1.0), elapsed));
  CHECK(closed_ok);
  CHECK(mc_ok);
  CHECK(elapsed < 300.0);
}

TEST_CASE("criterion 02: sub-SQL ramp scaling") {
  // The fit covers the accumulation regime of the ramp: the uncertainty
  // tracks C / sqrt(sum N_i T_i^2) from the fourth update on (checked below);
  // the first updates are fringe-order disambiguation, not refinement.
  const auto recs = ensemble().median_records();
  const int j = Schedule{}.ramp_length();
  const auto db_fit = fit_scaling(recs, 4, j);
  const auto eta_fit = fit_scaling(recs, 4, j, true);
  const bool db_ok = db_fit.exponent >= -0.90 && db_fit.exponent <= -0.80;
  const bool eta_ok = eta_fit.exponent >= -0.40 && eta_fit.exponent <= -0.30;

  // Accumulation-law tracking, 15% from the fourth update on.
  Schedule sched;
  const double coeff = bayes_asymptotics(sched, kP).coefficient;
  double acc = 0.0;
  bool tracks = true;
  double worst_track = 0.0;
  for (const auto& r : recs) {
    const int i = r.iteration;
    const double t_i = sched.time_at(i);
    acc += effective_atoms(kP, t_i) * t_i * t_i;
    if (i < 4) continue;
    const double predicted = coeff / std::sqrt(acc);
    const double rel = r.delta_b / predicted - 1.0;
    worst_track = std::max(worst_track, std::abs(rel));
    if (std::abs(rel) > 0.15) tracks = false;
  }

  announce(2, db_ok && eta_ok && tracks,
           fmt("ramp window [4, %d]: delta_B exponent %.3f+-%.3f in [-0.90, -0.80]; "
               "eta exponent %.3f+-%.3f in [-0.40, -0.30]; worst accumulation-law "
               "deviation past i=3: %.1f%%",
               j, db_fit.exponent, db_fit.exponent_err, eta_fit.exponent,
               eta_fit.exponent_err, 100.0 * worst_track));
  CHECK(db_ok);
  CHECK(eta_ok);
  CHECK(tracks);
}

TEST_CASE("adaptive trace beats the short-time lock line after disambiguation") {
  const auto& table = ensemble();
  bool beats = true;
  for (const auto& r : table.rows) {
    if (r.iteration < 3 || std::isnan(r.db_sql_t1)) continue;
    if (!(r.db_med < r.db_sql_t1)) beats = false;
  }
  CHECK(beats);
}

TEST_CASE("criterion 03: SQL plateau scaling") {
  const auto recs = ensemble().median_records();
  const int j = Schedule{}.ramp_length();
  const auto fit = fit_scaling(recs, 3 * j, static_cast<int>(recs.size()));
  const bool ok = fit.exponent >= -0.55 && fit.exponent <= -0.45;
  announce(3, ok,
           fmt("plateau window [%d, %zu]: delta_B exponent %.3f+-%.3f in [-0.55, -0.45]",
               3 * j, recs.size(), fit.exponent, fit.exponent_err));
  CHECK(ok);
}

TEST_CASE("criterion 04: lock Monte Carlo versus the closed-form uncertainty") {
  // Ensemble spread of the time-averaged lock estimate against the closed
  // form at matched total interrogation time, 200 runs per point.
  const int n_runs = 200;
  bool pass = true;
  std::string detail;
  for (double t_r : {0.245e-3, 0.0071}) {
    for (double t_total : {0.1, 0.5, 2.0}) {
      const int pairs = std::max(1, static_cast<int>(std::lround(t_total / (2.0 * t_r))));
      std::vector<double> means;
      means.reserve(n_runs);
      ScenarioConfig cfg;
      cfg.lock_t_ramsey = t_r;
      cfg.lock_pairs = pairs;
      cfg.seed = 17;
      for (int r = 0; r < n_runs; ++r) {
        const RunLog log = run_frequentist(cfg, static_cast<std::uint64_t>(r));
        double acc = 0.0;
        for (const auto& row : log.rows) acc += row.b_est;
        means.push_back(acc / static_cast<double>(log.rows.size()));
      }
      double mu = 0.0;
      for (double v : means) mu += v;
      mu /= n_runs;
      double var = 0.0;
      for (double v : means) var += (v - mu) * (v - mu);
      var /= (n_runs - 1);
      const double mc = std::sqrt(var);
      const double closed = frequentist_uncertainty(t_r, 2.0 * pairs * t_r, kP);
      const double ratio = mc / closed;
      if (std::abs(ratio - 1.0) > 0.15) pass = false;
      detail += fmt("T_R=%.3gms T=%.1fs mc/closed=%.2f; ", t_r * 1e3, t_total, ratio);
    }
  }
  announce(4, pass,
           detail + (pass ? "" :
           "the efficient two-point lock realizes half the closed-form value "
           "(full differential-slope Fisher information); see lock_test for the "
           "pinned physics"));
  CHECK(pass);
}

TEST_CASE("criterion 05: sensitivity gain arithmetic") {
  Schedule sched;
  const double t1 = sched.first_time();
  const double n1 = effective_atoms(kP, t1);
  const double nj = effective_atoms(kP, sched.t_max);
  const double q_ramp = 2.0 * sched.t_max * std::sqrt(nj) / (t1 * std::sqrt(n1));
  const double db_ramp = gain_db(q_ramp, 1.0);
  const double db_plateau = gain_db(2.0, 1.0);
  const bool ok = std::abs(db_ramp - 15.4) <= 0.1 && std::abs(db_plateau - 3.0) <= 0.1;
  announce(5, ok,
           fmt("Q=%.2f -> %.2f dB (target 15.4+-0.1); Q=2 -> %.2f dB (target 3.0+-0.1)",
               q_ramp, db_ramp, db_plateau));
  CHECK(ok);
}

TEST_CASE("criterion 06: dynamic range and estimation coverage") {
  ScenarioConfig cfg;
  cfg.scenario = "compare";
  cfg.runs = 1;  // closed-form table only
  const auto cmp = run_compare(cfg);
  const bool range_ok = std::abs(cmp.table[0].b_max - 145.6) <= 0.5 &&
                        std::abs(cmp.table[1].b_max - 5.03) <= 0.05 &&
                        std::abs(cmp.table[2].b_max - 145.6) <= 0.5;

  // Coverage sweep: 200 seeds, true field uniform across 90% of the interval.
  const double width = 2.0 * cmp.table[0].b_max;
  RngStream field_rng(4242);
  int covered = 0;
  int aliased = 0;
  const int n_seeds = 200;
  const double alias_cut = 0.5 / (kP.abs_zeeman_rate() * Schedule{}.t_max);
  for (int s = 0; s < n_seeds; ++s) {
    ScenarioConfig run_cfg;
    run_cfg.seed = 1000 + static_cast<std::uint64_t>(s);
    const double b_true = field_rng.uniform(-0.45 * width, 0.45 * width);
    run_cfg.field.segments = {{0.0, b_true}};
    const RunLog log = run_bayesian(run_cfg, 0);
    const auto& last = log.rows.back();
    const double err = std::abs(last.b_est - b_true);
    if (err < 3.0 * last.delta_b) ++covered;
    if (err > alias_cut) ++aliased;
  }
  const bool coverage_ok = covered >= static_cast<int>(0.95 * n_seeds);
  const bool alias_ok = aliased == 0;
  announce(6, range_ok && coverage_ok && alias_ok,
           fmt("ranges %.2f / %.3f / %.2f nT (targets 145.6+-0.5, 5.03+-0.05, 145.6+-0.5); "
               "coverage %d/%d within 3 sigma; %d aliasing failures",
               cmp.table[0].b_max, cmp.table[1].b_max, cmp.table[2].b_max, covered, n_seeds,
               aliased));
  CHECK(range_ok);
  CHECK(coverage_ok);
  CHECK(alias_ok);
}

TEST_CASE("criterion 07: field tracking") {
  ScenarioConfig cfg;
  cfg.scenario = "track";
  cfg.field = default_track_profile(30.0);
  const RunLog log = run_track(cfg, 0);
  const int m_b = cfg.schedule.iterations;
  REQUIRE(log.rows.size() == static_cast<std::size_t>(4 * m_b));

  bool track_ok = true;
  std::string detail;
  for (int block = 1; block < 4; ++block) {  // blocks following a field step
    const double truth = cfg.field.value_at((block * m_b + 1) * kP.t_cycle);
    int converged_at = -1;
    for (int i = 1; i <= m_b; ++i) {
      const auto& row = log.rows[static_cast<std::size_t>(block * m_b + i - 1)];
      // Converged means localized near the new value, not merely inside a
      // still-wide posterior: the spread must be well below the step size,
      // the estimate within three spreads, and both must persist.
      if (row.delta_b > 1.0 || std::abs(row.b_est - truth) > 3.0 * row.delta_b) continue;
      bool stays = true;
      for (int k = i; k <= std::min(i + 20, m_b); ++k) {
        const auto& r2 = log.rows[static_cast<std::size_t>(block * m_b + k - 1)];
        if (std::abs(r2.b_est - truth) > 4.0 * r2.delta_b) stays = false;
      }
      if (stays) {
        converged_at = i;
        break;
      }
    }
    detail += fmt("block %d localized at iteration %d; ", block + 1, converged_at);
    if (converged_at < 1 || converged_at > 25) track_ok = false;
  }

  // The plateau-time lock cannot follow a 20 nT step.
  ScenarioConfig lock_cfg = cfg;
  lock_cfg.scenario = "frequentist";
  lock_cfg.lock_pairs = 494;  // spans the full 72.124 s profile
  const RunLog lock_log = run_frequentist(lock_cfg, 0);
  const bool alias_ok = lock_log.aliased;
  announce(7, track_ok && alias_ok,
           detail + fmt("lock comparator aliased=%s", alias_ok ? "yes" : "no"));
  CHECK(track_ok);
  CHECK(alias_ok);
}

TEST_CASE("criterion 08: posterior update oracle") {
  RngStream rng(90210);
  double worst_single = 0.0;
  const std::size_t n_fine = 10 * 8192;
  for (int trial = 0; trial < 50; ++trial) {
    const double t_r = rng.uniform(0.245e-3, 7.1e-3);
    const double period = 1.0 / (kP.abs_zeeman_rate() * t_r);
    const double center = rng.uniform(-50.0, 50.0);
    Posterior prior = (trial % 2 == 0)
                          ? uniform_prior(center, t_r, kP, n_fine)
                          : gaussian_prior({center, rng.uniform(0.03, 0.4) * period},
                                           center - 0.5 * period, center + 0.5 * period,
                                           n_fine);
    // Outcomes include the rails now and then.
    double p_e = rng.uniform(0.0, 1.0);
    if (trial % 10 == 3) p_e = 0.0;
    if (trial % 10 == 7) p_e = 1.0;
    MeasurementOutcome out{p_e, std::floor(rng.uniform(500.0, 10755.0)), trial, 0.0};
    RamseyConfig cfg{t_r, rng.uniform(0.0, kTwoPi), 0.0};
    const auto updated = bayes_update(prior, kP, out, cfg);
    REQUIRE_FALSE(updated.degenerate);
    const auto reference = product_oracle(prior, kP, {out}, {cfg});
    for (std::size_t i = 0; i < prior.size(); ++i)
      worst_single = std::max(worst_single, std::abs(updated.posterior.density()[i] -
                                                     reference.density()[i]));
  }

  // Five-cycle composition from one true field against the joint product.
  FieldProfile field;
  field.segments = {{0.0, 17.0}};
  auto posterior = uniform_prior(10.0, 0.5e-3, kP, n_fine);
  const auto prior0 = posterior;
  std::vector<MeasurementOutcome> outs;
  std::vector<RamseyConfig> cfgs;
  for (int k = 0; k < 5; ++k) {
    RamseyConfig cfg{0.5e-3 * (k + 1), rng.uniform(0.0, kTwoPi), 0.0};
    outs.push_back(sample_measurement(kP, cfg, field, 0.0, rng, k));
    cfgs.push_back(cfg);
    posterior = bayes_update(posterior, kP, outs.back(), cfg).posterior;
  }
  const auto reference = product_oracle(prior0, kP, outs, cfgs);
  double worst_chain = 0.0;
  for (std::size_t i = 0; i < posterior.size(); ++i)
    worst_chain =
        std::max(worst_chain, std::abs(posterior.density()[i] - reference.density()[i]));

  const bool ok = worst_single < 1e-8 && worst_chain < 1e-8;
  announce(8, ok,
           fmt("single-update Linf %.2e, five-update composition Linf %.2e (tolerance 1e-8)",
               worst_single, worst_chain));
  CHECK(worst_single < 1e-8);
  CHECK(worst_chain < 1e-8);
}

TEST_CASE("criterion 09: information-gain oracle") {
  RngStream rng(31337);
  PhaseSearchConfig cfg;
  Schedule sched;
  double worst_rel = 0.0;
  double worst_neg = 0.0;
  const std::size_t n_default = 8192;
  for (int trial = 0; trial < 20; ++trial) {
    const int i = 1 + static_cast<int>(rng.uniform(0.0, sched.iterations - 1e-9));
    const double t_r = sched.time_at(std::min(i, 30));
    const double n_eff = std::floor(effective_atoms(kP, t_r));
    const double period = 1.0 / (kP.abs_zeeman_rate() * t_r);
    const double center = rng.uniform(-30.0, 30.0);
    const double phi = rng.uniform(0.0, kTwoPi);

    double u_impl = 0.0, u_ref = 0.0;
    if (trial % 4 == 0) {
      const auto prior = uniform_prior(center, t_r, kP, n_default);
      const auto fine = uniform_prior(center, t_r, kP, 10 * n_default);
      u_impl = utility(phi, prior, t_r, n_eff, cfg, kP, 0.0);
      u_ref = utility_oracle(phi, fine, t_r, n_eff, 10 * cfg.n_pe, kP, 0.0);
    } else {
      const double sigma = rng.uniform(0.02, 0.45) * period;
      const Estimate est{center, sigma};
      const auto prior =
          gaussian_prior(est, center - 0.5 * period, center + 0.5 * period, n_default);
      const auto fine =
          gaussian_prior(est, center - 0.5 * period, center + 0.5 * period, 10 * n_default);
      u_impl = utility(phi, prior, t_r, n_eff, cfg, kP, 0.0);
      u_ref = utility_oracle(phi, fine, t_r, n_eff, 10 * cfg.n_pe, kP, 0.0);
    }
    worst_neg = std::min(worst_neg, u_impl);
    const double rel = std::abs(u_impl - u_ref) / std::max(std::abs(u_ref), 1e-3);
    worst_rel = std::max(worst_rel, rel);
  }
  const bool ok = worst_rel <= 0.01 && worst_neg >= -1e-9;
  announce(9, ok,
           fmt("worst refined-quadrature deviation %.4f%% (tolerance 1%%); most negative "
               "utility %.1e (floor -1e-9)",
               100.0 * worst_rel, worst_neg));
  CHECK(worst_rel <= 0.01);
  CHECK(worst_neg >= -1e-9);
}

TEST_CASE("comparison table closed forms and range-independent sensitivity") {
  ScenarioConfig cfg;
  cfg.scenario = "compare";
  cfg.runs = 24;
  const auto cmp = run_compare(cfg);
  // Closed-form sensitivities of the three protocols.
  CHECK(cmp.table[0].eta_closed_pt == doctest::Approx(242.0).epsilon(0.01));
  CHECK(cmp.table[1].eta_closed_pt == doctest::Approx(13.81).epsilon(0.01));
  CHECK(cmp.table[2].eta_closed_pt == doctest::Approx(6.91).epsilon(0.01));
  // The lock sweep has an interior optimum near the plateau time.
  double best_eta = 1e300, best_t = 0.0;
  for (const auto& p : cmp.sweep) {
    if (p[2] < best_eta) {
      best_eta = p[2];
      best_t = p[0];
    }
  }
  CHECK(best_t == doctest::Approx(0.0071).epsilon(0.12));
  // Adaptive sensitivity is flat across first interrogation times: the
  // dynamic range can be traded without paying sensitivity.
  REQUIRE(cmp.bayes_points.size() == 3);
  double lo = 1e300, hi = 0.0;
  for (const auto& p : cmp.bayes_points) {
    CHECK(std::isfinite(p[2]));
    lo = std::min(lo, p[2]);
    hi = std::max(hi, p[2]);
  }
  CHECK((hi - lo) / (0.5 * (hi + lo)) < 0.10);
  // Dynamic ranges span a factor of four across the chosen first times.
  CHECK(cmp.bayes_points.front()[1] / cmp.bayes_points.back()[1] > 3.5);
}

TEST_CASE("criterion 10: byte-identical reruns") {
  namespace fs = std::filesystem;
  const fs::path tmp = fs::temp_directory_path() / "cptmag_acceptance_determinism";
  fs::remove_all(tmp);

  // Library path: every scenario written twice with the same seed.
  ScenarioConfig cfg;
  cfg.schedule.iterations = 30;
  cfg.runs = 4;
  cfg.lock_pairs = 60;
  cfg.coherence_points = 500;
  cfg.track_blocks = 2;
  bool lib_ok = true;
  for (const char* scenario :
       {"bayesian", "track", "frequentist", "coherence", "scaling", "compare"}) {
    cfg.scenario = scenario;
    const auto a = run_scenario_to_dir(cfg, (tmp / "a" / scenario).string());
    const auto b = run_scenario_to_dir(cfg, (tmp / "b" / scenario).string());
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      if (slurp(a[i]) != slurp(b[i])) lib_ok = false;
  }

  // CLI path: the shipped binary twice with the same config file.
  bool cli_ok = true;
#ifdef CPTMAG_CLI_PATH
  {
    const fs::path cfg_path = tmp / "cli.cfg";
    std::ofstream out(cfg_path);
    out << serialize_config(cfg);
    out.close();
    const std::string base = std::string(CPTMAG_CLI_PATH) + " bayesian --config " +
                             cfg_path.string() + " --seed 5 --out ";
    const auto run = [&](const std::string& dir) {
      const std::string cmd = base + dir + " > /dev/null";
      return std::system(cmd.c_str());
    };
    cli_ok = run((tmp / "cli_a").string()) == 0 && run((tmp / "cli_b").string()) == 0;
    if (cli_ok)
      cli_ok = slurp((tmp / "cli_a" / "bayesian_runlog.csv").string()) ==
               slurp((tmp / "cli_b" / "bayesian_runlog.csv").string());
  }
#endif
  announce(10, lib_ok && cli_ok,
           fmt("six scenarios re-run byte-identical: %s; CLI re-run byte-identical: %s",
               lib_ok ? "yes" : "no", cli_ok ? "yes" : "no"));
  CHECK(lib_ok);
  CHECK(cli_ok);
  fs::remove_all(tmp);
}
