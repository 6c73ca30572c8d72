#include "cptmag/config_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cptmag {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad number for key '" + key + "': " + v);
  }
}

long parse_int(const std::string& v, const std::string& key) {
  const double x = parse_number(v, key);
  if (x != std::floor(x))
    throw std::invalid_argument("config: key '" + key + "' wants an integer: " + v);
  return static_cast<long>(x);
}

std::vector<double> parse_list(const std::string& v, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_number(item, key));
  }
  if (out.empty()) throw std::invalid_argument("config: empty list for key '" + key + "'");
  return out;
}

FieldProfile parse_segments(const std::string& v) {
  FieldProfile profile;
  profile.segments.clear();
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("config: field segment wants start:value, got " + item);
    profile.segments.push_back({parse_number(trim(item.substr(0, colon)), "field.segments"),
                                parse_number(trim(item.substr(colon + 1)), "field.segments")});
  }
  return profile;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig cfg;
  std::string section;
  std::stringstream ss(text);
  std::string raw;
  while (std::getline(ss, raw)) {
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw std::invalid_argument("config: bad section line: " + raw);
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config: expected key = value: " + raw);
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    const std::string full = section.empty() ? key : section + "." + key;

    if (full == "scenario") cfg.scenario = val;
    else if (full == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(val, full));
    else if (full == "runs") cfg.runs = static_cast<int>(parse_int(val, full));
    else if (full == "physics.gyro_hz_per_nt") cfg.physics.gyro = parse_number(val, full);
    else if (full == "physics.delta_m_f") cfg.physics.delta_m_f = static_cast<int>(parse_int(val, full));
    else if (full == "physics.decay_rate_hz") cfg.physics.decay_rate = parse_number(val, full);
    else if (full == "physics.rabi0_hz") cfg.physics.rabi0 = parse_number(val, full);
    else if (full == "physics.beam_width_m") cfg.physics.beam_width = parse_number(val, full);
    else if (full == "physics.gravity_m_s2") cfg.physics.gravity = parse_number(val, full);
    else if (full == "physics.coherence_time_s") cfg.physics.t_coherence = parse_number(val, full);
    else if (full == "physics.atom_amplitude") cfg.physics.atom_amp = parse_number(val, full);
    else if (full == "physics.readout_quality") cfg.physics.readout_quality = parse_number(val, full);
    else if (full == "physics.cycle_period_s") cfg.physics.t_cycle = parse_number(val, full);
    else if (full == "physics.prep_pulse_s") cfg.physics.t_prep = parse_number(val, full);
    else if (full == "physics.detect_pulse_s") cfg.physics.t_detect = parse_number(val, full);
    else if (full == "physics.light_shift_phase_rad")
      cfg.physics.light_shift_phase = parse_number(val, full);
    else if (full == "schedule.growth") cfg.schedule.growth = parse_number(val, full);
    else if (full == "schedule.t_min_s") cfg.schedule.t_min = parse_number(val, full);
    else if (full == "schedule.t_max_s") cfg.schedule.t_max = parse_number(val, full);
    else if (full == "schedule.iterations")
      cfg.schedule.iterations = static_cast<int>(parse_int(val, full));
    else if (full == "phase_search.n_phases")
      cfg.phase_search.n_phases = static_cast<int>(parse_int(val, full));
    else if (full == "phase_search.n_pe")
      cfg.phase_search.n_pe = static_cast<int>(parse_int(val, full));
    else if (full == "estimator.grid_points")
      cfg.grid_points = static_cast<std::size_t>(parse_int(val, full));
    else if (full == "field.segments") cfg.field = parse_segments(val);
    else if (full == "run.detuning_hz") cfg.detuning = parse_number(val, full);
    else if (full == "run.prior_center_nt") cfg.prior_center = parse_number(val, full);
    else if (full == "run.track_blocks") cfg.track_blocks = static_cast<int>(parse_int(val, full));
    else if (full == "run.lock_t_ramsey_s") cfg.lock_t_ramsey = parse_number(val, full);
    else if (full == "run.lock_gain") cfg.lock_gain = parse_number(val, full);
    else if (full == "run.lock_pairs") cfg.lock_pairs = static_cast<int>(parse_int(val, full));
    else if (full == "coherence.detuning_hz") cfg.coherence_detuning = parse_number(val, full);
    else if (full == "coherence.t_max_s") cfg.coherence_t_max = parse_number(val, full);
    else if (full == "coherence.points")
      cfg.coherence_points = static_cast<int>(parse_int(val, full));
    else if (full == "coherence.noise") cfg.coherence_noise = parse_int(val, full) != 0;
    else if (full == "compare.t_first_s") cfg.compare_t_first = parse_list(val, full);
    else if (full == "compare.sweep_points")
      cfg.sweep_points = static_cast<int>(parse_int(val, full));
    else throw std::invalid_argument("config: unknown key '" + full + "'");
  }
  return cfg;
}

std::string serialize_config(const ScenarioConfig& cfg) {
  std::ostringstream os;
  os << "scenario = " << cfg.scenario << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "runs = " << cfg.runs << "\n\n";
  os << "[physics]\n";
  os << "gyro_hz_per_nt = " << format_double(cfg.physics.gyro) << "\n";
  os << "delta_m_f = " << cfg.physics.delta_m_f << "\n";
  os << "decay_rate_hz = " << format_double(cfg.physics.decay_rate) << "\n";
  os << "rabi0_hz = " << format_double(cfg.physics.rabi0) << "\n";
  os << "beam_width_m = " << format_double(cfg.physics.beam_width) << "\n";
  os << "gravity_m_s2 = " << format_double(cfg.physics.gravity) << "\n";
  os << "coherence_time_s = " << format_double(cfg.physics.t_coherence) << "\n";
  os << "atom_amplitude = " << format_double(cfg.physics.atom_amp) << "\n";
  os << "readout_quality = " << format_double(cfg.physics.readout_quality) << "\n";
  os << "cycle_period_s = " << format_double(cfg.physics.t_cycle) << "\n";
  os << "prep_pulse_s = " << format_double(cfg.physics.t_prep) << "\n";
  os << "detect_pulse_s = " << format_double(cfg.physics.t_detect) << "\n";
  os << "light_shift_phase_rad = " << format_double(cfg.physics.light_shift_phase) << "\n\n";
  os << "[schedule]\n";
  os << "growth = " << format_double(cfg.schedule.growth) << "\n";
  os << "t_min_s = " << format_double(cfg.schedule.t_min) << "\n";
  os << "t_max_s = " << format_double(cfg.schedule.t_max) << "\n";
  os << "iterations = " << cfg.schedule.iterations << "\n\n";
  os << "[phase_search]\n";
  os << "n_phases = " << cfg.phase_search.n_phases << "\n";
  os << "n_pe = " << cfg.phase_search.n_pe << "\n\n";
  os << "[estimator]\n";
  os << "grid_points = " << cfg.grid_points << "\n\n";
  os << "[field]\n";
  os << "segments = ";
  for (std::size_t i = 0; i < cfg.field.segments.size(); ++i) {
    if (i) os << ", ";
    os << format_double(cfg.field.segments[i].start_s) << ":"
       << format_double(cfg.field.segments[i].b_nt);
  }
  os << "\n\n";
  os << "[run]\n";
  os << "detuning_hz = " << format_double(cfg.detuning) << "\n";
  os << "prior_center_nt = " << format_double(cfg.prior_center) << "\n";
  os << "track_blocks = " << cfg.track_blocks << "\n";
  os << "lock_t_ramsey_s = " << format_double(cfg.lock_t_ramsey) << "\n";
  os << "lock_gain = " << format_double(cfg.lock_gain) << "\n";
  os << "lock_pairs = " << cfg.lock_pairs << "\n\n";
  os << "[coherence]\n";
  os << "detuning_hz = " << format_double(cfg.coherence_detuning) << "\n";
  os << "t_max_s = " << format_double(cfg.coherence_t_max) << "\n";
  os << "points = " << cfg.coherence_points << "\n";
  os << "noise = " << (cfg.coherence_noise ? 1 : 0) << "\n\n";
  os << "[compare]\n";
  os << "t_first_s = ";
  for (std::size_t i = 0; i < cfg.compare_t_first.size(); ++i) {
    if (i) os << ", ";
    os << format_double(cfg.compare_t_first[i]);
  }
  os << "\n";
  os << "sweep_points = " << cfg.sweep_points << "\n";
  return os.str();
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

void write_runlog_csv(const std::string& path, const RunLog& log) {
  auto out = open_out(path);
  out << "iteration,T_i_s,phi_c_rad,p_e,n_eff,B_est_nT,delta_B_nT,T_total_s,tau_s,"
         "eta_T_pT_sqrtHz,eta_tau_pT_sqrtHz\n";
  for (const auto& r : log.rows) {
    out << r.iteration << ',' << format_double(r.t_i) << ',' << format_double(r.phi_c) << ','
        << format_double(r.p_e) << ',' << format_double(r.n_eff) << ','
        << format_double(r.b_est) << ',' << format_double(r.delta_b) << ','
        << format_double(r.t_total) << ',' << format_double(r.tau) << ','
        << format_double(r.eta_t_pt) << ',' << format_double(r.eta_tau_pt) << '\n';
  }
}

void write_scaling_csv(const std::string& path, const ScalingTable& table) {
  auto out = open_out(path);
  out << "iteration,T_i_s,T_total_s,tau_s,delta_B_med_nT,delta_B_lo_nT,delta_B_hi_nT,"
         "eta_T_med_nT_sqrtHz,eta_T_lo_nT_sqrtHz,eta_T_hi_nT_sqrtHz,"
         "eta_tau_med_nT_sqrtHz,eta_tau_lo_nT_sqrtHz,eta_tau_hi_nT_sqrtHz,"
         "delta_B_sql_t1_nT,delta_B_sql_tmax_nT,eta_sql_t1_nT_sqrtHz,eta_sql_tmax_nT_sqrtHz\n";
  for (const auto& r : table.rows) {
    out << r.iteration << ',' << format_double(r.t_i) << ',' << format_double(r.t_total) << ','
        << format_double(r.tau) << ',' << format_double(r.db_med) << ','
        << format_double(r.db_lo) << ',' << format_double(r.db_hi) << ','
        << format_double(r.eta_t_med) << ',' << format_double(r.eta_t_lo) << ','
        << format_double(r.eta_t_hi) << ',' << format_double(r.eta_tau_med) << ','
        << format_double(r.eta_tau_lo) << ',' << format_double(r.eta_tau_hi) << ','
        << format_double(r.db_sql_t1) << ',' << format_double(r.db_sql_tmax) << ','
        << format_double(r.eta_sql_t1) << ',' << format_double(r.eta_sql_tmax) << '\n';
  }
}

void write_compare_csv(const std::string& table_path, const std::string& sweep_path,
                       const CompareResult& result) {
  {
    auto out = open_out(table_path);
    out << "protocol,T_R_s,eta_avg_closed_pT_sqrtHz,eta_avg_mc_pT_sqrtHz,dynamic_range_nT\n";
    for (const auto& row : result.table) {
      out << row.label << ',' << format_double(row.t_r) << ','
          << format_double(row.eta_closed_pt) << ',' << format_double(row.eta_mc_pt) << ','
          << format_double(row.b_max) << '\n';
    }
  }
  {
    auto out = open_out(sweep_path);
    out << "kind,T_first_s,dynamic_range_nT,eta_pT_sqrtHz,eta_closed_pT_sqrtHz\n";
    for (const auto& p : result.sweep)
      out << "lock," << format_double(p[0]) << ',' << format_double(p[1]) << ','
          << format_double(p[2]) << ',' << format_double(p[2]) << '\n';
    for (const auto& p : result.bayes_points)
      out << "adaptive," << format_double(p[0]) << ',' << format_double(p[1]) << ','
          << format_double(p[2]) << ',' << format_double(p[3]) << '\n';
  }
}

void write_coherence_csv(const std::string& path, const CoherenceScan& scan) {
  auto out = open_out(path);
  out << "T_R_s,signal\n";
  for (const auto& [t, s] : scan.fringe)
    out << format_double(t) << ',' << format_double(s) << '\n';
}

void write_sidecar_json(const std::string& path, const ScenarioConfig& cfg) {
  nlohmann::ordered_json j;
  j["schema_version"] = "cptmag-1";
  j["scenario"] = cfg.scenario;
  j["seed"] = cfg.seed;
  j["runs"] = cfg.runs;
  j["physics"] = {{"gyro_hz_per_nt", cfg.physics.gyro},
                  {"delta_m_f", cfg.physics.delta_m_f},
                  {"decay_rate_hz", cfg.physics.decay_rate},
                  {"rabi0_hz", cfg.physics.rabi0},
                  {"beam_width_m", cfg.physics.beam_width},
                  {"gravity_m_s2", cfg.physics.gravity},
                  {"coherence_time_s", cfg.physics.t_coherence},
                  {"atom_amplitude", cfg.physics.atom_amp},
                  {"readout_quality", cfg.physics.readout_quality},
                  {"cycle_period_s", cfg.physics.t_cycle},
                  {"prep_pulse_s", cfg.physics.t_prep},
                  {"detect_pulse_s", cfg.physics.t_detect},
                  {"light_shift_phase_rad", cfg.physics.light_shift_phase}};
  j["schedule"] = {{"growth", cfg.schedule.growth},
                   {"t_min_s", cfg.schedule.t_min},
                   {"t_max_s", cfg.schedule.t_max},
                   {"iterations", cfg.schedule.iterations}};
  j["phase_search"] = {{"n_phases", cfg.phase_search.n_phases}, {"n_pe", cfg.phase_search.n_pe}};
  j["estimator"] = {{"grid_points", cfg.grid_points}};
  auto segs = nlohmann::ordered_json::array();
  for (const auto& s : cfg.field.segments) segs.push_back({{"start_s", s.start_s}, {"b_nt", s.b_nt}});
  j["field"] = {{"segments", segs}};
  j["run"] = {{"detuning_hz", cfg.detuning},
              {"prior_center_nt", cfg.prior_center},
              {"track_blocks", cfg.track_blocks},
              {"lock_t_ramsey_s", cfg.lock_t_ramsey},
              {"lock_gain", cfg.lock_gain},
              {"lock_pairs", cfg.lock_pairs}};
  j["coherence"] = {{"detuning_hz", cfg.coherence_detuning},
                    {"t_max_s", cfg.coherence_t_max},
                    {"points", cfg.coherence_points},
                    {"noise", cfg.coherence_noise}};
  j["compare"] = {{"t_first_s", cfg.compare_t_first}, {"sweep_points", cfg.sweep_points}};
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

std::vector<std::string> run_scenario_to_dir(const ScenarioConfig& base,
                                             const std::string& out_dir) {
  ScenarioConfig cfg = base;
  if (cfg.scenario == "track" && cfg.field.segments.size() < 2)
    cfg.field = default_track_profile(cfg.field.value_at(0.0));
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  const auto path = [&](const std::string& name) {
    return (std::filesystem::path(out_dir) / name).string();
  };
  std::vector<std::string> written;
  const auto sidecar = path(cfg.scenario + "_config.json");
  write_sidecar_json(sidecar, cfg);
  written.push_back(sidecar);

  if (cfg.scenario == "bayesian") {
    const auto p = path("bayesian_runlog.csv");
    write_runlog_csv(p, run_bayesian(cfg));
    written.push_back(p);
  } else if (cfg.scenario == "track") {
    const auto p = path("track_runlog.csv");
    write_runlog_csv(p, run_track(cfg));
    written.push_back(p);
  } else if (cfg.scenario == "frequentist") {
    const auto p = path("frequentist_runlog.csv");
    write_runlog_csv(p, run_frequentist(cfg));
    written.push_back(p);
  } else if (cfg.scenario == "coherence") {
    const auto scan = run_coherence(cfg);
    const auto p = path("coherence_fringe.csv");
    write_coherence_csv(p, scan);
    written.push_back(p);
    const auto fitp = path("coherence_fit.csv");
    auto out = open_out(fitp);
    out << "t_chi_s,decay_rate2_per_s2,rss\n";
    out << format_double(scan.fit.t_chi) << ',' << format_double(scan.fit.decay_rate2) << ','
        << format_double(scan.fit.rss) << '\n';
    written.push_back(fitp);
  } else if (cfg.scenario == "scaling") {
    const auto p = path("scaling_summary.csv");
    write_scaling_csv(p, run_scaling(cfg));
    written.push_back(p);
  } else if (cfg.scenario == "compare") {
    const auto t = path("compare_table.csv");
    const auto s = path("compare_sweep.csv");
    write_compare_csv(t, s, run_compare(cfg));
    written.push_back(t);
    written.push_back(s);
  }
  return written;
}

}  // namespace cptmag
