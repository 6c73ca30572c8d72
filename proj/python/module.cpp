#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cptmag/analysis.hpp"
#include "cptmag/config_io.hpp"
#include "cptmag/lock.hpp"
#include "cptmag/physics.hpp"
#include "cptmag/policy.hpp"
#include "cptmag/posterior.hpp"
#include "cptmag/scenario.hpp"

namespace py = pybind11;
using namespace cptmag;

PYBIND11_MODULE(_cptmag, m) {
  m.doc() = "Adaptive CPT magnetometry simulator core";

  py::class_<PhysicsParams>(m, "PhysicsParams")
      .def(py::init<>())
      .def_readwrite("gyro", &PhysicsParams::gyro)
      .def_readwrite("delta_m_f", &PhysicsParams::delta_m_f)
      .def_readwrite("decay_rate", &PhysicsParams::decay_rate)
      .def_readwrite("rabi0", &PhysicsParams::rabi0)
      .def_readwrite("beam_width", &PhysicsParams::beam_width)
      .def_readwrite("gravity", &PhysicsParams::gravity)
      .def_readwrite("t_coherence", &PhysicsParams::t_coherence)
      .def_readwrite("atom_amp", &PhysicsParams::atom_amp)
      .def_readwrite("readout_quality", &PhysicsParams::readout_quality)
      .def_readwrite("t_cycle", &PhysicsParams::t_cycle)
      .def_readwrite("t_prep", &PhysicsParams::t_prep)
      .def_readwrite("t_detect", &PhysicsParams::t_detect)
      .def_readwrite("light_shift_phase", &PhysicsParams::light_shift_phase)
      .def("zeeman_rate", &PhysicsParams::zeeman_rate)
      .def("validate", &PhysicsParams::validate);

  py::class_<FieldProfile::Segment>(m, "FieldSegment")
      .def(py::init<double, double>())
      .def_readwrite("start_s", &FieldProfile::Segment::start_s)
      .def_readwrite("b_nt", &FieldProfile::Segment::b_nt);

  py::class_<FieldProfile>(m, "FieldProfile")
      .def(py::init<>())
      .def_readwrite("segments", &FieldProfile::segments)
      .def("value_at", &FieldProfile::value_at)
      .def("validate", &FieldProfile::validate);

  py::class_<RamseyConfig>(m, "RamseyConfig")
      .def(py::init<double, double, double>(), py::arg("t_ramsey"), py::arg("aux_phase") = 0.0,
           py::arg("detuning") = 0.0)
      .def_readwrite("t_ramsey", &RamseyConfig::t_ramsey)
      .def_readwrite("aux_phase", &RamseyConfig::aux_phase)
      .def_readwrite("detuning", &RamseyConfig::detuning);

  py::class_<MeasurementOutcome>(m, "MeasurementOutcome")
      .def_readonly("p_e", &MeasurementOutcome::p_e)
      .def_readonly("n_eff", &MeasurementOutcome::n_eff)
      .def_readonly("cycle_index", &MeasurementOutcome::cycle_index)
      .def_readonly("wall_time", &MeasurementOutcome::wall_time);

  py::class_<RngStream>(m, "RngStream")
      .def(py::init<std::uint64_t>())
      .def_static("for_run", &RngStream::for_run)
      .def("uniform", py::overload_cast<>(&RngStream::uniform))
      .def("binomial", &RngStream::binomial);

  m.def("rabi_at_fall", &rabi_at_fall);
  m.def("alpha_factor", &alpha_factor);
  m.def("transmitted_signal", &transmitted_signal);
  m.def("ideal_probability", &ideal_probability);
  m.def("effective_atoms", &effective_atoms);
  m.def("sample_measurement", &sample_measurement, py::arg("params"), py::arg("cfg"),
        py::arg("profile"), py::arg("wall_time"), py::arg("rng"), py::arg("cycle_index") = 0);
  m.def("normalize_raw", &normalize_raw);

  py::class_<Estimate>(m, "Estimate")
      .def(py::init<double, double>(), py::arg("b_est"), py::arg("delta_b"))
      .def_readwrite("b_est", &Estimate::b_est)
      .def_readwrite("delta_b", &Estimate::delta_b);

  py::class_<Posterior>(m, "Posterior")
      .def("b_lo", &Posterior::b_lo)
      .def("b_hi", &Posterior::b_hi)
      .def("spacing", &Posterior::spacing)
      .def("size", &Posterior::size)
      .def("grid_b", &Posterior::grid_b)
      .def("density", &Posterior::density)
      .def("integral", &Posterior::integral);

  m.def("uniform_prior", &uniform_prior);
  m.def("gaussian_prior", &gaussian_prior);
  m.def("likelihood", &likelihood);
  m.def(
      "bayes_update",
      [](const Posterior& prior, const PhysicsParams& p, const MeasurementOutcome& o,
         const RamseyConfig& c) {
        auto res = bayes_update(prior, p, o, c);
        return py::make_tuple(res.posterior, res.degenerate);
      },
      "Returns (posterior, degenerate_flag)");
  m.def("moments", &moments);
  m.def("recentre", &recentre, py::arg("post"), py::arg("est"), py::arg("t_ramsey"),
        py::arg("params"), py::arg("n_points") = 0);

  py::class_<Schedule>(m, "Schedule")
      .def(py::init<>())
      .def_readwrite("growth", &Schedule::growth)
      .def_readwrite("t_min", &Schedule::t_min)
      .def_readwrite("t_max", &Schedule::t_max)
      .def_readwrite("iterations", &Schedule::iterations)
      .def("ramp_length", &Schedule::ramp_length)
      .def("first_time", &Schedule::first_time)
      .def("time_at", &Schedule::time_at);

  py::class_<PhaseSearchConfig>(m, "PhaseSearchConfig")
      .def(py::init<>())
      .def_readwrite("n_phases", &PhaseSearchConfig::n_phases)
      .def_readwrite("n_pe", &PhaseSearchConfig::n_pe);

  m.def("utility", &utility);
  m.def("optimal_phase", &optimal_phase);

  py::class_<LockState>(m, "LockState")
      .def(py::init<>())
      .def_readwrite("freq_offset", &LockState::freq_offset)
      .def_readwrite("loop_gain", &LockState::loop_gain)
      .def_readwrite("cycle_count", &LockState::cycle_count)
      .def_readonly("lock_loss", &LockState::lock_loss);

  py::class_<LockStepResult>(m, "LockStepResult")
      .def_readonly("state", &LockStepResult::state)
      .def_readonly("b_estimate", &LockStepResult::b_estimate)
      .def_readonly("error_signal", &LockStepResult::error_signal);

  m.def("lock_step", &lock_step);
  m.def("frequentist_sensitivity_avg", &frequentist_sensitivity_avg);
  m.def("frequentist_sensitivity_interrogation", &frequentist_sensitivity_interrogation);
  m.def("frequentist_uncertainty", &frequentist_uncertainty);

  py::class_<BayesAsymptotics>(m, "BayesAsymptotics")
      .def_readonly("coefficient", &BayesAsymptotics::coefficient)
      .def_readonly("n_plateau", &BayesAsymptotics::n_plateau)
      .def_readonly("eta_limit", &BayesAsymptotics::eta_limit)
      .def_readonly("eta_avg_limit", &BayesAsymptotics::eta_avg_limit)
      .def("delta_b_limit", &BayesAsymptotics::delta_b_limit);

  m.def("bayes_asymptotics", &bayes_asymptotics);
  m.def("gain_db", &gain_db);

  py::class_<RunRow>(m, "RunRow")
      .def_readonly("iteration", &RunRow::iteration)
      .def_readonly("t_i", &RunRow::t_i)
      .def_readonly("phi_c", &RunRow::phi_c)
      .def_readonly("p_e", &RunRow::p_e)
      .def_readonly("n_eff", &RunRow::n_eff)
      .def_readonly("b_est", &RunRow::b_est)
      .def_readonly("delta_b", &RunRow::delta_b)
      .def_readonly("t_total", &RunRow::t_total)
      .def_readonly("tau", &RunRow::tau)
      .def_readonly("eta_t_pt", &RunRow::eta_t_pt)
      .def_readonly("eta_tau_pt", &RunRow::eta_tau_pt);

  py::class_<RunLog>(m, "RunLog")
      .def_readonly("seed", &RunLog::seed)
      .def_readonly("run_index", &RunLog::run_index)
      .def_readonly("rows", &RunLog::rows)
      .def_readonly("degenerate_updates", &RunLog::degenerate_updates)
      .def_readonly("aliased", &RunLog::aliased);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("scenario", &ScenarioConfig::scenario)
      .def_readwrite("seed", &ScenarioConfig::seed)
      .def_readwrite("runs", &ScenarioConfig::runs)
      .def_readwrite("physics", &ScenarioConfig::physics)
      .def_readwrite("schedule", &ScenarioConfig::schedule)
      .def_readwrite("phase_search", &ScenarioConfig::phase_search)
      .def_readwrite("grid_points", &ScenarioConfig::grid_points)
      .def_readwrite("field", &ScenarioConfig::field)
      .def_readwrite("detuning", &ScenarioConfig::detuning)
      .def_readwrite("prior_center", &ScenarioConfig::prior_center)
      .def_readwrite("track_blocks", &ScenarioConfig::track_blocks)
      .def_readwrite("lock_t_ramsey", &ScenarioConfig::lock_t_ramsey)
      .def_readwrite("lock_gain", &ScenarioConfig::lock_gain)
      .def_readwrite("lock_pairs", &ScenarioConfig::lock_pairs);

  m.def("run_bayesian", &run_bayesian, py::arg("cfg"), py::arg("run_index") = 0);
  m.def("run_track", &run_track, py::arg("cfg"), py::arg("run_index") = 0);
  m.def("run_frequentist", &run_frequentist, py::arg("cfg"), py::arg("run_index") = 0);
  m.def("parse_config", &parse_config);
  m.def("serialize_config", &serialize_config);
  m.def("run_scenario_to_dir", &run_scenario_to_dir);
  m.def("default_track_profile", &default_track_profile, py::arg("b0_nt") = 30.0);
}
