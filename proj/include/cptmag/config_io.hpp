#pragma once

#include <string>

#include "cptmag/scenario.hpp"

namespace cptmag {

// Key-value config text with flat [sections]. Unknown keys are errors;
// missing keys keep their defaults. serialize_config emits the canonical
// form: every key, fixed order, round-trip-exact number formatting.
ScenarioConfig parse_config(const std::string& text);
std::string serialize_config(const ScenarioConfig& cfg);

ScenarioConfig load_config(const std::string& path);

// Shortest round-trip decimal form of a double (17 significant digits).
std::string format_double(double v);

// Machine-readable outputs: one CSV per table plus a JSON sidecar echoing the
// resolved config, seed and schema version.
void write_runlog_csv(const std::string& path, const RunLog& log);
void write_scaling_csv(const std::string& path, const ScalingTable& table);
void write_compare_csv(const std::string& table_path, const std::string& sweep_path,
                       const CompareResult& result);
void write_coherence_csv(const std::string& path, const CoherenceScan& scan);
void write_sidecar_json(const std::string& path, const ScenarioConfig& cfg);

// Runs the configured scenario and writes its artifacts into out_dir.
// Returns the paths written.
std::vector<std::string> run_scenario_to_dir(const ScenarioConfig& cfg,
                                             const std::string& out_dir);

}  // namespace cptmag
