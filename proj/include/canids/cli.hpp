#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

#include "canids/attacks.hpp"
#include "canids/evaluation.hpp"
#include "canids/traffic.hpp"

namespace canids {

/// Scenario file: TrafficScenario fields at top level, plus optional
/// `attacks` (array of AttackScenario) and `evaluation` (EvaluationConfig).
struct ScenarioFile {
  TrafficScenario traffic;
  std::vector<AttackScenario> attacks;
  std::optional<EvaluationConfig> evaluation;
};

ScenarioFile load_scenario_file(const std::filesystem::path& path);
nlohmann::json to_json(const ScenarioFile& file);

/// Entry point for the `canids` tool. Returns the process exit code; on
/// failure writes one `error: <message>` line to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace canids
