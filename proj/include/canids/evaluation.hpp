#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "canids/attacks.hpp"
#include "canids/bus_sim.hpp"
#include "canids/detector.hpp"
#include "canids/entropy.hpp"
#include "canids/inference.hpp"
#include "canids/traffic.hpp"
#include "json.hpp"

namespace canids {

/// Deterministic child seed for (master, stream, index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

struct EvaluationConfig {
  int template_measurements = 35;
  int trials_per_scenario = 50;
  int sweep_trials = 10;
  double kappa = kDefaultKappa;
  double floor = kThresholdFloor;
  int rank = kDefaultRank;
  WindowPolicy window{};
  std::vector<double> frequencies = {100, 50, 20, 10};
  std::vector<CanId> sweep_ids = default_sweep_ids();
  int weak_assigned = kDefaultWeakAssignedIds;
  double warmup = 1.0;           // seconds of clean traffic before the attack
  double attack_duration = 5.0;  // T0
  double tail = 1.0;             // clean traffic after the attack
  bool parallel = true;
};

nlohmann::json to_json(const EvaluationConfig& config);
EvaluationConfig evaluation_config_from_json(const nlohmann::json& j, const std::string& pointer = "");

/// Template from `count` independent clean runs, one window each, taken just
/// after the warm-up period.
GoldenTemplate build_baseline_template(const TrafficScenario& baseline, int count, double kappa,
                                       const WindowPolicy& policy, std::uint64_t seed, double floor = kThresholdFloor,
                                       double warmup = 1.0);

/// Fraction of `count` independent clean windows that raise an alert.
double clean_alert_rate(const TrafficScenario& baseline, const GoldenTemplate& tmpl, int count, std::uint64_t seed,
                        double warmup = 1.0);

/// Everything one attack trial produced, kept as counts so aggregation is exact.
struct TrialOutcome {
  std::uint64_t injected = 0;  // malicious frames on the bus
  std::uint64_t detected = 0;  // of those, inside alerted windows
  std::uint64_t attempts = 0;
  std::uint64_t wins = 0;
  std::uint64_t offered = 0;   // attacker requests generated
  bool nm_identity = true;
  std::uint64_t clean_windows = 0;
  std::uint64_t clean_alerts = 0;
  std::vector<InferenceResult> inferences;  // one per alerted attack window
  std::uint64_t soundness_violations = 0;   // candidates breaking their own constraint
  std::uint64_t ordering_violations = 0;    // candidate lists not strictly ascending
};

struct TrialSpec {
  AttackScenario attack;
  int k = 1;                      // injected ids scored by inference; 0 = no inference
  std::vector<CanId> pool;        // inference id pool
};

TrialOutcome run_trial(const TrafficScenario& baseline, const GoldenTemplate& tmpl, const TrialSpec& spec,
                       std::uint64_t seed, const EvaluationConfig& config);

/// Checks |wins - Ir * f * T0| <= 1 for `source`. Throws "empty attack window" when f * T0 == 0.
bool verify_nm_identity(const SimulationResult& result, const std::string& source, double frequency, double T0);

struct SweepRow {
  CanId id;
  double injection_rate = 0;
  double detection_rate = 0;
  std::uint64_t wins = 0;
  std::uint64_t attempts = 0;
};

struct ScenarioRow {
  std::string name;  // Flooding, SingleId, MultiId-2, MultiId-3, MultiId-4, WeakFixed
  double frequency = 0;
  double detection_rate = 0;
  std::optional<double> inferring_accuracy;  // absent for Flooding
  double injection_rate = 0;
  int trials = 0;
  std::uint64_t injected = 0;
  std::uint64_t detections_scored = 0;
  double clean_alert_rate = 0;
  bool nm_identity = true;
  std::uint64_t soundness_violations = 0;
  std::uint64_t ordering_violations = 0;
  std::vector<SweepRow> per_id;  // SingleId only: one row per swept id
};

struct EvaluationReport {
  std::vector<ScenarioRow> rows;
  std::vector<SweepRow> sweep;
  double sweep_frequency = 100;
  GoldenTemplate tmpl;
  double baseline_utilisation = 0;
  std::string config_fingerprint;

  const ScenarioRow& row(const std::string& name, double frequency) const;
};

/// One row per scenario: Flooding, SingleId (averaged over the swept ids),
/// MultiId with 2/3/4 ids and WeakFixed, at every configured frequency.
EvaluationReport run_scenario_table(const TrafficScenario& baseline, const EvaluationConfig& config, std::uint64_t seed);

/// Ir and Dr for a SingleId attack at each id (sorted ascending).
std::vector<SweepRow> run_id_sweep(const TrafficScenario& baseline, const GoldenTemplate& tmpl,
                                     const std::vector<CanId>& ids, double frequency, std::uint64_t seed,
                                     const EvaluationConfig& config);

/// SingleId rows for one id at several frequencies (pooled over `trials`).
std::vector<SweepRow> run_frequency_series(const TrafficScenario& baseline, const GoldenTemplate& tmpl, CanId id,
                                           const std::vector<double>& frequencies, int trials, std::uint64_t seed,
                                           const EvaluationConfig& config);

/// The compromised ECU for WeakFixed: the owner of the smallest benign id,
/// restricted to its `count` smallest assigned ids.
std::vector<CanId> weak_attacker_ids(const TrafficScenario& baseline, int count);

std::string fingerprint(const nlohmann::json& inputs);

nlohmann::json to_json(const EvaluationReport& report);
void render_table(std::ostream& out, const EvaluationReport& report);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& sweep);

double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace canids
