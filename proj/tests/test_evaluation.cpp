#include <sstream>

#include "canids/evaluation.hpp"
#include "doctest.h"

using namespace canids;

namespace {

EvaluationConfig small_config() {
  EvaluationConfig c;
  c.template_measurements = 10;
  c.trials_per_scenario = 2;
  c.sweep_trials = 1;
  c.frequencies = {100};
  c.sweep_ids = {CanId(0x000), CanId(0x200), CanId(0x7FF)};
  return c;
}

}  // namespace

TEST_CASE("seed derivation is stable and spreads") {
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
}

TEST_CASE("N_m identity") {
  SimulationResult all;
  all.per_source["attacker"] = SourceCounters{1000, 1000, 0};
  CHECK(verify_nm_identity(all, "attacker", 100, 10));
  SimulationResult half;
  half.per_source["attacker"] = SourceCounters{1000, 500, 500};
  CHECK(verify_nm_identity(half, "attacker", 100, 10));
  SimulationResult off;
  off.per_source["attacker"] = SourceCounters{1200, 500, 0};
  CHECK_FALSE(verify_nm_identity(off, "attacker", 100, 10));
  CHECK_THROWS_WITH_AS(verify_nm_identity(all, "attacker", 100, 0), "empty attack window", Error);
}

TEST_CASE("N_m identity holds on a simulated mid-priority attack") {
  const auto base = make_default_scenario();
  const auto cfg = small_config();
  const auto tmpl = build_baseline_template(base, 10, cfg.kappa, cfg.window, 3);
  TrialSpec spec{AttackScenario{AttackKind::SingleId, {CanId(0x480)}, 100}, 1, full_id_pool()};
  const auto out = run_trial(base, tmpl, spec, 5, cfg);
  CHECK(out.nm_identity);
  CHECK(out.attempts == 500);
  CHECK(out.wins == out.injected);
  CHECK(out.wins < out.attempts);
  CHECK(out.soundness_violations == 0);
  CHECK(out.ordering_violations == 0);
}

TEST_CASE("spearman with ties") {
  CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(spearman({1, 2, 3, 4}, {1, 1, 2, 2}) == doctest::Approx(0.894427191));
  CHECK_THROWS_AS(spearman({1}, {1}), Error);
}

TEST_CASE("small table run is deterministic and self-consistent") {
  const auto base = make_default_scenario();
  const auto cfg = small_config();
  const auto a = run_scenario_table(base, cfg, 9);
  const auto b = run_scenario_table(base, cfg, 9);
  CHECK(to_json(a) == to_json(b));
  CHECK(a.config_fingerprint == b.config_fingerprint);
  CHECK(a.row("Flooding", 100).detection_rate == 1.0);
  CHECK_FALSE(a.row("Flooding", 100).inferring_accuracy.has_value());
  CHECK(a.row("SingleId", 100).per_id.size() == 3);
  CHECK_THROWS_AS(a.row("Nope", 100), Error);

  auto serial_cfg = cfg;
  serial_cfg.parallel = false;
  CHECK(to_json(run_scenario_table(base, serial_cfg, 9))["rows"] == to_json(a)["rows"]);

  std::ostringstream table;
  render_table(table, a);
  CHECK(table.str().find("MultiId-3") != std::string::npos);
}

TEST_CASE("evaluation config json round trip") {
  const auto c = small_config();
  CHECK(to_json(evaluation_config_from_json(to_json(c))) == to_json(c));
  auto j = to_json(c);
  j["trials_per_scenario"] = -3;
  CHECK_THROWS_AS(evaluation_config_from_json(j), Error);
}
