#include <fstream>
#include <map>

#include "canids/attacks.hpp"
#include "canids/evaluation.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace canids;

TEST_CASE("single id schedule") {
  AttackScenario a{AttackKind::SingleId, {CanId(0x010)}, 100};
  a.duration = 10;
  const auto reqs = generate_attack(a);
  REQUIRE(reqs.size() == 1000);
  for (std::size_t k = 0; k < reqs.size(); ++k) {
    CHECK(reqs[k].frame.id == CanId(0x010));
    CHECK(reqs[k].frame.timestamp_us == k * 10'000);
    CHECK(reqs[k].malicious);
    CHECK(reqs[k].frame.dlc == 8);
  }
}

TEST_CASE("flooding draws high-priority ids reproducibly") {
  AttackScenario a{AttackKind::Flooding, {}, 100};
  a.duration = 1;
  a.rng_seed = 12;
  const auto reqs = generate_attack(a);
  REQUIRE(reqs.size() == 100);
  std::map<CanId, int> seen;
  for (const auto& r : reqs) {
    CHECK(r.frame.id <= CanId(kFloodIdMax));
    ++seen[r.frame.id];
  }
  CHECK(seen.size() > 1);
  CHECK(generate_attack(a) == reqs);
}

TEST_CASE("multi id alternates round robin") {
  AttackScenario a{AttackKind::MultiId, {CanId(0x010), CanId(0x020)}, 100};
  a.duration = 1;
  const auto reqs = generate_attack(a);
  REQUIRE(reqs.size() == 100);
  int first = 0;
  for (std::size_t k = 0; k < reqs.size(); ++k) {
    CHECK(reqs[k].frame.id == (k % 2 == 0 ? CanId(0x010) : CanId(0x020)));
    first += reqs[k].frame.id == CanId(0x010) ? 1 : 0;
  }
  CHECK(first == 50);
}

TEST_CASE("weak attacker stays inside its assigned set") {
  const auto base = make_default_scenario();
  const auto ids = weak_attacker_ids(base, 3);
  REQUIRE(ids.size() == 3);
  CHECK(ids.front() == base.benign_ids().front());
  AttackScenario a{AttackKind::WeakFixed, ids, 100};
  a.duration = 2;
  for (const auto& r : generate_attack(a)) CHECK(std::find(ids.begin(), ids.end(), r.frame.id) != ids.end());
}

TEST_CASE("attack validation") {
  AttackScenario a{AttackKind::MultiId, {CanId(0x010)}, 100};
  CHECK_THROWS_AS(validate(a), Error);
  a.ids = {CanId(1), CanId(2), CanId(3), CanId(4), CanId(5)};
  CHECK_THROWS_AS(validate(a), Error);
  AttackScenario w{AttackKind::WeakFixed, {}, 100};
  CHECK_THROWS_AS(validate(w), Error);
  AttackScenario f{AttackKind::SingleId, {CanId(0x010)}, 0};
  CHECK_THROWS_AS(validate(f), Error);
  f.frequency = 10;
  f.duration = 0;
  CHECK_THROWS_AS(validate(f), Error);
  CHECK(parse_attack_kind("MultiId") == AttackKind::MultiId);
  CHECK_THROWS_AS(parse_attack_kind("Spoof"), Error);
}

TEST_CASE("merge contract") {
  AttackScenario a{AttackKind::SingleId, {CanId(0x010)}, 100};
  a.duration = 1;
  const auto mal = generate_attack(a);
  auto s = make_default_scenario();
  s.duration = 1;
  const auto ben = generate_offered_traffic(s);
  CHECK(merge_streams(ben, {}) == ben);
  CHECK(merge_streams({}, mal) == mal);
  const auto merged = merge_streams(ben, mal);
  auto sorted = ben;
  sorted.insert(sorted.end(), mal.begin(), mal.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const TxRequest& x, const TxRequest& y) {
    return x.frame.timestamp_us < y.frame.timestamp_us;
  });
  CHECK(merged == sorted);
}

TEST_CASE("default sweep ids") {
  const auto ids = default_sweep_ids();
  REQUIRE(ids.size() == 15);
  CHECK(ids.front() == CanId(0x000));
  CHECK(ids.back() == CanId(0x7FF));
  CHECK(std::is_sorted(ids.begin(), ids.end()));
}

TEST_CASE("attack json round trip and truth sidecar") {
  AttackScenario a{AttackKind::MultiId, {CanId(0x010), CanId(0x020)}, 50};
  a.start = 2;
  a.rng_seed = 4;
  CHECK(to_json(attack_scenario_from_json(to_json(a))) == to_json(a));
  auto j = to_json(a);
  j["kind"] = "Bogus";
  CHECK_THROWS_AS(attack_scenario_from_json(j), Error);

  CHECK(truth_path_for("run/log.csv") == std::filesystem::path("run/log.csv.truth.csv"));
  auto s = make_default_scenario();
  s.duration = 2;
  a.start = 0;
  a.duration = 2;
  const auto res = run_bus(merge_streams(generate_offered_traffic(s), generate_attack(a)), s.baud_rate);
  testing::TempDir dir;
  write_truth(res, dir / "t.csv");
  std::ifstream in(dir / "t.csv");
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK((line.ends_with(",010") || line.ends_with(",020")));
  }
  CHECK(rows == res.wins("attacker"));
}
