#include <fstream>
#include <map>

#include "canids/traffic.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace canids;

namespace {

TrafficScenario one_id(std::uint64_t period_us, double duration, double jitter) {
  TrafficScenario s;
  s.ecus = {EcuProfile{"ecu", {AssignedId{CanId(0x123), period_us}}}};
  s.duration = duration;
  s.jitter_fraction = jitter;
  return s;
}

}  // namespace

TEST_CASE("jitter-free schedule starts at zero") {
  const auto reqs = generate_offered_traffic(one_id(10'000, 1.0, 0.0));
  REQUIRE(reqs.size() == 100);
  for (std::size_t k = 0; k < reqs.size(); ++k) {
    CHECK(reqs[k].frame.timestamp_us == k * 10'000);
    CHECK(reqs[k].frame.id == CanId(0x123));
    CHECK_FALSE(reqs[k].malicious);
  }
}

TEST_CASE("offered traffic is deterministic per seed") {
  auto s = make_default_scenario();
  s.duration = 5;
  s.rng_seed = 99;
  CHECK(generate_offered_traffic(s) == generate_offered_traffic(s));
  auto t = s;
  t.rng_seed = 100;
  CHECK_FALSE(generate_offered_traffic(s) == generate_offered_traffic(t));
}

TEST_CASE("default scenario per-id counts match duration over period") {
  auto s = make_default_scenario();
  s.rng_seed = 3;
  const auto reqs = generate_offered_traffic(s);
  std::map<CanId, std::size_t> seen;
  for (const auto& r : reqs) ++seen[r.frame.id];
  REQUIRE(seen.size() == 223);
  for (const auto& ecu : s.ecus)
    for (const auto& a : ecu.assigned_ids) {
      const double expected = s.duration * 1e6 / static_cast<double>(a.period_us);
      CHECK(std::abs(static_cast<double>(seen[a.id]) - expected) <= 1.0);
    }
  for (std::size_t i = 1; i < reqs.size(); ++i) REQUIRE(reqs[i - 1].frame.timestamp_us <= reqs[i].frame.timestamp_us);
}

TEST_CASE("default scenario shape") {
  const auto s = make_default_scenario();
  CHECK(s.ecus.size() == 24);
  const auto ids = s.benign_ids();
  CHECK(ids.size() == 223);
  CHECK(ids.front() >= CanId(0x080));
  CHECK(offered_utilisation(s) > 0.3);
  CHECK(offered_utilisation(s) < 0.9);
}

TEST_CASE("scenario validation") {
  TrafficScenario empty;
  CHECK_THROWS_WITH_AS(validate(empty), "empty scenario", Error);
  CHECK_THROWS_AS(generate_offered_traffic(empty), Error);
  CHECK_THROWS_AS(validate(one_id(0, 1, 0)), Error);
  CHECK_THROWS_AS(validate(one_id(1000, 0, 0)), Error);
}

TEST_CASE("log line grammar") {
  const auto f = parse_log_line("1000,2A5,2,BEEF");
  CHECK(f.timestamp_us == 1000);
  CHECK(f.id == CanId(0x2A5));
  CHECK(f.dlc == 2);
  CHECK(f.payload == std::vector<std::uint8_t>{0xBE, 0xEF});
  CHECK(format_log_line(f) == "1000,2A5,2,BEEF");
  CHECK_THROWS_WITH_AS(parse_log_line("1000,FFF,0,"), doctest::Contains("extended ID unsupported"), Error);
  CHECK_THROWS_AS(parse_log_line("1000,2A5,2,BE"), Error);
  CHECK_THROWS_AS(parse_log_line("1000,2A5"), Error);
  CHECK_THROWS_AS(parse_log_line("abc,2A5,0,"), Error);
}

TEST_CASE("log write/read round trip") {
  testing::TempDir dir;
  auto s = make_default_scenario();
  s.duration = 2;
  s.rng_seed = 5;
  std::vector<CanFrame> frames;
  for (const auto& r : generate_offered_traffic(s)) {
    auto f = r.frame;
    f.source.clear();
    frames.push_back(f);
  }
  write_log(frames, dir / "log.csv");
  CHECK(read_log(dir / "log.csv") == frames);
}

TEST_CASE("malformed log lines report their line number") {
  testing::TempDir dir;
  {
    std::ofstream out(dir / "bad.csv");
    out << "0,100,0,\n5,200,1,\n";
  }
  CHECK_THROWS_WITH_AS(read_log(dir / "bad.csv"), doctest::Contains(":2"), Error);
  CHECK_THROWS_AS(read_log(dir / "missing.csv"), Error);
}

TEST_CASE("scenario json round trip and error paths") {
  auto s = make_default_scenario();
  s.rng_seed = 11;
  const auto back = traffic_scenario_from_json(to_json(s));
  CHECK(to_json(back) == to_json(s));
  CHECK(generate_offered_traffic(back) == generate_offered_traffic(s));

  auto j = to_json(s);
  j["ecus"][3]["assigned_ids"][0]["period"] = 0;
  CHECK_THROWS_WITH_AS(traffic_scenario_from_json(j), doctest::Contains("/ecus/3/assigned_ids/0/period"), Error);
  j = to_json(s);
  j["ecus"][1]["assigned_ids"][2]["id"] = "0x900";
  CHECK_THROWS_WITH_AS(traffic_scenario_from_json(j), doctest::Contains("/ecus/1/assigned_ids/2/id"), Error);
}
