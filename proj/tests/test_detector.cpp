#include <sstream>

#include "canids/attacks.hpp"
#include "canids/detector.hpp"
#include "canids/evaluation.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace canids;

namespace {

BitVector filled(double v) {
  BitVector b;
  b.fill(v);
  return b;
}

const GoldenTemplate& default_template() {
  static const GoldenTemplate t = build_baseline_template(make_default_scenario(), 35, kDefaultKappa, WindowPolicy{}, 1);
  return t;
}

}  // namespace

TEST_CASE("template arithmetic for one bit") {
  std::vector<BitVector> H{filled(0.5), filled(0.5), filled(0.5)}, p{filled(0.5), filled(0.5), filled(0.5)};
  H[0][4] = 0.40;
  H[1][4] = 0.42;
  H[2][4] = 0.41;
  const auto t = build_template(H, p, 5.0);
  CHECK(t.mean_H[4] == doctest::Approx(0.41).epsilon(1e-12));
  CHECK(t.range[4] == doctest::Approx(0.02).epsilon(1e-12));
  CHECK(t.threshold[4] == doctest::Approx(0.10).epsilon(1e-12));
  CHECK(t.measurement_count == 3);
}

TEST_CASE("identical measurements fall back to the floor with warnings") {
  const std::vector<BitVector> H{filled(0.7), filled(0.7)}, p{filled(0.3), filled(0.3)};
  const auto t = build_template(H, p);
  for (int i = 0; i < kIdBits; ++i) {
    CHECK(t.range[i] == 0.0);
    CHECK(t.threshold[i] == kThresholdFloor);
    CHECK(t.direction_threshold[i] == kDirectionFloor);
  }
  CHECK(t.warnings.size() >= 11);
  CHECK(t.warnings.front().find("bit 1") != std::string::npos);
}

TEST_CASE("template input validation") {
  const std::vector<BitVector> one{filled(0.5)};
  CHECK_THROWS_WITH_AS(build_template(one, one), doctest::Contains("cannot estimate range"), Error);
  const std::vector<BitVector> two{filled(0.5), filled(0.5)}, three{filled(0.5), filled(0.5), filled(0.5)};
  CHECK_THROWS_AS(build_template(two, three), Error);
  CHECK_THROWS_AS(build_template(two, two, 0.0), Error);
  CHECK_FALSE(build_template(two, two, 20.0).warnings.empty());
}

TEST_CASE("baseline template from 35 measurements has finite thresholds") {
  const auto& t = default_template();
  CHECK(t.measurement_count == 35);
  for (int i = 0; i < kIdBits; ++i) {
    CHECK(std::isfinite(t.threshold[i]));
    CHECK(t.threshold[i] >= kThresholdFloor);
  }
}

TEST_CASE("a window equal to the template means does not alert") {
  // Counts chosen so p is exactly representable: template built from the same window twice.
  const auto w = bit_stats(testing::frames_of({0x2A5, 0x100, 0x3FF, 0x001}));
  const std::vector<BitStats> ms{w, w};
  const auto t = build_template(ms);
  const auto v = detect(w, t);
  CHECK_FALSE(v.alert);
  CHECK(v.flagged_bits.empty());
  for (int i = 0; i < kIdBits; ++i) {
    CHECK(v.deviation[i] == 0.0);
    CHECK(v.p_deviation[i] == 0.0);
  }
}

TEST_CASE("clean windows rarely alert") {
  CHECK(clean_alert_rate(make_default_scenario(), default_template(), 100, 77) <= 0.02);
}

TEST_CASE("heavy 0x010 injection flags high bits") {
  const auto& t = default_template();
  auto s = make_default_scenario();
  s.duration = 3;
  s.rng_seed = 31;
  AttackScenario a{AttackKind::SingleId, {CanId(0x010)}, 100};
  a.start = 1;
  a.duration = 1;
  const auto res = run_bus(merge_streams(generate_offered_traffic(s), generate_attack(a)), s.baud_rate);
  const auto ws = windowed_stats(res.bus_log, t.policy, 0);
  const auto verdicts = detect_all(ws.windows, t, t.policy);
  REQUIRE(verdicts.size() >= 2);
  CHECK_FALSE(verdicts[0].alert);
  REQUIRE(verdicts[1].alert);
  CHECK(std::find(verdicts[1].flagged_bits.begin(), verdicts[1].flagged_bits.end(), 1) != verdicts[1].flagged_bits.end());
  for (int bit = 0; bit < 4; ++bit) CHECK(verdicts[1].p_deviation[bit] < 0);
}

TEST_CASE("detect_all rejects a mismatched window policy") {
  const auto& t = default_template();
  const std::vector<BitStats> none;
  CHECK_THROWS_AS(detect_all(none, t, WindowPolicy{WindowMode::Time, 2.0, 2.0}), Error);
}

TEST_CASE("detection rate arithmetic") {
  std::vector<DetectionVerdict> v(3);
  v[0].alert = true;
  v[2].alert = true;
  const std::vector<std::uint64_t> injected{10, 10, 5};
  CHECK(detection_rate(v, injected) == doctest::Approx(0.6));
  for (auto& x : v) x.alert = true;
  CHECK(detection_rate(v, injected) == 1.0);
  for (auto& x : v) x.alert = false;
  CHECK(detection_rate(v, injected) == 0.0);
  const std::vector<std::uint64_t> zero{0, 0, 0};
  CHECK_THROWS_WITH_AS(detection_rate(v, zero), "no injections to score", Error);
}

TEST_CASE("template json round trip") {
  const auto& t = default_template();
  const auto back = template_from_json(to_json(t));
  CHECK(to_json(back) == to_json(t));
  auto j = to_json(t);
  j["threshold"] = nlohmann::json::array({1, 2});
  CHECK_THROWS_AS(template_from_json(j), Error);
}

TEST_CASE("verdict csv layout") {
  std::vector<DetectionVerdict> v(1);
  v[0].alert = true;
  v[0].flagged_bits = {1, 3};
  std::ostringstream out;
  write_verdicts_csv(out, v);
  const auto text = out.str();
  CHECK(text.rfind("window_id,alert,flagged_bits,d1,", 0) == 0);
  CHECK(text.find("\n0,1,1;3,") != std::string::npos);
}
