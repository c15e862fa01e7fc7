#include <fstream>
#include <sstream>

#include "canids/cli.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace canids;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "canids");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t lines(const std::filesystem::path& p) {
  const auto text = slurp(p);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

// Default vehicle shortened to `duration` seconds, optionally with attacks.
std::filesystem::path write_scenario(const testing::TempDir& dir, const std::string& name, double duration,
                                     json attacks = json::array()) {
  const auto path = dir / name;
  REQUIRE(run({"scenario", "--out", path.string()}).code == 0);
  json j = json::parse(slurp(path));
  j["duration"] = duration;
  if (!attacks.empty()) j["attacks"] = attacks;
  std::ofstream(path) << j.dump(2);
  return path;
}

json single_id_attack() {
  return json::array({{{"kind", "SingleId"}, {"ids", {"0x010"}}, {"frequency", 100}, {"start", 2}, {"duration", 5}}});
}

}  // namespace

TEST_CASE("simulate is byte-identical for a fixed seed") {
  testing::TempDir dir;
  const auto sc = write_scenario(dir, "s.json", 5);
  REQUIRE(run({"simulate", "--scenario", sc.string(), "--out", (dir / "a.csv").string(), "--seed", "7"}).code == 0);
  REQUIRE(run({"simulate", "--scenario", sc.string(), "--out", (dir / "b.csv").string(), "--seed", "7"}).code == 0);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK_FALSE(std::filesystem::exists(dir / "a.csv.truth.csv"));
}

TEST_CASE("simulate with an attack writes one truth row per attacker win") {
  testing::TempDir dir;
  const auto sc = write_scenario(dir, "s.json", 8, single_id_attack());
  const auto log = dir / "log.csv";
  const auto r = run({"simulate", "--scenario", sc.string(), "--out", log.string(), "--stats",
                      (dir / "stats.json").string(), "--seed", "3"});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("# canids simulate seed=3") != std::string::npos);
  const auto stats = json::parse(slurp(dir / "stats.json"));
  CHECK(lines(dir / "log.csv.truth.csv") == stats["sources"]["attacker"]["wins"].get<std::size_t>());
  CHECK(lines(dir / "log.csv.truth.csv") == 500);
}

TEST_CASE("baseline then detect finds 0x010") {
  testing::TempDir dir;
  const auto clean = write_scenario(dir, "clean.json", 5);
  const auto attacked = write_scenario(dir, "attack.json", 8, single_id_attack());
  REQUIRE(run({"baseline", "--scenario", clean.string(), "--out", (dir / "t.json").string(), "--seed", "1"}).code == 0);
  CHECK(run({"baseline", "--scenario", attacked.string(), "--out", (dir / "x.json").string()}).err ==
        "error: baseline must be attack-free\n");

  REQUIRE(run({"simulate", "--scenario", attacked.string(), "--out", (dir / "log.csv").string(), "--seed", "2"}).code == 0);
  const auto r = run({"detect", "--log", (dir / "log.csv").string(), "--template", (dir / "t.json").string(), "--out",
                      (dir / "d").string()});
  REQUIRE(r.code == 0);
  const auto inf = json::parse(slurp(dir / "d.inference.json"));
  REQUIRE(inf["alerts"].get<int>() >= 4);
  int with_truth = 0;
  for (const auto& a : inf["alerted_windows"]) {
    const auto& c = a["candidates"];
    with_truth += std::find(c.begin(), c.end(), "0x010") != c.end() ? 1 : 0;
  }
  CHECK(with_truth >= 4);
  CHECK(lines(dir / "d.verdicts.csv") == inf["windows"].get<std::size_t>() + 1);

  REQUIRE(run({"simulate", "--scenario", clean.string(), "--out", (dir / "c.csv").string(), "--seed", "9"}).code == 0);
  const auto quiet = run({"detect", "--log", (dir / "c.csv").string(), "--template", (dir / "t.json").string(), "--out",
                          (dir / "q").string()});
  REQUIRE(quiet.code == 0);
  CHECK(json::parse(slurp(dir / "q.inference.json"))["alerts"] == 0);
}

TEST_CASE("evaluate is byte-identical for a fixed seed") {
  testing::TempDir dir;
  const auto sc = dir / "e.json";
  REQUIRE(run({"scenario", "--out", sc.string()}).code == 0);
  json j = json::parse(slurp(sc));
  j["evaluation"] = {{"template_measurements", 10}, {"trials_per_scenario", 1}, {"sweep_trials", 1},
                     {"frequencies", {100}},        {"sweep_ids", {"0x000", "0x400"}}};
  std::ofstream(sc) << j.dump();
  REQUIRE(run({"evaluate", "--scenario", sc.string(), "--out", (dir / "a").string(), "--seed", "4"}).code == 0);
  REQUIRE(run({"evaluate", "--scenario", sc.string(), "--out", (dir / "b").string(), "--seed", "4"}).code == 0);
  for (const char* ext : {".json", ".txt", ".sweep.csv"}) CHECK(slurp(dir / ("a" + std::string(ext))) == slurp(dir / ("b" + std::string(ext))));
}

TEST_CASE("omitted seed is drawn and printed") {
  testing::TempDir dir;
  const auto sc = write_scenario(dir, "s.json", 1);
  const auto r = run({"simulate", "--scenario", sc.string(), "--out", (dir / "a.csv").string()});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("seed=") != std::string::npos);
}

TEST_CASE("errors are one line with a non-zero exit") {
  testing::TempDir dir;
  const auto missing = run({"simulate", "--scenario", (dir / "none.json").string(), "--out", (dir / "a.csv").string()});
  CHECK(missing.code == 1);
  CHECK(missing.err.rfind("error: ", 0) == 0);
  CHECK(std::count(missing.err.begin(), missing.err.end(), '\n') == 1);

  std::ofstream(dir / "bad.json") << R"({"ecus": [{"name": "e", "assigned_ids": [{"id": "0x900", "period": 1000}]}]})";
  const auto bad = run({"simulate", "--scenario", (dir / "bad.json").string(), "--out", (dir / "a.csv").string()});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("/ecus/0/assigned_ids/0/id") != std::string::npos);

  CHECK(run({"frobnicate"}).code != 0);
  CHECK(run({}).code != 0);
}
