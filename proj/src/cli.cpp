#include "canids/cli.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "canids/bus_sim.hpp"
#include "canids/detector.hpp"
#include "canids/entropy.hpp"
#include "canids/inference.hpp"
#include "json_util.hpp"

namespace canids {

namespace fs = std::filesystem;
using nlohmann::json;

ScenarioFile load_scenario_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scenario '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(path.string() + ": invalid JSON: " + e.what());
  }
  try {
    ScenarioFile f;
    f.traffic = traffic_scenario_from_json(j);
    if (j.contains("attacks")) {
      if (!j["attacks"].is_array()) detail::json_fail("/attacks", "expected array");
      for (std::size_t i = 0; i < j["attacks"].size(); ++i)
        f.attacks.push_back(attack_scenario_from_json(j["attacks"][i], "/attacks/" + std::to_string(i)));
    }
    if (j.contains("evaluation")) f.evaluation = evaluation_config_from_json(j["evaluation"], "/evaluation");
    return f;
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

json to_json(const ScenarioFile& file) {
  json j = to_json(file.traffic);
  if (!file.attacks.empty()) {
    j["attacks"] = json::array();
    for (const auto& a : file.attacks) j["attacks"].push_back(to_json(a));
  }
  if (file.evaluation) j["evaluation"] = to_json(*file.evaluation);
  return j;
}

namespace {

struct Options {
  fs::path scenario, log, tmpl, out, stats;
  std::optional<std::uint64_t> seed;
  double kappa = kDefaultKappa;
  std::string window_mode = "time";
  double window_length = 1.0;
  double window_stride = 1.0;
  int rank = kDefaultRank;
  int k = 1;
  int measurements = 35;
  int ids = 223;
  std::uint64_t vehicle_seed = 2016;
  int verbosity = 0;
};

std::uint64_t effective_seed(const Options& o) {
  if (o.seed) return *o.seed;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

WindowPolicy window_from(const Options& o) {
  WindowPolicy p{parse_window_mode(o.window_mode), o.window_length, o.window_stride};
  validate(p);
  return p;
}

void header(std::ostream& err, const std::string& command, const json& config, std::optional<std::uint64_t> seed) {
  err << "# canids " << command;
  if (seed) err << " seed=" << *seed;
  err << " config=" << config.dump() << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path with_suffix(const fs::path& prefix, const std::string& suffix) { return fs::path(prefix.string() + suffix); }

void cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  auto file = load_scenario_file(o.scenario);
  const auto seed = effective_seed(o);
  file.traffic.rng_seed = seed;
  for (std::size_t i = 0; i < file.attacks.size(); ++i) file.attacks[i].rng_seed = derive_seed(seed, 0xA77AC, i);
  header(err, "simulate", {{"scenario", o.scenario.string()}, {"out", o.out.string()}}, seed);

  RequestStream offered = generate_offered_traffic(file.traffic);
  for (const auto& a : file.attacks) offered = merge_streams(offered, generate_attack(a));
  const auto result = run_bus(offered, file.traffic.baud_rate, BusOptions{std::nullopt, false, false});
  write_log(result.bus_log, o.out);
  const auto truth = truth_path_for(o.out);
  if (!file.attacks.empty()) {
    write_truth(result, truth);
  } else if (fs::exists(truth)) {
    fs::remove(truth);
  }
  if (!o.stats.empty()) write_json(o.stats, source_stats_json(result));
  std::uint64_t injected = 0;
  for (bool m : result.malicious) injected += m ? 1 : 0;
  out << "transmitted " << result.bus_log.size() << " frames (" << injected << " injected) to " << o.out.string() << '\n';
}

void cmd_baseline(const Options& o, std::ostream& out, std::ostream& err) {
  const auto file = load_scenario_file(o.scenario);
  if (!file.attacks.empty()) throw Error("baseline must be attack-free");
  const auto seed = effective_seed(o);
  const auto policy = window_from(o);
  header(err, "baseline",
         {{"scenario", o.scenario.string()}, {"measurements", o.measurements}, {"kappa", o.kappa},
          {"window", {{"mode", o.window_mode}, {"length", o.window_length}, {"stride", o.window_stride}}}},
         seed);
  const auto tmpl = build_baseline_template(file.traffic, o.measurements, o.kappa, policy, seed);
  for (const auto& w : tmpl.warnings) err << "warning: " << w << '\n';
  write_json(o.out, to_json(tmpl));
  out << "template from " << tmpl.measurement_count << " measurements written to " << o.out.string() << '\n';
}

void cmd_detect(const Options& o, std::ostream& out, std::ostream& err, bool window_given) {
  std::ifstream tin(o.tmpl);
  if (!tin) throw Error("cannot open template '" + o.tmpl.string() + "'");
  GoldenTemplate tmpl;
  try {
    tmpl = template_from_json(json::parse(tin));
  } catch (const json::parse_error& e) {
    throw Error(o.tmpl.string() + ": invalid JSON: " + e.what());
  } catch (const Error& e) {
    throw Error(o.tmpl.string() + ": " + e.what());
  }
  const auto policy = window_given ? window_from(o) : tmpl.policy;
  header(err, "detect", {{"log", o.log.string()}, {"template", o.tmpl.string()}, {"rank", o.rank}, {"k", o.k}}, std::nullopt);

  const auto frames = read_log(o.log);
  if (frames.empty()) throw Error(o.log.string() + ": log is empty");
  const auto ws = windowed_stats(frames, policy);
  const auto verdicts = detect_all(ws.windows, tmpl, policy);
  const auto pool = full_id_pool();

  json alerts = json::array();
  for (const auto& v : verdicts) {
    if (!v.alert) continue;
    const auto constraint = derive_constraints(v, tmpl);
    const auto inf = o.k == 1 ? rank_candidates(constraint, pool, o.rank) : infer_multi(v, tmpl, pool, o.k, o.rank);
    json a = to_json(inf);
    a.erase("hit");
    a["window_id"] = v.window_id;
    a["flagged_bits"] = v.flagged_bits;
    a["constraint"] = to_string(constraint);
    alerts.push_back(a);
  }
  json summary = {{"log", o.log.string()},
                  {"windows", verdicts.size()},
                  {"gaps", ws.gaps},
                  {"alerts", alerts.size()},
                  {"rank", o.rank},
                  {"alerted_windows", alerts}};

  std::ostringstream csv;
  write_verdicts_csv(csv, verdicts);
  if (o.out.empty()) {
    out << csv.str();
    out << summary.dump(2) << '\n';
  } else {
    write_text(with_suffix(o.out, ".verdicts.csv"), csv.str());
    write_json(with_suffix(o.out, ".inference.json"), summary);
    out << alerts.size() << " of " << verdicts.size() << " windows alerted\n";
  }
}

void cmd_evaluate(const Options& o, std::ostream& out, std::ostream& err) {
  const auto file = load_scenario_file(o.scenario);
  const auto seed = effective_seed(o);
  const EvaluationConfig config = file.evaluation.value_or(EvaluationConfig{});
  header(err, "evaluate", {{"scenario", o.scenario.string()}, {"evaluation", to_json(config)}}, seed);

  auto report = run_scenario_table(file.traffic, config, seed);
  report.sweep_frequency = config.frequencies.front();
  report.sweep = run_id_sweep(file.traffic, report.tmpl, config.sweep_ids, report.sweep_frequency,
                                derive_seed(seed, 0x5EE9, 0), config);

  std::ostringstream table, sweep;
  render_table(table, report);
  write_sweep_csv(sweep, report.sweep);
  write_json(with_suffix(o.out, ".json"), to_json(report));
  write_text(with_suffix(o.out, ".txt"), table.str());
  write_text(with_suffix(o.out, ".sweep.csv"), sweep.str());
  out << table.str();
}

void cmd_scenario(const Options& o, std::ostream& out) {
  DefaultScenarioOptions opts;
  opts.id_count = o.ids;
  opts.vehicle_seed = o.vehicle_seed;
  ScenarioFile f{make_default_scenario(opts), {}, std::nullopt};
  write_json(o.out, to_json(f));
  out << "scenario with " << f.traffic.benign_ids().size() << " ids written to " << o.out.string() << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bit-level entropy intrusion detection for CAN"};
  app.require_subcommand(1);
  Options o;

  const auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", o.seed, "RNG seed (random when omitted)"); };
  const auto add_window = [&](CLI::App* sub) {
    sub->add_option("--window-mode", o.window_mode, "time | count")->check(CLI::IsMember({"time", "count"}));
    sub->add_option("--window-length", o.window_length, "seconds or messages");
    sub->add_option("--window-stride", o.window_stride, "seconds or messages");
  };

  auto* simulate = app.add_subcommand("simulate", "Simulate a scenario and write the bus log");
  simulate->add_option("--scenario", o.scenario)->required();
  simulate->add_option("--out", o.out, "bus log CSV")->required();
  simulate->add_option("--stats", o.stats, "per-source arbitration stats JSON");
  add_seed(simulate);

  auto* baseline = app.add_subcommand("baseline", "Build a golden template from clean runs");
  baseline->add_option("--scenario", o.scenario)->required();
  baseline->add_option("--out", o.out, "template JSON")->required();
  baseline->add_option("--measurements", o.measurements)->check(CLI::Range(2, 100000));
  baseline->add_option("--kappa", o.kappa)->check(CLI::PositiveNumber);
  add_window(baseline);
  add_seed(baseline);

  auto* detect = app.add_subcommand("detect", "Run the detector over a bus log");
  detect->add_option("--log", o.log)->required();
  detect->add_option("--template", o.tmpl)->required();
  detect->add_option("--out", o.out, "output prefix (<out>.verdicts.csv, <out>.inference.json)");
  detect->add_option("--rank", o.rank)->check(CLI::Range(1, kIdSpace));
  detect->add_option("--k", o.k, "number of injected ids to infer")->check(CLI::Range(1, 16));
  add_window(detect);

  auto* evaluate = app.add_subcommand("evaluate", "Detection/inference evaluation over all attack scenarios");
  evaluate->add_option("--scenario", o.scenario)->required();
  evaluate->add_option("--out", o.out, "output prefix (<out>.json, <out>.txt, <out>.sweep.csv)")->required();
  add_seed(evaluate);

  auto* scenario = app.add_subcommand("scenario", "Write the default synthetic vehicle scenario");
  scenario->add_option("--out", o.out)->required();
  scenario->add_option("--ids", o.ids)->check(CLI::Range(1, 1920));
  scenario->add_option("--vehicle-seed", o.vehicle_seed);

  for (auto* sub : {simulate, baseline, detect, evaluate, scenario}) sub->add_flag("-v,--verbose", o.verbosity);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  try {
    if (*simulate) cmd_simulate(o, out, err);
    else if (*baseline) cmd_baseline(o, out, err);
    else if (*detect) cmd_detect(o, out, err, detect->count("--window-mode") + detect->count("--window-length") +
                                                  detect->count("--window-stride") > 0);
    else if (*evaluate) cmd_evaluate(o, out, err);
    else if (*scenario) cmd_scenario(o, out);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error: " << msg << '\n';
    return 1;
  }
  return 0;
}

}  // namespace canids
