#include "canids/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>

#include "json_util.hpp"

namespace canids {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t kTemplateStream = 0x7E3A;
constexpr std::uint64_t kCleanStream = 0xC1EA;
constexpr std::uint64_t kSweepStream = 0x5EE9;
constexpr std::uint64_t kSeriesStream = 0xF5E0;

double expected_message_rate(const TrafficScenario& s) {
  double rate = 0;
  for (const auto& e : s.ecus)
    for (const auto& a : e.assigned_ids) rate += 1e6 / static_cast<double>(a.period_us);
  return rate;
}

// One clean window starting right after the warm-up.
BitStats clean_window(const TrafficScenario& baseline, const WindowPolicy& policy, std::uint64_t run_seed,
                      double warmup) {
  TrafficScenario sc = baseline;
  sc.rng_seed = run_seed;
  if (policy.mode == WindowMode::Time) {
    sc.duration = warmup + policy.length + 0.5;
  } else {
    const double rate = std::max(1.0, expected_message_rate(baseline));
    sc.duration = warmup + 2.0 * policy.length / rate + 1.0;
  }
  const auto result = run_bus(generate_offered_traffic(sc), sc.baud_rate, BusOptions{std::nullopt, false, false});
  const auto warm_us = static_cast<std::uint64_t>(std::llround(warmup * 1e6));
  const auto first = std::lower_bound(result.bus_log.begin(), result.bus_log.end(), warm_us,
                                      [](const CanFrame& f, std::uint64_t t) { return f.timestamp_us < t; });
  std::span<const CanFrame> tail(&*first, static_cast<std::size_t>(result.bus_log.end() - first));
  const auto ws = windowed_stats(tail, policy, warm_us, Exec::Serial);
  if (ws.windows.empty()) throw Error("clean run produced no usable window");
  return ws.windows.front();
}

bool strictly_ascending(const std::vector<CanId>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i - 1] < v[i])) return false;
  return true;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index);
}

// ---- config ----

nlohmann::json to_json(const EvaluationConfig& c) {
  nlohmann::json sweep = nlohmann::json::array();
  for (CanId id : c.sweep_ids) sweep.push_back(detail::id_json(id));
  return {{"template_measurements", c.template_measurements},
          {"trials_per_scenario", c.trials_per_scenario},
          {"sweep_trials", c.sweep_trials},
          {"kappa", c.kappa},
          {"floor", c.floor},
          {"rank", c.rank},
          {"window", {{"mode", to_string(c.window.mode)}, {"length", c.window.length}, {"stride", c.window.stride}}},
          {"frequencies", c.frequencies},
          {"sweep_ids", sweep},
          {"weak_assigned", c.weak_assigned},
          {"warmup", c.warmup},
          {"attack_duration", c.attack_duration},
          {"tail", c.tail}};
}

EvaluationConfig evaluation_config_from_json(const nlohmann::json& j, const std::string& p) {
  using namespace detail;
  EvaluationConfig c;
  if (!j.is_object()) json_fail(p, "expected object");
  const auto positive_int = [&](const char* key, int& dst) {
    if (!j.contains(key)) return;
    auto v = uint_at(j[key], p + "/" + key);
    if (v == 0) json_fail(p + "/" + key, "must be positive");
    dst = static_cast<int>(v);
  };
  positive_int("template_measurements", c.template_measurements);
  positive_int("trials_per_scenario", c.trials_per_scenario);
  positive_int("sweep_trials", c.sweep_trials);
  positive_int("rank", c.rank);
  positive_int("weak_assigned", c.weak_assigned);
  if (j.contains("kappa")) c.kappa = number_at(j["kappa"], p + "/kappa");
  if (j.contains("floor")) c.floor = number_at(j["floor"], p + "/floor");
  if (j.contains("warmup")) c.warmup = number_at(j["warmup"], p + "/warmup");
  if (j.contains("attack_duration")) c.attack_duration = number_at(j["attack_duration"], p + "/attack_duration");
  if (j.contains("tail")) c.tail = number_at(j["tail"], p + "/tail");
  if (j.contains("window")) {
    const auto& w = j["window"];
    const std::string wp = p + "/window";
    if (w.contains("mode")) {
      try {
        c.window.mode = parse_window_mode(string_at(w["mode"], wp + "/mode"));
      } catch (const Error& e) {
        if (std::string(e.what()).starts_with("/")) throw;
        json_fail(wp + "/mode", e.what());
      }
    }
    if (w.contains("length")) c.window.length = number_at(w["length"], wp + "/length");
    if (w.contains("stride")) c.window.stride = number_at(w["stride"], wp + "/stride");
    try {
      validate(c.window);
    } catch (const Error& e) {
      json_fail(wp, e.what());
    }
  }
  if (j.contains("frequencies")) {
    if (!j["frequencies"].is_array() || j["frequencies"].empty()) json_fail(p + "/frequencies", "expected non-empty array");
    c.frequencies.clear();
    for (std::size_t i = 0; i < j["frequencies"].size(); ++i) {
      double f = number_at(j["frequencies"][i], p + "/frequencies/" + std::to_string(i));
      if (!(f > 0)) json_fail(p + "/frequencies/" + std::to_string(i), "must be positive");
      c.frequencies.push_back(f);
    }
  }
  if (j.contains("sweep_ids")) {
    if (!j["sweep_ids"].is_array() || j["sweep_ids"].empty()) json_fail(p + "/sweep_ids", "expected non-empty array");
    c.sweep_ids.clear();
    for (std::size_t i = 0; i < j["sweep_ids"].size(); ++i)
      c.sweep_ids.push_back(id_at(j["sweep_ids"][i], p + "/sweep_ids/" + std::to_string(i)));
    std::sort(c.sweep_ids.begin(), c.sweep_ids.end());
  }
  if (!(c.kappa > 0)) json_fail(p + "/kappa", "must be positive");
  if (!(c.attack_duration > 0)) json_fail(p + "/attack_duration", "must be positive");
  if (c.template_measurements < 2) json_fail(p + "/template_measurements", "must be at least 2");
  return c;
}

// ---- template and clean windows ----

GoldenTemplate build_baseline_template(const TrafficScenario& baseline, int count, double kappa,
                                       const WindowPolicy& policy, std::uint64_t seed, double floor, double warmup) {
  if (count < 2) throw Error("cannot estimate range from fewer than 2 measurements");
  std::vector<BitStats> measurements(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic)
  for (int m = 0; m < count; ++m)
    measurements[static_cast<std::size_t>(m)] =
        clean_window(baseline, policy, derive_seed(seed, kTemplateStream, static_cast<std::uint64_t>(m)), warmup);
  return build_template(measurements, kappa, policy, floor);
}

double clean_alert_rate(const TrafficScenario& baseline, const GoldenTemplate& tmpl, int count, std::uint64_t seed,
                        double warmup) {
  if (count < 1) throw Error("clean window count must be positive");
  std::vector<int> alerts(static_cast<std::size_t>(count), 0);
#pragma omp parallel for schedule(dynamic)
  for (int m = 0; m < count; ++m) {
    const auto w = clean_window(baseline, tmpl.policy, derive_seed(seed, kCleanStream, static_cast<std::uint64_t>(m)), warmup);
    alerts[static_cast<std::size_t>(m)] = detect(w, tmpl).alert ? 1 : 0;
  }
  return static_cast<double>(std::accumulate(alerts.begin(), alerts.end(), 0)) / count;
}

// ---- trials ----

bool verify_nm_identity(const SimulationResult& result, const std::string& source, double frequency, double T0) {
  const double offered = frequency * T0;
  if (!(offered > 0)) throw Error("empty attack window");
  const double ir = injection_rate(result, source);
  return std::abs(static_cast<double>(result.wins(source)) - ir * offered) <= 1.0;
}

TrialOutcome run_trial(const TrafficScenario& baseline, const GoldenTemplate& tmpl, const TrialSpec& spec,
                       std::uint64_t seed, const EvaluationConfig& config) {
  TrafficScenario sc = baseline;
  sc.rng_seed = derive_seed(seed, 0, 0);
  sc.duration = config.warmup + config.attack_duration + config.tail;
  AttackScenario attack = spec.attack;
  attack.start = config.warmup;
  attack.duration = config.attack_duration;
  attack.rng_seed = derive_seed(seed, 1, 0);

  const auto malicious = generate_attack(attack);
  const auto offered = merge_streams(generate_offered_traffic(sc), malicious);
  const auto result = run_bus(offered, sc.baud_rate, BusOptions{std::nullopt, false, false});

  TrialOutcome out;
  out.offered = malicious.size();
  out.attempts = result.attempts(attack.source);
  out.wins = result.wins(attack.source);
  out.nm_identity = verify_nm_identity(result, attack.source, attack.frequency, attack.duration);

  const auto spans = window_spans(result.bus_log, tmpl.policy, 0);
  const auto ws = windowed_stats(result.bus_log, tmpl.policy, 0, Exec::Serial);
  const auto verdicts = detect_all(ws.windows, tmpl, tmpl.policy);

  for (std::size_t w = 0; w < ws.windows.size(); ++w) {
    const auto& span = spans[ws.windows[w].window_id];
    std::uint64_t injected = 0;
    for (std::size_t i = span.first; i < span.last; ++i) injected += result.malicious[i] ? 1 : 0;
    if (injected == 0) {
      ++out.clean_windows;
      out.clean_alerts += verdicts[w].alert ? 1 : 0;
      continue;
    }
    out.injected += injected;
    if (!verdicts[w].alert) continue;
    out.detected += injected;
    if (spec.k < 1) continue;

    InferenceResult r;
    if (spec.k == 1) {
      const auto constraint = derive_constraints(verdicts[w], tmpl);
      r = rank_candidates(constraint, spec.pool, config.rank);
      for (CanId id : r.candidates)
        if (!satisfies(id, constraint)) ++out.soundness_violations;
    } else {
      r = infer_multi(verdicts[w], tmpl, spec.pool, spec.k, config.rank);
    }
    if (!strictly_ascending(r.candidates)) ++out.ordering_violations;
    score_hit(r, attack.kind == AttackKind::Flooding ? std::vector<CanId>{} : attack.ids);
    out.inferences.push_back(std::move(r));
  }
  return out;
}

// ---- aggregation ----

namespace {

struct Job {
  std::size_t row;
  std::size_t sub;
  TrialSpec spec;
  std::uint64_t seed;
};

std::vector<TrialOutcome> run_jobs(const TrafficScenario& baseline, const GoldenTemplate& tmpl,
                                   const std::vector<Job>& jobs, const EvaluationConfig& config) {
  std::vector<TrialOutcome> outcomes(jobs.size());
  const std::int64_t n = static_cast<std::int64_t>(jobs.size());
  if (config.parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t j = 0; j < n; ++j) {
      const auto& job = jobs[static_cast<std::size_t>(j)];
      outcomes[static_cast<std::size_t>(j)] = run_trial(baseline, tmpl, job.spec, job.seed, config);
    }
  } else {
    for (std::int64_t j = 0; j < n; ++j) {
      const auto& job = jobs[static_cast<std::size_t>(j)];
      outcomes[static_cast<std::size_t>(j)] = run_trial(baseline, tmpl, job.spec, job.seed, config);
    }
  }
  return outcomes;
}

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

SweepRow sweep_row(CanId id, const std::vector<const TrialOutcome*>& outcomes) {
  SweepRow r;
  r.id = id;
  std::uint64_t injected = 0, detected = 0;
  for (const auto* o : outcomes) {
    r.wins += o->wins;
    r.attempts += o->attempts;
    injected += o->injected;
    detected += o->detected;
  }
  r.injection_rate = ratio(r.wins, r.attempts);
  r.detection_rate = ratio(detected, injected);
  return r;
}

std::vector<CanId> draw_distinct_ids(std::uint64_t seed, int count, unsigned max_value) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<unsigned> pick(0, max_value);
  std::set<unsigned> chosen;
  while (static_cast<int>(chosen.size()) < count) chosen.insert(pick(rng));
  std::vector<CanId> ids;
  for (unsigned v : chosen) ids.emplace_back(v);
  return ids;
}

}  // namespace

std::vector<CanId> weak_attacker_ids(const TrafficScenario& baseline, int count) {
  if (count < 1) throw Error("weak attacker needs at least one id");
  const EcuProfile* owner = nullptr;
  CanId best(kMaxStandardId);
  for (const auto& ecu : baseline.ecus)
    for (const auto& a : ecu.assigned_ids)
      if (!owner || a.id < best) {
        best = a.id;
        owner = &ecu;
      }
  if (!owner) throw Error("empty scenario");
  std::vector<CanId> ids;
  for (const auto& a : owner->assigned_ids) ids.push_back(a.id);
  std::sort(ids.begin(), ids.end());
  if (ids.size() > static_cast<std::size_t>(count)) ids.resize(static_cast<std::size_t>(count));
  return ids;
}

const ScenarioRow& EvaluationReport::row(const std::string& name, double frequency) const {
  for (const auto& r : rows)
    if (r.name == name && r.frequency == frequency) return r;
  throw Error("no report row " + name + " at " + std::to_string(frequency) + " Hz");
}

EvaluationReport run_scenario_table(const TrafficScenario& baseline, const EvaluationConfig& config, std::uint64_t seed) {
  validate(baseline);
  if (config.trials_per_scenario < 1) throw Error("trials_per_scenario must be positive");
  EvaluationReport report;
  report.baseline_utilisation = offered_utilisation(baseline);
  report.config_fingerprint = fingerprint({{"baseline", to_json(baseline)}, {"config", to_json(config)}, {"seed", seed}});
  report.tmpl = build_baseline_template(baseline, config.template_measurements, config.kappa, config.window,
                                        derive_seed(seed, kTemplateStream, 0), config.floor, config.warmup);

  const auto full_pool = full_id_pool();
  auto weak_ids = weak_attacker_ids(baseline, config.weak_assigned);
  auto weak_pool = baseline.benign_ids();
  weak_pool.insert(weak_pool.end(), weak_ids.begin(), weak_ids.end());
  std::sort(weak_pool.begin(), weak_pool.end());
  weak_pool.erase(std::unique(weak_pool.begin(), weak_pool.end()), weak_pool.end());

  std::vector<Job> jobs;
  const auto trials = static_cast<std::uint64_t>(config.trials_per_scenario);
  for (double f : config.frequencies) {
    const auto add_row = [&](const std::string& name) {
      ScenarioRow r;
      r.name = name;
      r.frequency = f;
      r.trials = config.trials_per_scenario;
      report.rows.push_back(r);
      return report.rows.size() - 1;
    };
    const auto stream = [&](std::size_t row, std::size_t sub) { return (static_cast<std::uint64_t>(row) << 16) | sub; };

    std::size_t row = add_row("Flooding");
    for (std::uint64_t t = 0; t < trials; ++t) {
      TrialSpec spec{AttackScenario{AttackKind::Flooding, {}, f}, 0, {}};
      jobs.push_back(Job{row, 0, spec, derive_seed(seed, stream(row, 0), t)});
    }

    row = add_row("SingleId");
    for (std::size_t i = 0; i < config.sweep_ids.size(); ++i)
      for (std::uint64_t t = 0; t < trials; ++t) {
        TrialSpec spec{AttackScenario{AttackKind::SingleId, {config.sweep_ids[i]}, f}, 1, full_pool};
        jobs.push_back(Job{row, i, spec, derive_seed(seed, stream(row, i), t)});
      }

    for (int k = 2; k <= 4; ++k) {
      row = add_row("MultiId-" + std::to_string(k));
      for (std::uint64_t t = 0; t < trials; ++t) {
        const auto s = derive_seed(seed, stream(row, 0), t);
        const auto ids = draw_distinct_ids(derive_seed(s, 2, 0), k, kFloodIdMax);
        TrialSpec spec{AttackScenario{AttackKind::MultiId, ids, f}, k, full_pool};
        jobs.push_back(Job{row, 0, spec, s});
      }
    }

    row = add_row("WeakFixed");
    for (std::uint64_t t = 0; t < trials; ++t) {
      TrialSpec spec{AttackScenario{AttackKind::WeakFixed, weak_ids, f}, static_cast<int>(weak_ids.size()), weak_pool};
      jobs.push_back(Job{row, 0, spec, derive_seed(seed, stream(row, 0), t)});
    }
  }

  const auto outcomes = run_jobs(baseline, report.tmpl, jobs, config);

  for (std::size_t r = 0; r < report.rows.size(); ++r) {
    auto& row = report.rows[r];
    std::vector<std::vector<const TrialOutcome*>> by_sub(row.name == "SingleId" ? config.sweep_ids.size() : 1);
    std::uint64_t wins = 0, attempts = 0, detected = 0, clean_w = 0, clean_a = 0, hits = 0, scored = 0;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (jobs[j].row != r) continue;
      const auto& o = outcomes[j];
      by_sub[jobs[j].sub].push_back(&o);
      wins += o.wins;
      attempts += o.attempts;
      row.injected += o.injected;
      detected += o.detected;
      clean_w += o.clean_windows;
      clean_a += o.clean_alerts;
      row.nm_identity = row.nm_identity && o.nm_identity;
      row.soundness_violations += o.soundness_violations;
      row.ordering_violations += o.ordering_violations;
      for (const auto& inf : o.inferences) {
        ++scored;
        hits += inf.hit ? 1 : 0;
      }
    }
    row.clean_alert_rate = ratio(clean_a, clean_w);
    row.detections_scored = scored;
    if (row.name != "Flooding") row.inferring_accuracy = ratio(hits, scored);
    if (row.name == "SingleId") {
      double dr = 0, ir = 0;
      for (std::size_t i = 0; i < by_sub.size(); ++i) {
        row.per_id.push_back(sweep_row(config.sweep_ids[i], by_sub[i]));
        dr += row.per_id.back().detection_rate;
        ir += row.per_id.back().injection_rate;
      }
      row.detection_rate = dr / static_cast<double>(by_sub.size());
      row.injection_rate = ir / static_cast<double>(by_sub.size());
    } else {
      row.detection_rate = ratio(detected, row.injected);
      row.injection_rate = ratio(wins, attempts);
    }
  }
  return report;
}

std::vector<SweepRow> run_id_sweep(const TrafficScenario& baseline, const GoldenTemplate& tmpl,
                                     const std::vector<CanId>& ids, double frequency, std::uint64_t seed,
                                     const EvaluationConfig& config) {
  if (!std::is_sorted(ids.begin(), ids.end())) throw Error("sweep ids must be sorted ascending");
  std::vector<Job> jobs;
  const auto trials = static_cast<std::uint64_t>(std::max(1, config.sweep_trials));
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::uint64_t t = 0; t < trials; ++t)
      jobs.push_back(Job{0, i, TrialSpec{AttackScenario{AttackKind::SingleId, {ids[i]}, frequency}, 0, {}},
                         derive_seed(seed, kSweepStream + (i << 8), t)});
  const auto outcomes = run_jobs(baseline, tmpl, jobs, config);
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::vector<const TrialOutcome*> mine;
    for (std::size_t j = 0; j < jobs.size(); ++j)
      if (jobs[j].sub == i) mine.push_back(&outcomes[j]);
    rows.push_back(sweep_row(ids[i], mine));
  }
  return rows;
}

std::vector<SweepRow> run_frequency_series(const TrafficScenario& baseline, const GoldenTemplate& tmpl, CanId id,
                                           const std::vector<double>& frequencies, int trials, std::uint64_t seed,
                                           const EvaluationConfig& config) {
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < frequencies.size(); ++i)
    for (int t = 0; t < trials; ++t)
      jobs.push_back(Job{0, i, TrialSpec{AttackScenario{AttackKind::SingleId, {id}, frequencies[i]}, 0, {}},
                         derive_seed(seed, kSeriesStream + (i << 8), static_cast<std::uint64_t>(t))});
  const auto outcomes = run_jobs(baseline, tmpl, jobs, config);
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < frequencies.size(); ++i) {
    std::vector<const TrialOutcome*> mine;
    for (std::size_t j = 0; j < jobs.size(); ++j)
      if (jobs[j].sub == i) mine.push_back(&outcomes[j]);
    rows.push_back(sweep_row(id, mine));
  }
  return rows;
}

// ---- output ----

std::string fingerprint(const nlohmann::json& inputs) {
  // FNV-1a over the canonical (sorted-key) dump.
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : inputs.dump()) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

nlohmann::json sweep_json(const std::vector<SweepRow>& rows) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& r : rows)
    a.push_back({{"id", detail::id_json(r.id)},
                 {"injection_rate", r.injection_rate},
                 {"detection_rate", r.detection_rate},
                 {"wins", r.wins},
                 {"attempts", r.attempts}});
  return a;
}

std::string freq_label(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", f);
  return buf;
}

}  // namespace

nlohmann::json to_json(const EvaluationReport& report) {
  nlohmann::json per = nlohmann::json::object();
  for (const auto& r : report.rows) {
    nlohmann::json row = {{"scenario", r.name},
                          {"frequency", r.frequency},
                          {"detection_rate", r.detection_rate},
                          {"injection_rate", r.injection_rate},
                          {"trials", r.trials},
                          {"injected", r.injected},
                          {"detections_scored", r.detections_scored},
                          {"clean_alert_rate", r.clean_alert_rate},
                          {"nm_identity", r.nm_identity},
                          {"soundness_violations", r.soundness_violations},
                          {"ordering_violations", r.ordering_violations}};
    if (r.inferring_accuracy) row["inferring_accuracy"] = *r.inferring_accuracy;
    if (!r.per_id.empty()) row["per_id"] = sweep_json(r.per_id);
    per[r.name + "@" + freq_label(r.frequency) + "Hz"] = row;
  }
  return {{"per_scenario", per},
          {"sweep", sweep_json(report.sweep)},
          {"sweep_frequency", report.sweep_frequency},
          {"baseline_utilisation", report.baseline_utilisation},
          {"template", to_json(report.tmpl)},
          {"config_fingerprint", report.config_fingerprint}};
}

void render_table(std::ostream& out, const EvaluationReport& report) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-12s %8s %10s %10s %10s %7s\n", "Scenario", "Freq(Hz)", "Detection", "Inferring",
                "Injection", "Trials");
  out << buf;
  for (const auto& r : report.rows) {
    char inf[16] = "--";
    if (r.inferring_accuracy) std::snprintf(inf, sizeof inf, "%.1f%%", 100.0 * *r.inferring_accuracy);
    std::snprintf(buf, sizeof buf, "%-12s %8s %9.1f%% %10s %9.1f%% %7d\n", r.name.c_str(), freq_label(r.frequency).c_str(),
                  100.0 * r.detection_rate, inf, 100.0 * r.injection_rate, r.trials);
    out << buf;
  }
  out << "config " << report.config_fingerprint << '\n';
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& sweep) {
  out << "id_hex,injection_rate,detection_rate\n";
  char buf[64];
  for (const auto& r : sweep) {
    std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f\n", r.id.hex().c_str(), r.injection_rate, r.detection_rate);
    out << buf;
  }
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("spearman needs two equal-length series of length >= 2");
  const auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n, my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace canids
