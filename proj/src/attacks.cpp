#include "canids/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "json_util.hpp"

namespace canids {

std::string to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::Flooding: return "Flooding";
    case AttackKind::SingleId: return "SingleId";
    case AttackKind::MultiId: return "MultiId";
    case AttackKind::WeakFixed: return "WeakFixed";
  }
  return "SingleId";
}

AttackKind parse_attack_kind(const std::string& text) {
  if (text == "Flooding") return AttackKind::Flooding;
  if (text == "SingleId") return AttackKind::SingleId;
  if (text == "MultiId") return AttackKind::MultiId;
  if (text == "WeakFixed") return AttackKind::WeakFixed;
  throw Error("unknown attack kind '" + text + "'");
}

void validate(const AttackScenario& s) {
  if (!(s.frequency > 0)) throw Error("attack frequency must be positive");
  if (!(s.duration > 0)) throw Error("attack duration must be positive");
  if (!(s.start >= 0)) throw Error("attack start must be non-negative");
  switch (s.kind) {
    case AttackKind::Flooding: break;
    case AttackKind::SingleId:
      if (s.ids.size() != 1) throw Error("SingleId attack needs exactly one id");
      break;
    case AttackKind::MultiId:
      if (s.ids.size() < 2 || s.ids.size() > 4) throw Error("MultiId attack needs 2 to 4 ids");
      break;
    case AttackKind::WeakFixed:
      if (s.ids.empty()) throw Error("WeakFixed attack needs a non-empty assigned id set");
      break;
  }
}

RequestStream generate_attack(const AttackScenario& s) {
  validate(s);
  std::mt19937_64 rng(s.rng_seed);
  std::uniform_int_distribution<unsigned> flood_id(0, kFloodIdMax);
  const double end = s.start + s.duration;
  RequestStream out;
  for (std::uint64_t k = 0;; ++k) {
    // k / f computed as a quotient so integer frequencies land on exact microseconds.
    const double t = s.start + static_cast<double>(k) / s.frequency;
    if (t >= end - 1e-9) break;
    TxRequest r;
    r.frame.timestamp_us = static_cast<std::uint64_t>(std::llround(t * 1e6));
    switch (s.kind) {
      case AttackKind::Flooding: r.frame.id = CanId(flood_id(rng)); break;
      case AttackKind::SingleId: r.frame.id = s.ids[0]; break;
      case AttackKind::MultiId:
      case AttackKind::WeakFixed: r.frame.id = s.ids[k % s.ids.size()]; break;
    }
    r.frame.dlc = 8;
    r.frame.payload.resize(8);
    for (auto& b : r.frame.payload) b = static_cast<std::uint8_t>(rng() & 0xFF);
    r.frame.source = s.source;
    r.malicious = true;
    r.one_shot = s.one_shot;
    out.push_back(std::move(r));
  }
  return out;
}

RequestStream merge_streams(const RequestStream& benign, const RequestStream& malicious) {
  RequestStream out;
  out.reserve(benign.size() + malicious.size());
  std::merge(benign.begin(), benign.end(), malicious.begin(), malicious.end(), std::back_inserter(out),
             [](const TxRequest& a, const TxRequest& b) { return a.frame.timestamp_us < b.frame.timestamp_us; });
  return out;
}

std::vector<CanId> default_sweep_ids() {
  static constexpr unsigned kIds[] = {0x000, 0x002, 0x008, 0x020, 0x050, 0x080, 0x0B0, 0x100,
                                      0x160, 0x200, 0x2C0, 0x380, 0x480, 0x600, 0x7FF};
  std::vector<CanId> ids;
  for (unsigned v : kIds) ids.emplace_back(v);
  return ids;
}

std::filesystem::path truth_path_for(const std::filesystem::path& log_path) {
  return std::filesystem::path(log_path.string() + ".truth.csv");
}

void write_truth(const SimulationResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  for (std::size_t i = 0; i < result.bus_log.size(); ++i)
    if (result.malicious[i]) out << result.bus_log[i].timestamp_us << ',' << result.bus_log[i].id.hex() << '\n';
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

nlohmann::json to_json(const AttackScenario& s) {
  nlohmann::json ids = nlohmann::json::array();
  for (CanId id : s.ids) ids.push_back(detail::id_json(id));
  return {{"kind", to_string(s.kind)}, {"ids", ids},           {"frequency", s.frequency}, {"start", s.start},
          {"duration", s.duration},    {"rng_seed", s.rng_seed}, {"source", s.source},      {"one_shot", s.one_shot}};
}

AttackScenario attack_scenario_from_json(const nlohmann::json& j, const std::string& pointer) {
  using namespace detail;
  AttackScenario s;
  try {
    s.kind = parse_attack_kind(string_at(require(j, "kind", pointer), pointer + "/kind"));
  } catch (const Error& e) {
    if (std::string(e.what()).starts_with("/")) throw;
    json_fail(pointer + "/kind", e.what());
  }
  if (j.contains("ids")) {
    if (!j["ids"].is_array()) json_fail(pointer + "/ids", "expected array");
    for (std::size_t i = 0; i < j["ids"].size(); ++i)
      s.ids.push_back(id_at(j["ids"][i], pointer + "/ids/" + std::to_string(i)));
  }
  if (j.contains("frequency")) s.frequency = number_at(j["frequency"], pointer + "/frequency");
  if (j.contains("start")) s.start = number_at(j["start"], pointer + "/start");
  if (j.contains("duration")) s.duration = number_at(j["duration"], pointer + "/duration");
  if (j.contains("rng_seed")) s.rng_seed = uint_at(j["rng_seed"], pointer + "/rng_seed");
  if (j.contains("source")) s.source = string_at(j["source"], pointer + "/source");
  if (j.contains("one_shot")) s.one_shot = bool_at(j["one_shot"], pointer + "/one_shot");
  try {
    validate(s);
  } catch (const Error& e) {
    json_fail(pointer, e.what());
  }
  return s;
}

}  // namespace canids
