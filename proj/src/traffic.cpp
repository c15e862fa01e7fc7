#include "canids/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "json_util.hpp"

namespace canids {

using detail::json;

std::string to_string(PayloadMode mode) {
  switch (mode) {
    case PayloadMode::Constant: return "constant";
    case PayloadMode::Counter: return "counter";
    case PayloadMode::Random: return "random";
  }
  return "constant";
}

PayloadMode parse_payload_mode(const std::string& text) {
  if (text == "constant") return PayloadMode::Constant;
  if (text == "counter") return PayloadMode::Counter;
  if (text == "random") return PayloadMode::Random;
  throw Error("unknown payload_mode '" + text + "'");
}

std::vector<CanId> TrafficScenario::benign_ids() const {
  std::vector<CanId> ids;
  for (const auto& ecu : ecus)
    for (const auto& a : ecu.assigned_ids) ids.push_back(a.id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

void validate(const TrafficScenario& scenario) {
  if (scenario.ecus.empty()) throw Error("empty scenario");
  if (!(scenario.duration > 0)) throw Error("scenario duration must be positive");
  if (scenario.baud_rate == 0) throw Error("baud_rate must be positive");
  if (!(scenario.jitter_fraction >= 0 && scenario.jitter_fraction < 0.5))
    throw Error("jitter_fraction must be in [0, 0.5)");
  for (const auto& ecu : scenario.ecus) {
    std::set<std::uint16_t> seen;
    for (const auto& a : ecu.assigned_ids) {
      if (a.period_us == 0) throw Error("ECU '" + ecu.name + "' id " + a.id.hex() + ": period must be positive");
      if (a.dlc > 8) throw Error("ECU '" + ecu.name + "' id " + a.id.hex() + ": dlc must be in [0, 8]");
      if (!seen.insert(a.id.value()).second)
        throw Error("ECU '" + ecu.name + "' lists id " + a.id.hex() + " twice");
    }
  }
}

namespace {

std::vector<std::uint8_t> make_payload(const AssignedId& a, std::uint64_t k, std::mt19937_64& rng) {
  std::vector<std::uint8_t> p(a.dlc);
  switch (a.payload_mode) {
    case PayloadMode::Constant:
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<std::uint8_t>((a.id.value() + 17 * i) & 0xFF);
      break;
    case PayloadMode::Counter:
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<std::uint8_t>((k >> (8 * i)) & 0xFF);
      break;
    case PayloadMode::Random:
      for (auto& b : p) b = static_cast<std::uint8_t>(rng() & 0xFF);
      break;
  }
  return p;
}

}  // namespace

RequestStream generate_offered_traffic(const TrafficScenario& scenario) {
  validate(scenario);
  std::mt19937_64 rng(scenario.rng_seed);
  const auto horizon = static_cast<std::uint64_t>(std::llround(scenario.duration * 1e6));

  RequestStream out;
  for (const auto& ecu : scenario.ecus) {
    for (const auto& a : ecu.assigned_ids) {
      const double period = static_cast<double>(a.period_us);
      const double jitter = scenario.jitter_fraction * period;
      std::uniform_real_distribution<double> jitter_dist(-jitter, jitter);
      std::uint64_t phase = 0;
      if (scenario.random_phase) phase = std::uniform_int_distribution<std::uint64_t>(0, a.period_us - 1)(rng);
      for (std::uint64_t k = 0; phase + k * a.period_us < horizon; ++k) {
        double t = static_cast<double>(phase + k * a.period_us);
        if (jitter > 0) t += jitter_dist(rng);
        t = std::clamp(t, 0.0, static_cast<double>(horizon - 1));
        TxRequest req;
        req.frame.timestamp_us = static_cast<std::uint64_t>(std::llround(t));
        req.frame.id = a.id;
        req.frame.dlc = a.dlc;
        req.frame.payload = make_payload(a, k, rng);
        req.frame.source = ecu.name;
        out.push_back(std::move(req));
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const TxRequest& x, const TxRequest& y) {
    return x.frame.timestamp_us < y.frame.timestamp_us;
  });
  return out;
}

TrafficScenario make_default_scenario(const DefaultScenarioOptions& options) {
  const int span = kMaxStandardId - options.id_floor + 1;
  if (options.id_count < 1 || options.id_count > span) throw Error("id_count out of range");
  if (options.ecu_count < 1) throw Error("ecu_count must be positive");
  if (options.period_mix.empty()) throw Error("period_mix is empty");

  std::mt19937_64 rng(options.vehicle_seed);
  std::vector<std::uint16_t> pool(static_cast<std::size_t>(span));
  std::iota(pool.begin(), pool.end(), options.id_floor);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(static_cast<std::size_t>(options.id_count));

  // Period classes are dealt out exactly, then shuffled across ids.
  std::vector<int> periods_ms;
  for (const auto& [ms, n] : options.period_mix) {
    if (ms <= 0 || n < 0) throw Error("period_mix entries need a positive period and non-negative count");
    periods_ms.insert(periods_ms.end(), static_cast<std::size_t>(n), ms);
  }
  // The last (slowest) class absorbs any difference to id_count.
  if (static_cast<int>(periods_ms.size()) > options.id_count) throw Error("period_mix counts exceed id_count");
  periods_ms.resize(static_cast<std::size_t>(options.id_count), options.period_mix.back().first);
  std::shuffle(periods_ms.begin(), periods_ms.end(), rng);
  std::uniform_int_distribution<int> ecu_pick(0, options.ecu_count - 1);

  TrafficScenario s;
  s.duration = options.duration;
  s.baud_rate = options.baud_rate;
  s.jitter_fraction = options.jitter_fraction;
  s.random_phase = true;
  for (int e = 0; e < options.ecu_count; ++e) {
    char name[16];
    std::snprintf(name, sizeof name, "ecu%02d", e);
    s.ecus.push_back(EcuProfile{name, {}});
  }
  for (std::size_t i = 0; i < pool.size(); ++i) {
    AssignedId a;
    a.id = CanId(pool[i]);
    a.period_us = static_cast<std::uint64_t>(periods_ms[i]) * 1000;
    a.dlc = 8;
    a.payload_mode = static_cast<PayloadMode>(rng() % 3);
    s.ecus[static_cast<std::size_t>(ecu_pick(rng))].assigned_ids.push_back(a);
  }
  std::erase_if(s.ecus, [](const EcuProfile& e) { return e.assigned_ids.empty(); });
  for (auto& e : s.ecus)
    std::sort(e.assigned_ids.begin(), e.assigned_ids.end(),
              [](const AssignedId& x, const AssignedId& y) { return x.id < y.id; });
  return s;
}

double offered_utilisation(const TrafficScenario& scenario) {
  double bits_per_second = 0;
  for (const auto& ecu : scenario.ecus)
    for (const auto& a : ecu.assigned_ids)
      bits_per_second += (frame_bit_length(a.dlc) + 6) * 1e6 / static_cast<double>(a.period_us);
  return bits_per_second / scenario.baud_rate;
}

// ---- log CSV ----

std::string format_log_line(const CanFrame& frame) {
  validate_frame(frame);
  std::string line = std::to_string(frame.timestamp_us) + "," + frame.id.hex() + "," + std::to_string(frame.dlc) + ",";
  static constexpr char kHex[] = "0123456789ABCDEF";
  for (auto b : frame.payload) {
    line += kHex[b >> 4];
    line += kHex[b & 0xF];
  }
  return line;
}

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

std::uint64_t parse_decimal(const std::string& s, const char* what) {
  if (s.empty() || s.size() > 19 || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
    throw Error(std::string("malformed ") + what + " '" + s + "'");
  return std::stoull(s);
}

}  // namespace

CanFrame parse_log_line(const std::string& raw) {
  std::string line = raw;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  if (fields.size() != 4) throw Error("expected 4 comma-separated fields, got " + std::to_string(fields.size()));

  CanFrame f;
  f.timestamp_us = parse_decimal(fields[0], "timestamp");
  if (fields[1].empty() || !std::all_of(fields[1].begin(), fields[1].end(), [](char c) { return hex_value(c) >= 0; }))
    throw Error("malformed id '" + fields[1] + "'");
  f.id = parse_can_id(fields[1]);
  auto dlc = parse_decimal(fields[2], "dlc");
  if (dlc > 8) throw Error("dlc must be in [0, 8]");
  f.dlc = static_cast<std::uint8_t>(dlc);
  const std::string& hex = fields[3];
  if (hex.size() != 2 * f.dlc)
    throw Error("payload has " + std::to_string(hex.size()) + " hex digits, dlc " + std::to_string(dlc) + " needs " +
                std::to_string(2 * dlc));
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    int hi = hex_value(hex[i]), lo = hex_value(hex[i + 1]);
    if (hi < 0 || lo < 0) throw Error("malformed payload '" + hex + "'");
    f.payload.push_back(static_cast<std::uint8_t>(hi * 16 + lo));
  }
  return f;
}

void write_log(const std::vector<CanFrame>& frames, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (i > 0 && frames[i].timestamp_us < frames[i - 1].timestamp_us)
      throw Error("'" + path.string() + "': frames not time-ordered at index " + std::to_string(i));
    out << format_log_line(frames[i]) << '\n';
  }
  out.flush();
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

std::vector<CanFrame> read_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  std::vector<CanFrame> frames;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    try {
      frames.push_back(parse_log_line(line));
    } catch (const Error& e) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (frames.size() > 1 && frames.back().timestamp_us < frames[frames.size() - 2].timestamp_us)
      throw Error(path.string() + ":" + std::to_string(line_no) + ": timestamp decreases");
  }
  return frames;
}

// ---- scenario JSON ----

json to_json(const TrafficScenario& scenario) {
  json ecus = json::array();
  for (const auto& ecu : scenario.ecus) {
    json ids = json::array();
    for (const auto& a : ecu.assigned_ids)
      ids.push_back({{"id", detail::id_json(a.id)},
                     {"period", a.period_us},
                     {"dlc", a.dlc},
                     {"payload_mode", to_string(a.payload_mode)}});
    ecus.push_back({{"name", ecu.name}, {"assigned_ids", ids}});
  }
  return {{"ecus", ecus},
          {"duration", scenario.duration},
          {"baud_rate", scenario.baud_rate},
          {"jitter_fraction", scenario.jitter_fraction},
          {"rng_seed", scenario.rng_seed},
          {"random_phase", scenario.random_phase}};
}

TrafficScenario traffic_scenario_from_json(const json& j, const std::string& pointer) {
  using namespace detail;
  TrafficScenario s;
  const json& ecus = require(j, "ecus", pointer);
  if (!ecus.is_array()) json_fail(pointer + "/ecus", "expected array");
  for (std::size_t e = 0; e < ecus.size(); ++e) {
    const std::string ep = pointer + "/ecus/" + std::to_string(e);
    EcuProfile ecu;
    ecu.name = string_at(require(ecus[e], "name", ep), ep + "/name");
    const json& ids = require(ecus[e], "assigned_ids", ep);
    if (!ids.is_array()) json_fail(ep + "/assigned_ids", "expected array");
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const std::string ip = ep + "/assigned_ids/" + std::to_string(i);
      AssignedId a;
      a.id = id_at(require(ids[i], "id", ip), ip + "/id");
      a.period_us = uint_at(require(ids[i], "period", ip), ip + "/period");
      if (a.period_us == 0) json_fail(ip + "/period", "period must be positive");
      if (ids[i].contains("dlc")) {
        auto dlc = uint_at(ids[i]["dlc"], ip + "/dlc");
        if (dlc > 8) json_fail(ip + "/dlc", "dlc must be in [0, 8]");
        a.dlc = static_cast<std::uint8_t>(dlc);
      }
      if (ids[i].contains("payload_mode")) {
        try {
          a.payload_mode = parse_payload_mode(string_at(ids[i]["payload_mode"], ip + "/payload_mode"));
        } catch (const Error& err) {
          if (std::string(err.what()).starts_with("/")) throw;
          json_fail(ip + "/payload_mode", err.what());
        }
      }
      ecu.assigned_ids.push_back(a);
    }
    s.ecus.push_back(std::move(ecu));
  }
  if (j.contains("duration")) s.duration = number_at(j["duration"], pointer + "/duration");
  if (j.contains("baud_rate")) s.baud_rate = static_cast<std::uint32_t>(uint_at(j["baud_rate"], pointer + "/baud_rate"));
  if (j.contains("jitter_fraction")) s.jitter_fraction = number_at(j["jitter_fraction"], pointer + "/jitter_fraction");
  if (j.contains("rng_seed")) s.rng_seed = uint_at(j["rng_seed"], pointer + "/rng_seed");
  if (j.contains("random_phase")) s.random_phase = bool_at(j["random_phase"], pointer + "/random_phase");
  try {
    validate(s);
  } catch (const Error& e) {
    json_fail(pointer, e.what());
  }
  return s;
}

}  // namespace canids
