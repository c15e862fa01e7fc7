#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "canids/can_core.hpp"
#include "json.hpp"

namespace canids {

enum class PayloadMode { Constant, Counter, Random };

std::string to_string(PayloadMode mode);
PayloadMode parse_payload_mode(const std::string& text);

struct AssignedId {
  CanId id;
  std::uint64_t period_us = 0;
  std::uint8_t dlc = 8;
  PayloadMode payload_mode = PayloadMode::Constant;
};

struct EcuProfile {
  std::string name;
  std::vector<AssignedId> assigned_ids;
};

struct TrafficScenario {
  std::vector<EcuProfile> ecus;
  double duration = 60.0;          // seconds
  std::uint32_t baud_rate = 125000;  // bits/s
  double jitter_fraction = 0.01;   // uniform jitter, +/- fraction of period
  std::uint64_t rng_seed = 0;
  // When set, every (ECU, id) starts at a per-run random offset in [0, period);
  // otherwise all schedules start at t = 0.
  bool random_phase = false;

  std::vector<CanId> benign_ids() const;  // sorted, unique
};

/// Throws on zero ECUs ("empty scenario"), zero periods, duplicate (ECU, id)
/// pairs or a non-positive duration/baud rate.
void validate(const TrafficScenario& scenario);

/// A frame some node wants to put on the bus at `frame.timestamp_us`.
struct TxRequest {
  CanFrame frame;
  bool malicious = false;  // ground truth for scoring only
  bool one_shot = false;   // no automatic retransmission after a lost round

  bool operator==(const TxRequest&) const = default;
};

using RequestStream = std::vector<TxRequest>;

/// Periodic schedule per assigned id with uniform jitter; sorted by request
/// time, stable in (ECU, id, k) order. Deterministic per rng_seed.
RequestStream generate_offered_traffic(const TrafficScenario& scenario);

struct DefaultScenarioOptions {
  int id_count = 223;
  int ecu_count = 24;
  std::uint16_t id_floor = 0x080;
  // Period (ms) and number of ids in each period class. The last class is
  // padded up to id_count.
  std::vector<std::pair<int, int>> period_mix = {{10, 1}, {20, 2}, {50, 5}, {100, 12}, {500, 50}, {1000, 153}};
  double duration = 60.0;
  std::uint32_t baud_rate = 125000;
  double jitter_fraction = 0.01;
  std::uint64_t vehicle_seed = 2016;
};

/// Regenerable stand-in for a production vehicle: `id_count` identifiers drawn
/// without replacement from [id_floor, 0x7FF], spread over `ecu_count` ECUs.
TrafficScenario make_default_scenario(const DefaultScenarioOptions& options = {});

/// Mean bus utilisation implied by the schedule (frame bits + intermission).
double offered_utilisation(const TrafficScenario& scenario);

// CAN log CSV: `<timestamp_us>,<id:3 hex>,<dlc>,<payload hex>` per line.
std::string format_log_line(const CanFrame& frame);
CanFrame parse_log_line(const std::string& line);
void write_log(const std::vector<CanFrame>& frames, const std::filesystem::path& path);
std::vector<CanFrame> read_log(const std::filesystem::path& path);

nlohmann::json to_json(const TrafficScenario& scenario);
/// `pointer` prefixes error messages, e.g. "/ecus/3/assigned_ids/0/period".
TrafficScenario traffic_scenario_from_json(const nlohmann::json& j, const std::string& pointer = "");

}  // namespace canids
