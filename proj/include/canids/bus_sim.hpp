#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "canids/can_core.hpp"
#include "canids/traffic.hpp"
#include "json.hpp"

namespace canids {

/// Bit times a node waits after each frame end before the next arbitration.
inline constexpr int kIntermissionBits = 6;

enum class BusEventKind { Transmitted, ArbitrationLost };

struct BusEvent {
  BusEventKind kind;
  std::uint64_t timestamp_us = 0;  // round start time
  CanFrame frame;
  bool malicious = false;
};

/// One arbitration round: who won, and the smallest id among the losers.
struct ContentionRound {
  std::uint64_t timestamp_us = 0;
  CanId winner;
  std::optional<CanId> lowest_loser;
  std::uint32_t contenders = 0;
};

struct SourceCounters {
  std::uint64_t attempts = 0;  // arbitration rounds entered
  std::uint64_t wins = 0;
  std::uint64_t dropped = 0;   // one-shot frames discarded after a lost round

  bool operator==(const SourceCounters&) const = default;
};

struct SimulationResult {
  std::vector<CanFrame> bus_log;
  std::vector<bool> malicious;  // parallel to bus_log; ground truth, never logged
  std::vector<BusEvent> events;
  std::vector<ContentionRound> rounds;
  std::map<std::string, SourceCounters> per_source;
  std::uint64_t same_id_collisions = 0;
  std::uint64_t pending_at_end = 0;

  std::uint64_t attempts(const std::string& source) const;
  std::uint64_t wins(const std::string& source) const;
};

struct BusOptions {
  // No arbitration round starts at or after this time; remaining requests stay pending.
  std::optional<std::uint64_t> horizon_us;
  bool record_events = true;
  bool record_rounds = true;
};

/// Discrete-event simulation of one shared bus. Whenever the bus frees, every
/// request that has arrived contends; the smallest id transmits for
/// frame_bit_length / baud_rate, followed by the intermission. Losers stay
/// pending unless flagged one_shot. Same-id ties go to the earliest request,
/// then the lexicographically smaller source label.
SimulationResult run_bus(const RequestStream& offered, std::uint32_t baud_rate, const BusOptions& options = {});

/// wins / attempts for `source`; throws "no attempts" when it never contended.
double injection_rate(const SimulationResult& result, const std::string& source);

nlohmann::json source_stats_json(const SimulationResult& result);

}  // namespace canids
