#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "canids/bus_sim.hpp"
#include "canids/can_core.hpp"
#include "canids/traffic.hpp"
#include "json.hpp"

namespace canids {

enum class AttackKind { Flooding, SingleId, MultiId, WeakFixed };

std::string to_string(AttackKind kind);
AttackKind parse_attack_kind(const std::string& text);

// Flooding draws ids uniformly from this high-priority band, never a constant 0x000 stream.
inline constexpr std::uint16_t kFloodIdMax = 0x07F;
inline constexpr int kDefaultWeakAssignedIds = 3;

struct AttackScenario {
  AttackKind kind = AttackKind::SingleId;
  // SingleId: exactly 1; MultiId: 2-4; WeakFixed: the compromised ECU's assigned
  // set; ignored for Flooding.
  std::vector<CanId> ids;
  double frequency = 100.0;  // Hz, aggregate over all ids
  double start = 0.0;        // seconds
  double duration = 10.0;    // seconds
  std::uint64_t rng_seed = 0;
  std::string source = "attacker";
  // Attacker controllers run without automatic retransmission: a lost
  // arbitration round discards the frame.
  bool one_shot = true;
};

void validate(const AttackScenario& scenario);

/// Requests at start + k / frequency for every k with that time before
/// start + duration; dlc 8 with random payload, tagged malicious.
RequestStream generate_attack(const AttackScenario& scenario);

/// Stable merge by timestamp; on equal times benign requests come first.
RequestStream merge_streams(const RequestStream& benign, const RequestStream& malicious);

/// Fifteen identifiers spread roughly logarithmically over [0x000, 0x7FF].
std::vector<CanId> default_sweep_ids();

/// `timestamp_us,id_hex` for every malicious frame that reached the bus.
void write_truth(const SimulationResult& result, const std::filesystem::path& path);
std::filesystem::path truth_path_for(const std::filesystem::path& log_path);

nlohmann::json to_json(const AttackScenario& scenario);
AttackScenario attack_scenario_from_json(const nlohmann::json& j, const std::string& pointer = "");

}  // namespace canids
