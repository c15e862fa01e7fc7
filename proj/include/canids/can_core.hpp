#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "canids/error.hpp"

namespace canids {

inline constexpr int kIdBits = 11;
inline constexpr std::uint16_t kMaxStandardId = 0x7FF;
inline constexpr int kIdSpace = 2048;

/// 11-bit standard CAN identifier. Lower value means higher bus priority.
class CanId {
 public:
  constexpr CanId() = default;

  /// Throws canids::Error("extended ID unsupported") for values above 0x7FF.
  explicit CanId(unsigned value) : value_(checked(value)) {}

  constexpr std::uint16_t value() const { return value_; }

  /// Bit `k` for k in [1, 11], MSB-first: bit 1 is 0x400, bit 11 is 0x001.
  constexpr int bit(int k) const { return (value_ >> (kIdBits - k)) & 1; }

  std::string hex() const;

  friend constexpr auto operator<=>(CanId, CanId) = default;

 private:
  static std::uint16_t checked(unsigned value) {
    if (value > kMaxStandardId) throw Error("extended ID unsupported");
    return static_cast<std::uint16_t>(value);
  }

  std::uint16_t value_ = 0;
};

using IdBits = std::array<int, kIdBits>;

IdBits id_bits(CanId id);
CanId id_from_bits(const IdBits& bits);

/// Parses "2A5", "0x2A5" (case-insensitive).
CanId parse_can_id(const std::string& text);

/// Bitwise arbitration: dominant 0 beats recessive 1 MSB-first, so the
/// numerically smallest identifier wins. Throws on an empty contender set.
CanId arbitration_winner(std::span<const CanId> contenders);

struct CanFrame {
  std::uint64_t timestamp_us = 0;
  CanId id;
  std::uint8_t dlc = 0;
  std::vector<std::uint8_t> payload;
  // Simulation metadata only; never on the wire and never read by the detector.
  std::string source;

  bool operator==(const CanFrame&) const = default;
};

/// Throws if dlc > 8 or payload.size() != dlc.
void validate_frame(const CanFrame& frame);

/// Fixed on-wire overhead for a standard data frame, bit stuffing excluded.
inline constexpr int kFrameOverheadBits = 47;

int frame_bit_length(const CanFrame& frame);
int frame_bit_length(int dlc);

}  // namespace canids
