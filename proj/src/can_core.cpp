#include "canids/can_core.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

namespace canids {

std::string CanId::hex() const {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%03X", static_cast<unsigned>(value_));
  return buf;
}

IdBits id_bits(CanId id) {
  IdBits bits{};
  for (int k = 1; k <= kIdBits; ++k) bits[k - 1] = id.bit(k);
  return bits;
}

CanId id_from_bits(const IdBits& bits) {
  unsigned v = 0;
  for (int b : bits) {
    if (b != 0 && b != 1) throw Error("id bit must be 0 or 1");
    v = (v << 1) | static_cast<unsigned>(b);
  }
  return CanId(v);
}

CanId parse_can_id(const std::string& text) {
  std::string s = text;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) s = s.substr(2);
  if (s.empty() || s.size() > 8) throw Error("malformed CAN id '" + text + "'");
  unsigned v = 0;
  for (char c : s) {
    if (!std::isxdigit(static_cast<unsigned char>(c))) throw Error("malformed CAN id '" + text + "'");
    int d = std::isdigit(static_cast<unsigned char>(c)) ? c - '0' : std::toupper(c) - 'A' + 10;
    v = v * 16 + static_cast<unsigned>(d);
  }
  return CanId(v);
}

CanId arbitration_winner(std::span<const CanId> contenders) {
  if (contenders.empty()) throw Error("arbitration requires at least one contender");
  // Wired-AND resolution, one identifier bit at a time.
  std::vector<CanId> alive(contenders.begin(), contenders.end());
  for (int k = 1; k <= kIdBits && alive.size() > 1; ++k) {
    bool any_dominant = std::any_of(alive.begin(), alive.end(), [k](CanId id) { return id.bit(k) == 0; });
    if (any_dominant) std::erase_if(alive, [k](CanId id) { return id.bit(k) == 1; });
  }
  return alive.front();
}

void validate_frame(const CanFrame& frame) {
  if (frame.dlc > 8) throw Error("dlc must be in [0, 8]");
  if (frame.payload.size() != frame.dlc) throw Error("payload length does not match dlc");
}

int frame_bit_length(int dlc) {
  if (dlc < 0 || dlc > 8) throw Error("dlc must be in [0, 8]");
  return kFrameOverheadBits + 8 * dlc;
}

int frame_bit_length(const CanFrame& frame) { return frame_bit_length(frame.dlc); }

}  // namespace canids
