#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "canids/can_core.hpp"

namespace canids {

/// Shannon entropy of a Bernoulli(p) variable in bits, with 0*log2(0) = 0.
/// Throws canids::Error for p outside [0, 1].
double binary_entropy(double p);

/// Exact per-bit tallies: ones[i] frames have identifier bit i+1 set.
struct BitCounts {
  std::uint64_t total = 0;
  std::array<std::uint64_t, kIdBits> ones{};

  BitCounts& operator+=(const BitCounts& other);
  friend BitCounts operator+(BitCounts a, const BitCounts& b) { return a += b; }
  bool operator==(const BitCounts&) const = default;
};

/// Per-window bit statistics. Probabilities are kept as exact counts;
/// p and H are evaluated on read.
struct BitStats {
  std::uint64_t window_id = 0;
  BitCounts counts;
  std::uint64_t start_us = 0;  // window bounds (time mode) or first frame time
  std::uint64_t end_us = 0;

  std::uint64_t message_count() const { return counts.total; }
  double p(int bit_index) const;  // bit_index in [0, 11)
  double H(int bit_index) const;
  std::array<double, kIdBits> p_vector() const;
  std::array<double, kIdBits> H_vector() const;
};

/// Throws "empty window" for an empty frame list.
BitStats bit_stats(std::span<const CanFrame> frames, std::uint64_t window_id = 0);
BitStats bit_stats_from_counts(const BitCounts& counts, std::uint64_t window_id = 0);

enum class WindowMode { Time, Count };

struct WindowPolicy {
  WindowMode mode = WindowMode::Time;
  double length = 1.0;  // seconds (time) or messages (count)
  double stride = 1.0;

  bool operator==(const WindowPolicy&) const = default;
};

void validate(const WindowPolicy& policy);
std::string to_string(WindowMode mode);
WindowMode parse_window_mode(const std::string& text);

enum class Exec { Serial, Parallel };

struct WindowedStats {
  std::vector<BitStats> windows;
  std::vector<std::uint64_t> gaps;     // window ids with zero messages (time mode)
  std::vector<std::uint64_t> dropped;  // trailing partial windows below 25% of the expected count
};

/// Half-open window bounds over `frames`. Time mode windows start at `origin_us`
/// (default: first frame timestamp); count mode windows index the frame list.
struct WindowSpan {
  std::uint64_t window_id;
  std::size_t first;
  std::size_t last;  // exclusive
  std::uint64_t start_us;
  std::uint64_t end_us;
  bool partial;
};
std::vector<WindowSpan> window_spans(std::span<const CanFrame> frames, const WindowPolicy& policy,
                                     std::optional<std::uint64_t> origin_us = std::nullopt);

/// Partitions or slides over `frames` per policy. A trailing partial window is
/// kept only if it holds at least 25% of the mean full-window count.
WindowedStats windowed_stats(std::span<const CanFrame> frames, const WindowPolicy& policy,
                             std::optional<std::uint64_t> origin_us = std::nullopt, Exec exec = Exec::Parallel);

/// `window_id,message_count,p1..p11,H1..H11`
void write_stats_csv(std::ostream& out, std::span<const BitStats> stats);

}  // namespace canids
