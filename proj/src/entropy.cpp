#include "canids/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "canids/entropy_kernels.hpp"

namespace canids {

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error("binary_entropy: p = " + std::to_string(p) + " outside [0, 1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  const double q = 1.0 - p;
  return -p * std::log2(p) - q * std::log2(q);
}

BitCounts& BitCounts::operator+=(const BitCounts& other) {
  total += other.total;
  for (int i = 0; i < kIdBits; ++i) ones[i] += other.ones[i];
  return *this;
}

double BitStats::p(int bit_index) const {
  if (counts.total == 0) throw Error("empty window");
  return static_cast<double>(counts.ones.at(static_cast<std::size_t>(bit_index))) / static_cast<double>(counts.total);
}

double BitStats::H(int bit_index) const { return binary_entropy(p(bit_index)); }

std::array<double, kIdBits> BitStats::p_vector() const {
  std::array<double, kIdBits> v{};
  for (int i = 0; i < kIdBits; ++i) v[i] = p(i);
  return v;
}

std::array<double, kIdBits> BitStats::H_vector() const {
  std::array<double, kIdBits> v{};
  for (int i = 0; i < kIdBits; ++i) v[i] = H(i);
  return v;
}

BitStats bit_stats_from_counts(const BitCounts& counts, std::uint64_t window_id) {
  if (counts.total == 0) throw Error("empty window");
  BitStats s;
  s.window_id = window_id;
  s.counts = counts;
  return s;
}

BitStats bit_stats(std::span<const CanFrame> frames, std::uint64_t window_id) {
  if (frames.empty()) throw Error("empty window");
  BitStats s = bit_stats_from_counts(kernels::count_bits_serial(frames), window_id);
  s.start_us = frames.front().timestamp_us;
  s.end_us = frames.back().timestamp_us + 1;
  return s;
}

void validate(const WindowPolicy& policy) {
  if (!(policy.length > 0)) throw Error("window length must be positive");
  if (!(policy.stride > 0)) throw Error("window stride must be positive");
  if (policy.stride > policy.length) throw Error("window stride must not exceed length");
  if (policy.mode == WindowMode::Count &&
      (policy.length != std::floor(policy.length) || policy.stride != std::floor(policy.stride)))
    throw Error("count-mode window length and stride must be whole message counts");
}

std::string to_string(WindowMode mode) { return mode == WindowMode::Time ? "time" : "count"; }

WindowMode parse_window_mode(const std::string& text) {
  if (text == "time") return WindowMode::Time;
  if (text == "count") return WindowMode::Count;
  throw Error("unknown window mode '" + text + "'");
}

std::vector<WindowSpan> window_spans(std::span<const CanFrame> frames, const WindowPolicy& policy,
                                     std::optional<std::uint64_t> origin_us) {
  validate(policy);
  std::vector<WindowSpan> spans;
  if (frames.empty()) return spans;
  const std::size_t n = frames.size();

  if (policy.mode == WindowMode::Count) {
    const auto length = static_cast<std::size_t>(policy.length);
    const auto stride = static_cast<std::size_t>(policy.stride);
    for (std::size_t k = 0, first = 0; first < n; ++k, first += stride) {
      const std::size_t last = std::min(n, first + length);
      spans.push_back(WindowSpan{k, first, last, frames[first].timestamp_us, frames[last - 1].timestamp_us + 1,
                                 first + length > n});
      if (last == n) break;
    }
    return spans;
  }

  const auto length_us = static_cast<std::uint64_t>(std::llround(policy.length * 1e6));
  const auto stride_us = static_cast<std::uint64_t>(std::llround(policy.stride * 1e6));
  const std::uint64_t origin = origin_us.value_or(frames.front().timestamp_us);
  const std::uint64_t log_end = frames.back().timestamp_us + 1;
  const auto by_time = [](const CanFrame& f, std::uint64_t t) { return f.timestamp_us < t; };
  for (std::uint64_t k = 0, start = origin; start < log_end; ++k, start += stride_us) {
    const std::uint64_t end = start + length_us;
    const auto first = static_cast<std::size_t>(std::lower_bound(frames.begin(), frames.end(), start, by_time) - frames.begin());
    const auto last = static_cast<std::size_t>(std::lower_bound(frames.begin(), frames.end(), end, by_time) - frames.begin());
    spans.push_back(WindowSpan{k, first, last, start, end, end > log_end});
  }
  return spans;
}

WindowedStats windowed_stats(std::span<const CanFrame> frames, const WindowPolicy& policy,
                             std::optional<std::uint64_t> origin_us, Exec exec) {
  const auto spans = window_spans(frames, policy, origin_us);
  const auto counts = exec == Exec::Parallel ? kernels::count_windows_parallel(frames, spans)
                                             : kernels::count_windows_serial(frames, spans);

  double full_sum = 0;
  std::size_t full_n = 0;
  for (std::size_t w = 0; w < spans.size(); ++w)
    if (!spans[w].partial && counts[w].total > 0) {
      full_sum += static_cast<double>(counts[w].total);
      ++full_n;
    }
  const double expected = policy.mode == WindowMode::Count ? policy.length
                          : full_n > 0                     ? full_sum / static_cast<double>(full_n)
                                                           : 0.0;

  WindowedStats out;
  for (std::size_t w = 0; w < spans.size(); ++w) {
    const auto& s = spans[w];
    if (counts[w].total == 0) {
      out.gaps.push_back(s.window_id);
      continue;
    }
    if (s.partial && static_cast<double>(counts[w].total) < 0.25 * expected) {
      out.dropped.push_back(s.window_id);
      continue;
    }
    BitStats b = bit_stats_from_counts(counts[w], s.window_id);
    b.start_us = s.start_us;
    b.end_us = s.end_us;
    out.windows.push_back(b);
  }
  return out;
}

void write_stats_csv(std::ostream& out, std::span<const BitStats> stats) {
  out << "window_id,message_count";
  for (int i = 1; i <= kIdBits; ++i) out << ",p" << i;
  for (int i = 1; i <= kIdBits; ++i) out << ",H" << i;
  out << '\n';
  char buf[32];
  for (const auto& s : stats) {
    out << s.window_id << ',' << s.message_count();
    for (int i = 0; i < kIdBits; ++i) {
      std::snprintf(buf, sizeof buf, ",%.9f", s.p(i));
      out << buf;
    }
    for (int i = 0; i < kIdBits; ++i) {
      std::snprintf(buf, sizeof buf, ",%.9f", s.H(i));
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace canids
