#include "canids/entropy_kernels.hpp"

#include <cstdint>

namespace canids::kernels {

BitCounts count_bits_serial(std::span<const CanFrame> frames) {
  BitCounts c;
  c.total = frames.size();
  for (const auto& f : frames) {
    const unsigned v = f.id.value();
    for (int i = 0; i < kIdBits; ++i) c.ones[i] += (v >> (kIdBits - 1 - i)) & 1u;
  }
  return c;
}

BitCounts count_bits_parallel(std::span<const CanFrame> frames) {
  // Flat accumulators so the OpenMP array-section reduction applies.
  std::uint64_t ones[kIdBits] = {};
  const std::int64_t n = static_cast<std::int64_t>(frames.size());
  const CanFrame* data = frames.data();
#pragma omp parallel for reduction(+ : ones[:kIdBits]) schedule(static)
  for (std::int64_t j = 0; j < n; ++j) {
    const unsigned v = data[j].id.value();
    for (int i = 0; i < kIdBits; ++i) ones[i] += (v >> (kIdBits - 1 - i)) & 1u;
  }
  BitCounts c;
  c.total = frames.size();
  for (int i = 0; i < kIdBits; ++i) c.ones[i] = ones[i];
  return c;
}

std::vector<BitCounts> count_windows_serial(std::span<const CanFrame> frames, std::span<const WindowSpan> spans) {
  std::vector<BitCounts> out(spans.size());
  for (std::size_t w = 0; w < spans.size(); ++w)
    out[w] = count_bits_serial(frames.subspan(spans[w].first, spans[w].last - spans[w].first));
  return out;
}

std::vector<BitCounts> count_windows_parallel(std::span<const CanFrame> frames, std::span<const WindowSpan> spans) {
  std::vector<BitCounts> out(spans.size());
  const std::int64_t n = static_cast<std::int64_t>(spans.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t w = 0; w < n; ++w) {
    const auto& s = spans[static_cast<std::size_t>(w)];
    out[static_cast<std::size_t>(w)] = count_bits_serial(frames.subspan(s.first, s.last - s.first));
  }
  return out;
}

}  // namespace canids::kernels
