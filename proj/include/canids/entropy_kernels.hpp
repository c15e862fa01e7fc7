#pragma once

#include <span>

#include "canids/can_core.hpp"
#include "canids/entropy.hpp"

namespace canids::kernels {

// Reference implementation, kept for tests and benchmarks.
BitCounts count_bits_serial(std::span<const CanFrame> frames);

// OpenMP reduction over frames; identical integer result to the serial path.
BitCounts count_bits_parallel(std::span<const CanFrame> frames);

// Counts for many windows at once. The parallel variant distributes windows
// across threads.
std::vector<BitCounts> count_windows_serial(std::span<const CanFrame> frames, std::span<const WindowSpan> spans);
std::vector<BitCounts> count_windows_parallel(std::span<const CanFrame> frames, std::span<const WindowSpan> spans);

}  // namespace canids::kernels
