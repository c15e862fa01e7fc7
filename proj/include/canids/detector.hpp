#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "canids/entropy.hpp"
#include "json.hpp"

namespace canids {

inline constexpr double kDefaultKappa = 5.0;
// Minimal per-bit entropy threshold (Shannon bits).
inline constexpr double kThresholdFloor = 0.005;
// Minimal per-bit probability shift before a direction is called.
inline constexpr double kDirectionFloor = 0.01;

using BitVector = std::array<double, kIdBits>;

struct GoldenTemplate {
  BitVector mean_H{};
  BitVector mean_p{};
  BitVector range{};    // max - min of H per bit across measurements
  BitVector range_p{};  // max - min of p per bit
  BitVector threshold{};            // max(kappa * range, floor)
  BitVector direction_threshold{};  // max(kappa * range_p, kDirectionFloor)
  double kappa = kDefaultKappa;
  double floor = kThresholdFloor;
  int measurement_count = 0;
  WindowPolicy policy;
  std::vector<std::string> warnings;
};

/// Throws "cannot estimate range" with fewer than two measurements.
GoldenTemplate build_template(std::span<const BitStats> measurements, double kappa = kDefaultKappa,
                              const WindowPolicy& policy = {}, double floor = kThresholdFloor);

/// Same rule over raw per-measurement entropy and probability vectors.
GoldenTemplate build_template(std::span<const BitVector> H, std::span<const BitVector> p, double kappa = kDefaultKappa,
                              const WindowPolicy& policy = {}, double floor = kThresholdFloor);

struct DetectionVerdict {
  std::uint64_t window_id = 0;
  bool alert = false;
  std::vector<int> flagged_bits;  // 1-based, MSB first
  BitVector deviation{};          // H_window - mean_H
  BitVector p_deviation{};        // p_window - mean_p
};

DetectionVerdict detect(const BitStats& window, const GoldenTemplate& tmpl);

/// Rejects windows produced under a different WindowPolicy than the template's.
std::vector<DetectionVerdict> detect_all(std::span<const BitStats> windows, const GoldenTemplate& tmpl,
                                         const WindowPolicy& windows_policy);

/// Injected messages inside alerted windows over all injected messages.
/// Throws "no injections to score" when the total is zero.
double detection_rate(std::span<const DetectionVerdict> verdicts, std::span<const std::uint64_t> injected);

nlohmann::json to_json(const GoldenTemplate& tmpl);
GoldenTemplate template_from_json(const nlohmann::json& j);

/// `window_id,alert,flagged_bits,d1..d11,dp1..dp11`
void write_verdicts_csv(std::ostream& out, std::span<const DetectionVerdict> verdicts);

}  // namespace canids
