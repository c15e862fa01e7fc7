#include "canids/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json_util.hpp"

namespace canids {

GoldenTemplate build_template(std::span<const BitVector> H, std::span<const BitVector> p, double kappa,
                              const WindowPolicy& policy, double floor) {
  if (H.size() != p.size()) throw Error("entropy and probability measurement counts differ");
  if (H.size() < 2) throw Error("cannot estimate range from fewer than 2 measurements");
  if (!(kappa > 0)) throw Error("kappa must be positive");
  if (!(floor >= 0)) throw Error("threshold floor must be non-negative");
  validate(policy);

  GoldenTemplate t;
  t.kappa = kappa;
  t.floor = floor;
  t.policy = policy;
  t.measurement_count = static_cast<int>(H.size());
  if (kappa < 3 || kappa > 10)
    t.warnings.push_back("kappa " + std::to_string(kappa) + " outside the usual [3, 10] band");

  const double n = static_cast<double>(H.size());
  for (int i = 0; i < kIdBits; ++i) {
    double h_lo = H[0][i], h_hi = H[0][i], p_lo = p[0][i], p_hi = p[0][i], h_sum = 0, p_sum = 0;
    for (std::size_t m = 0; m < H.size(); ++m) {
      h_lo = std::min(h_lo, H[m][i]);
      h_hi = std::max(h_hi, H[m][i]);
      p_lo = std::min(p_lo, p[m][i]);
      p_hi = std::max(p_hi, p[m][i]);
      h_sum += H[m][i];
      p_sum += p[m][i];
    }
    t.mean_H[i] = h_sum / n;
    t.mean_p[i] = p_sum / n;
    t.range[i] = h_hi - h_lo;
    t.range_p[i] = p_hi - p_lo;
    t.threshold[i] = std::max(kappa * t.range[i], floor);
    t.direction_threshold[i] = std::max(kappa * t.range_p[i], kDirectionFloor);
    if (t.range[i] == 0.0)
      t.warnings.push_back("bit " + std::to_string(i + 1) + " has zero baseline range; threshold set to floor");
  }
  return t;
}

GoldenTemplate build_template(std::span<const BitStats> measurements, double kappa, const WindowPolicy& policy,
                              double floor) {
  std::vector<BitVector> H, p;
  for (const auto& m : measurements) {
    H.push_back(m.H_vector());
    p.push_back(m.p_vector());
  }
  return build_template(H, p, kappa, policy, floor);
}

DetectionVerdict detect(const BitStats& window, const GoldenTemplate& tmpl) {
  DetectionVerdict v;
  v.window_id = window.window_id;
  for (int i = 0; i < kIdBits; ++i) {
    v.deviation[i] = window.H(i) - tmpl.mean_H[i];
    v.p_deviation[i] = window.p(i) - tmpl.mean_p[i];
    if (std::abs(v.deviation[i]) > tmpl.threshold[i]) v.flagged_bits.push_back(i + 1);
  }
  v.alert = !v.flagged_bits.empty();
  return v;
}

std::vector<DetectionVerdict> detect_all(std::span<const BitStats> windows, const GoldenTemplate& tmpl,
                                         const WindowPolicy& windows_policy) {
  if (!(windows_policy == tmpl.policy))
    throw Error("window policy differs from the one the template was built with");
  std::vector<DetectionVerdict> out(windows.size());
  const std::int64_t n = static_cast<std::int64_t>(windows.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t w = 0; w < n; ++w) out[static_cast<std::size_t>(w)] = detect(windows[static_cast<std::size_t>(w)], tmpl);
  return out;
}

double detection_rate(std::span<const DetectionVerdict> verdicts, std::span<const std::uint64_t> injected) {
  if (verdicts.size() != injected.size()) throw Error("verdicts and injected counts are not aligned");
  std::uint64_t detected = 0, total = 0;
  for (std::size_t w = 0; w < verdicts.size(); ++w) {
    total += injected[w];
    if (verdicts[w].alert) detected += injected[w];
  }
  if (total == 0) throw Error("no injections to score");
  return static_cast<double>(detected) / static_cast<double>(total);
}

namespace {

nlohmann::json vec_json(const BitVector& v) { return nlohmann::json(std::vector<double>(v.begin(), v.end())); }

BitVector vec_from(const nlohmann::json& j, const std::string& key) {
  using namespace detail;
  const auto& arr = require(j, key, "");
  if (!arr.is_array() || arr.size() != kIdBits) json_fail("/" + key, "expected array of 11 numbers");
  BitVector v{};
  for (int i = 0; i < kIdBits; ++i) v[i] = number_at(arr[i], "/" + key + "/" + std::to_string(i));
  return v;
}

}  // namespace

nlohmann::json to_json(const GoldenTemplate& t) {
  return {{"mean_H", vec_json(t.mean_H)},
          {"mean_p", vec_json(t.mean_p)},
          {"range", vec_json(t.range)},
          {"range_p", vec_json(t.range_p)},
          {"threshold", vec_json(t.threshold)},
          {"direction_threshold", vec_json(t.direction_threshold)},
          {"kappa", t.kappa},
          {"floor", t.floor},
          {"measurement_count", t.measurement_count},
          {"window", {{"mode", to_string(t.policy.mode)}, {"length", t.policy.length}, {"stride", t.policy.stride}}},
          {"warnings", t.warnings}};
}

GoldenTemplate template_from_json(const nlohmann::json& j) {
  using namespace detail;
  GoldenTemplate t;
  t.mean_H = vec_from(j, "mean_H");
  t.mean_p = vec_from(j, "mean_p");
  t.range = vec_from(j, "range");
  t.range_p = vec_from(j, "range_p");
  t.threshold = vec_from(j, "threshold");
  t.direction_threshold = vec_from(j, "direction_threshold");
  t.kappa = number_at(require(j, "kappa", ""), "/kappa");
  t.floor = number_at(require(j, "floor", ""), "/floor");
  t.measurement_count = static_cast<int>(uint_at(require(j, "measurement_count", ""), "/measurement_count"));
  const auto& w = require(j, "window", "");
  try {
    t.policy.mode = parse_window_mode(string_at(require(w, "mode", "/window"), "/window/mode"));
  } catch (const Error& e) {
    if (std::string(e.what()).starts_with("/")) throw;
    json_fail("/window/mode", e.what());
  }
  t.policy.length = number_at(require(w, "length", "/window"), "/window/length");
  t.policy.stride = number_at(require(w, "stride", "/window"), "/window/stride");
  if (j.contains("warnings") && j["warnings"].is_array())
    for (const auto& s : j["warnings"]) t.warnings.push_back(s.get<std::string>());
  if (t.measurement_count < 2) json_fail("/measurement_count", "must be at least 2");
  for (int i = 0; i < kIdBits; ++i)
    if (t.threshold[i] < 0 || t.direction_threshold[i] < 0) json_fail("/threshold", "thresholds must be non-negative");
  return t;
}

void write_verdicts_csv(std::ostream& out, std::span<const DetectionVerdict> verdicts) {
  out << "window_id,alert,flagged_bits";
  for (int i = 1; i <= kIdBits; ++i) out << ",d" << i;
  for (int i = 1; i <= kIdBits; ++i) out << ",dp" << i;
  out << '\n';
  char buf[32];
  for (const auto& v : verdicts) {
    out << v.window_id << ',' << (v.alert ? 1 : 0) << ',';
    for (std::size_t k = 0; k < v.flagged_bits.size(); ++k) out << (k ? ";" : "") << v.flagged_bits[k];
    for (double d : v.deviation) {
      std::snprintf(buf, sizeof buf, ",%.9f", d);
      out << buf;
    }
    for (double d : v.p_deviation) {
      std::snprintf(buf, sizeof buf, ",%.9f", d);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace canids
