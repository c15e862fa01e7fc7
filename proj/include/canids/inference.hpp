#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "canids/can_core.hpp"
#include "canids/detector.hpp"
#include "json.hpp"

namespace canids {

inline constexpr int kDefaultRank = 10;

enum class BitLabel { Zero, One, Unknown };
using BitConstraint = std::array<BitLabel, kIdBits>;

char to_char(BitLabel label);  // '0', '1', '?'
std::string to_string(const BitConstraint& constraint);
BitConstraint parse_constraint(const std::string& text);  // e.g. "0000???????"

struct InferenceResult {
  std::vector<CanId> candidates;  // ascending, at most n
  bool hit = false;
  double residual = 0.0;  // multi-id fit quality; 0 for single-id ranking
  // infer_multi only: top-n ids by residual for each greedy slot.
  std::vector<std::vector<CanId>> slot_candidates;
};

/// All 2048 standard identifiers, ascending.
std::vector<CanId> full_id_pool();

/// Labels each bit from the sign of the probability deviation against the
/// template's per-bit direction threshold. Throws on a non-alert verdict.
BitConstraint derive_constraints(const DetectionVerdict& verdict, const GoldenTemplate& tmpl);

bool satisfies(CanId id, const BitConstraint& constraint);

/// Filters `pool` to ids consistent with every labelled bit, sorts ascending,
/// keeps the first n. No consistent id yields an empty list (hit = false).
InferenceResult rank_candidates(const BitConstraint& constraint, std::span<const CanId> pool, int n = kDefaultRank);

/// Greedy forward selection of k ids explaining the probability deviation as
/// a non-negative mixture of injected ids. The selected set is then refined by
/// single-id exchanges, restarted from each first-step runner-up; the forward
/// steps' rankings are kept as slot lists. k = 1 delegates to rank_candidates.
InferenceResult infer_multi(const DetectionVerdict& verdict, const GoldenTemplate& tmpl, std::span<const CanId> pool,
                            int k, int n = kDefaultRank);

/// Sets result.hit: every true id must appear in the candidate list (or, for
/// multi-id results, in one of the per-slot lists).
void score_hit(InferenceResult& result, std::span<const CanId> truth);

/// Throws on an empty trial list.
double hit_rate(std::span<const InferenceResult> trials);

/// Non-negative least squares (Lawson-Hanson): min ||A w - y|| s.t. w >= 0.
/// `columns` are the columns of A; returns the residual norm, weights in `w`.
double nnls(std::span<const BitVector> columns, const BitVector& y, std::vector<double>* w = nullptr);

nlohmann::json to_json(const InferenceResult& result);

}  // namespace canids
