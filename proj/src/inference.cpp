#include "canids/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

namespace canids {

char to_char(BitLabel label) {
  switch (label) {
    case BitLabel::Zero: return '0';
    case BitLabel::One: return '1';
    case BitLabel::Unknown: return '?';
  }
  return '?';
}

std::string to_string(const BitConstraint& constraint) {
  std::string s;
  for (auto l : constraint) s += to_char(l);
  return s;
}

BitConstraint parse_constraint(const std::string& text) {
  if (text.size() != kIdBits) throw Error("constraint must have 11 labels");
  BitConstraint c{};
  for (int i = 0; i < kIdBits; ++i) {
    switch (text[i]) {
      case '0': c[i] = BitLabel::Zero; break;
      case '1': c[i] = BitLabel::One; break;
      case '?': c[i] = BitLabel::Unknown; break;
      default: throw Error("constraint labels must be 0, 1 or ?");
    }
  }
  return c;
}

std::vector<CanId> full_id_pool() {
  std::vector<CanId> pool;
  pool.reserve(kIdSpace);
  for (unsigned v = 0; v < kIdSpace; ++v) pool.emplace_back(v);
  return pool;
}

BitConstraint derive_constraints(const DetectionVerdict& verdict, const GoldenTemplate& tmpl) {
  if (!verdict.alert) throw Error("constraints are only derived for alerted windows");
  BitConstraint c{};
  for (int i = 0; i < kIdBits; ++i) {
    const double d = verdict.p_deviation[i], delta = tmpl.direction_threshold[i];
    c[i] = d < -delta ? BitLabel::Zero : d > delta ? BitLabel::One : BitLabel::Unknown;
  }
  return c;
}

bool satisfies(CanId id, const BitConstraint& constraint) {
  for (int i = 0; i < kIdBits; ++i) {
    if (constraint[i] == BitLabel::Unknown) continue;
    if (id.bit(i + 1) != (constraint[i] == BitLabel::One ? 1 : 0)) return false;
  }
  return true;
}

InferenceResult rank_candidates(const BitConstraint& constraint, std::span<const CanId> pool, int n) {
  if (n < 1) throw Error("rank n must be at least 1");
  if (pool.empty()) throw Error("id pool is empty");
  std::vector<CanId> consistent;
  for (CanId id : pool)
    if (satisfies(id, constraint)) consistent.push_back(id);
  std::sort(consistent.begin(), consistent.end());
  consistent.erase(std::unique(consistent.begin(), consistent.end()), consistent.end());
  if (consistent.size() > static_cast<std::size_t>(n)) consistent.resize(static_cast<std::size_t>(n));
  InferenceResult r;
  r.candidates = std::move(consistent);
  return r;
}

double nnls(std::span<const BitVector> columns, const BitVector& y_in, std::vector<double>* w_out) {
  using Mat = Eigen::Matrix<double, kIdBits, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<double, kIdBits, 1>;
  const int m = static_cast<int>(columns.size());
  Mat A(kIdBits, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < kIdBits; ++i) A(i, j) = columns[static_cast<std::size_t>(j)][i];
  Vec y;
  for (int i = 0; i < kIdBits; ++i) y(i) = y_in[i];

  Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
  std::vector<bool> passive(static_cast<std::size_t>(m), false);
  constexpr double tol = 1e-12;

  const auto solve_passive = [&]() {
    std::vector<int> idx;
    for (int j = 0; j < m; ++j)
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    Mat Ap(kIdBits, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) Ap.col(static_cast<Eigen::Index>(c)) = A.col(idx[c]);
    Eigen::VectorXd sp = Ap.colPivHouseholderQr().solve(y);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(m);
    for (std::size_t c = 0; c < idx.size(); ++c) s(idx[c]) = sp(static_cast<Eigen::Index>(c));
    return s;
  };

  for (int outer = 0; outer < 3 * m + 3; ++outer) {
    Eigen::VectorXd grad = A.transpose() * (y - A * w);
    int best = -1;
    double best_g = tol;
    for (int j = 0; j < m; ++j)
      if (!passive[static_cast<std::size_t>(j)] && grad(j) > best_g) {
        best_g = grad(j);
        best = j;
      }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;

    for (int inner = 0; inner < 3 * m + 3; ++inner) {
      Eigen::VectorXd s = solve_passive();
      bool feasible = true;
      for (int j = 0; j < m; ++j)
        if (passive[static_cast<std::size_t>(j)] && s(j) <= tol) feasible = false;
      if (feasible) {
        w = s;
        break;
      }
      double alpha = 1.0;
      for (int j = 0; j < m; ++j)
        if (passive[static_cast<std::size_t>(j)] && s(j) <= tol) alpha = std::min(alpha, w(j) / (w(j) - s(j)));
      w += alpha * (s - w);
      for (int j = 0; j < m; ++j)
        if (passive[static_cast<std::size_t>(j)] && w(j) <= tol) {
          passive[static_cast<std::size_t>(j)] = false;
          w(j) = 0;
        }
    }
  }
  if (w_out) w_out->assign(w.data(), w.data() + m);
  return (y - A * w).norm();
}

namespace {

// Exact NNLS for a handful of columns: the optimum is the least-squares fit on
// some support with strictly positive weights, so enumerate every support.
class SmallNnls {
 public:
  static constexpr int kMaxColumns = 6;

  explicit SmallNnls(const BitVector& y) : y_(y) {
    yy_ = 0;
    for (double v : y) yy_ += v * v;
  }

  double residual(std::span<const BitVector* const> cols) const {
    const int m = static_cast<int>(cols.size());
    double G[kMaxColumns][kMaxColumns], b[kMaxColumns];
    for (int r = 0; r < m; ++r) {
      b[r] = dot(*cols[r], y_);
      for (int c = r; c < m; ++c) G[r][c] = G[c][r] = dot(*cols[r], *cols[c]);
    }
    double best = yy_, best_w[kMaxColumns] = {};
    for (unsigned mask = 1; mask < (1u << m); ++mask) {
      int idx[kMaxColumns], n = 0;
      for (int j = 0; j < m; ++j)
        if (mask & (1u << j)) idx[n++] = j;
      double A[kMaxColumns][kMaxColumns + 1];
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) A[r][c] = G[idx[r]][idx[c]];
        A[r][n] = b[idx[r]];
      }
      double w[kMaxColumns];
      if (!solve(A, n, w)) continue;
      bool positive = true;
      double wb = 0;
      for (int r = 0; r < n; ++r) {
        positive = positive && w[r] > 0;
        wb += w[r] * b[idx[r]];
      }
      // At a least-squares optimum w'Gw = w'b, so ||y - Aw||^2 = y'y - w'b.
      if (positive && yy_ - wb < best) {
        best = yy_ - wb;
        std::fill(best_w, best_w + m, 0.0);
        for (int r = 0; r < n; ++r) best_w[idx[r]] = w[r];
      }
    }
    // The shortcut above cancels badly near zero; report the explicit norm.
    double r2 = 0;
    for (int i = 0; i < kIdBits; ++i) {
      double e = y_[i];
      for (int j = 0; j < m; ++j) e -= best_w[j] * (*cols[j])[i];
      r2 += e * e;
    }
    return std::sqrt(r2);
  }

 private:
  static double dot(const BitVector& a, const BitVector& b) {
    double s = 0;
    for (int i = 0; i < kIdBits; ++i) s += a[i] * b[i];
    return s;
  }

  // Gaussian elimination with partial pivoting on an n x (n+1) system.
  static bool solve(double (&A)[kMaxColumns][kMaxColumns + 1], int n, double* w) {
    for (int c = 0; c < n; ++c) {
      int piv = c;
      for (int r = c + 1; r < n; ++r)
        if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
      if (std::abs(A[piv][c]) < 1e-12) return false;
      if (piv != c)
        for (int k = 0; k <= n; ++k) std::swap(A[c][k], A[piv][k]);
      for (int r = c + 1; r < n; ++r) {
        const double f = A[r][c] / A[c][c];
        for (int k = c; k <= n; ++k) A[r][k] -= f * A[c][k];
      }
    }
    for (int r = n - 1; r >= 0; --r) {
      double s = A[r][n];
      for (int k = r + 1; k < n; ++k) s -= A[r][k] * w[k];
      w[r] = s / A[r][r];
    }
    return true;
  }

  BitVector y_;
  double yy_ = 0;
};

double mixture_residual(const SmallNnls& small, const BitVector& y, std::span<const BitVector* const> cols) {
  if (static_cast<int>(cols.size()) <= SmallNnls::kMaxColumns) return small.residual(cols);
  std::vector<BitVector> copy;
  for (const auto* c : cols) copy.push_back(*c);
  return nnls(copy, y);
}

}  // namespace

InferenceResult infer_multi(const DetectionVerdict& verdict, const GoldenTemplate& tmpl, std::span<const CanId> pool,
                            int k, int n) {
  if (k < 1) throw Error("number of injected ids must be at least 1");
  if (k > n) throw Error("k exceeds rank n");
  if (k == 1) return rank_candidates(derive_constraints(verdict, tmpl), pool, n);
  if (!verdict.alert) throw Error("inference requires an alerted window");
  if (pool.empty()) throw Error("id pool is empty");

  std::vector<CanId> ids(pool.begin(), pool.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.size() < static_cast<std::size_t>(k)) throw Error("id pool smaller than k");

  // Mixture column of id c: b_c - mean_p, so that p_window - mean_p = sum_j w_j (b_j - mean_p).
  std::vector<BitVector> column(ids.size());
  for (std::size_t c = 0; c < ids.size(); ++c)
    for (int i = 0; i < kIdBits; ++i) column[c][i] = ids[c].bit(i + 1) - tmpl.mean_p[i];

  const SmallNnls small(verdict.p_deviation);
  const std::size_t count = ids.size();
  std::vector<double> residual(count);

  // Residual of `chosen` extended by each pool id. Ids already chosen score +inf.
  const auto extend = [&](const std::vector<std::size_t>& chosen) {
    const std::int64_t total = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < total; ++c) {
      const auto cu = static_cast<std::size_t>(c);
      bool taken = false;
      for (auto s : chosen) taken = taken || s == cu;
      if (taken) {
        residual[cu] = std::numeric_limits<double>::infinity();
        continue;
      }
      std::vector<const BitVector*> cols;
      for (auto s : chosen) cols.push_back(&column[s]);
      cols.push_back(&column[cu]);
      residual[cu] = mixture_residual(small, verdict.p_deviation, cols);
    }
    // Lowest residual; ties resolve to the smaller id (higher priority).
    std::size_t best = 0;
    for (std::size_t c = 1; c < count; ++c)
      if (residual[c] < residual[best]) best = c;
    return best;
  };

  // Forward selection. Each step keeps its top-n ranking as that slot's list.
  std::vector<std::size_t> chosen;
  std::vector<std::vector<CanId>> slot_lists(static_cast<std::size_t>(k));
  std::vector<std::size_t> order(count);
  for (int slot = 0; slot < k; ++slot) {
    chosen.push_back(extend(chosen));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return residual[a] < residual[b]; });
    auto& list = slot_lists[static_cast<std::size_t>(slot)];
    for (std::size_t r = 0; r < count && list.size() < static_cast<std::size_t>(n); ++r)
      if (std::isfinite(residual[order[r]])) list.push_back(ids[order[r]]);
  }

  // Multi-start refinement of the selected set. Each first-step runner-up
  // seeds a forward pass, then members are swapped for any pool id that lowers
  // the residual. The forward-step lists above are left as is.
  const auto fit_of = [&](const std::vector<std::size_t>& set) {
    std::vector<const BitVector*> cols;
    for (auto c : set) cols.push_back(&column[c]);
    return mixture_residual(small, verdict.p_deviation, cols);
  };
  const auto refine = [&](std::vector<std::size_t>& set) {
    double fit = fit_of(set);
    constexpr int kMaxSweeps = 16;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
      bool improved = false;
      for (std::size_t slot = 0; slot < set.size(); ++slot) {
        std::vector<std::size_t> rest = set;
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(slot));
        const std::size_t best = extend(rest);
        if (residual[best] < fit - 1e-12) {
          set[slot] = best;
          fit = residual[best];
          improved = true;
        }
      }
      if (!improved) break;
    }
    return fit;
  };
  std::vector<std::size_t> seeds;
  for (CanId id : slot_lists.front()) seeds.push_back(static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin()));
  double fit = std::numeric_limits<double>::infinity();
  for (std::size_t seed : seeds) {
    std::vector<std::size_t> set{seed};
    while (set.size() < static_cast<std::size_t>(k)) set.push_back(extend(set));
    const double f = refine(set);
    if (f < fit - 1e-12) {
      fit = f;
      chosen = set;
    }
  }

  InferenceResult result;
  for (auto c : chosen) result.candidates.push_back(ids[c]);
  std::sort(result.candidates.begin(), result.candidates.end());
  result.residual = fit;
  result.slot_candidates = std::move(slot_lists);
  return result;
}

void score_hit(InferenceResult& result, std::span<const CanId> truth) {
  const auto contains = [](const std::vector<CanId>& v, CanId id) { return std::find(v.begin(), v.end(), id) != v.end(); };
  result.hit = !truth.empty();
  for (CanId id : truth) {
    bool found = contains(result.candidates, id);
    for (const auto& slot : result.slot_candidates) found = found || contains(slot, id);
    if (!found) {
      result.hit = false;
      return;
    }
  }
}

double hit_rate(std::span<const InferenceResult> trials) {
  if (trials.empty()) throw Error("hit rate of an empty trial list");
  const auto hits = std::count_if(trials.begin(), trials.end(), [](const InferenceResult& r) { return r.hit; });
  return static_cast<double>(hits) / static_cast<double>(trials.size());
}

nlohmann::json to_json(const InferenceResult& result) {
  const auto hexes = [](const std::vector<CanId>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (CanId id : v) a.push_back("0x" + id.hex());
    return a;
  };
  nlohmann::json j = {{"candidates", hexes(result.candidates)}, {"hit", result.hit}, {"residual", result.residual}};
  if (!result.slot_candidates.empty()) {
    nlohmann::json slots = nlohmann::json::array();
    for (const auto& s : result.slot_candidates) slots.push_back(hexes(s));
    j["slot_candidates"] = slots;
  }
  return j;
}

}  // namespace canids
