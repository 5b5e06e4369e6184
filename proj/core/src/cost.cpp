#include "obda/cost.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace obda {

double dedup_cost(std::int64_t card, const CostConstants &k) {
  if (card <= 1) return 0;  // 0*log(0) := 0
  double c = static_cast<double>(card);
  return c * std::log2(c) * k.c_u;
}

CostEstimate cost_cq(const CQ &rule, const ViewCatalog &views,
                     const CostConstants &k, EstimationContext &ctx) {
  CostEstimate out;
  std::int64_t table_atoms = 0;
  for (const Atom &a : rule.body) {
    for (const std::string &t : views.base_tables(a.predicate)) {
      out.scan += static_cast<double>(ctx.stats->lookup_view_card(t)) * k.c_t;
      ++table_atoms;
    }
  }
  std::int64_t card = estimate_rule(rule, views, ctx);
  out.hash_join = static_cast<double>(table_atoms) *
                  static_cast<double>(card) * k.c_j;
  return out;
}

CostEstimate cost_ucq(const std::vector<CQ> &rules, std::int64_t union_card,
                      const ViewCatalog &views, const CostConstants &k,
                      EstimationContext &ctx) {
  CostEstimate out;
  for (const CQ &rule : rules) out += cost_cq(rule, views, k, ctx);
  out.dedup += dedup_cost(union_card, k);
  return out;
}

CostEstimate cost_jucq(const std::vector<JucqFragment> &fragments,
                       std::int64_t jucq_card, const ViewCatalog &views,
                       const CostConstants &k, EstimationContext &ctx) {
  CostEstimate out;
  std::size_t pipelined = 0;
  for (std::size_t i = 0; i < fragments.size(); ++i) {
    out += cost_ucq(fragments[i].branches, fragments[i].card, views, k, ctx);
    if (fragments[i].card > fragments[pipelined].card) pipelined = i;
  }
  for (std::size_t i = 0; i < fragments.size(); ++i)
    if (i != pipelined)
      out.materialize += static_cast<double>(fragments[i].card) * k.c_m;
  out.merge_join = static_cast<double>(fragments.size()) *
                   static_cast<double>(jucq_card) * k.c_j;
  return out;
}

CostEstimate cost_ujucq(const std::vector<CostEstimate> &jucq_costs,
                        bool disjoint, std::int64_t total_card,
                        const CostConstants &k) {
  CostEstimate out;
  for (const CostEstimate &c : jucq_costs) out += c;
  if (!disjoint) out.dedup += dedup_cost(total_card, k);
  return out;
}

namespace {

/// Least squares on the active columns via normal equations; returns false
/// when the reduced system is singular.
bool solve_subset(const std::vector<CalibrationSample> &samples,
                  const std::vector<int> &active, std::array<double, 4> &x) {
  const std::size_t n = active.size();
  auto feature = [](const CalibrationSample &s, int i) {
    switch (i) {
      case 0: return s.scanned;
      case 1: return s.probes;
      case 2: return s.materialized;
      default: return s.dedup;
    }
  };
  // Normal matrix and right-hand side.
  std::vector<std::vector<double>> m(n, std::vector<double>(n + 1, 0.0));
  for (const CalibrationSample &s : samples) {
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c)
        m[r][c] += feature(s, active[r]) * feature(s, active[c]);
      m[r][n] += feature(s, active[r]) * s.observed;
    }
  }
  // Gaussian elimination with partial pivoting.
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(m[r][col]) > std::fabs(m[pivot][col])) pivot = r;
    if (std::fabs(m[pivot][col]) < 1e-12) return false;
    std::swap(m[col], m[pivot]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      double f = m[r][col] / m[col][col];
      for (std::size_t c = col; c <= n; ++c) m[r][c] -= f * m[col][c];
    }
  }
  x = {0, 0, 0, 0};
  for (std::size_t r = 0; r < n; ++r)
    x[static_cast<std::size_t>(active[r])] = m[r][n] / m[r][r];
  return true;
}

double residual(const std::vector<CalibrationSample> &samples,
                const std::array<double, 4> &x) {
  double out = 0;
  for (const CalibrationSample &s : samples) {
    double pred = x[0] * s.scanned + x[1] * s.probes +
                  x[2] * s.materialized + x[3] * s.dedup;
    double d = pred - s.observed;
    out += d * d;
  }
  return out;
}

}  // namespace

CalibrationResult calibrate(const std::vector<CalibrationSample> &samples) {
  CalibrationResult out;
  if (samples.size() < 8) {
    out.used_defaults = true;
    out.note = "fewer than 8 samples; using default constants";
    return out;
  }

  // Active-set enumeration: 16 subsets of 4 unknowns, zero outside the
  // subset, keep the feasible solution with the smallest residual. Subsets
  // ordered by size so exact ties prefer the sparsest solution.
  std::vector<std::vector<int>> subsets;
  for (int mask = 0; mask < 16; ++mask) {
    std::vector<int> s;
    for (int i = 0; i < 4; ++i)
      if (mask & (1 << i)) s.push_back(i);
    subsets.push_back(std::move(s));
  }
  std::stable_sort(subsets.begin(), subsets.end(),
                   [](const auto &a, const auto &b) {
                     return a.size() < b.size();
                   });

  bool found = false;
  double best_res = 0;
  std::array<double, 4> best{0, 0, 0, 0};
  for (const auto &subset : subsets) {
    std::array<double, 4> x{0, 0, 0, 0};
    if (!subset.empty() && !solve_subset(samples, subset, x)) continue;
    bool feasible = true;
    for (double v : x) feasible = feasible && v >= -1e-9;
    if (!feasible) continue;
    for (double &v : x) v = std::max(v, 0.0);
    double res = residual(samples, x);
    if (!found || res < best_res - 1e-12) {
      found = true;
      best_res = res;
      best = x;
    }
  }
  if (!found) {
    out.used_defaults = true;
    out.note = "degenerate design matrix; using default constants";
    return out;
  }
  out.constants.c_t = best[0];
  out.constants.c_j = best[1];
  out.constants.c_m = best[2];
  out.constants.c_u = best[3];
  return out;
}

}  // namespace obda
