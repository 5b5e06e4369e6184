#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "obda/relexpr.hpp"
#include "obda/stats.hpp"
#include "obda/unfold.hpp"

namespace obda {

/// Per-run estimation state: the catalog, the template column groups that
/// drive tuple-level join conditions, and provenance flags raised while
/// estimating (fallbacks, ignored filters, generalized paths).
struct EstimationContext {
  const StatsCatalog *stats = nullptr;
  TemplateGroups groups;
  std::set<std::string> flags;
  std::size_t union_branch_limit = 8;

  explicit EstimationContext(const StatsCatalog &s) : stats(&s) {}
  EstimationContext(const StatsCatalog &s, TemplateGroups g)
      : stats(&s), groups(std::move(g)) {}
  void flag(std::string f) { flags.insert(std::move(f)); }
};

struct Estimate {
  std::int64_t value = 0;
  std::vector<std::int64_t> per_rule;
  /// Estimated cardinality per answer-template-matrix row.
  std::vector<std::pair<std::vector<std::string>, std::int64_t>> per_group;
  std::vector<std::string> flags;
};

// ---------------------------------------------------------------------------
// Estimators over basic chains (prefix m = number of joins, aliases 0..m)
// ---------------------------------------------------------------------------

/// Equivalent attributes of q under the chain's join conditions (tree and
/// extra), as a least fixpoint. Column tuples compare canonically.
std::vector<QAttr> equivalent_attrs(const BasicChain &e, const QAttr &q);

/// Longest prefix (>= 1 join) whose final join's right-hand side belongs to
/// the equivalence class of q; nullopt when none exists.
std::optional<std::size_t> join_prefix(const BasicChain &e, const QAttr &q);

/// Estimated distinct count of q's projection over the whole chain.
std::int64_t distinct_estimate(const BasicChain &e, const QAttr &q,
                               EstimationContext &ctx);

/// Facing-values estimate of the join that creates prefix m (1-based).
std::int64_t facing_estimate(const BasicChain &e, std::size_t m,
                             EstimationContext &ctx);

/// Distinct-result estimate of the chain over its spanning-tree conditions.
std::int64_t cardinality(const BasicChain &e, EstimationContext &ctx);

/// Cardinality with the extra (beyond spanning tree) equality conditions
/// folded in as independent selection probabilities.
std::int64_t extended_cardinality(const BasicChain &e,
                                  EstimationContext &ctx);

/// min(card, product of per-tuple distinct estimates).
std::int64_t projection_estimate(const BasicChain &e,
                                 const std::vector<QAttr> &attrs,
                                 EstimationContext &ctx);

/// Textbook baseline: facing approximated by the smaller distinct count,
/// distincts taken from base statistics. Comparison reports only.
std::int64_t standard_estimate(const BasicChain &e, EstimationContext &ctx);

/// Inclusion-exclusion over up to ctx.union_branch_limit branches, every
/// k-ary intersection (k >= 3) taken as the minimum of its contained
/// pairwise values; clamped to [max branch, sum of branches]. Above the
/// limit, falls back to the max-branch lower bound and raises a flag.
std::int64_t union_lower_bound(const std::vector<std::int64_t> &branches,
                               const std::vector<std::vector<std::int64_t>>
                                   &pairwise,
                               EstimationContext &ctx);

// ---------------------------------------------------------------------------
// Rule- and unfolding-level estimation
// ---------------------------------------------------------------------------

/// Full pipeline for one rule: chain extraction, spanning-tree cardinality,
/// extra-condition factors, projection.
std::int64_t estimate_rule(const CQ &rule, const ViewCatalog &views,
                           EstimationContext &ctx);

std::int64_t estimate_rule_std(const CQ &rule, const ViewCatalog &views,
                               EstimationContext &ctx);

/// Cardinality of a whole unfolding, grouped by answer-template-matrix row:
/// distinct rows sum; equal-row groups are scaled by the estimated ratio of
/// distinct exported values across branches.
Estimate estimate_unfolding(const UnfoldedQuery &u, const ViewCatalog &views,
                            EstimationContext &ctx);

/// Baseline counterpart of estimate_unfolding (plain per-rule sum).
Estimate estimate_unfolding_std(const UnfoldedQuery &u,
                                const ViewCatalog &views,
                                EstimationContext &ctx);

}  // namespace obda
