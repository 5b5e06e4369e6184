#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "obda/estimator.hpp"
#include "obda/stats.hpp"
#include "obda/unfold.hpp"

namespace obda {

struct CostEstimate {
  double scan = 0;
  double hash_join = 0;
  double dedup = 0;
  double materialize = 0;
  double merge_join = 0;

  double total() const {
    return scan + hash_join + dedup + materialize + merge_join;
  }
  CostEstimate &operator+=(const CostEstimate &o) {
    scan += o.scan;
    hash_join += o.hash_join;
    dedup += o.dedup;
    materialize += o.materialize;
    merge_join += o.merge_join;
    return *this;
  }
};

/// Evaluation cost of one conjunctive rule: a full scan of every base table
/// under its body atoms plus the hash-join term over the rule's estimated
/// cardinality.
CostEstimate cost_cq(const CQ &rule, const ViewCatalog &views,
                     const CostConstants &k, EstimationContext &ctx);

/// Union of conjunctive rules: per-rule costs plus the sort-based duplicate
/// elimination term on the union's estimated cardinality.
CostEstimate cost_ucq(const std::vector<CQ> &rules, std::int64_t union_card,
                      const ViewCatalog &views, const CostConstants &k,
                      EstimationContext &ctx);

/// One fragment of a JUCQ: its union branches (flat rules over source
/// views) and the estimated distinct cardinality of the union.
struct JucqFragment {
  std::vector<CQ> branches;
  std::int64_t card = 0;
};

/// One JUCQ: evaluate every fragment, materialize all but the fragment with
/// the largest materialization cost (that one is pipelined), merge join.
CostEstimate cost_jucq(const std::vector<JucqFragment> &fragments,
                       std::int64_t jucq_card, const ViewCatalog &views,
                       const CostConstants &k, EstimationContext &ctx);

/// Union of JUCQs: the sum, plus a dedup term when projections make the
/// JUCQ answer sets non-disjoint.
CostEstimate cost_ujucq(const std::vector<CostEstimate> &jucq_costs,
                        bool disjoint, std::int64_t total_card,
                        const CostConstants &k);

/// Sort-based duplicate elimination term (log base 2; 0 when card <= 1).
double dedup_cost(std::int64_t card, const CostConstants &k);

// ---------------------------------------------------------------------------
// Calibration
// ---------------------------------------------------------------------------

struct CalibrationSample {
  double scanned = 0;
  double probes = 0;
  double materialized = 0;
  double dedup = 0;
  double observed = 0;
};

struct CalibrationResult {
  CostConstants constants;
  bool used_defaults = false;
  std::string note;
};

/// Nonnegative least-squares fit of (c_t, c_j, c_m, c_u) against observed
/// costs; falls back to the defaults below 8 samples or on a degenerate
/// design matrix.
CalibrationResult calibrate(const std::vector<CalibrationSample> &samples);

}  // namespace obda
