#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "obda/cost.hpp"
#include "obda/estimator.hpp"
#include "obda/ir.hpp"
#include "obda/mapping.hpp"
#include "obda/oracle.hpp"
#include "obda/stats.hpp"
#include "obda/unfold.hpp"

namespace obda {

struct PlanChoice {
  Cover cover;
  enum class Kind { UCQ, UJUCQ } kind = Kind::UCQ;
  /// Flat rules over source views (UCQ) or JUCQ rules over grouped views.
  UnfoldedQuery translation;
  ViewCatalog views;
  std::int64_t cardinality = 0;
  CostEstimate cost;
  std::size_t cq_count = 0;  // union branches backing the translation
  bool zero_answers = false;
  bool estimable = true;
  std::vector<std::string> flags;
  std::string sql;

  double rank_cost() const;
};

/// Enumerate covers (greedy merge fallback beyond 5 atoms), build the flat
/// UCQ translation and the grouped-union translation per multi-fragment
/// cover, estimate and cost each, rank ascending by total cost with ties
/// broken by fewer union branches then cover key.
std::vector<PlanChoice> plan(const CQ &q, const MappingSet &m, const TBox &t,
                             const StatsCatalog &stats,
                             const CostConstants &consts,
                             std::size_t max_fragments,
                             const std::string &dialect = "ansi");

/// Evaluate a planned translation with the oracle's physical model.
AnswerSet eval_plan(const PlanChoice &pc, const DataInstance &d,
                    OpCounters &counters);

// ---------------------------------------------------------------------------
// SQL emission
// ---------------------------------------------------------------------------

/// ANSI or "postgres" SQL for a planned translation: every referenced view
/// becomes a named common table expression; IRI templates are applied only
/// in final SELECT projections; grouped-view joins reference raw columns.
std::string emit_sql(const UnfoldedQuery &translation,
                     const ViewCatalog &views,
                     const std::map<std::string, std::vector<std::string>>
                         &table_attrs,
                     const std::string &dialect);

/// Reference output for the join-over-constructed-values translation.
std::string emit_sql_type1(const Type1Translation &t, const ViewCatalog &views,
                           const std::map<std::string,
                                          std::vector<std::string>>
                               &table_attrs,
                           const std::string &dialect);

// ---------------------------------------------------------------------------
// Plan serialization (report + input of the eval subcommand)
// ---------------------------------------------------------------------------

std::string plan_report_json(const CQ &q,
                             const std::vector<PlanChoice> &choices,
                             const CostConstants &consts);

struct LoadedPlan {
  std::vector<PlanChoice> choices;
  CostConstants consts;
};

LoadedPlan plan_from_json(const std::string &text);

}  // namespace obda
