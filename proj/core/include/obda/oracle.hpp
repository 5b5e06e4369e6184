#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "obda/ir.hpp"
#include "obda/mapping.hpp"
#include "obda/stats.hpp"
#include "obda/unfold.hpp"

namespace obda {

// ---------------------------------------------------------------------------
// Data instances
// ---------------------------------------------------------------------------

struct ColumnDef {
  std::string name;
  enum class Type { Int, Str } type = Type::Int;
};

struct TableDef {
  std::string name;
  std::vector<ColumnDef> columns;
};

/// In-memory database. Base tables are deduplicated on load (set semantics,
/// matching the distinct-count statistics). Immutable once built.
struct DataInstance {
  std::map<std::string, TableDef> schema;
  std::map<std::string, std::vector<std::vector<Value>>> tables;

  void add_table(TableDef def, std::vector<std::vector<Value>> rows);
  const std::vector<std::vector<Value>> &rows_of(const std::string &t) const;
};

/// Load one CSV per table plus a schema manifest (schema.json).
DataInstance load_instance(const std::string &dir);
void save_instance(const DataInstance &d, const std::string &dir);

// ---------------------------------------------------------------------------
// Operation counters: the cost ground truth
// ---------------------------------------------------------------------------

struct OpCounters {
  std::int64_t tuples_scanned = 0;
  std::int64_t join_probes = 0;        // hash build+probe+output, merge steps
  std::int64_t tuples_materialized = 0;
  std::int64_t dedup_comparisons = 0;  // sort-based duplicate elimination

  OpCounters &operator+=(const OpCounters &o) {
    tuples_scanned += o.tuples_scanned;
    join_probes += o.join_probes;
    tuples_materialized += o.tuples_materialized;
    dedup_comparisons += o.dedup_comparisons;
    return *this;
  }
};

/// Weighted counter total under the same constants the cost model uses.
double oracle_cost(const OpCounters &c, const CostConstants &k);

// ---------------------------------------------------------------------------
// Ground terms, ABoxes, answers
// ---------------------------------------------------------------------------

/// A ground individual: either a scalar value (symbol empty) or a
/// function-symbol application over values, rendered "f:a|b".
struct GroundTerm {
  std::string symbol;
  std::vector<Value> values;

  std::string render() const;
  bool operator<(const GroundTerm &o) const {
    if (symbol != o.symbol) return symbol < o.symbol;
    return values < o.values;
  }
  bool operator==(const GroundTerm &o) const {
    return symbol == o.symbol && values == o.values;
  }
};

struct VirtualABox {
  /// predicate -> sorted unique argument tuples
  std::map<std::string, std::vector<std::vector<GroundTerm>>> atoms;

  bool operator==(const VirtualABox &o) const { return atoms == o.atoms; }
  std::size_t size() const;
};

/// Sorted, duplicate-free answer tuples (rendered).
struct AnswerSet {
  std::vector<std::vector<std::string>> rows;

  bool operator==(const AnswerSet &o) const { return rows == o.rows; }
  std::size_t size() const { return rows.size(); }
};

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Exact set-semantics evaluation of a view (or base table) over d.
/// Functional rule heads ground to rendered strings.
std::vector<std::vector<Value>> eval_view(const std::string &name,
                                          const ViewCatalog &views,
                                          const DataInstance &d,
                                          OpCounters &counters);

VirtualABox virtual_abox(const MappingSet &m, const DataInstance &d);

/// Saturation of an ABox with respect to atomic inclusion axioms.
VirtualABox saturate_abox(const VirtualABox &abox, const TBox &t);

AnswerSet eval_abox_query(const UCQ &q, const VirtualABox &abox);

/// Certain answers via the saturated virtual ABox. Sound and complete for
/// atomic-inclusion TBoxes (the supported fragment has no tree witnesses).
AnswerSet certain_answers(const UCQ &q, const TBox &t, const MappingSet &m,
                          const DataInstance &d);

/// Evaluate a flat Datalog translation: hash joins inside each rule,
/// sort-based duplicate elimination over the union.
AnswerSet eval_ucq_translation(const UnfoldedQuery &u,
                               const ViewCatalog &views,
                               const DataInstance &d, OpCounters &counters);

/// Evaluate a union of JUCQs: per rule, materialize every fragment view but
/// the one with the largest materialization cost, then merge join.
AnswerSet eval_type2(const Type2Translation &t, const DataInstance &d,
                     OpCounters &counters);

/// Evaluate the reference join-of-unfoldings translation; the cross-
/// fragment joins run over constructed (template-applied) values.
AnswerSet eval_type1(const Type1Translation &t, const ViewCatalog &views,
                     const DataInstance &d, OpCounters &counters);

/// Per-rule answer sets of a flat translation (used by disjointness
/// checks).
std::vector<AnswerSet> eval_per_rule(const UnfoldedQuery &u,
                                     const ViewCatalog &views,
                                     const DataInstance &d);

}  // namespace obda
