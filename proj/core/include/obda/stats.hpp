#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "obda/mapping.hpp"

namespace obda {

struct DataInstance;
struct TBox;

/// Projection key: a view and a canonical (sorted, deduplicated) column
/// tuple.
struct StatKey {
  std::string view;
  std::vector<std::size_t> cols;

  bool operator<(const StatKey &o) const {
    if (view != o.view) return view < o.view;
    return cols < o.cols;
  }
  bool operator==(const StatKey &o) const {
    return view == o.view && cols == o.cols;
  }
};

std::vector<std::size_t> canonical_cols(std::vector<std::size_t> cols);

/// Canonical unordered facing key: pairwise column correspondence sorted by
/// the left columns, the lexicographically smaller (view, cols) side first.
using FacingKey = std::pair<StatKey, StatKey>;
FacingKey canonical_facing_key(const std::string &view_a,
                               const std::vector<std::size_t> &cols_a,
                               const std::string &view_b,
                               const std::vector<std::size_t> &cols_b);

/// The three statistic tables, plus base-table cardinalities for costing.
/// view_card holds every mapping source view and every base table.
struct StatsCatalog {
  std::map<std::string, std::int64_t> view_card;
  std::map<StatKey, std::int64_t> dist_proj;
  std::map<FacingKey, std::int64_t> facing;
  /// Attribute names per view/table, for the serialized key form "V[a,b]".
  std::map<std::string, std::vector<std::string>> attrs;

  std::int64_t lookup_view_card(const std::string &view) const;
  std::int64_t lookup_dist(const std::string &view,
                           const std::vector<std::size_t> &cols) const;
  /// Facing count for two projections; identical projections short-circuit
  /// to their distinct count.
  std::int64_t lookup_facing(const std::string &view_a,
                             const std::vector<std::size_t> &cols_a,
                             const std::string &view_b,
                             const std::vector<std::size_t> &cols_b) const;

  /// dist <= card, facing <= min(dist); throws SchemaError on violation.
  void check_consistent() const;

  std::string to_json() const;
  static StatsCatalog from_json(const std::string &text);
};

/// Abstract per-tuple cost constants. Defaults are ranking-oriented units;
/// calibrate() fits them to observations.
struct CostConstants {
  double c_t = 0.2;   // retrieve one tuple
  double c_j = 1.0;   // join one tuple
  double c_m = 0.8;   // materialize one tuple
  double c_u = 1.1;   // eliminate one duplicate

  std::string to_json() const;
  static CostConstants from_json(const std::string &text);
};

/// The mapping set statistics are measured over: the saturation of m
/// united with its wrap, sharing one catalog. Estimates of whole unfoldings
/// read the wrapped level; per-CQ estimates read the plain level.
MappingSet prepare_stats_mappings(const MappingSet &m, const TBox &t);

/// Measure S1/S2/S3 exactly over prepare_stats_mappings(m, t).
StatsCatalog collect(const MappingSet &m, const TBox &t,
                     const DataInstance &d);

/// Independent statistics oracle: recomputes the same tables for an
/// already-prepared mapping set with naive nested loops, sharing no
/// evaluation code with collect().
StatsCatalog brute_stats(const MappingSet &prepared, const DataInstance &d);

}  // namespace obda
