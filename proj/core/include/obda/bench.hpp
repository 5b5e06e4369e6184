#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "obda/ir.hpp"
#include "obda/mapping.hpp"
#include "obda/oracle.hpp"
#include "obda/stats.hpp"

namespace obda {

/// One cell of the synthetic benchmark grid: join selectivity percentage,
/// mappings per property, redundant mappings, query atom count.
struct GridPoint {
  int j = 20;
  int m = 1;
  int r = 0;
  int atoms = 3;
};

/// Deterministic synthetic tables t0..t{tables-1}: unique1/unique2 are
/// seeded permutations of 0..rows-1, onepercent = unique1 mod 100,
/// evenOnePercent = 2*(unique1 mod 50), stringu1/stringu2 encode
/// unique1/unique2. Rejects rows < 100.
DataInstance gen_wisconsin(std::int64_t rows, std::size_t tables,
                           std::uint64_t seed);

/// Mappings, query and the designated fragment cover for one grid point.
/// Each property has m assertions over a 20-point onepercent window; the
/// window offset of the joined properties is 20 - j; r of the assertions
/// duplicate the first assertion's window (fresh view names, same rows).
struct GridCell {
  MappingSet mappings;
  CQ query;
  Cover jucq_cover;
  std::string query_id;
};

GridCell gen_grid(const GridPoint &p);

/// Structural surrogate of a real-ontology workload: `properties` roles,
/// each defined by `per_property` mappings with pairwise-distinct object
/// templates and one shared subject template.
struct Surrogate {
  MappingSet mappings;
  CQ query;
  Cover cover;
};

Surrogate gen_npd_surrogate(std::size_t properties, std::size_t per_property);

struct BenchConfig {
  std::int64_t rows = 10000;
  std::uint64_t seed = 42;
  std::vector<int> js = {5, 10, 15, 20};
  std::vector<int> ms = {1, 2, 3, 4, 5, 6};
  std::vector<int> atoms = {3};
  std::size_t max_fragments = 3;
  CostConstants consts;

  static BenchConfig from_json(const std::string &text);
};

struct BenchRow {
  GridPoint point;
  std::string query_id;
  std::string candidate;
  std::int64_t est_card = 0;
  std::int64_t true_card = 0;
  double est_cost = 0;
  double oracle_cost = 0;
  bool chosen = false;
  double gain = 0;
  std::string error;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::string to_csv() const;
};

BenchReport run_suite(const BenchConfig &cfg);

}  // namespace obda
