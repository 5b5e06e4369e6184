#pragma once

// Shared test worlds: small hand-built mapping sets with matching data
// instances, and a seeded random-world generator for property tests.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "obda/ir.hpp"
#include "obda/mapping.hpp"
#include "obda/oracle.hpp"
#include "obda/parse.hpp"

namespace obda::test {

inline Term v(const std::string &name) { return Term::var(name); }
inline Term c(std::int64_t value) { return Term::constant(Value(value)); }
inline Term fn1(const std::string &f, const std::string &x) {
  return Term::fn(f, {v(x)});
}

inline TableDef int_table(const std::string &name, std::size_t arity) {
  TableDef def;
  def.name = name;
  for (std::size_t i = 0; i < arity; ++i)
    def.columns.push_back({"c" + std::to_string(i), ColumnDef::Type::Int});
  return def;
}

inline std::vector<std::vector<Value>> rows1(std::vector<std::int64_t> xs) {
  std::vector<std::vector<Value>> out;
  for (auto x : xs) out.push_back({Value(x)});
  return out;
}

inline std::vector<std::vector<Value>> rows2(
    std::vector<std::pair<std::int64_t, std::int64_t>> xs) {
  std::vector<std::vector<Value>> out;
  for (auto [a, b] : xs) out.push_back({Value(a), Value(b)});
  return out;
}

/// Concept/role mappings over four base tables:
///   C(f(a)) <- V1(a),  D(f(b)) <- V2(b),  D(g(c)) <- V3(c),
///   P(f(d),h(e)) <- V4(d,e)
struct IntroWorld {
  MappingSet m;
  DataInstance d;
};

inline IntroWorld intro_world() {
  IntroWorld w;
  w.m = parse_mappings(
      "C(f(a)) <- V1(a)\n"
      "D(f(b)) <- V2(b)\n"
      "D(g(c)) <- V3(c)\n"
      "P(f(d),h(e)) <- V4(d,e)\n");
  w.d.add_table(int_table("V1", 1), rows1({1, 2}));
  w.d.add_table(int_table("V2", 1), rows1({2, 3}));
  w.d.add_table(int_table("V3", 1), rows1({4}));
  w.d.add_table(int_table("V4", 2), rows2({{1, 10}, {2, 20}, {5, 50}}));
  return w;
}

/// The two-fragment example: P1/C/P2 over six sources with signatures
/// (P1,(f,g)) x2, (P1,(h,i)), (C,(f)), (P2,(f,k)), (P2,(f,h)).
struct CoverWorld {
  MappingSet m;
  DataInstance d;
  CQ q;      // q(x,y,z) :- P1(x,y), C(x), P2(x,z)
  Cover cover;  // {{P1, C}, {P2}}
};

inline CoverWorld cover_world() {
  CoverWorld w;
  w.m = parse_mappings(
      "P1(f(a),g(b)) <- V1(a,b)\n"
      "P1(f(a),g(b)) <- V2(a,b)\n"
      "P1(h(a),i(b)) <- V3(a,b)\n"
      "C(f(a)) <- V4(a)\n"
      "P2(f(a),k(b)) <- V5(a,b)\n"
      "P2(f(a),h(b)) <- V6(a,b)\n");
  w.d.add_table(int_table("V1", 2), rows2({{1, 11}, {2, 12}}));
  w.d.add_table(int_table("V2", 2), rows2({{2, 12}, {3, 13}}));
  w.d.add_table(int_table("V3", 2), rows2({{1, 21}}));
  w.d.add_table(int_table("V4", 1), rows1({1, 2, 3}));
  w.d.add_table(int_table("V5", 2), rows2({{1, 31}, {4, 34}}));
  w.d.add_table(int_table("V6", 2), rows2({{2, 41}}));
  w.q = parse_query("q(x,y,z) :- P1(x,y), C(x), P2(x,z)").cq();
  w.cover.fragments = {{0, 1}, {2}};
  return w;
}

/// Saturation example: seven assertions over T1..T6, atomic TBox
/// {A < C, P1 < R1, P2 < R2}, instance sized to the documented statistics
/// (|V1 projection| = 5, |V2| = 11, facings = 5).
struct SaturationWorld {
  MappingSet m;
  TBox t;
  DataInstance d;
  CQ q;  // q(x,y,z) :- C(x), R1(x,y), R2(x,z)
};

inline SaturationWorld saturation_world() {
  SaturationWorld w;
  w.m = parse_mappings(
      "A(l(a)) <- T1(a)\n"
      "C(l(b)) <- T2(b)\n"
      "P1(l(c),m(d)) <- T3(c,d)\n"
      "R1(l(e),m(f)) <- T4(e,f)\n"
      "P2(l(g),m(h)) <- T5(g,h)\n"
      "P2(l(g),n(h)) <- T5(g,h)\n"
      "R2(l(i),m(j)) <- T6(i,j)\n");
  w.t = parse_tbox(
      "A subClassOf C\n"
      "P1 subPropertyOf R1\n"
      "P2 subPropertyOf R2\n");
  w.d.add_table(int_table("T1", 1), rows1({1, 2, 3}));
  w.d.add_table(int_table("T2", 1), rows1({3, 4, 5}));
  w.d.add_table(int_table("T3", 2),
                rows2({{1, 101}, {2, 102}, {3, 103}, {4, 104}, {5, 105},
                       {6, 106}}));
  w.d.add_table(int_table("T4", 2),
                rows2({{7, 107}, {8, 108}, {9, 109}, {10, 110}, {11, 111}}));
  w.d.add_table(int_table("T5", 2),
                rows2({{1, 201}, {2, 202}, {3, 203}, {4, 204}, {5, 205},
                       {6, 206}, {7, 207}, {8, 208}, {9, 209}, {10, 210}}));
  w.d.add_table(int_table("T6", 2), rows2({{11, 211}}));
  w.q = parse_query("q(x,y,z) :- C(x), R1(x,y), R2(x,z)").cq();
  return w;
}

// ---------------------------------------------------------------------------
// Random worlds for property tests
// ---------------------------------------------------------------------------

struct TestRng {
  std::uint64_t state;
  explicit TestRng(std::uint64_t seed)
      : state(seed ? seed : 0x853c49e6748fea9bull) {}
  std::uint64_t next() {
    state ^= state >> 12;
    state ^= state << 25;
    state ^= state >> 27;
    return state * 0x2545f4914f6cdd1dull;
  }
  std::size_t below(std::size_t n) { return next() % n; }
};

struct RandomWorld {
  MappingSet m;
  DataInstance d;
  std::vector<std::string> concepts;
  std::vector<std::string> roles;
};

/// Random small instance plus concept/role mappings. Subject templates are
/// drawn from a shared pool so unfoldings join; values live in a small
/// domain so joins actually match.
inline RandomWorld random_world(std::uint64_t seed) {
  TestRng rng(seed);
  RandomWorld w;

  const std::size_t table_count = 1 + rng.below(3);
  for (std::size_t t = 0; t < table_count; ++t) {
    const std::size_t arity = 2 + rng.below(2);
    const std::size_t rows = 5 + rng.below(46);
    std::vector<std::vector<Value>> data;
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<Value> row;
      for (std::size_t col = 0; col < arity; ++col)
        row.push_back(Value(static_cast<std::int64_t>(rng.below(8))));
      data.push_back(std::move(row));
    }
    w.d.add_table(int_table("B" + std::to_string(t), arity), std::move(data));
  }

  const std::vector<std::string> subject_pool = {"f", "f", "f", "g"};
  const std::vector<std::string> object_pool = {"f", "g", "h"};

  const std::size_t concept_count = 1 + rng.below(2);
  const std::size_t role_count = 1 + rng.below(3);
  std::size_t view_counter = 0;

  auto add_view = [&](std::size_t arity) {
    ViewDef def;
    def.name = "RV" + std::to_string(view_counter++);
    for (std::size_t i = 0; i < arity; ++i)
      def.attrs.push_back("x" + std::to_string(i));
    ViewRule rule;
    for (const std::string &a : def.attrs) rule.head.push_back(v(a));

    const std::string table =
        "B" + std::to_string(rng.below(w.d.schema.size()));
    const std::size_t table_arity = w.d.schema.at(table).columns.size();
    Atom atom{table, {}};
    std::vector<std::string> names;
    for (std::size_t i = 0; i < table_arity; ++i) {
      // Head vars first, spare columns bound to throwaway variables.
      if (i < arity) atom.args.push_back(v(def.attrs[i]));
      else atom.args.push_back(v("w" + std::to_string(i)));
    }
    rule.body.push_back(std::move(atom));
    if (rng.below(3) == 0)
      rule.filters.push_back(
          {def.attrs[0], CmpOp::Le,
           Value(static_cast<std::int64_t>(3 + rng.below(5)))});
    def.rules.push_back(std::move(rule));
    std::string name = def.name;
    w.m.views.add(std::move(def));
    return name;
  };

  for (std::size_t i = 0; i < concept_count; ++i) {
    const std::string name = "A" + std::to_string(i);
    w.concepts.push_back(name);
    const std::size_t mappings = 1 + rng.below(3);
    for (std::size_t k = 0; k < mappings; ++k) {
      MappingAssertion a;
      a.target.predicate = name;
      a.target.args = {fn1(subject_pool[rng.below(subject_pool.size())], "s")};
      a.source_view = add_view(1);
      a.source_vars = {"s"};
      w.m.assertions.push_back(std::move(a));
    }
  }
  for (std::size_t i = 0; i < role_count; ++i) {
    const std::string name = "P" + std::to_string(i);
    w.roles.push_back(name);
    const std::size_t mappings = 1 + rng.below(3);
    for (std::size_t k = 0; k < mappings; ++k) {
      MappingAssertion a;
      a.target.predicate = name;
      a.target.args = {fn1(subject_pool[rng.below(subject_pool.size())], "s"),
                       fn1(object_pool[rng.below(object_pool.size())], "o")};
      a.source_view = add_view(2);
      a.source_vars = {"s", "o"};
      w.m.assertions.push_back(std::move(a));
    }
  }
  return w;
}

/// Star- or chain-shaped CQ over the world's predicates.
inline CQ random_query(const RandomWorld &w, TestRng &rng,
                       std::size_t max_atoms, bool all_answer_vars) {
  CQ q;
  q.name = "q";
  const std::size_t atoms = 1 + rng.below(max_atoms);
  const bool star = rng.below(2) == 0;
  std::size_t var_counter = 0;
  std::string joint = "x0";
  std::vector<std::string> vars;

  for (std::size_t i = 0; i < atoms; ++i) {
    const bool pick_concept =
        !w.concepts.empty() && (w.roles.empty() || rng.below(3) == 0);
    if (pick_concept) {
      const std::string &pred = w.concepts[rng.below(w.concepts.size())];
      q.body.push_back(Atom{pred, {v(joint)}});
      if (std::find(vars.begin(), vars.end(), joint) == vars.end())
        vars.push_back(joint);
    } else {
      const std::string &pred = w.roles[rng.below(w.roles.size())];
      std::string next = "x" + std::to_string(++var_counter);
      q.body.push_back(Atom{pred, {v(joint), v(next)}});
      if (std::find(vars.begin(), vars.end(), joint) == vars.end())
        vars.push_back(joint);
      vars.push_back(next);
      if (!star) joint = next;  // chain walks forward, star stays on x0
    }
  }
  if (all_answer_vars) {
    for (const std::string &x : vars) q.head.push_back(v(x));
  } else {
    for (const std::string &x : vars)
      if (rng.below(3) != 0) q.head.push_back(v(x));
    if (q.head.empty()) q.head.push_back(v(vars[0]));
  }
  return q;
}

}  // namespace obda::test
