#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>

#include "obda/bench.hpp"
#include "obda/oracle.hpp"
#include "obda/parse.hpp"
#include "support/fixtures.hpp"

using namespace obda;

TEST_CASE("base tables deduplicate on load") {
  DataInstance d;
  d.add_table(test::int_table("T", 1), test::rows1({1, 1, 2, 2, 3}));
  CHECK(d.rows_of("T").size() == 3);
}

TEST_CASE("view evaluation applies filters and set semantics") {
  MappingSet m = parse_mappings(
      "V(x) := T(x,y) & x >= 0 & x < 20\n"
      "U(x) := T(x,y)\n"
      "U(x) := S(x)\n"
      "A(f(x)) <- V(x)\n");
  DataInstance d;
  d.add_table(test::int_table("T", 2),
              test::rows2({{1, 10}, {1, 11}, {25, 12}, {5, 13}}));
  d.add_table(test::int_table("S", 1), test::rows1({1, 40}));

  OpCounters c;
  auto v = eval_view("V", m.views, d, c);
  CHECK(v.size() == 2);  // {1, 5}; duplicates collapse, 25 filtered
  CHECK(c.tuples_scanned == 4);

  auto u = eval_view("U", m.views, d, c);
  CHECK(u.size() == 4);  // {1, 5, 25} union {1, 40}

  auto empty_d = DataInstance{};
  empty_d.add_table(test::int_table("T", 2), {});
  empty_d.add_table(test::int_table("S", 1), {});
  OpCounters c2;
  CHECK(eval_view("U", m.views, empty_d, c2).empty());
}

TEST_CASE("mini-wisconsin window selects one fifth of the rows") {
  DataInstance d = gen_wisconsin(1000, 1, 7);
  MappingSet m = parse_mappings(
      "V(u2,e,s1,s2) := t0(u1,u2,op,e,s1,s2) & op >= 0 & op < 20\n"
      "P(num(u2),nm(e,s1,s2)) <- V(u2,e,s1,s2)\n");
  OpCounters c;
  CHECK(eval_view("V", m.views, d, c).size() == 200);
}

TEST_CASE("virtual abox of the intro example") {
  test::IntroWorld w = test::intro_world();
  // One row per view.
  DataInstance d;
  d.add_table(test::int_table("V1", 1), test::rows1({1}));
  d.add_table(test::int_table("V2", 1), test::rows1({2}));
  d.add_table(test::int_table("V3", 1), test::rows1({3}));
  d.add_table(test::int_table("V4", 2), test::rows2({{4, 5}}));
  VirtualABox abox = virtual_abox(w.m, d);
  CHECK(abox.size() == 4);
  CHECK(abox.atoms.at("C").size() == 1);
  CHECK(abox.atoms.at("D").size() == 2);
  CHECK(abox.atoms.at("P").size() == 1);

  DataInstance empty;
  for (const auto &[name, def] : d.schema) empty.add_table(def, {});
  CHECK(virtual_abox(w.m, empty).size() == 0);
}

TEST_CASE("virtual abox ignores wrapping") {
  test::IntroWorld w = test::intro_world();
  CHECK(virtual_abox(wrap(w.m), w.d) == virtual_abox(w.m, w.d));
}

TEST_CASE("certain answers over an empty tbox are plain evaluation") {
  test::IntroWorld w = test::intro_world();
  UCQ q = parse_query("q(x) :- D(x)");
  AnswerSet plain = eval_abox_query(q, virtual_abox(w.m, w.d));
  CHECK(certain_answers(q, TBox{}, w.m, w.d) == plain);
  CHECK(plain.size() == 3);  // f:2, f:3, g:4
}

TEST_CASE("certain answers grow under saturation") {
  test::IntroWorld w = test::intro_world();
  TBox t = parse_tbox("C subClassOf D\n");
  UCQ q = parse_query("q(x) :- D(x)");
  AnswerSet with_t = certain_answers(q, t, w.m, w.d);
  CHECK(with_t.size() == 4);  // f:1, f:2, f:3, g:4
}

TEST_CASE("unmapped query predicates have no certain answers") {
  test::IntroWorld w = test::intro_world();
  CHECK(certain_answers(parse_query("q(x) :- Nope(x)"), TBox{}, w.m, w.d)
            .size() == 0);
}

TEST_CASE("certain answers equal the evaluated unfolding") {
  test::SaturationWorld w = test::saturation_world();
  MappingSet m_sat = saturate(w.m, w.t);
  UCQ q{{w.q}};
  AnswerSet truth = certain_answers(q, w.t, w.m, w.d);
  OpCounters c;
  AnswerSet unfolded =
      eval_ucq_translation(unfold_ucq(q, m_sat), m_sat.views, w.d, c);
  CHECK(truth == unfolded);
  AnswerSet wrapped = eval_ucq_translation(unfold_ucq(q, wrap(m_sat)),
                                           wrap(m_sat).views, w.d, c);
  CHECK(truth == wrapped);
}

TEST_CASE("empty translation evaluates to nothing with zero counters") {
  test::IntroWorld w = test::intro_world();
  UnfoldedQuery u;  // empty rule set
  OpCounters c;
  AnswerSet a = eval_ucq_translation(u, w.m.views, w.d, c);
  CHECK(a.size() == 0);
  CHECK(c.tuples_scanned == 0);
  CHECK(c.join_probes == 0);
  CHECK(c.tuples_materialized == 0);
}

TEST_CASE("evaluation is deterministic") {
  test::CoverWorld w = test::cover_world();
  UnfoldedQuery u = unfold_ucq(w.q, w.m);
  OpCounters c1, c2;
  AnswerSet a1 = eval_ucq_translation(u, w.m.views, w.d, c1);
  AnswerSet a2 = eval_ucq_translation(u, w.m.views, w.d, c2);
  CHECK(a1 == a2);
  CHECK(c1.tuples_scanned == c2.tuples_scanned);
  CHECK(c1.join_probes == c2.join_probes);
  CHECK(c1.dedup_comparisons == c2.dedup_comparisons);
}

TEST_CASE("counter conservation: materialized tuples were produced") {
  test::CoverWorld w = test::cover_world();
  Type2Translation tr = unfold_jucq_type2(w.q, w.cover, w.m);
  OpCounters c;
  eval_type2(tr, w.d, c);
  CHECK(c.tuples_materialized <= c.tuples_scanned + c.join_probes);
}

TEST_CASE("answers are duplicate-free") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    test::RandomWorld w = test::random_world(seed);
    test::TestRng rng(seed);
    CQ q = test::random_query(w, rng, 3, false);
    OpCounters c;
    AnswerSet a =
        eval_ucq_translation(unfold_ucq(q, w.m), w.m.views, w.d, c);
    auto sorted = a.rows;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    CHECK(sorted.size() == a.rows.size());
  }
}

TEST_CASE("csv round trip preserves the instance") {
  DataInstance d = gen_wisconsin(200, 2, 11);
  std::string dir = (std::filesystem::temp_directory_path() /
                     "obda_csv_roundtrip")
                        .string();
  save_instance(d, dir);
  DataInstance back = load_instance(dir);
  CHECK(back.tables == d.tables);
  REQUIRE(back.schema.count("t0") == 1);
  CHECK(back.schema.at("t0").columns.size() == 6);
  std::filesystem::remove_all(dir);
}

TEST_CASE("ground term rendering distinguishes types") {
  GroundTerm a{"", {Value(std::int64_t(5))}};
  GroundTerm b{"", {Value(std::string("5"))}};
  CHECK(a.render() != b.render());
  GroundTerm f{"f", {Value(std::int64_t(1)), Value(std::string("x"))}};
  CHECK(f.render() == "f:1|'x'");
}
