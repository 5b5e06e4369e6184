#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "obda/oracle.hpp"
#include "obda/parse.hpp"
#include "obda/unfold.hpp"
#include "support/fixtures.hpp"

using namespace obda;

namespace {

Atom atom(const std::string &text) {
  // Parse a single atom by wrapping it in a throwaway rule.
  return parse_query("p() :- " + text).cq().body.front();
}

}  // namespace

TEST_CASE("mgu binds a variable to a functional term") {
  auto sigma = mgu({{atom("D(x)"), atom("D(f(b))")}});
  REQUIRE(sigma.has_value());
  Term bound = *sigma->apply(Term::var("x"));
  CHECK(bound.is_fn());
  CHECK(bound.name == "f");
}

TEST_CASE("mgu of identical atoms is the identity") {
  auto sigma = mgu({{atom("P(x,y)"), atom("P(x,y)")}});
  REQUIRE(sigma.has_value());
  CHECK(sigma->bindings.empty());
}

TEST_CASE("mgu fails on clashing symbols") {
  CHECK(!mgu({{atom("D(f(b))"), atom("D(g(c))")}}).has_value());
  CHECK(!mgu({{atom("D(x)"), atom("E(x)")}}).has_value());
  CHECK(!mgu({{atom("D(5)"), atom("D(6)")}}).has_value());
  CHECK(!mgu({{atom("D(5)"), atom("D(f(x)) ")}}).has_value());
}

TEST_CASE("mgu chains template equalities across atoms") {
  // x must be both f(a) and f(c): unifiable, merging a and c.
  auto sigma = mgu({{atom("D(x)"), atom("D(f(a))")},
                    {atom("C(x)"), atom("C(f(c))")}});
  REQUIRE(sigma.has_value());
  Term ta = *sigma->apply(Term::var("a"));
  Term tc = *sigma->apply(Term::var("c"));
  CHECK(ta == tc);
}

TEST_CASE("unfolding a single-atom query") {
  test::IntroWorld w = test::intro_world();
  UnfoldedQuery u = unfold_ucq(parse_query("qd(x) :- D(x)"), w.m);
  REQUIRE(u.rules.size() == 2);
  CHECK(u.rules[0].body[0].predicate == "V2");
  CHECK(u.rules[1].body[0].predicate == "V3");
  CHECK(u.rules[0].head[0].name == "f");
  CHECK(u.rules[1].head[0].name == "g");
}

TEST_CASE("unfolding a rewritten union gains the C branch") {
  test::IntroWorld w = test::intro_world();
  UnfoldedQuery u =
      unfold_ucq(parse_query("qd(x) :- C(x); qd(x) :- D(x)"), w.m);
  CHECK(u.rules.size() == 3);
}

TEST_CASE("unmapped predicates contribute no rules") {
  test::IntroWorld w = test::intro_world();
  UnfoldedQuery u = unfold_ucq(parse_query("q(x) :- Nope(x)"), w.m);
  CHECK(u.empty());
  UnfoldedQuery u2 = unfold_ucq(parse_query("q(x,y) :- D(x), Nope(x,y)"), w.m);
  CHECK(u2.empty());
}

TEST_CASE("unfolding joins shared variables through templates") {
  test::IntroWorld w = test::intro_world();
  UnfoldedQuery u = unfold_ucq(parse_query("q(x,y) :- D(x), P(x,y)"), w.m);
  // D matches V2 (f) and V3 (g); P's subject template is f, so only the V2
  // branch joins.
  REQUIRE(u.rules.size() == 1);
  CHECK(u.rules[0].body[0].predicate == "V2");
  CHECK(u.rules[0].body[1].predicate == "V4");
  // Shared variable between the two body atoms.
  auto vars0 = u.rules[0].body[0].args;
  auto vars1 = u.rules[0].body[1].args;
  CHECK(vars0[0] == vars1[0]);
}

TEST_CASE("unfolding over the wrapped saturated mappings") {
  test::SaturationWorld w = test::saturation_world();
  MappingSet m_w = wrap(saturate(w.m, w.t));
  UnfoldedQuery u = unfold_ucq(w.q, m_w);
  REQUIRE(u.rules.size() == 2);

  // Both rules share the C-group and R1-group views; they differ in the
  // R2-group view. Resolve base tables to check the grouping.
  auto tables = [&](const CQ &rule, std::size_t i) {
    auto ts = m_w.views.base_tables(rule.body[i].predicate);
    return std::set<std::string>(ts.begin(), ts.end());
  };
  CHECK(tables(u.rules[0], 0) == std::set<std::string>{"T1", "T2"});
  CHECK(tables(u.rules[0], 1) == std::set<std::string>{"T3", "T4"});
  CHECK(tables(u.rules[0], 2) == std::set<std::string>{"T5", "T6"});
  CHECK(tables(u.rules[1], 2) == std::set<std::string>{"T5"});

  AnswerTemplateMatrix m = atm(u);
  REQUIRE(m.rows.size() == 2);
  CHECK(m.rows[0] == std::vector<std::string>{"l", "m", "m"});
  CHECK(m.rows[1] == std::vector<std::string>{"l", "m", "n"});
  CHECK(m.distinct_rows());
}

TEST_CASE("type-1 translation joins per-fragment unfoldings") {
  test::IntroWorld w = test::intro_world();
  TBox t = parse_tbox("C subClassOf D\n");
  MappingSet m_sat = saturate(w.m, t);
  CQ q = parse_query("q(x,y) :- D(x), P(x,y)").cq();
  Cover cover;
  cover.fragments = {{0}, {1}};
  Type1Translation tr = unfold_jucq_type1(q, cover, m_sat);
  REQUIRE(tr.fragments.size() == 2);
  CHECK(tr.fragments[0].rules.size() == 3);  // V2, V3, derived V1
  CHECK(tr.fragments[1].rules.size() == 1);
  CHECK(tr.join_query.body.size() == 2);
  CHECK(!tr.empty());
}

TEST_CASE("type-1 flags empty fragments") {
  test::IntroWorld w = test::intro_world();
  CQ q = parse_query("q(x,y) :- D(x), Nope(x,y)").cq();
  Cover cover;
  cover.fragments = {{0}, {1}};
  Type1Translation tr = unfold_jucq_type1(q, cover, w.m);
  CHECK(tr.empty());
}

TEST_CASE("type-2 translation of the two-fragment example") {
  test::CoverWorld w = test::cover_world();
  Type2Translation tr = unfold_jucq_type2(w.q, w.cover, w.m);
  REQUIRE(tr.query.rules.size() == 2);

  // Both JUCQs join the same first-fragment group; the second fragment
  // contributes one single-branch group each.
  const std::string shared = tr.query.rules[0].body[0].predicate;
  CHECK(tr.query.rules[1].body[0].predicate == shared);
  CHECK(tr.views.at(shared).rules.size() == 2);  // V1,V4 and V2,V4 branches
  const std::string w4 = tr.query.rules[0].body[1].predicate;
  const std::string w5 = tr.query.rules[1].body[1].predicate;
  CHECK(w4 != w5);
  CHECK(tr.views.at(w4).rules.size() == 1);
  CHECK(tr.views.at(w5).rules.size() == 1);

  // Fragment bookkeeping for the cost model.
  CHECK(tr.fragment_of_view.at(shared) == 0);
  CHECK(tr.fragment_of_view.at(w4) == 1);
  CHECK(tr.row_of_view.at(shared) ==
        std::vector<std::string>{"f", "g"});

  // Joins run on source attributes: the JUCQ body atoms share a plain
  // variable.
  const CQ &rule = tr.query.rules[0];
  CHECK(rule.body[0].args[0] == rule.body[1].args[0]);
}

TEST_CASE("type-2 with an unmappable fragment is empty") {
  test::CoverWorld w = test::cover_world();
  CQ q = parse_query("q(x,y,z) :- P1(x,y), Nope(x), P2(x,z)").cq();
  Cover cover;
  cover.fragments = {{0, 1}, {2}};
  Type2Translation tr = unfold_jucq_type2(q, cover, w.m);
  CHECK(tr.empty());
}

TEST_CASE("type-2 under a singleton cover matches the plain unfolding") {
  test::CoverWorld w = test::cover_world();
  Cover singleton;
  singleton.fragments = {{0, 1, 2}};
  Type2Translation tr = unfold_jucq_type2(w.q, singleton, w.m);
  UnfoldedQuery flat = unfold_ucq(w.q, w.m);

  OpCounters c1, c2;
  AnswerSet a = eval_type2(tr, w.d, c1);
  AnswerSet b = eval_ucq_translation(flat, w.m.views, w.d, c2);
  CHECK(a == b);
}

TEST_CASE("translations agree with certain answers") {
  test::CoverWorld w = test::cover_world();
  AnswerSet truth = certain_answers(UCQ{{w.q}}, TBox{}, w.m, w.d);
  CHECK(!truth.rows.empty());

  OpCounters c;
  CHECK(eval_ucq_translation(unfold_ucq(w.q, w.m), w.m.views, w.d, c) ==
        truth);
  CHECK(eval_type1(unfold_jucq_type1(w.q, w.cover, w.m), w.m.views, w.d, c) ==
        truth);
  CHECK(eval_type2(unfold_jucq_type2(w.q, w.cover, w.m), w.d, c) == truth);
}

TEST_CASE("single-rule unfolding has a one-row template matrix") {
  test::IntroWorld w = test::intro_world();
  UnfoldedQuery u = unfold_ucq(parse_query("q(x) :- C(x)"), w.m);
  REQUIRE(u.rules.size() == 1);
  CHECK(atm(u).rows.size() == 1);
}

TEST_CASE("all-answer-variable unfoldings over wrap have distinct rows") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    test::RandomWorld w = test::random_world(seed);
    test::TestRng rng(seed * 3 + 1);
    CQ q = test::random_query(w, rng, 3, true);
    UnfoldedQuery u = unfold_ucq(q, wrap(w.m));
    CHECK(atm(u).distinct_rows());
  }
}

TEST_CASE("rule sets are minimal up to renaming") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    test::RandomWorld w = test::random_world(seed);
    test::TestRng rng(seed * 5 + 2);
    CQ q = test::random_query(w, rng, 3, false);
    UnfoldedQuery u = unfold_ucq(q, w.m);
    std::set<std::string> keys;
    for (const CQ &rule : u.rules) CHECK(keys.insert(alpha_key(rule)).second);
  }
}

TEST_CASE("per-rule answers over wrap are disjoint for total queries") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    test::RandomWorld w = test::random_world(seed);
    test::TestRng rng(seed * 7 + 3);
    CQ q = test::random_query(w, rng, 3, true);
    MappingSet m_w = wrap(w.m);
    UnfoldedQuery u = unfold_ucq(q, m_w);
    auto per_rule = eval_per_rule(u, m_w.views, w.d);

    std::size_t total = 0;
    std::set<std::vector<std::string>> all;
    for (const AnswerSet &a : per_rule) {
      total += a.size();
      for (const auto &row : a.rows) all.insert(row);
    }
    CHECK(all.size() == total);  // pairwise disjoint

    OpCounters c;
    AnswerSet whole = eval_ucq_translation(u, m_w.views, w.d, c);
    CHECK(whole.size() == total);
  }
}

TEST_CASE("debug printer emits parseable rules") {
  test::IntroWorld w = test::intro_world();
  UnfoldedQuery u = unfold_ucq(parse_query("qd(x) :- D(x)"), w.m);
  UCQ reparsed = parse_query(print_unfolding(u));
  CHECK(reparsed.disjuncts.size() == u.rules.size());
}
