#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "obda/ir.hpp"
#include "obda/parse.hpp"
#include "support/fixtures.hpp"

using namespace obda;

TEST_CASE("parse basic conjunctive query") {
  UCQ q = parse_query("q(x,y) :- D(x), P(x,y)");
  REQUIRE(q.disjuncts.size() == 1);
  CHECK(q.cq().body.size() == 2);
  CHECK(q.cq().head.size() == 2);
  CHECK(q.cq().body[0].predicate == "D");
  CHECK(q.cq().body[1].predicate == "P");
}

TEST_CASE("parse single-atom query") {
  UCQ q = parse_query("q(x) :- A(x)");
  CHECK(q.cq().body.size() == 1);
}

TEST_CASE("parse union by semicolon and by repeated head lines") {
  UCQ q1 = parse_query("q(x) :- A(x); q(x) :- B(x)");
  CHECK(q1.disjuncts.size() == 2);
  UCQ q2 = parse_query("q(x) :- A(x)\nq(x) :- B(x)\n");
  CHECK(q2.disjuncts.size() == 2);
}

TEST_CASE("parse functional terms and constants") {
  UCQ q = parse_query("q(f(x)) :- A(x), B(x, 5), C('tag', y)");
  CHECK(q.cq().head[0].is_fn());
  CHECK(q.cq().body[1].args[1].is_const());
  CHECK(std::get<std::string>(q.cq().body[2].args[0].value) == "tag");
}

TEST_CASE("parse errors carry position") {
  CHECK_THROWS_AS(parse_query("q(x) :- "), ParseError);
  CHECK_THROWS_AS(parse_query("q(x) : A(x)"), ParseError);
  // Arity mismatch across atoms of the same predicate.
  CHECK_THROWS_AS(parse_query("q(x,y) :- A(x), A(x,y)"), SchemaError);
  // Head variable missing from the body.
  CHECK_THROWS_AS(parse_query("q(x,z) :- A(x)"), SchemaError);
  // Function symbol arity must be consistent.
  CHECK_THROWS_AS(parse_query("q(f(x),f(x,y)) :- P(x,y)"), SchemaError);
}

TEST_CASE("print/parse round trip on generated queries") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    test::RandomWorld w = test::random_world(seed);
    test::TestRng rng(seed * 77);
    CQ q = test::random_query(w, rng, 3, seed % 2 == 0);
    UCQ u{{q}};
    UCQ reparsed = parse_query(print_query(u));
    REQUIRE(reparsed.disjuncts.size() == 1);
    CHECK(alpha_equal(reparsed.cq(), q));
    CHECK(print_query(reparsed) == print_query(u));
  }
}

namespace {

// Independent oracle: Stirling numbers of the second kind by recurrence.
long long stirling(int n, int k) {
  if (n == 0 && k == 0) return 1;
  if (n == 0 || k == 0) return 0;
  return k * stirling(n - 1, k) + stirling(n - 1, k - 1);
}

}  // namespace

TEST_CASE("cover enumeration counts match set-partition numbers") {
  CHECK(enumerate_covers(3, 3).size() == 5);  // Bell(3)
  CHECK(enumerate_covers(2, 1).size() == 1);
  CHECK(enumerate_covers(4, 2).size() == 8);  // 1 + S(4,2) = 8

  for (int n = 1; n <= 5; ++n) {
    for (int maxf = 1; maxf <= 4; ++maxf) {
      long long expect = 0;
      for (int k = 1; k <= maxf; ++k) expect += stirling(n, k);
      auto covers = enumerate_covers(static_cast<std::size_t>(n),
                                     static_cast<std::size_t>(maxf));
      CHECK(static_cast<long long>(covers.size()) == expect);
    }
  }
}

TEST_CASE("one-block cover comes first and all covers are valid partitions") {
  CQ q = parse_query("q(x,y,z,w) :- P(x,y), R(y,z), S(z,w), T(w,x)").cq();
  auto covers = enumerate_covers(4, 3);
  REQUIRE(!covers.empty());
  CHECK(covers.front().is_singleton());
  for (const Cover &c : covers) {
    CHECK_NOTHROW(validate_cover(q, c));
    std::size_t total = 0;
    for (const auto &f : c.fragments) {
      CHECK(!f.empty());
      total += f.size();
    }
    CHECK(total == q.body.size());
  }
}

TEST_CASE("cover key round trip") {
  Cover c;
  c.fragments = {{0, 1}, {2}};
  CHECK(c.key() == "0,1|2");
  CHECK(parse_cover("0,1|2").key() == c.key());
}

TEST_CASE("fragment query answer variables") {
  CQ q = parse_query("q(x,y,z) :- P1(x,y), C(x), P2(x,z)").cq();
  Cover cover;
  cover.fragments = {{0, 1}, {2}};

  CQ f1 = make_fragment_query(q, 0, cover);
  CHECK(f1.body.size() == 2);
  CHECK(f1.head_vars() == std::vector<std::string>{"x", "y"});

  CQ f2 = make_fragment_query(q, 1, cover);
  CHECK(f2.body.size() == 1);
  CHECK(f2.head_vars() == std::vector<std::string>{"x", "z"});
}

TEST_CASE("singleton cover fragment equals the query") {
  CQ q = parse_query("q(x,y) :- P(x,y), C(x)").cq();
  Cover cover;
  cover.fragments = {{0, 1}};
  CQ f = make_fragment_query(q, 0, cover);
  CHECK(f.body == q.body);
  CHECK(f.head_vars() == q.head_vars());
}

TEST_CASE("shared existential variables join the fragment head") {
  CQ q = parse_query("q(x) :- R(x,w), S(w)").cq();
  Cover cover;
  cover.fragments = {{0}, {1}};
  CQ f1 = make_fragment_query(q, 0, cover);
  CHECK(f1.head_vars() == std::vector<std::string>{"x", "w"});
  CQ f2 = make_fragment_query(q, 1, cover);
  CHECK(f2.head_vars() == std::vector<std::string>{"w"});
}

TEST_CASE("fragment head rule is idempotent") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    test::RandomWorld w = test::random_world(seed);
    test::TestRng rng(seed);
    CQ q = test::random_query(w, rng, 3, false);
    auto covers = enumerate_covers(q.body.size(), 3);
    for (const Cover &cover : covers) {
      for (std::size_t f = 0; f < cover.fragments.size(); ++f) {
        CQ frag = make_fragment_query(q, f, cover);
        Cover self;
        self.fragments = {{}};
        for (std::size_t i = 0; i < frag.body.size(); ++i)
          self.fragments[0].push_back(i);
        CQ again = make_fragment_query(frag, 0, self);
        CHECK(again.head_vars() == frag.head_vars());
      }
    }
  }
}

TEST_CASE("invalid covers are rejected") {
  CQ q = parse_query("q(x,y) :- P(x,y), C(x)").cq();
  Cover overlap;
  overlap.fragments = {{0, 1}, {1}};
  CHECK_THROWS_AS(validate_cover(q, overlap), SchemaError);
  Cover partial;
  partial.fragments = {{0}};
  CHECK_THROWS_AS(validate_cover(q, partial), SchemaError);
}

TEST_CASE("alpha equality is renaming-invariant and order-sensitive") {
  CQ a = parse_query("q(x) :- P(x,y), C(y)").cq();
  CQ b = parse_query("q(u) :- P(u,t), C(t)").cq();
  CQ c = parse_query("q(x) :- C(y), P(x,y)").cq();
  CHECK(alpha_equal(a, b));
  CHECK(!alpha_equal(a, c));
}
