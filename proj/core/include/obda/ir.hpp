#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "obda/value.hpp"

namespace obda {

// ---------------------------------------------------------------------------
// Terms and atoms
//
// Datalog with non-nested function symbols: a functional term's arguments are
// variables or constants only.
// ---------------------------------------------------------------------------

struct Term {
  enum class Kind { Variable, Constant, Functional };

  Kind kind = Kind::Variable;
  std::string name;        // variable name or function symbol
  Value value;             // constant payload
  std::vector<Term> args;  // functional arguments (Variable/Constant only)

  static Term var(std::string n) {
    Term t;
    t.kind = Kind::Variable;
    t.name = std::move(n);
    return t;
  }
  static Term constant(Value v) {
    Term t;
    t.kind = Kind::Constant;
    t.value = std::move(v);
    return t;
  }
  static Term fn(std::string symbol, std::vector<Term> args);

  bool is_var() const { return kind == Kind::Variable; }
  bool is_const() const { return kind == Kind::Constant; }
  bool is_fn() const { return kind == Kind::Functional; }

  bool operator==(const Term &o) const;
  bool operator<(const Term &o) const;
};

struct Atom {
  std::string predicate;
  std::vector<Term> args;

  bool operator==(const Atom &o) const {
    return predicate == o.predicate && args == o.args;
  }
};

std::string print_term(const Term &t);
std::string print_atom(const Atom &a);

/// Collect variable names in order of first occurrence.
void collect_vars(const Term &t, std::vector<std::string> &out);
void collect_vars(const Atom &a, std::vector<std::string> &out);

// ---------------------------------------------------------------------------
// Conjunctive queries and unions
// ---------------------------------------------------------------------------

struct CQ {
  std::string name;
  std::vector<Term> head;  // Variable or Functional terms
  std::vector<Atom> body;  // non-empty

  std::vector<std::string> head_vars() const;
  std::vector<std::string> body_vars() const;
  /// Body variables not occurring in the head.
  std::vector<std::string> existential_vars() const;
};

struct UCQ {
  std::vector<CQ> disjuncts;  // non-empty, identical head signature

  const CQ &cq() const { return disjuncts.front(); }
  std::size_t arity() const { return disjuncts.front().head.size(); }
};

/// Validates arities, function-symbol consistency and head/body variable
/// containment. Throws SchemaError on violation.
void validate(const UCQ &q);

std::string print_query(const CQ &q);
std::string print_query(const UCQ &q);

/// Structural equality modulo consistent variable renaming. Atom order is
/// significant.
bool alpha_equal(const CQ &a, const CQ &b);

/// Canonical renaming key: variables renumbered by first occurrence over
/// head-then-body. Two rules are alpha-equal iff their keys match.
std::string alpha_key(const CQ &q);

// ---------------------------------------------------------------------------
// Covers and fragment queries
// ---------------------------------------------------------------------------

/// A partition of the body atom indices of a CQ into fragments. Partitions
/// always satisfy the non-containment requirement between fragments.
struct Cover {
  std::vector<std::vector<std::size_t>> fragments;

  bool is_singleton() const { return fragments.size() == 1; }
  std::string key() const;  // canonical text form, e.g. "0,1|2"
};

/// Throws SchemaError unless the cover is a valid partition of q's atoms.
void validate_cover(const CQ &q, const Cover &cover);

/// The sub-query induced by one fragment: body = the fragment's atoms;
/// answer variables = answer variables of q occurring in the fragment plus
/// existential variables shared with at least one other fragment.
CQ make_fragment_query(const CQ &q, std::size_t fragment_index,
                       const Cover &cover);

/// All partitions of q's atoms into 1..max_fragments blocks, the one-block
/// partition first, in restricted-growth-string order.
std::vector<Cover> enumerate_covers(std::size_t atom_count,
                                    std::size_t max_fragments);

/// Parse a Cover from its key form ("0,1|2").
Cover parse_cover(const std::string &text);

}  // namespace obda
