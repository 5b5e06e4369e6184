#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "obda/ir.hpp"
#include "obda/mapping.hpp"

namespace obda {

/// Idempotent variable-to-term substitution over non-nested terms.
struct Substitution {
  std::map<std::string, Term> bindings;

  /// Applying a functional binding inside another functional term would
  /// nest; such applications return nullopt.
  std::optional<Term> apply(const Term &t) const;
  std::optional<Atom> apply(const Atom &a) const;
};

/// Most general unifier for a set of atom pairs, or nullopt on clash.
/// Inputs are assumed renamed apart.
std::optional<Substitution> mgu(
    const std::vector<std::pair<Atom, Atom>> &pairs);

/// A Datalog translation: rules whose heads carry template terms and whose
/// bodies are atoms over source views. Rule sets are minimal up to variable
/// renaming.
struct UnfoldedQuery {
  std::string name;
  std::size_t arity = 0;
  std::vector<CQ> rules;

  bool empty() const { return rules.empty(); }
};

std::string print_unfolding(const UnfoldedQuery &u);

/// Unfold a union of conjunctive queries against the mapping assertions:
/// one rule per mapping tuple unifying with a disjunct's body.
UnfoldedQuery unfold_ucq(const UCQ &q, const MappingSet &m);
UnfoldedQuery unfold_ucq(const CQ &q, const MappingSet &m);

/// Join-of-UCQs translation that joins per-fragment unfoldings on shared
/// answer variables; the joins run over template-applied values. Kept for
/// reference output and equivalence testing, never ranked by the planner.
struct Type1Translation {
  CQ join_query;  // head of q over one atom per fragment unfolding
  std::vector<UnfoldedQuery> fragments;

  bool empty() const {
    for (const auto &f : fragments)
      if (f.empty()) return true;
    return fragments.empty();
  }
};

Type1Translation unfold_jucq_type1(const CQ &q, const Cover &cover,
                                   const MappingSet &m);

/// Optimized translation: a union of JUCQs over per-signature union views,
/// joining on source attributes only. `fragment_of_view` maps each
/// grouped view to the cover fragment it unfolds.
struct Type2Translation {
  UnfoldedQuery query;   // each rule is one JUCQ over grouped views
  ViewCatalog views;     // extended catalog incl. grouped views
  std::map<std::string, std::size_t> fragment_of_view;
  /// Head-template row of the fragment signature each grouped view carries.
  std::map<std::string, std::vector<std::string>> row_of_view;
  std::size_t fragment_count = 0;

  bool empty() const { return query.empty(); }
};

Type2Translation unfold_jucq_type2(const CQ &q, const Cover &cover,
                                   const MappingSet &m);

/// One row per rule, one column per answer position; entries name the head
/// template's function symbol, "" for plain variables or constants.
struct AnswerTemplateMatrix {
  std::vector<std::vector<std::string>> rows;

  bool distinct_rows() const;
  /// Rule indices grouped by identical row, in first-appearance order.
  std::vector<std::vector<std::size_t>> groups() const;
};

AnswerTemplateMatrix atm(const UnfoldedQuery &u);

}  // namespace obda
