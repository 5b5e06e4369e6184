#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "obda/ir.hpp"

namespace obda {

struct DataInstance;  // oracle.hpp

enum class CmpOp { Eq, Lt, Le, Gt, Ge, Ne };

std::string print_op(CmpOp op);

/// Comparison filter `var op const` inside a view rule.
struct FilterCond {
  std::string var;
  CmpOp op = CmpOp::Eq;
  Value rhs;
};

/// One branch of a view definition. Head terms are variables, constants or
/// non-nested functional terms; body atoms reference base tables or other
/// views with variable/constant arguments.
struct ViewRule {
  std::vector<Term> head;
  std::vector<Atom> body;
  std::vector<FilterCond> filters;
};

struct ViewDef {
  std::string name;
  std::vector<std::string> attrs;  // answer attribute names
  std::vector<ViewRule> rules;

  std::size_t arity() const { return attrs.size(); }
  bool is_union() const { return rules.size() > 1; }
};

/// Named view definitions. Names absent from the catalog are base tables.
struct ViewCatalog {
  std::map<std::string, ViewDef> defs;

  bool contains(const std::string &name) const {
    return defs.count(name) != 0;
  }
  const ViewDef &at(const std::string &name) const;
  void add(ViewDef def);

  /// Base tables reachable from `view`, with multiplicity, in evaluation
  /// order. A bare table name yields itself.
  std::vector<std::string> base_tables(const std::string &view) const;
};

/// High-level mapping assertion L(f(x),...) <- V(x,...). The source is a
/// view atom; the target's variables are exactly the source variables.
struct MappingAssertion {
  Atom target;
  std::string source_view;
  std::vector<std::string> source_vars;

  Atom source_atom() const;
};

struct MappingSet {
  std::vector<MappingAssertion> assertions;
  ViewCatalog views;

  /// Predicate name -> arity, from assertion targets.
  std::map<std::string, std::size_t> predicate_arities() const;
};

void validate(const MappingSet &m);
std::string print_assertion(const MappingAssertion &m);
std::string print_mappings(const MappingSet &m);

// ---------------------------------------------------------------------------
// Signatures
// ---------------------------------------------------------------------------

/// The pair (predicate, template tuple). Template descriptors are function
/// symbols; a bare variable position is "" and a constant position pins the
/// constant value.
struct Signature {
  std::string predicate;
  std::vector<std::string> templates;

  bool operator==(const Signature &o) const {
    return predicate == o.predicate && templates == o.templates;
  }
  bool operator<(const Signature &o) const {
    if (predicate != o.predicate) return predicate < o.predicate;
    return templates < o.templates;
  }
  std::string to_string() const;
};

Signature signature_of(const MappingAssertion &m);
std::vector<Signature> signatures(const MappingSet &m);  // first-appearance order

// ---------------------------------------------------------------------------
// Transformations
// ---------------------------------------------------------------------------

/// Assertions of m whose signature equals sig; the catalog is carried over.
MappingSet restrict_to(const MappingSet &m, const Signature &sig);

/// Group assertions by signature into fresh single-assertion union views.
/// Fresh view names are W_<k> in signature first-appearance order.
MappingSet wrap(const MappingSet &m);

/// Distribute assertions whose source rules carry head templates into one
/// assertion per branch; other assertions pass through unchanged.
MappingSet split(const MappingSet &m);

// ---------------------------------------------------------------------------
// TBox and saturation
// ---------------------------------------------------------------------------

struct TBox {
  struct Axiom {
    std::string sub, sup;
    std::size_t arity = 1;  // 1 = subClassOf, 2 = subPropertyOf
  };
  std::vector<Axiom> axioms;
  bool empty() const { return axioms.empty(); }
};

TBox parse_tbox(const std::string &text);

/// Least fixpoint of applying the atomic inclusion axioms to the assertion
/// targets; duplicates (up to variable renaming) are not added. Terminates
/// on cyclic axiom sets.
MappingSet saturate(const MappingSet &m, const TBox &t);

/// Single-instance witness check: the virtual ABoxes of a and b over d are
/// set-equal. Defined with the oracle.
bool equiv(const MappingSet &a, const MappingSet &b, const DataInstance &d);

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

/// Mapping file grammar, one statement per line:
///   P1(f(x),g(y)) <- V(x,y)          assertion
///   V(x,y) := T1(x,y) & T2(y) & y > 5   view rule (repeat for unions)
MappingSet parse_mappings(const std::string &text);

}  // namespace obda
