#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "obda/ir.hpp"
#include "obda/mapping.hpp"

namespace obda {

/// The i-th occurrence of a view inside one expression, printed "V#i".
struct AliasRef {
  std::string view;
  std::size_t occurrence = 1;
  std::string str() const {
    return view + "#" + std::to_string(occurrence);
  }
  bool operator==(const AliasRef &o) const {
    return view == o.view && occurrence == o.occurrence;
  }
};

/// A tuple of columns of one alias, the alias given as a position in the
/// enclosing expression's scan order.
struct QAttr {
  std::size_t alias = 0;
  std::vector<std::size_t> cols;
  bool operator==(const QAttr &o) const {
    return alias == o.alias && cols == o.cols;
  }
  bool operator<(const QAttr &o) const {
    if (alias != o.alias) return alias < o.alias;
    return cols < o.cols;
  }
};

/// Tuple equality between two aliases; columns correspond pairwise.
struct AttrEq {
  QAttr left, right;
};

/// One exported head term: a template application over column tuples, or a
/// plain column when symbol is empty. `tuples` has one entry when the whole
/// template argument list resolves on a single alias, otherwise one
/// single-column entry per argument.
struct ProjItem {
  std::string symbol;
  std::vector<QAttr> tuples;
};

struct RelationalExpr;
using ExprPtr = std::shared_ptr<const RelationalExpr>;

struct ScanNode {
  AliasRef alias;
  std::size_t arity = 0;
};
struct JoinNode {
  ExprPtr left, right;  // right is a Scan in basic-CQ shape
  std::vector<AttrEq> conditions;
};
struct FilterNode {
  ExprPtr child;
  struct Comparison {
    QAttr attr;  // single column
    CmpOp op;
    Value rhs;
  };
  std::vector<Comparison> comparisons;
};
struct ProjectNode {
  ExprPtr child;
  std::vector<ProjItem> items;
};
struct UnionNode {
  std::vector<ExprPtr> children;
};

struct RelationalExpr {
  std::variant<ScanNode, JoinNode, FilterNode, ProjectNode, UnionNode> node;
};

ExprPtr make_expr(ScanNode n);
ExprPtr make_expr(JoinNode n);
ExprPtr make_expr(FilterNode n);
ExprPtr make_expr(ProjectNode n);
ExprPtr make_expr(UnionNode n);

/// Flattened left-deep join chain. tree[k] joins alias k+1 to an earlier
/// alias; extra holds conditions beyond the spanning tree.
struct BasicChain {
  std::vector<AliasRef> aliases;
  std::vector<std::size_t> arities;
  std::vector<AttrEq> tree;
  std::vector<AttrEq> extra;
  std::vector<FilterNode::Comparison> filters;
  std::vector<ProjItem> exports;       // empty when no Project on top
  bool has_project = false;
  bool exports_cover_all = true;       // no existential columns

  const std::string &view_of(std::size_t alias) const {
    return aliases[alias].view;
  }
  bool is_basic() const { return extra.empty() && filters.empty(); }
};

/// Detect the (extended) basic-CQ shape: a left-deep chain of scans under
/// optional Filter/Project, every join condition referencing one prior
/// alias. Returns nullopt for other shapes (unions, bushy joins).
std::optional<BasicChain> to_basic_chain(const ExprPtr &e);

/// Template argument column tuples per source view; shared variables
/// covering a full tuple join as one multi-column condition (matching the
/// collected facing statistics), anything else joins column-wise.
using TemplateGroups = std::map<std::string, std::vector<std::vector<std::size_t>>>;

TemplateGroups template_groups(const MappingSet &m);

/// Build the expression of an unfolded rule: Project over a left-deep join
/// of the body atoms in order. Join conditions come from shared variables,
/// the first condition per atom forming the spanning tree (first-occurrence
/// traversal); remaining equalities, intra-atom repeats included, become
/// extra conditions. Constant arguments become Filter comparisons.
ExprPtr build_rule_expr(const CQ &rule, const ViewCatalog &views,
                        const TemplateGroups &groups = {});

/// Expression of a view definition: a Union over one branch expression per
/// rule (a base table is a bare Scan).
ExprPtr build_view_expr(const std::string &view, const ViewCatalog &views);

std::string print_expr(const ExprPtr &e);

}  // namespace obda
