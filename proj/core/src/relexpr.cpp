#include "obda/relexpr.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace obda {

ExprPtr make_expr(ScanNode n) {
  return std::make_shared<RelationalExpr>(RelationalExpr{std::move(n)});
}
ExprPtr make_expr(JoinNode n) {
  return std::make_shared<RelationalExpr>(RelationalExpr{std::move(n)});
}
ExprPtr make_expr(FilterNode n) {
  return std::make_shared<RelationalExpr>(RelationalExpr{std::move(n)});
}
ExprPtr make_expr(ProjectNode n) {
  return std::make_shared<RelationalExpr>(RelationalExpr{std::move(n)});
}
ExprPtr make_expr(UnionNode n) {
  return std::make_shared<RelationalExpr>(RelationalExpr{std::move(n)});
}

namespace {

bool flatten_joins(const ExprPtr &e, BasicChain &chain) {
  if (const auto *join = std::get_if<JoinNode>(&e->node)) {
    if (!flatten_joins(join->left, chain)) return false;
    const auto *scan = std::get_if<ScanNode>(&join->right->node);
    if (!scan) return false;  // bushy join
    chain.aliases.push_back(scan->alias);
    chain.arities.push_back(scan->arity);
    const std::size_t self = chain.aliases.size() - 1;
    bool have_tree = false;
    for (const AttrEq &c : join->conditions) {
      // Normalize: right side on the newly joined alias.
      AttrEq cond = c;
      if (cond.right.alias != self) std::swap(cond.left, cond.right);
      if (cond.right.alias != self) return false;
      if (cond.left.alias == self) {  // intra-atom selection
        chain.extra.push_back(cond);
        continue;
      }
      if (cond.left.alias > self) return false;
      if (!have_tree) {
        chain.tree.push_back(cond);
        have_tree = true;
      } else {
        chain.extra.push_back(cond);
      }
    }
    if (!have_tree) return false;  // cross product
    return true;
  }
  if (const auto *scan = std::get_if<ScanNode>(&e->node)) {
    if (!chain.aliases.empty()) return false;
    chain.aliases.push_back(scan->alias);
    chain.arities.push_back(scan->arity);
    return true;
  }
  return false;
}

/// Union-find over (alias, col) pairs.
struct ColUnion {
  explicit ColUnion(const std::vector<std::size_t> &arities) {
    offsets.push_back(0);
    for (std::size_t a : arities) offsets.push_back(offsets.back() + a);
    parent.resize(offsets.back());
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  }
  std::size_t id(const std::size_t alias, const std::size_t col) const {
    return offsets[alias] + col;
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
  std::vector<std::size_t> offsets, parent;
};

bool compute_cover_all(const BasicChain &chain) {
  ColUnion uf(chain.arities);
  auto unite_cond = [&](const AttrEq &c) {
    for (std::size_t k = 0; k < c.left.cols.size(); ++k)
      uf.unite(uf.id(c.left.alias, c.left.cols[k]),
               uf.id(c.right.alias, c.right.cols[k]));
  };
  for (const AttrEq &c : chain.tree) unite_cond(c);
  for (const AttrEq &c : chain.extra) unite_cond(c);

  std::vector<bool> covered(uf.parent.size(), false);
  for (const ProjItem &item : chain.exports)
    for (const QAttr &t : item.tuples)
      for (std::size_t col : t.cols)
        covered[uf.find(uf.id(t.alias, col))] = true;
  for (const auto &f : chain.filters)
    covered[uf.find(uf.id(f.attr.alias, f.attr.cols.front()))] = true;

  for (std::size_t a = 0; a < chain.arities.size(); ++a)
    for (std::size_t c = 0; c < chain.arities[a]; ++c)
      if (!covered[uf.find(uf.id(a, c))]) return false;
  return true;
}

}  // namespace

std::optional<BasicChain> to_basic_chain(const ExprPtr &e) {
  BasicChain chain;
  ExprPtr cur = e;
  if (const auto *proj = std::get_if<ProjectNode>(&cur->node)) {
    chain.has_project = true;
    chain.exports = proj->items;
    cur = proj->child;
  }
  if (const auto *filter = std::get_if<FilterNode>(&cur->node)) {
    chain.filters = filter->comparisons;
    cur = filter->child;
  }
  if (!flatten_joins(cur, chain)) return std::nullopt;
  chain.exports_cover_all =
      !chain.has_project || compute_cover_all(chain);
  return chain;
}

TemplateGroups template_groups(const MappingSet &m) {
  TemplateGroups out;
  for (const MappingAssertion &a : m.assertions) {
    auto &groups = out[a.source_view];
    for (const Term &t : a.target.args) {
      if (!t.is_fn()) continue;
      std::vector<std::size_t> cols;
      bool all_vars = true;
      for (const Term &arg : t.args) {
        if (!arg.is_var()) {
          all_vars = false;
          break;
        }
        for (std::size_t i = 0; i < a.source_vars.size(); ++i)
          if (a.source_vars[i] == arg.name) {
            cols.push_back(i);
            break;
          }
      }
      if (!all_vars || cols.size() < 2) continue;  // singles need no group
      if (std::find(groups.begin(), groups.end(), cols) == groups.end())
        groups.push_back(std::move(cols));
    }
  }
  return out;
}

ExprPtr build_rule_expr(const CQ &rule, const ViewCatalog &views,
                        const TemplateGroups &groups) {
  const std::size_t n = rule.body.size();

  // First occurrence of each variable: (atom, column).
  std::map<std::string, std::pair<std::size_t, std::size_t>> first_at;
  std::vector<FilterNode::Comparison> filters;
  for (std::size_t i = 0; i < n; ++i) {
    const Atom &a = rule.body[i];
    if (views.contains(a.predicate) &&
        views.at(a.predicate).arity() != a.args.size())
      throw SchemaError("atom arity differs from view '" + a.predicate + "'");
    for (std::size_t c = 0; c < a.args.size(); ++c) {
      const Term &t = a.args[c];
      if (t.is_var()) {
        first_at.emplace(t.name, std::make_pair(i, c));
      } else if (t.is_const()) {
        filters.push_back({QAttr{i, {c}}, CmpOp::Eq, t.value});
      } else {
        throw SchemaError("functional term in a rule body atom");
      }
    }
  }

  // Join conditions per atom, grouped by the partner alias: the group with
  // the smallest partner becomes the tree edge.
  ExprPtr expr;
  std::map<std::string, std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t i = 0; i < n; ++i) {
    const Atom &a = rule.body[i];
    // pairs[j] = column correspondences between alias j and alias i.
    std::map<std::size_t, std::vector<std::pair<std::size_t, std::size_t>>>
        pairs;
    for (std::size_t c = 0; c < a.args.size(); ++c) {
      const Term &t = a.args[c];
      if (!t.is_var()) continue;
      auto it = seen.find(t.name);
      if (it == seen.end()) {
        seen.emplace(t.name, std::make_pair(i, c));
      } else {
        pairs[it->second.first].emplace_back(it->second.second, c);
      }
    }
    // One condition per template tuple the shared columns cover; leftover
    // columns join one at a time. pairs[j] maps left column -> right column
    // only after normalization below.
    std::vector<AttrEq> conditions;
    auto group_it = groups.find(a.predicate);
    for (auto &[j, ps] : pairs) {
      std::sort(ps.begin(), ps.end(),
                [](const auto &x, const auto &y) {
                  return x.second < y.second;  // by this atom's column
                });
      ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
      std::map<std::size_t, std::size_t> right_to_left;
      for (auto &[lc, rc] : ps) right_to_left.emplace(rc, lc);

      std::set<std::size_t> consumed;
      if (group_it != groups.end()) {
        for (const auto &tuple : group_it->second) {
          bool covered = !tuple.empty();
          for (std::size_t col : tuple)
            covered = covered && right_to_left.count(col) &&
                      !consumed.count(col);
          if (!covered) continue;
          AttrEq eq;
          eq.left.alias = j;
          eq.right.alias = i;
          for (std::size_t col : tuple) {
            eq.left.cols.push_back(right_to_left.at(col));
            eq.right.cols.push_back(col);
            consumed.insert(col);
          }
          conditions.push_back(std::move(eq));
        }
      }
      for (const auto &[rc, lc] : right_to_left) {
        if (consumed.count(rc)) continue;
        AttrEq eq;
        eq.left.alias = j;
        eq.right.alias = i;
        eq.left.cols.push_back(lc);
        eq.right.cols.push_back(rc);
        conditions.push_back(std::move(eq));
      }
    }

    ScanNode scan;
    scan.alias.view = a.predicate;
    scan.alias.occurrence = 1;
    scan.arity = a.args.size();
    for (std::size_t k = 0; k < i; ++k)
      if (rule.body[k].predicate == a.predicate) ++scan.alias.occurrence;

    if (i == 0) {
      expr = make_expr(std::move(scan));
    } else {
      JoinNode join;
      join.left = expr;
      join.right = make_expr(std::move(scan));
      join.conditions = std::move(conditions);
      expr = make_expr(std::move(join));
    }
  }

  if (!filters.empty()) {
    FilterNode f;
    f.child = expr;
    f.comparisons = std::move(filters);
    expr = make_expr(std::move(f));
  }

  // Exports: one item per head term.
  ProjectNode proj;
  for (const Term &t : rule.head) {
    ProjItem item;
    std::vector<std::string> arg_vars;
    if (t.is_var()) {
      arg_vars.push_back(t.name);
    } else if (t.is_fn()) {
      item.symbol = t.name;
      for (const Term &arg : t.args)
        if (arg.is_var()) arg_vars.push_back(arg.name);
    }
    if (arg_vars.empty()) {  // constant export
      proj.items.push_back(std::move(item));
      continue;
    }
    // Prefer a single alias carrying the whole argument tuple.
    bool resolved = false;
    for (std::size_t i = 0; i < n && !resolved; ++i) {
      QAttr tuple;
      tuple.alias = i;
      bool all = true;
      for (const std::string &v : arg_vars) {
        const Atom &a = rule.body[i];
        std::size_t col = a.args.size();
        for (std::size_t c = 0; c < a.args.size(); ++c)
          if (a.args[c].is_var() && a.args[c].name == v) {
            col = c;
            break;
          }
        if (col == a.args.size()) {
          all = false;
          break;
        }
        tuple.cols.push_back(col);
      }
      if (all) {
        item.tuples.push_back(std::move(tuple));
        resolved = true;
      }
    }
    if (!resolved) {
      for (const std::string &v : arg_vars) {
        auto it = first_at.find(v);
        if (it == first_at.end())
          throw SchemaError("head variable '" + v + "' missing from body");
        item.tuples.push_back(QAttr{it->second.first, {it->second.second}});
      }
    }
    proj.items.push_back(std::move(item));
  }
  proj.child = expr;
  expr = make_expr(std::move(proj));
  return expr;
}

ExprPtr build_view_expr(const std::string &view, const ViewCatalog &views) {
  if (!views.contains(view)) {
    ScanNode scan;
    scan.alias = AliasRef{view, 1};
    return make_expr(std::move(scan));
  }
  const ViewDef &def = views.at(view);
  UnionNode u;
  for (const ViewRule &r : def.rules) {
    CQ branch;
    branch.name = def.name;
    branch.head = r.head;
    branch.body = r.body;
    ExprPtr expr = build_rule_expr(branch, views);
    if (!r.filters.empty()) {
      // Filters sit between the join and the projection.
      const auto *proj = std::get_if<ProjectNode>(&expr->node);
      FilterNode f;
      f.child = proj ? proj->child : expr;
      std::map<std::string, std::pair<std::size_t, std::size_t>> first_at;
      for (std::size_t i = 0; i < r.body.size(); ++i)
        for (std::size_t col = 0; col < r.body[i].args.size(); ++col)
          if (r.body[i].args[col].is_var())
            first_at.emplace(r.body[i].args[col].name,
                             std::make_pair(i, col));
      for (const FilterCond &fc : r.filters) {
        auto it = first_at.find(fc.var);
        if (it == first_at.end())
          throw SchemaError("filter variable '" + fc.var + "' unbound");
        f.comparisons.push_back(
            {QAttr{it->second.first, {it->second.second}}, fc.op, fc.rhs});
      }
      ProjectNode p;
      p.items = proj ? proj->items : std::vector<ProjItem>{};
      p.child = make_expr(std::move(f));
      expr = make_expr(std::move(p));
    }
    u.children.push_back(expr);
  }
  if (u.children.size() == 1) return u.children.front();
  return make_expr(std::move(u));
}

namespace {

void print_into(const ExprPtr &e, std::string &out) {
  if (const auto *scan = std::get_if<ScanNode>(&e->node)) {
    out += scan->alias.str();
  } else if (const auto *join = std::get_if<JoinNode>(&e->node)) {
    out += "(";
    print_into(join->left, out);
    out += " join[";
    for (std::size_t i = 0; i < join->conditions.size(); ++i) {
      if (i) out += " and ";
      const AttrEq &c = join->conditions[i];
      out += "a" + std::to_string(c.left.alias) + ".(";
      for (std::size_t k = 0; k < c.left.cols.size(); ++k)
        out += (k ? "," : "") + std::to_string(c.left.cols[k]);
      out += ")=a" + std::to_string(c.right.alias) + ".(";
      for (std::size_t k = 0; k < c.right.cols.size(); ++k)
        out += (k ? "," : "") + std::to_string(c.right.cols[k]);
      out += ")";
    }
    out += "] ";
    print_into(join->right, out);
    out += ")";
  } else if (const auto *filter = std::get_if<FilterNode>(&e->node)) {
    out += "filter(";
    print_into(filter->child, out);
    out += ")";
  } else if (const auto *proj = std::get_if<ProjectNode>(&e->node)) {
    out += "project(";
    print_into(proj->child, out);
    out += ")";
  } else if (const auto *u = std::get_if<UnionNode>(&e->node)) {
    out += "union(";
    for (std::size_t i = 0; i < u->children.size(); ++i) {
      if (i) out += " , ";
      print_into(u->children[i], out);
    }
    out += ")";
  }
}

}  // namespace

std::string print_expr(const ExprPtr &e) {
  std::string out;
  print_into(e, out);
  return out;
}

}  // namespace obda
