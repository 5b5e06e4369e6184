#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "obda/planner.hpp"

namespace obda {

namespace {

struct Dialect {
  bool quote_idents = true;
  bool pg_cast = false;
};

Dialect dialect_of(const std::string &name) {
  if (name == "ansi") return {true, false};
  if (name == "postgres") return {false, true};
  throw PlanError("unsupported dialect: " + name);
}

std::string ident(const std::string &s, const Dialect &d) {
  return d.quote_idents ? "\"" + s + "\"" : s;
}

std::string text_of(const std::string &expr, const Dialect &d) {
  return d.pg_cast ? expr + "::text" : "CAST(" + expr + " AS VARCHAR)";
}

std::string str_literal(const std::string &s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "''";
    out += c;
  }
  return out + "'";
}

std::string value_literal(const Value &v) {
  if (std::holds_alternative<std::int64_t>(v))
    return std::to_string(std::get<std::int64_t>(v));
  return str_literal(std::get<std::string>(v));
}

using AttrNames = std::map<std::string, std::vector<std::string>>;

std::string column_name(const std::string &rel, std::size_t col,
                        const ViewCatalog &views, const AttrNames &tables) {
  if (views.contains(rel)) {
    const auto &attrs = views.at(rel).attrs;
    if (col < attrs.size()) return attrs[col];
  } else {
    auto it = tables.find(rel);
    if (it != tables.end() && col < it->second.size())
      return it->second[col];
  }
  return "c" + std::to_string(col);
}

void collect_views(const std::string &name, const ViewCatalog &views,
                   std::vector<std::string> &order,
                   std::set<std::string> &seen) {
  if (!views.contains(name) || !seen.insert(name).second) return;
  for (const ViewRule &r : views.at(name).rules)
    for (const Atom &a : r.body) collect_views(a.predicate, views, order, seen);
  order.push_back(name);
}

/// SELECT for one conjunctive body. Head terms may apply templates; those
/// render as string concatenations in the projection only.
std::string select_for(const std::vector<Term> &head,
                       const std::vector<std::string> &out_names,
                       const std::vector<Atom> &body,
                       const std::vector<FilterCond> &filters,
                       const ViewCatalog &views, const AttrNames &tables,
                       const Dialect &d) {
  std::map<std::string, std::string> var_expr;  // first occurrence
  std::vector<std::string> where;
  std::vector<std::string> from;

  for (std::size_t i = 0; i < body.size(); ++i) {
    const Atom &a = body[i];
    std::string alias = "t" + std::to_string(i);
    from.push_back(ident(a.predicate, d) + " " + alias);
    for (std::size_t col = 0; col < a.args.size(); ++col) {
      std::string qual =
          alias + "." + ident(column_name(a.predicate, col, views, tables), d);
      const Term &t = a.args[col];
      if (t.is_const()) {
        where.push_back(qual + " = " + value_literal(t.value));
      } else if (t.is_var()) {
        auto [it, inserted] = var_expr.emplace(t.name, qual);
        if (!inserted) where.push_back(it->second + " = " + qual);
      }
    }
  }
  for (const FilterCond &f : filters) {
    auto it = var_expr.find(f.var);
    if (it == var_expr.end())
      throw PlanError("filter variable '" + f.var + "' unbound in SQL body");
    where.push_back(it->second + " " + print_op(f.op) + " " +
                    value_literal(f.rhs));
  }

  auto term_expr = [&](const Term &t) -> std::string {
    if (t.is_const()) return value_literal(t.value);
    if (t.is_var()) {
      auto it = var_expr.find(t.name);
      if (it == var_expr.end())
        throw PlanError("head variable '" + t.name + "' unbound in SQL body");
      return it->second;
    }
    std::string expr = str_literal(t.name + ":");
    for (std::size_t i = 0; i < t.args.size(); ++i) {
      if (i) expr += " || " + str_literal("|");
      const Term &a = t.args[i];
      expr += " || " + (a.is_const() ? value_literal(a.value)
                                     : text_of(var_expr.at(a.name), d));
    }
    return expr;
  };

  std::string sql = "SELECT DISTINCT ";
  for (std::size_t i = 0; i < head.size(); ++i) {
    if (i) sql += ", ";
    sql += term_expr(head[i]);
    if (i < out_names.size()) sql += " AS " + ident(out_names[i], d);
  }
  sql += "\nFROM ";
  for (std::size_t i = 0; i < from.size(); ++i)
    sql += (i ? ", " : "") + from[i];
  if (!where.empty()) {
    sql += "\nWHERE ";
    for (std::size_t i = 0; i < where.size(); ++i)
      sql += (i ? " AND " : "") + where[i];
  }
  return sql;
}

std::string with_clause(const std::vector<std::string> &order,
                        const ViewCatalog &views, const AttrNames &tables,
                        const Dialect &d) {
  if (order.empty()) return "";
  std::string sql = "WITH ";
  for (std::size_t vi = 0; vi < order.size(); ++vi) {
    const ViewDef &def = views.at(order[vi]);
    if (vi) sql += ",\n";
    sql += ident(def.name, d) + "(";
    for (std::size_t i = 0; i < def.attrs.size(); ++i)
      sql += (i ? ", " : "") + ident(def.attrs[i], d);
    sql += ") AS (\n";
    for (std::size_t ri = 0; ri < def.rules.size(); ++ri) {
      if (ri) sql += "\nUNION\n";
      const ViewRule &r = def.rules[ri];
      sql += select_for(r.head, {}, r.body, r.filters, views, tables, d);
    }
    sql += "\n)";
  }
  return sql + "\n";
}

std::vector<std::string> answer_names(std::size_t arity) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < arity; ++i)
    names.push_back("a" + std::to_string(i));
  return names;
}

}  // namespace

std::string emit_sql(const UnfoldedQuery &translation,
                     const ViewCatalog &views, const AttrNames &table_attrs,
                     const std::string &dialect) {
  Dialect d = dialect_of(dialect);
  if (translation.rules.empty()) return "-- empty translation\n";

  std::vector<std::string> order;
  std::set<std::string> seen;
  for (const CQ &rule : translation.rules)
    for (const Atom &a : rule.body)
      collect_views(a.predicate, views, order, seen);

  std::string sql = with_clause(order, views, table_attrs, d);
  std::vector<std::string> names = answer_names(translation.arity);
  for (std::size_t i = 0; i < translation.rules.size(); ++i) {
    if (i) sql += "\nUNION\n";
    const CQ &r = translation.rules[i];
    sql += select_for(r.head, names, r.body, {}, views, table_attrs, d);
  }
  return sql + ";\n";
}

std::string emit_sql_type1(const Type1Translation &t, const ViewCatalog &views,
                           const AttrNames &table_attrs,
                           const std::string &dialect) {
  Dialect d = dialect_of(dialect);
  if (t.empty()) return "-- empty translation\n";

  std::vector<std::string> order;
  std::set<std::string> seen;
  for (const UnfoldedQuery &u : t.fragments)
    for (const CQ &rule : u.rules)
      for (const Atom &a : rule.body)
        collect_views(a.predicate, views, order, seen);

  std::string sql = with_clause(order, views, table_attrs, d);
  if (sql.empty()) sql = "WITH ";
  else {
    sql.pop_back();  // rejoin the fragment CTEs onto the same WITH
    sql += ",\n";
  }

  // One CTE per fragment unfolding; templates applied inside, so the final
  // join runs over constructed values.
  for (std::size_t f = 0; f < t.fragments.size(); ++f) {
    const UnfoldedQuery &u = t.fragments[f];
    const Atom &aux = t.join_query.body[f];
    if (f) sql += ",\n";
    sql += ident(u.name, d) + "(";
    for (std::size_t i = 0; i < aux.args.size(); ++i)
      sql += (i ? ", " : "") + ident(aux.args[i].name, d);
    sql += ") AS (\n";
    for (std::size_t ri = 0; ri < u.rules.size(); ++ri) {
      if (ri) sql += "\nUNION\n";
      sql += select_for(u.rules[ri].head, {}, u.rules[ri].body, {}, views,
                        table_attrs, d);
    }
    sql += "\n)";
  }
  sql += "\n";

  std::map<std::string, std::string> var_expr;
  std::vector<std::string> where;
  std::string from;
  for (std::size_t f = 0; f < t.join_query.body.size(); ++f) {
    const Atom &aux = t.join_query.body[f];
    std::string alias = "f" + std::to_string(f);
    from += (f ? ", " : "") + ident(aux.predicate, d) + " " + alias;
    for (const Term &arg : aux.args) {
      std::string qual = alias + "." + ident(arg.name, d);
      auto [it, inserted] = var_expr.emplace(arg.name, qual);
      if (!inserted) where.push_back(it->second + " = " + qual);
    }
  }
  sql += "SELECT DISTINCT ";
  for (std::size_t i = 0; i < t.join_query.head.size(); ++i)
    sql += (i ? ", " : "") + var_expr.at(t.join_query.head[i].name);
  sql += "\nFROM " + from;
  if (!where.empty()) {
    sql += "\nWHERE ";
    for (std::size_t i = 0; i < where.size(); ++i)
      sql += (i ? " AND " : "") + where[i];
  }
  return sql + ";\n";
}

}  // namespace obda
