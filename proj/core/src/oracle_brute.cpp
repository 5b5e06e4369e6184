#include <map>
#include <vector>

#include "obda/oracle.hpp"
#include "obda/stats.hpp"

// Independent recomputation of the statistic tables. Everything here is
// deliberately naive: backtracking joins, linear-scan deduplication, no
// hashing, no code shared with collect() beyond key canonicalization.

namespace obda {

namespace {

using Row = std::vector<Value>;

bool contains_row(const std::vector<Row> &rows, const Row &r) {
  for (const Row &x : rows)
    if (x == r) return true;
  return false;
}

std::vector<Row> brute_eval(const std::string &name, const ViewCatalog &views,
                            const DataInstance &d);

void brute_rule_rows(const ViewRule &rule, const ViewCatalog &views,
                     const DataInstance &d, std::vector<Row> &out) {
  std::vector<std::vector<Row>> rels;
  for (const Atom &a : rule.body)
    rels.push_back(brute_eval(a.predicate, views, d));

  std::map<std::string, Value> binding;
  std::vector<std::size_t> pick(rule.body.size(), 0);

  // Backtracking over every combination of body rows.
  std::size_t depth = 0;
  std::vector<std::map<std::string, Value>> saved{binding};
  while (true) {
    if (depth == rule.body.size()) {
      bool ok = true;
      for (const FilterCond &f : rule.filters) {
        const Value &v = saved[depth].at(f.var);
        switch (f.op) {
          case CmpOp::Eq: ok = ok && v == f.rhs; break;
          case CmpOp::Ne: ok = ok && v != f.rhs; break;
          case CmpOp::Lt: ok = ok && v < f.rhs; break;
          case CmpOp::Le: ok = ok && !(f.rhs < v); break;
          case CmpOp::Gt: ok = ok && f.rhs < v; break;
          case CmpOp::Ge: ok = ok && !(v < f.rhs); break;
        }
      }
      if (ok) {
        Row projected;
        for (const Term &h : rule.head) {
          if (h.is_var()) {
            projected.push_back(saved[depth].at(h.name));
          } else if (h.is_const()) {
            projected.push_back(h.value);
          } else {
            GroundTerm g;
            g.symbol = h.name;
            for (const Term &a : h.args)
              g.values.push_back(a.is_const() ? a.value
                                              : saved[depth].at(a.name));
            projected.push_back(Value(g.render()));
          }
        }
        if (!contains_row(out, projected)) out.push_back(projected);
      }
      // Backtrack.
      --depth;
      ++pick[depth];
    } else if (pick[depth] >= rels[depth].size()) {
      pick[depth] = 0;
      if (depth == 0) return;
      --depth;
      ++pick[depth];
    } else {
      const Atom &atom = rule.body[depth];
      const Row &row = rels[depth][pick[depth]];
      std::map<std::string, Value> next = saved[depth];
      bool ok = row.size() == atom.args.size();
      for (std::size_t i = 0; ok && i < atom.args.size(); ++i) {
        const Term &arg = atom.args[i];
        if (arg.is_const()) {
          ok = row[i] == arg.value;
        } else if (arg.is_var()) {
          auto [it, inserted] = next.emplace(arg.name, row[i]);
          if (!inserted) ok = it->second == row[i];
        } else {
          ok = false;
        }
      }
      if (ok) {
        ++depth;
        if (saved.size() <= depth) saved.push_back(next);
        else saved[depth] = next;
      } else {
        ++pick[depth];
      }
    }
  }
}

std::vector<Row> brute_eval(const std::string &name, const ViewCatalog &views,
                            const DataInstance &d) {
  std::vector<Row> out;
  if (!views.contains(name)) {
    for (const Row &r : d.rows_of(name))
      if (!contains_row(out, r)) out.push_back(r);
    return out;
  }
  for (const ViewRule &rule : views.at(name).rules)
    brute_rule_rows(rule, views, d, out);
  return out;
}

std::vector<Row> project(const std::vector<Row> &rows,
                         const std::vector<std::size_t> &cols) {
  std::vector<Row> out;
  for (const Row &r : rows) {
    Row p;
    for (std::size_t c : cols) p.push_back(r[c]);
    if (!contains_row(out, p)) out.push_back(p);
  }
  return out;
}

}  // namespace

StatsCatalog brute_stats(const MappingSet &prepared, const DataInstance &d) {
  StatsCatalog cat;

  std::map<std::string, std::vector<Row>> rels;
  for (const MappingAssertion &a : prepared.assertions) {
    if (rels.count(a.source_view)) continue;
    rels[a.source_view] = brute_eval(a.source_view, prepared.views, d);
    cat.view_card[a.source_view] =
        static_cast<std::int64_t>(rels[a.source_view].size());
    if (prepared.views.contains(a.source_view))
      cat.attrs[a.source_view] = prepared.views.at(a.source_view).attrs;
  }
  for (const auto &[name, def] : d.schema) {
    std::vector<Row> rows;
    for (const Row &r : d.rows_of(name))
      if (!contains_row(rows, r)) rows.push_back(r);
    cat.view_card[name] = static_cast<std::int64_t>(rows.size());
    std::vector<std::string> names;
    for (const ColumnDef &c : def.columns) names.push_back(c.name);
    cat.attrs.emplace(name, std::move(names));
  }

  struct Occ {
    std::string view;
    std::string symbol;
    std::vector<std::size_t> cols;
  };
  std::vector<Occ> occs;
  for (const MappingAssertion &a : prepared.assertions) {
    for (const Term &t : a.target.args) {
      if (!t.is_fn()) continue;
      std::vector<std::size_t> cols;
      bool all_vars = true;
      for (const Term &arg : t.args) {
        if (!arg.is_var()) {
          all_vars = false;
          continue;
        }
        for (std::size_t i = 0; i < a.source_vars.size(); ++i)
          if (a.source_vars[i] == arg.name) {
            cols.push_back(i);
            break;
          }
      }
      if (!cols.empty()) {
        StatKey key{a.source_view, canonical_cols(cols)};
        if (!cat.dist_proj.count(key)) {
          auto rows_it = rels.find(key.view);
          const std::vector<Row> &rows =
              rows_it != rels.end() ? rows_it->second : d.rows_of(key.view);
          cat.dist_proj[key] =
              static_cast<std::int64_t>(project(rows, key.cols).size());
        }
      }
      if (all_vars && !cols.empty()) occs.push_back(Occ{a.source_view, t.name, cols});
    }
  }

  for (std::size_t i = 0; i < occs.size(); ++i) {
    for (std::size_t k = i + 1; k < occs.size(); ++k) {
      if (occs[i].symbol != occs[k].symbol ||
          occs[i].cols.size() != occs[k].cols.size())
        continue;
      FacingKey key = canonical_facing_key(occs[i].view, occs[i].cols,
                                           occs[k].view, occs[k].cols);
      if (key.first == key.second) continue;
      if (cat.facing.count(key)) continue;

      auto rows_of = [&](const std::string &view) -> const std::vector<Row> & {
        auto it = rels.find(view);
        return it != rels.end() ? it->second : d.rows_of(view);
      };
      std::vector<Row> left = project(rows_of(key.first.view), key.first.cols);
      std::vector<Row> right =
          project(rows_of(key.second.view), key.second.cols);
      std::int64_t common = 0;
      for (const Row &l : left)
        if (contains_row(right, l)) ++common;
      cat.facing[key] = common;
    }
  }
  return cat;
}

}  // namespace obda
