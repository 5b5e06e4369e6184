#include "obda/oracle.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace obda {

using Row = std::vector<Value>;

// ---------------------------------------------------------------------------
// DataInstance
// ---------------------------------------------------------------------------

void DataInstance::add_table(TableDef def, std::vector<Row> rows) {
  for (const Row &r : rows)
    if (r.size() != def.columns.size())
      throw SchemaError("row width mismatch in table '" + def.name + "'");
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  tables[def.name] = std::move(rows);
  schema[def.name] = std::move(def);
}

const std::vector<Row> &DataInstance::rows_of(const std::string &t) const {
  auto it = tables.find(t);
  if (it == tables.end()) throw SchemaError("unknown table: " + t);
  return it->second;
}

namespace {

std::vector<std::string> split_csv_line(const std::string &line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return out;
}

std::string csv_escape(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  return out + "\"";
}

}  // namespace

DataInstance load_instance(const std::string &dir) {
  namespace fs = std::filesystem;
  std::ifstream manifest(fs::path(dir) / "schema.json");
  if (!manifest) throw SchemaError("cannot open " + dir + "/schema.json");
  nlohmann::json j;
  manifest >> j;

  DataInstance d;
  for (const auto &jt : j.at("tables")) {
    TableDef def;
    def.name = jt.at("name").get<std::string>();
    for (const auto &jc : jt.at("columns")) {
      ColumnDef col;
      col.name = jc.at("name").get<std::string>();
      std::string ty = jc.at("type").get<std::string>();
      if (ty == "int") col.type = ColumnDef::Type::Int;
      else if (ty == "string") col.type = ColumnDef::Type::Str;
      else throw SchemaError("unknown column type '" + ty + "'");
      def.columns.push_back(std::move(col));
    }
    std::string file = jt.value("file", def.name + ".csv");
    std::ifstream in(fs::path(dir) / file);
    if (!in) throw SchemaError("cannot open " + dir + "/" + file);

    std::vector<Row> rows;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto fields = split_csv_line(line);
      if (header) {
        header = false;
        if (fields.size() != def.columns.size())
          throw SchemaError("header width mismatch in " + file);
        continue;
      }
      if (fields.size() != def.columns.size())
        throw SchemaError("row width mismatch in " + file);
      Row row;
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (def.columns[i].type == ColumnDef::Type::Int)
          row.emplace_back(static_cast<std::int64_t>(std::stoll(fields[i])));
        else
          row.emplace_back(fields[i]);
      }
      rows.push_back(std::move(row));
    }
    d.add_table(std::move(def), std::move(rows));
  }
  return d;
}

void save_instance(const DataInstance &d, const std::string &dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json tables = nlohmann::json::array();
  for (const auto &[name, def] : d.schema) {
    nlohmann::json jt;
    jt["name"] = name;
    jt["file"] = name + ".csv";
    nlohmann::json cols = nlohmann::json::array();
    for (const ColumnDef &c : def.columns)
      cols.push_back({{"name", c.name},
                      {"type", c.type == ColumnDef::Type::Int ? "int"
                                                              : "string"}});
    jt["columns"] = cols;
    tables.push_back(jt);

    std::ofstream out(fs::path(dir) / (name + ".csv"));
    for (std::size_t i = 0; i < def.columns.size(); ++i)
      out << (i ? "," : "") << csv_escape(def.columns[i].name);
    out << "\n";
    for (const Row &row : d.rows_of(name)) {
      for (std::size_t i = 0; i < row.size(); ++i)
        out << (i ? "," : "") << csv_escape(render_value(row[i]));
      out << "\n";
    }
  }
  std::ofstream manifest(fs::path(dir) / "schema.json");
  manifest << nlohmann::json{{"tables", tables}}.dump(2) << "\n";
}

double oracle_cost(const OpCounters &c, const CostConstants &k) {
  return k.c_t * static_cast<double>(c.tuples_scanned) +
         k.c_j * static_cast<double>(c.join_probes) +
         k.c_m * static_cast<double>(c.tuples_materialized) +
         k.c_u * static_cast<double>(c.dedup_comparisons);
}

// ---------------------------------------------------------------------------
// Ground terms
// ---------------------------------------------------------------------------

namespace {

std::string render_scalar(const Value &v) {
  if (std::holds_alternative<std::string>(v))
    return "'" + std::get<std::string>(v) + "'";
  return std::to_string(std::get<std::int64_t>(v));
}

}  // namespace

std::string GroundTerm::render() const {
  if (symbol.empty()) return render_scalar(values.front());
  std::string s = symbol + ":";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += "|";
    s += render_scalar(values[i]);
  }
  return s;
}

std::size_t VirtualABox::size() const {
  std::size_t n = 0;
  for (const auto &[p, rows] : atoms) n += rows.size();
  return n;
}

// ---------------------------------------------------------------------------
// View evaluation (set semantics, counted)
// ---------------------------------------------------------------------------

namespace {

template <typename RowT>
void sort_dedup(std::vector<RowT> &rows, std::int64_t *comparisons) {
  auto cmp = [comparisons](const RowT &a, const RowT &b) {
    if (comparisons) ++*comparisons;
    return a < b;
  };
  std::sort(rows.begin(), rows.end(), cmp);
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
}

struct RowHash {
  std::size_t operator()(const Row &r) const {
    std::size_t h = 1469598103934665603ull;
    for (const Value &v : r) {
      std::size_t x =
          std::holds_alternative<std::int64_t>(v)
              ? std::hash<std::int64_t>{}(std::get<std::int64_t>(v)) * 2
              : std::hash<std::string>{}(std::get<std::string>(v)) * 2 + 1;
      h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

bool filter_matches(const Value &v, CmpOp op, const Value &rhs) {
  switch (op) {
    case CmpOp::Eq: return v == rhs;
    case CmpOp::Ne: return v != rhs;
    case CmpOp::Lt: return v < rhs;
    case CmpOp::Le: return !(rhs < v);
    case CmpOp::Gt: return rhs < v;
    case CmpOp::Ge: return !(v < rhs);
  }
  return false;
}

/// Joined body tuples plus the column each variable is bound to.
struct BodyResult {
  std::vector<Row> rows;
  std::map<std::string, std::size_t> var_col;
};

BodyResult eval_body(const std::vector<Atom> &body,
                     const std::vector<FilterCond> &filters,
                     const ViewCatalog &views, const DataInstance &d,
                     OpCounters &c) {
  BodyResult res;
  std::size_t cur_width = 0;
  for (std::size_t ai = 0; ai < body.size(); ++ai) {
    const Atom &atom = body[ai];
    std::vector<Row> rel = eval_view(atom.predicate, views, d, c);

    // Constants and repeated variables inside the atom restrict the
    // relation before joining.
    std::map<std::string, std::size_t> local;
    std::vector<std::pair<std::size_t, Value>> const_cols;
    std::vector<std::pair<std::size_t, std::size_t>> same_cols;
    for (std::size_t col = 0; col < atom.args.size(); ++col) {
      const Term &t = atom.args[col];
      if (t.is_const()) {
        const_cols.emplace_back(col, t.value);
      } else if (t.is_var()) {
        auto [it, inserted] = local.emplace(t.name, col);
        if (!inserted) same_cols.emplace_back(it->second, col);
      } else {
        throw SchemaError("functional term in a translation body");
      }
    }
    if (!const_cols.empty() || !same_cols.empty()) {
      std::vector<Row> kept;
      for (Row &r : rel) {
        bool ok = true;
        for (const auto &[col, v] : const_cols) ok = ok && r[col] == v;
        for (const auto &[a, b] : same_cols) ok = ok && r[a] == r[b];
        if (ok) kept.push_back(std::move(r));
      }
      rel = std::move(kept);
    }

    if (ai == 0) {
      res.rows = std::move(rel);
      for (const auto &[v, col] : local) res.var_col[v] = col;
      cur_width = atom.args.size();
      continue;
    }

    // Hash join on the variables shared with the tuples built so far.
    std::vector<std::pair<std::size_t, std::size_t>> keys;  // (cur, rel)
    for (const auto &[v, col] : local) {
      auto it = res.var_col.find(v);
      if (it != res.var_col.end()) keys.emplace_back(it->second, col);
    }

    const std::size_t width = cur_width;
    std::vector<Row> joined;
    if (keys.empty()) {
      // Cross product; exact evaluation supports it even though the
      // estimator refuses disconnected join graphs.
      for (const Row &l : res.rows)
        for (const Row &r : rel) {
          Row out = l;
          out.insert(out.end(), r.begin(), r.end());
          joined.push_back(std::move(out));
          ++c.join_probes;
        }
    } else {
      std::unordered_map<Row, std::vector<const Row *>, RowHash> build;
      build.reserve(rel.size());
      for (const Row &r : rel) {
        Row key;
        for (const auto &[lc, rc] : keys) key.push_back(r[rc]);
        build[std::move(key)].push_back(&r);
        ++c.join_probes;
      }
      for (const Row &l : res.rows) {
        ++c.join_probes;
        Row key;
        for (const auto &[lc, rc] : keys) key.push_back(l[lc]);
        auto it = build.find(key);
        if (it == build.end()) continue;
        for (const Row *r : it->second) {
          Row out = l;
          out.insert(out.end(), r->begin(), r->end());
          joined.push_back(std::move(out));
          ++c.join_probes;
        }
      }
    }
    res.rows = std::move(joined);
    for (const auto &[v, col] : local)
      res.var_col.emplace(v, width + col);
    cur_width += atom.args.size();
  }

  if (!filters.empty()) {
    std::vector<Row> kept;
    for (Row &r : res.rows) {
      bool ok = true;
      for (const FilterCond &f : filters) {
        auto it = res.var_col.find(f.var);
        if (it == res.var_col.end())
          throw SchemaError("filter variable '" + f.var + "' unbound");
        ok = ok && filter_matches(r[it->second], f.op, f.rhs);
      }
      if (ok) kept.push_back(std::move(r));
    }
    res.rows = std::move(kept);
  }
  return res;
}

GroundTerm ground_term(const Term &t, const BodyResult &env, const Row &row) {
  GroundTerm g;
  switch (t.kind) {
    case Term::Kind::Constant:
      g.values.push_back(t.value);
      break;
    case Term::Kind::Variable: {
      auto it = env.var_col.find(t.name);
      if (it == env.var_col.end())
        throw SchemaError("unbound head variable '" + t.name + "'");
      g.values.push_back(row[it->second]);
      break;
    }
    case Term::Kind::Functional:
      g.symbol = t.name;
      for (const Term &a : t.args) {
        if (a.is_const()) {
          g.values.push_back(a.value);
        } else {
          auto it = env.var_col.find(a.name);
          if (it == env.var_col.end())
            throw SchemaError("unbound template variable '" + a.name + "'");
          g.values.push_back(row[it->second]);
        }
      }
      break;
  }
  return g;
}

}  // namespace

std::vector<Row> eval_view(const std::string &name, const ViewCatalog &views,
                           const DataInstance &d, OpCounters &c) {
  if (!views.contains(name)) {
    const auto &rows = d.rows_of(name);
    c.tuples_scanned += static_cast<std::int64_t>(rows.size());
    return rows;
  }
  const ViewDef &def = views.at(name);
  std::vector<Row> out;
  for (const ViewRule &rule : def.rules) {
    BodyResult env = eval_body(rule.body, rule.filters, views, d, c);
    for (const Row &row : env.rows) {
      Row projected;
      for (const Term &h : rule.head) {
        GroundTerm g = ground_term(h, env, row);
        projected.push_back(g.symbol.empty() ? g.values.front()
                                             : Value(g.render()));
      }
      out.push_back(std::move(projected));
    }
  }
  sort_dedup(out, &c.dedup_comparisons);
  return out;
}

// ---------------------------------------------------------------------------
// Virtual ABox and certain answers
// ---------------------------------------------------------------------------

VirtualABox virtual_abox(const MappingSet &m, const DataInstance &d) {
  OpCounters scratch;
  VirtualABox abox;
  for (const MappingAssertion &a : m.assertions) {
    std::vector<Row> rel = eval_view(a.source_view, m.views, d, scratch);
    BodyResult env;
    for (std::size_t i = 0; i < a.source_vars.size(); ++i)
      env.var_col[a.source_vars[i]] = i;
    auto &rows = abox.atoms[a.target.predicate];
    for (const Row &row : rel) {
      std::vector<GroundTerm> args;
      for (const Term &t : a.target.args)
        args.push_back(ground_term(t, env, row));
      rows.push_back(std::move(args));
    }
  }
  for (auto &[p, rows] : abox.atoms) sort_dedup(rows, nullptr);
  return abox;
}

VirtualABox saturate_abox(const VirtualABox &abox, const TBox &t) {
  VirtualABox out = abox;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const TBox::Axiom &ax : t.axioms) {
      auto it = out.atoms.find(ax.sub);
      if (it == out.atoms.end()) continue;
      auto &sup = out.atoms[ax.sup];
      std::size_t before = sup.size();
      for (const auto &row : out.atoms[ax.sub]) {
        if (row.size() != ax.arity)
          throw SchemaError("axiom arity mismatch for '" + ax.sub + "'");
        sup.push_back(row);
      }
      sort_dedup(sup, nullptr);
      if (sup.size() != before) changed = true;
    }
  }
  return out;
}

namespace {

/// One disjunct evaluated over an ABox. Each atom probes a hash index built
/// on the argument positions already determined by earlier atoms.
void eval_cq_over_abox(const CQ &cq, const VirtualABox &abox,
                       std::vector<std::vector<std::string>> &out) {
  // Static slot assignment: variables in first-occurrence order over the
  // body. A slot is filled once its first atom has been joined.
  std::map<std::string, std::size_t> slot;
  using Binding = std::vector<GroundTerm>;
  std::vector<Binding> frontier{Binding{}};

  for (const Atom &atom : cq.body) {
    auto found = abox.atoms.find(atom.predicate);
    if (found == abox.atoms.end()) return;
    const auto &rows = found->second;

    const std::size_t base_slots = slot.size();
    auto is_bound = [&](const std::string &v) {
      auto it = slot.find(v);
      return it != slot.end() && it->second < base_slots;
    };

    // Determined positions: constants, bound variables, templates over
    // bound/constant arguments only.
    std::vector<std::size_t> det;
    for (std::size_t i = 0; i < atom.args.size(); ++i) {
      const Term &arg = atom.args[i];
      if (arg.is_const()) {
        det.push_back(i);
      } else if (arg.is_var()) {
        if (is_bound(arg.name)) det.push_back(i);
        else slot.emplace(arg.name, slot.size());
      } else {
        bool all = true;
        for (const Term &a : arg.args)
          if (a.is_var() && !is_bound(a.name)) all = false;
        if (all) {
          det.push_back(i);
        } else {
          for (const Term &a : arg.args)
            if (a.is_var()) slot.emplace(a.name, slot.size());
        }
      }
    }

    std::map<std::string, std::vector<std::size_t>> index;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != atom.args.size()) continue;
      std::string key;
      for (std::size_t p : det) key += rows[r][p].render() + ";";
      index[std::move(key)].push_back(r);
    }

    std::vector<Binding> next;
    for (const Binding &b : frontier) {
      // Expected values on the determined positions.
      std::string key;
      bool feasible = true;
      for (std::size_t p : det) {
        const Term &arg = atom.args[p];
        GroundTerm expect;
        if (arg.is_const()) {
          expect = GroundTerm{"", {arg.value}};
        } else if (arg.is_var()) {
          expect = b[slot.at(arg.name)];
        } else {
          expect.symbol = arg.name;
          for (const Term &a : arg.args) {
            if (a.is_const()) {
              expect.values.push_back(a.value);
            } else {
              const GroundTerm &bound = b[slot.at(a.name)];
              if (!bound.symbol.empty()) {
                feasible = false;  // a template over an individual
                break;
              }
              expect.values.push_back(bound.values.front());
            }
          }
        }
        if (!feasible) break;
        key += expect.render() + ";";
      }
      if (!feasible) continue;
      auto hit = index.find(key);
      if (hit == index.end()) continue;

      for (std::size_t r : hit->second) {
        const auto &row = rows[r];
        Binding nb = b;
        nb.resize(slot.size(), GroundTerm{});
        std::vector<bool> fresh(slot.size() - b.size(), true);
        auto bind = [&](std::size_t s, const GroundTerm &g) {
          if (s < b.size()) return nb[s] == g;
          if (fresh[s - b.size()]) {
            nb[s] = g;
            fresh[s - b.size()] = false;
            return true;
          }
          return nb[s] == g;
        };
        bool ok = true;
        for (std::size_t i = 0; ok && i < atom.args.size(); ++i) {
          if (std::find(det.begin(), det.end(), i) != det.end()) continue;
          const Term &arg = atom.args[i];
          const GroundTerm &g = row[i];
          if (arg.is_var()) {
            ok = bind(slot.at(arg.name), g);
          } else {  // template with at least one unbound argument
            if (g.symbol != arg.name || g.values.size() != arg.args.size()) {
              ok = false;
              break;
            }
            for (std::size_t k = 0; ok && k < arg.args.size(); ++k) {
              const Term &sub = arg.args[k];
              GroundTerm scalar{"", {g.values[k]}};
              if (sub.is_const()) ok = g.values[k] == sub.value;
              else ok = bind(slot.at(sub.name), scalar);
            }
          }
        }
        if (ok) next.push_back(std::move(nb));
      }
    }
    frontier = std::move(next);
    if (frontier.empty()) return;
  }

  for (const Binding &b : frontier) {
    std::vector<std::string> answer;
    bool ok = true;
    for (const Term &h : cq.head) {
      if (h.is_var()) {
        answer.push_back(b[slot.at(h.name)].render());
      } else if (h.is_const()) {
        answer.push_back(GroundTerm{"", {h.value}}.render());
      } else {
        GroundTerm g;
        g.symbol = h.name;
        for (const Term &a : h.args) {
          if (a.is_const()) {
            g.values.push_back(a.value);
          } else {
            const GroundTerm &bound = b[slot.at(a.name)];
            if (!bound.symbol.empty()) {
              ok = false;  // would nest
              break;
            }
            g.values.push_back(bound.values.front());
          }
        }
        if (!ok) break;
        answer.push_back(g.render());
      }
    }
    if (ok) out.push_back(std::move(answer));
  }
}

}  // namespace

AnswerSet eval_abox_query(const UCQ &q, const VirtualABox &abox) {
  AnswerSet out;
  for (const CQ &cq : q.disjuncts) eval_cq_over_abox(cq, abox, out.rows);
  sort_dedup(out.rows, nullptr);
  return out;
}

AnswerSet certain_answers(const UCQ &q, const TBox &t, const MappingSet &m,
                          const DataInstance &d) {
  return eval_abox_query(q, virtual_abox(saturate(m, t), d));
}

// ---------------------------------------------------------------------------
// Translation evaluation
// ---------------------------------------------------------------------------

namespace {

void eval_rule_into(const CQ &rule, const ViewCatalog &views,
                    const DataInstance &d, OpCounters &c,
                    std::vector<std::vector<std::string>> &out) {
  BodyResult env = eval_body(rule.body, {}, views, d, c);
  for (const Row &row : env.rows) {
    std::vector<std::string> answer;
    for (const Term &h : rule.head)
      answer.push_back(ground_term(h, env, row).render());
    out.push_back(std::move(answer));
  }
}

}  // namespace

AnswerSet eval_ucq_translation(const UnfoldedQuery &u,
                               const ViewCatalog &views,
                               const DataInstance &d, OpCounters &c) {
  AnswerSet out;
  for (const CQ &rule : u.rules) eval_rule_into(rule, views, d, c, out.rows);
  sort_dedup(out.rows, &c.dedup_comparisons);
  return out;
}

std::vector<AnswerSet> eval_per_rule(const UnfoldedQuery &u,
                                     const ViewCatalog &views,
                                     const DataInstance &d) {
  OpCounters scratch;
  std::vector<AnswerSet> out;
  for (const CQ &rule : u.rules) {
    AnswerSet one;
    eval_rule_into(rule, views, d, scratch, one.rows);
    sort_dedup(one.rows, nullptr);
    out.push_back(std::move(one));
  }
  return out;
}

AnswerSet eval_type2(const Type2Translation &t, const DataInstance &d,
                     OpCounters &c) {
  AnswerSet out;
  for (const CQ &rule : t.query.rules) {
    // Evaluate each fragment view of this JUCQ once.
    std::vector<std::vector<Row>> rels;
    for (const Atom &atom : rule.body)
      rels.push_back(eval_view(atom.predicate, t.views, d, c));

    // The fragment with the largest materialization cost is pipelined.
    std::size_t pipelined = 0;
    for (std::size_t i = 1; i < rels.size(); ++i)
      if (rels[i].size() > rels[pipelined].size()) pipelined = i;
    for (std::size_t i = 0; i < rels.size(); ++i)
      if (i != pipelined)
        c.tuples_materialized += static_cast<std::int64_t>(rels[i].size());

    // Merge join the fragments in order on their shared variables.
    BodyResult res;
    std::size_t cur_width = 0;
    for (std::size_t ai = 0; ai < rule.body.size(); ++ai) {
      const Atom &atom = rule.body[ai];
      std::vector<Row> rel = std::move(rels[ai]);
      std::map<std::string, std::size_t> local;
      std::vector<std::pair<std::size_t, Value>> const_cols;
      for (std::size_t col = 0; col < atom.args.size(); ++col) {
        const Term &arg = atom.args[col];
        if (arg.is_const()) const_cols.emplace_back(col, arg.value);
        else local.emplace(arg.name, col);
      }
      if (!const_cols.empty()) {
        std::vector<Row> kept;
        for (Row &r : rel) {
          bool ok = true;
          for (const auto &[col, v] : const_cols) ok = ok && r[col] == v;
          if (ok) kept.push_back(std::move(r));
        }
        rel = std::move(kept);
      }

      if (ai == 0) {
        res.rows = std::move(rel);
        for (const auto &[v, col] : local) res.var_col[v] = col;
        cur_width = atom.args.size();
        continue;
      }

      std::vector<std::pair<std::size_t, std::size_t>> keys;
      for (const auto &[v, col] : local) {
        auto it = res.var_col.find(v);
        if (it != res.var_col.end()) keys.emplace_back(it->second, col);
      }
      const std::size_t width = cur_width;

      std::vector<Row> joined;
      if (keys.empty()) {
        for (const Row &l : res.rows)
          for (const Row &r : rel) {
            Row o = l;
            o.insert(o.end(), r.begin(), r.end());
            joined.push_back(std::move(o));
            ++c.join_probes;
          }
      } else {
        auto left_key = [&keys](const Row &r) {
          Row k;
          for (const auto &[lc, rc] : keys) k.push_back(r[lc]);
          return k;
        };
        auto right_key = [&keys](const Row &r) {
          Row k;
          for (const auto &[lc, rc] : keys) k.push_back(r[rc]);
          return k;
        };
        auto cmp_l = [&](const Row &a, const Row &b) {
          ++c.dedup_comparisons;
          return left_key(a) < left_key(b);
        };
        auto cmp_r = [&](const Row &a, const Row &b) {
          ++c.dedup_comparisons;
          return right_key(a) < right_key(b);
        };
        std::sort(res.rows.begin(), res.rows.end(), cmp_l);
        std::sort(rel.begin(), rel.end(), cmp_r);

        std::size_t li = 0, ri = 0;
        while (li < res.rows.size() && ri < rel.size()) {
          ++c.join_probes;
          Row lk = left_key(res.rows[li]);
          Row rk = right_key(rel[ri]);
          if (lk < rk) {
            ++li;
          } else if (rk < lk) {
            ++ri;
          } else {
            std::size_t lj = li, rj = ri;
            while (lj < res.rows.size() && left_key(res.rows[lj]) == lk) ++lj;
            while (rj < rel.size() && right_key(rel[rj]) == rk) ++rj;
            for (std::size_t a = li; a < lj; ++a)
              for (std::size_t b = ri; b < rj; ++b) {
                Row o = res.rows[a];
                o.insert(o.end(), rel[b].begin(), rel[b].end());
                joined.push_back(std::move(o));
                ++c.join_probes;
              }
            li = lj;
            ri = rj;
          }
        }
      }
      res.rows = std::move(joined);
      for (const auto &[v, col] : local) res.var_col.emplace(v, width + col);
      cur_width += atom.args.size();
    }

    for (const Row &row : res.rows) {
      std::vector<std::string> answer;
      for (const Term &h : rule.head)
        answer.push_back(ground_term(h, res, row).render());
      out.rows.push_back(std::move(answer));
    }
  }
  sort_dedup(out.rows, &c.dedup_comparisons);
  return out;
}

AnswerSet eval_type1(const Type1Translation &t, const ViewCatalog &views,
                     const DataInstance &d, OpCounters &c) {
  // Fragment answer sets first; the joins below run over rendered values,
  // template applications included.
  std::vector<AnswerSet> frag;
  for (const UnfoldedQuery &u : t.fragments)
    frag.push_back(eval_ucq_translation(u, views, d, c));

  std::vector<std::vector<std::string>> rows{{}};
  std::map<std::string, std::size_t> var_col;
  std::size_t cur_width = 0;
  for (std::size_t ai = 0; ai < t.join_query.body.size(); ++ai) {
    const Atom &atom = t.join_query.body[ai];
    std::vector<std::pair<std::size_t, std::size_t>> keys;
    std::map<std::string, std::size_t> local;
    for (std::size_t col = 0; col < atom.args.size(); ++col) {
      const Term &arg = atom.args[col];
      if (!arg.is_var())
        throw SchemaError("fragment join arguments must be variables");
      local.emplace(arg.name, col);
      auto it = var_col.find(arg.name);
      if (it != var_col.end()) keys.emplace_back(it->second, col);
    }
    const std::size_t width = cur_width;

    std::map<std::vector<std::string>, std::vector<const std::vector<std::string> *>>
        build;
    for (const auto &r : frag[ai].rows) {
      std::vector<std::string> key;
      for (const auto &[lc, rc] : keys) key.push_back(r[rc]);
      build[std::move(key)].push_back(&r);
      ++c.join_probes;
    }
    std::vector<std::vector<std::string>> joined;
    for (const auto &l : rows) {
      ++c.join_probes;
      std::vector<std::string> key;
      for (const auto &[lc, rc] : keys) key.push_back(l[lc]);
      auto it = build.find(key);
      if (it == build.end()) continue;
      for (const auto *r : it->second) {
        auto o = l;
        o.insert(o.end(), r->begin(), r->end());
        joined.push_back(std::move(o));
        ++c.join_probes;
      }
    }
    rows = std::move(joined);
    for (const auto &[v, col] : local) var_col.emplace(v, width + col);
    cur_width += atom.args.size();
  }

  AnswerSet out;
  for (const auto &row : rows) {
    std::vector<std::string> answer;
    for (const Term &h : t.join_query.head) {
      if (!h.is_var())
        throw SchemaError("join query head terms must be variables");
      answer.push_back(row[var_col.at(h.name)]);
    }
    out.rows.push_back(std::move(answer));
  }
  sort_dedup(out.rows, &c.dedup_comparisons);
  return out;
}

bool equiv(const MappingSet &a, const MappingSet &b, const DataInstance &d) {
  return virtual_abox(a, d) == virtual_abox(b, d);
}

}  // namespace obda
