#include "obda/ir.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace obda {

Term Term::fn(std::string symbol, std::vector<Term> args) {
  for (const Term &a : args)
    if (a.is_fn())
      throw SchemaError("functional terms never nest: " + symbol);
  Term t;
  t.kind = Kind::Functional;
  t.name = std::move(symbol);
  t.args = std::move(args);
  return t;
}

bool Term::operator==(const Term &o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case Kind::Variable: return name == o.name;
    case Kind::Constant: return value == o.value;
    case Kind::Functional: return name == o.name && args == o.args;
  }
  return false;
}

bool Term::operator<(const Term &o) const {
  if (kind != o.kind) return kind < o.kind;
  switch (kind) {
    case Kind::Variable: return name < o.name;
    case Kind::Constant: return value < o.value;
    case Kind::Functional:
      if (name != o.name) return name < o.name;
      return args < o.args;
  }
  return false;
}

std::string print_term(const Term &t) {
  switch (t.kind) {
    case Term::Kind::Variable: return t.name;
    case Term::Kind::Constant:
      if (std::holds_alternative<std::string>(t.value))
        return "'" + std::get<std::string>(t.value) + "'";
      return render_value(t.value);
    case Term::Kind::Functional: {
      std::string s = t.name + "(";
      for (std::size_t i = 0; i < t.args.size(); ++i) {
        if (i) s += ",";
        s += print_term(t.args[i]);
      }
      return s + ")";
    }
  }
  return {};
}

std::string print_atom(const Atom &a) {
  std::string s = a.predicate + "(";
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) s += ",";
    s += print_term(a.args[i]);
  }
  return s + ")";
}

void collect_vars(const Term &t, std::vector<std::string> &out) {
  auto push = [&out](const std::string &n) {
    if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
  };
  if (t.is_var()) {
    push(t.name);
  } else if (t.is_fn()) {
    for (const Term &a : t.args)
      if (a.is_var()) push(a.name);
  }
}

void collect_vars(const Atom &a, std::vector<std::string> &out) {
  for (const Term &t : a.args) collect_vars(t, out);
}

std::vector<std::string> CQ::head_vars() const {
  std::vector<std::string> vs;
  for (const Term &t : head) collect_vars(t, vs);
  return vs;
}

std::vector<std::string> CQ::body_vars() const {
  std::vector<std::string> vs;
  for (const Atom &a : body) collect_vars(a, vs);
  return vs;
}

std::vector<std::string> CQ::existential_vars() const {
  auto hv = head_vars();
  std::vector<std::string> out;
  for (const std::string &v : body_vars())
    if (std::find(hv.begin(), hv.end(), v) == hv.end()) out.push_back(v);
  return out;
}

namespace {

void check_symbol_arity(const Term &t,
                        std::map<std::string, std::size_t> &arity) {
  if (!t.is_fn()) return;
  auto [it, inserted] = arity.emplace(t.name, t.args.size());
  if (!inserted && it->second != t.args.size())
    throw SchemaError("function symbol '" + t.name +
                      "' used with inconsistent arity");
}

}  // namespace

void validate(const UCQ &q) {
  if (q.disjuncts.empty()) throw SchemaError("empty union");
  std::map<std::string, std::size_t> fn_arity;
  std::map<std::string, std::size_t> pred_arity;
  const std::size_t head_arity = q.disjuncts.front().head.size();
  const std::string &name = q.disjuncts.front().name;
  for (const CQ &cq : q.disjuncts) {
    if (cq.name != name)
      throw SchemaError("disjuncts must share one head name");
    if (cq.head.size() != head_arity)
      throw SchemaError("disjuncts must share the head arity");
    if (cq.body.empty()) throw SchemaError("rule body must be non-empty");
    for (const Term &t : cq.head) check_symbol_arity(t, fn_arity);
    for (const Atom &a : cq.body) {
      auto [it, inserted] = pred_arity.emplace(a.predicate, a.args.size());
      if (!inserted && it->second != a.args.size())
        throw SchemaError("predicate '" + a.predicate +
                          "' used with inconsistent arity");
      for (const Term &t : a.args) check_symbol_arity(t, fn_arity);
    }
    auto bv = cq.body_vars();
    for (const std::string &v : cq.head_vars())
      if (std::find(bv.begin(), bv.end(), v) == bv.end())
        throw SchemaError("head variable '" + v + "' missing from the body");
  }
}

std::string print_query(const CQ &q) {
  std::string s = q.name + "(";
  for (std::size_t i = 0; i < q.head.size(); ++i) {
    if (i) s += ",";
    s += print_term(q.head[i]);
  }
  s += ") :- ";
  for (std::size_t i = 0; i < q.body.size(); ++i) {
    if (i) s += ", ";
    s += print_atom(q.body[i]);
  }
  return s;
}

std::string print_query(const UCQ &q) {
  std::string s;
  for (std::size_t i = 0; i < q.disjuncts.size(); ++i) {
    if (i) s += "\n";
    s += print_query(q.disjuncts[i]);
  }
  return s;
}

namespace {

struct Renamer {
  std::map<std::string, std::string> map;
  std::string operator()(const std::string &v) {
    auto [it, inserted] = map.emplace(v, "#" + std::to_string(map.size()));
    (void)inserted;
    return it->second;
  }
};

void key_term(const Term &t, Renamer &r, std::string &out) {
  switch (t.kind) {
    case Term::Kind::Variable:
      out += "v" + r(t.name);
      break;
    case Term::Kind::Constant:
      out += "c" +
             std::string(std::holds_alternative<std::int64_t>(t.value) ? "i"
                                                                       : "s") +
             render_value(t.value);
      break;
    case Term::Kind::Functional:
      out += "f" + t.name + "(";
      for (const Term &a : t.args) {
        key_term(a, r, out);
        out += ",";
      }
      out += ")";
      break;
  }
}

}  // namespace

std::string alpha_key(const CQ &q) {
  Renamer r;
  std::string out;
  for (const Term &t : q.head) {
    key_term(t, r, out);
    out += ";";
  }
  out += "|";
  for (const Atom &a : q.body) {
    out += a.predicate + "(";
    for (const Term &t : a.args) {
      key_term(t, r, out);
      out += ",";
    }
    out += ")";
  }
  return out;
}

bool alpha_equal(const CQ &a, const CQ &b) {
  return alpha_key(a) == alpha_key(b);
}

std::string Cover::key() const {
  std::string s;
  for (std::size_t i = 0; i < fragments.size(); ++i) {
    if (i) s += "|";
    for (std::size_t k = 0; k < fragments[i].size(); ++k) {
      if (k) s += ",";
      s += std::to_string(fragments[i][k]);
    }
  }
  return s;
}

void validate_cover(const CQ &q, const Cover &cover) {
  std::set<std::size_t> seen;
  std::size_t total = 0;
  if (cover.fragments.empty()) throw SchemaError("cover has no fragments");
  for (const auto &frag : cover.fragments) {
    if (frag.empty()) throw SchemaError("empty fragment in cover");
    for (std::size_t idx : frag) {
      if (idx >= q.body.size())
        throw SchemaError("fragment references atom out of range");
      if (!seen.insert(idx).second)
        throw SchemaError("cover fragments overlap");
      ++total;
    }
  }
  if (total != q.body.size())
    throw SchemaError("cover does not span all body atoms");
}

CQ make_fragment_query(const CQ &q, std::size_t fragment_index,
                       const Cover &cover) {
  validate_cover(q, cover);
  if (fragment_index >= cover.fragments.size())
    throw SchemaError("fragment index out of range");
  const auto &frag = cover.fragments[fragment_index];

  CQ out;
  out.name = q.name + "_f" + std::to_string(fragment_index + 1);
  for (std::size_t idx : frag) out.body.push_back(q.body[idx]);

  std::vector<std::string> frag_vars;
  for (const Atom &a : out.body) collect_vars(a, frag_vars);

  std::vector<std::string> other_vars;
  for (std::size_t f = 0; f < cover.fragments.size(); ++f) {
    if (f == fragment_index) continue;
    for (std::size_t idx : cover.fragments[f])
      collect_vars(q.body[idx], other_vars);
  }

  auto answer = q.head_vars();
  auto contains = [](const std::vector<std::string> &vs,
                     const std::string &v) {
    return std::find(vs.begin(), vs.end(), v) != vs.end();
  };

  // Answer variables of q that occur in the fragment, in q's head order.
  for (const std::string &v : answer)
    if (contains(frag_vars, v)) out.head.push_back(Term::var(v));
  // Existential variables shared with another fragment, in occurrence order.
  for (const std::string &v : frag_vars)
    if (!contains(answer, v) && contains(other_vars, v))
      out.head.push_back(Term::var(v));
  return out;
}

std::vector<Cover> enumerate_covers(std::size_t atom_count,
                                    std::size_t max_fragments) {
  if (atom_count == 0) throw SchemaError("query has no atoms");
  if (max_fragments == 0) throw SchemaError("max_fragments must be >= 1");
  std::vector<Cover> out;
  // Restricted growth strings in lexicographic order; the all-zero string
  // (one block) comes first.
  std::vector<std::size_t> rgs(atom_count, 0);
  auto emit = [&]() {
    std::size_t blocks =
        *std::max_element(rgs.begin(), rgs.end()) + 1;
    if (blocks > max_fragments) return;
    Cover c;
    c.fragments.assign(blocks, {});
    for (std::size_t i = 0; i < atom_count; ++i)
      c.fragments[rgs[i]].push_back(i);
    out.push_back(std::move(c));
  };
  while (true) {
    emit();
    // Next RGS: rightmost position whose value may grow (rgs[i] <= max of
    // its prefix), increment it and zero everything to its right.
    bool advanced = false;
    for (std::size_t i = atom_count; i-- > 1;) {
      std::size_t prefix_max = 0;
      for (std::size_t k = 0; k < i; ++k)
        prefix_max = std::max(prefix_max, rgs[k]);
      if (rgs[i] <= prefix_max) {
        ++rgs[i];
        std::fill(rgs.begin() + static_cast<std::ptrdiff_t>(i) + 1, rgs.end(),
                  0);
        advanced = true;
        break;
      }
    }
    if (!advanced) break;
  }
  return out;
}

Cover parse_cover(const std::string &text) {
  Cover c;
  std::vector<std::size_t> frag;
  std::string num;
  auto flush_num = [&]() {
    if (num.empty()) throw SchemaError("bad cover text: " + text);
    frag.push_back(static_cast<std::size_t>(std::stoull(num)));
    num.clear();
  };
  for (char ch : text) {
    if (ch >= '0' && ch <= '9') {
      num += ch;
    } else if (ch == ',') {
      flush_num();
    } else if (ch == '|') {
      flush_num();
      c.fragments.push_back(frag);
      frag.clear();
    } else if (ch != ' ') {
      throw SchemaError("bad cover text: " + text);
    }
  }
  flush_num();
  c.fragments.push_back(frag);
  return c;
}

}  // namespace obda
