#include "obda/unfold.hpp"

#include <algorithm>
#include <set>

namespace obda {

std::optional<Term> Substitution::apply(const Term &t) const {
  switch (t.kind) {
    case Term::Kind::Constant:
      return t;
    case Term::Kind::Variable: {
      auto it = bindings.find(t.name);
      return it == bindings.end() ? t : it->second;
    }
    case Term::Kind::Functional: {
      Term out = t;
      for (Term &arg : out.args) {
        if (!arg.is_var()) continue;
        auto it = bindings.find(arg.name);
        if (it == bindings.end()) continue;
        if (it->second.is_fn()) return std::nullopt;  // would nest
        arg = it->second;
      }
      return out;
    }
  }
  return std::nullopt;
}

std::optional<Atom> Substitution::apply(const Atom &a) const {
  Atom out;
  out.predicate = a.predicate;
  for (const Term &t : a.args) {
    auto applied = apply(t);
    if (!applied) return std::nullopt;
    out.args.push_back(std::move(*applied));
  }
  return out;
}

namespace {

bool occurs_in(const std::string &v, const Term &t) {
  if (t.is_var()) return t.name == v;
  if (t.is_fn())
    for (const Term &a : t.args)
      if (a.is_var() && a.name == v) return true;
  return false;
}

}  // namespace

std::optional<Substitution> mgu(
    const std::vector<std::pair<Atom, Atom>> &pairs) {
  std::vector<std::pair<Term, Term>> eqs;
  for (const auto &[l, r] : pairs) {
    if (l.predicate != r.predicate || l.args.size() != r.args.size())
      return std::nullopt;
    for (std::size_t i = 0; i < l.args.size(); ++i)
      eqs.emplace_back(l.args[i], r.args[i]);
  }

  Substitution sigma;
  auto bind = [&](const std::string &v, const Term &t) -> bool {
    if (t.is_var() && t.name == v) return true;
    if (occurs_in(v, t)) return false;
    Substitution one;
    one.bindings.emplace(v, t);
    for (auto &[var, bound] : sigma.bindings) {
      auto applied = one.apply(bound);
      if (!applied) return false;
      bound = std::move(*applied);
    }
    for (auto &[l, r] : eqs) {
      auto la = one.apply(l);
      auto ra = one.apply(r);
      if (!la || !ra) return false;
      l = std::move(*la);
      r = std::move(*ra);
    }
    sigma.bindings.emplace(v, t);
    return true;
  };

  while (!eqs.empty()) {
    auto [l, r] = eqs.back();
    eqs.pop_back();
    if (l == r) continue;
    if (l.is_var()) {
      if (!bind(l.name, r)) return std::nullopt;
    } else if (r.is_var()) {
      if (!bind(r.name, l)) return std::nullopt;
    } else if (l.is_const() || r.is_const()) {
      return std::nullopt;  // distinct constants, or constant vs functional
    } else {
      if (l.name != r.name || l.args.size() != r.args.size())
        return std::nullopt;
      for (std::size_t i = 0; i < l.args.size(); ++i)
        eqs.emplace_back(l.args[i], r.args[i]);
    }
  }
  return sigma;
}

namespace {

/// Rename a CQ's variables into the canonical x<j> space (first occurrence
/// over head then body).
CQ canonicalize_query_vars(const CQ &q) {
  std::map<std::string, std::string> ren;
  auto rename = [&](const std::string &v) {
    auto [it, inserted] = ren.emplace(v, "x" + std::to_string(ren.size()));
    (void)inserted;
    return it->second;
  };
  auto rename_term = [&](const Term &t) {
    if (t.is_var()) return Term::var(rename(t.name));
    if (t.is_const()) return t;
    Term out = t;
    for (Term &a : out.args)
      if (a.is_var()) a = Term::var(rename(a.name));
    return out;
  };
  CQ out;
  out.name = q.name;
  for (const Term &t : q.head) out.head.push_back(rename_term(t));
  for (const Atom &a : q.body) {
    Atom b;
    b.predicate = a.predicate;
    for (const Term &t : a.args) b.args.push_back(rename_term(t));
    out.body.push_back(std::move(b));
  }
  return out;
}

/// Rename a mapping assertion's variables into the z<occ>_<k> space.
MappingAssertion rename_apart(const MappingAssertion &m, std::size_t occ) {
  std::map<std::string, std::string> ren;
  auto rename = [&](const std::string &v) {
    auto [it, inserted] = ren.emplace(
        v, "z" + std::to_string(occ) + "_" + std::to_string(ren.size()));
    (void)inserted;
    return it->second;
  };
  MappingAssertion out = m;
  for (Term &t : out.target.args) {
    if (t.is_var()) {
      t = Term::var(rename(t.name));
    } else if (t.is_fn()) {
      for (Term &a : t.args)
        if (a.is_var()) a = Term::var(rename(a.name));
    }
  }
  for (std::string &v : out.source_vars) v = rename(v);
  return out;
}

void unfold_cq_into(const CQ &query, const MappingSet &m, UnfoldedQuery &out,
                    std::set<std::string> &seen) {
  const CQ q = canonicalize_query_vars(query);
  const std::size_t n = q.body.size();

  std::vector<std::vector<std::size_t>> candidates(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < m.assertions.size(); ++k)
      if (m.assertions[k].target.predicate == q.body[i].predicate &&
          m.assertions[k].target.args.size() == q.body[i].args.size())
        candidates[i].push_back(k);
    if (candidates[i].empty()) return;  // atom has no mapping: no rules
  }

  std::vector<std::size_t> pick(n, 0);
  while (true) {
    std::vector<MappingAssertion> renamed;
    renamed.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
      renamed.push_back(rename_apart(m.assertions[candidates[i][pick[i]]],
                                     i + 1));

    std::vector<std::pair<Atom, Atom>> pairs;
    for (std::size_t i = 0; i < n; ++i)
      pairs.emplace_back(q.body[i], renamed[i].target);

    if (auto sigma = mgu(pairs)) {
      CQ rule;
      rule.name = out.name;
      bool ok = true;
      for (const Term &t : q.head) {
        auto applied = sigma->apply(t);
        if (!applied) {
          ok = false;
          break;
        }
        rule.head.push_back(std::move(*applied));
      }
      for (std::size_t i = 0; ok && i < n; ++i) {
        auto applied = sigma->apply(renamed[i].source_atom());
        if (!applied) {
          ok = false;
          break;
        }
        rule.body.push_back(std::move(*applied));
      }
      if (ok && seen.insert(alpha_key(rule)).second)
        out.rules.push_back(std::move(rule));
    }

    // Next tuple, lexicographic.
    std::size_t i = n;
    while (i-- > 0) {
      if (++pick[i] < candidates[i].size()) break;
      pick[i] = 0;
      if (i == 0) return;
    }
  }
}

}  // namespace

UnfoldedQuery unfold_ucq(const UCQ &q, const MappingSet &m) {
  validate(q);
  UnfoldedQuery out;
  out.name = q.cq().name;
  out.arity = q.arity();
  std::set<std::string> seen;
  for (const CQ &cq : q.disjuncts) unfold_cq_into(cq, m, out, seen);
  return out;
}

UnfoldedQuery unfold_ucq(const CQ &q, const MappingSet &m) {
  UCQ u;
  u.disjuncts.push_back(q);
  return unfold_ucq(u, m);
}

std::string print_unfolding(const UnfoldedQuery &u) {
  std::string s;
  for (const CQ &r : u.rules) s += print_query(r) + "\n";
  if (u.rules.empty()) s = "# empty translation: " + u.name + "\n";
  return s;
}

Type1Translation unfold_jucq_type1(const CQ &q, const Cover &cover,
                                   const MappingSet &m) {
  validate_cover(q, cover);
  Type1Translation out;
  out.join_query.name = q.name;
  out.join_query.head = q.head;
  for (std::size_t f = 0; f < cover.fragments.size(); ++f) {
    CQ frag = make_fragment_query(q, f, cover);
    UnfoldedQuery unf = unfold_ucq(frag, m);
    Atom aux;
    aux.predicate = frag.name;
    aux.args = frag.head;
    out.join_query.body.push_back(std::move(aux));
    out.fragments.push_back(std::move(unf));
  }
  return out;
}

Type2Translation unfold_jucq_type2(const CQ &q, const Cover &cover,
                                   const MappingSet &m) {
  validate_cover(q, cover);
  Type2Translation out;
  out.fragment_count = cover.fragments.size();

  // Auxiliary mapping set: one assertion per fragment, sourcing the
  // fragment's unfolding as a view whose rule heads carry the templates.
  MappingSet aux;
  aux.views = m.views;
  CQ aux_query;
  aux_query.name = q.name;
  aux_query.head = q.head;

  for (std::size_t f = 0; f < cover.fragments.size(); ++f) {
    CQ frag = make_fragment_query(q, f, cover);
    UnfoldedQuery unf = unfold_ucq(frag, m);

    Atom aux_atom;
    aux_atom.predicate = frag.name;
    aux_atom.args = frag.head;
    aux_query.body.push_back(aux_atom);

    if (unf.empty()) {
      // Fragment with no mapping: the whole translation is empty. Leave the
      // aux predicate unmapped so the unfolding below yields no rules.
      continue;
    }

    ViewDef def;
    def.name = frag.name + "_u";
    for (const Term &t : frag.head) def.attrs.push_back(t.name);
    for (const CQ &rule : unf.rules) {
      ViewRule vr;
      vr.head = rule.head;
      vr.body = rule.body;
      def.rules.push_back(std::move(vr));
    }
    aux.views.add(std::move(def));

    MappingAssertion assertion;
    assertion.target = aux_atom;
    assertion.source_view = frag.name + "_u";
    for (const Term &t : frag.head) assertion.source_vars.push_back(t.name);
    aux.assertions.push_back(std::move(assertion));
  }

  MappingSet grouped = wrap(split(aux));
  out.query = unfold_ucq(aux_query, grouped);
  out.views = grouped.views;
  for (const MappingAssertion &a : grouped.assertions) {
    for (std::size_t f = 0; f < cover.fragments.size(); ++f) {
      if (a.target.predicate == q.name + "_f" + std::to_string(f + 1)) {
        out.fragment_of_view[a.source_view] = f;
        std::vector<std::string> row;
        for (const Term &t : a.target.args)
          row.push_back(t.is_fn() ? t.name : "");
        out.row_of_view[a.source_view] = std::move(row);
        break;
      }
    }
  }
  return out;
}

bool AnswerTemplateMatrix::distinct_rows() const {
  std::set<std::vector<std::string>> uniq(rows.begin(), rows.end());
  return uniq.size() == rows.size();
}

std::vector<std::vector<std::size_t>> AnswerTemplateMatrix::groups() const {
  std::vector<std::vector<std::size_t>> out;
  std::map<std::vector<std::string>, std::size_t> index;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto [it, inserted] = index.emplace(rows[i], out.size());
    if (inserted) out.push_back({});
    out[it->second].push_back(i);
  }
  return out;
}

AnswerTemplateMatrix atm(const UnfoldedQuery &u) {
  AnswerTemplateMatrix m;
  for (const CQ &rule : u.rules) {
    std::vector<std::string> row;
    for (const Term &t : rule.head) row.push_back(t.is_fn() ? t.name : "");
    m.rows.push_back(std::move(row));
  }
  return m;
}

}  // namespace obda
