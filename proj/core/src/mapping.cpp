#include "obda/mapping.hpp"

#include <algorithm>
#include <set>

#include "obda/parse.hpp"

namespace obda {

std::string print_op(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
    case CmpOp::Ne: return "!=";
  }
  return "?";
}

const ViewDef &ViewCatalog::at(const std::string &name) const {
  auto it = defs.find(name);
  if (it == defs.end()) throw SchemaError("unknown view: " + name);
  return it->second;
}

void ViewCatalog::add(ViewDef def) {
  for (const ViewRule &r : def.rules)
    if (r.head.size() != def.arity())
      throw SchemaError("rule head arity differs from view '" + def.name +
                        "' arity");
  auto it = defs.find(def.name);
  if (it == defs.end()) {
    defs.emplace(def.name, std::move(def));
    return;
  }
  if (it->second.arity() != def.arity())
    throw SchemaError("view '" + def.name + "' redefined with a different arity");
  for (ViewRule &r : def.rules) it->second.rules.push_back(std::move(r));
}

namespace {

void base_tables_into(const ViewCatalog &cat, const std::string &view,
                      std::vector<std::string> &out, int depth) {
  if (depth > 64) throw SchemaError("view nesting too deep: " + view);
  if (!cat.contains(view)) {
    out.push_back(view);
    return;
  }
  for (const ViewRule &r : cat.at(view).rules)
    for (const Atom &a : r.body)
      base_tables_into(cat, a.predicate, out, depth + 1);
}

}  // namespace

std::vector<std::string> ViewCatalog::base_tables(const std::string &view) const {
  std::vector<std::string> out;
  base_tables_into(*this, view, out, 0);
  return out;
}

Atom MappingAssertion::source_atom() const {
  Atom a;
  a.predicate = source_view;
  for (const std::string &v : source_vars) a.args.push_back(Term::var(v));
  return a;
}

std::map<std::string, std::size_t> MappingSet::predicate_arities() const {
  std::map<std::string, std::size_t> out;
  for (const MappingAssertion &m : assertions) {
    auto [it, inserted] = out.emplace(m.target.predicate, m.target.args.size());
    if (!inserted && it->second != m.target.args.size())
      throw SchemaError("predicate '" + m.target.predicate +
                        "' mapped with inconsistent arity");
  }
  return out;
}

void validate(const MappingSet &m) {
  m.predicate_arities();
  for (const MappingAssertion &a : m.assertions) {
    std::vector<std::string> tv;
    collect_vars(a.target, tv);
    std::set<std::string> tset(tv.begin(), tv.end());
    std::set<std::string> sset(a.source_vars.begin(), a.source_vars.end());
    if (tset != sset)
      throw SchemaError("target variables of " + print_assertion(a) +
                        " differ from the source variables");
    if (m.views.contains(a.source_view) &&
        m.views.at(a.source_view).arity() != a.source_vars.size())
      throw SchemaError("source arity mismatch in " + print_assertion(a));
    for (const Term &t : a.target.args)
      if (t.is_fn())
        for (const Term &arg : t.args)
          if (arg.is_fn()) throw SchemaError("nested functional term");
  }
}

std::string print_assertion(const MappingAssertion &m) {
  return print_atom(m.target) + " <- " + print_atom(m.source_atom());
}

std::string print_mappings(const MappingSet &m) {
  std::string out;
  for (const auto &[name, def] : m.views.defs) {
    for (const ViewRule &r : def.rules) {
      Atom head{name, r.head};
      out += print_atom(head) + " := ";
      for (std::size_t i = 0; i < r.body.size(); ++i) {
        if (i) out += " & ";
        out += print_atom(r.body[i]);
      }
      for (const FilterCond &f : r.filters)
        out += " & " + f.var + " " + print_op(f.op) + " " +
               print_term(Term::constant(f.rhs));
      out += "\n";
    }
  }
  for (const MappingAssertion &a : m.assertions)
    out += print_assertion(a) + "\n";
  return out;
}

std::string Signature::to_string() const {
  std::string s = predicate + "[";
  for (std::size_t i = 0; i < templates.size(); ++i) {
    if (i) s += ",";
    s += templates[i].empty() ? "?" : templates[i];
  }
  return s + "]";
}

Signature signature_of(const MappingAssertion &m) {
  Signature s;
  s.predicate = m.target.predicate;
  for (const Term &t : m.target.args) {
    switch (t.kind) {
      case Term::Kind::Functional: s.templates.push_back(t.name); break;
      case Term::Kind::Variable: s.templates.push_back(""); break;
      case Term::Kind::Constant:
        s.templates.push_back("$const:" + render_value(t.value));
        break;
    }
  }
  return s;
}

std::vector<Signature> signatures(const MappingSet &m) {
  std::vector<Signature> out;
  for (const MappingAssertion &a : m.assertions) {
    Signature s = signature_of(a);
    if (std::find(out.begin(), out.end(), s) == out.end())
      out.push_back(std::move(s));
  }
  return out;
}

MappingSet restrict_to(const MappingSet &m, const Signature &sig) {
  MappingSet out;
  out.views = m.views;
  for (const MappingAssertion &a : m.assertions)
    if (signature_of(a) == sig) out.assertions.push_back(a);
  return out;
}

namespace {

/// Next unused name of the form <prefix><k>, k >= 1.
std::string fresh_name(const ViewCatalog &cat, const std::string &prefix,
                       std::size_t &counter) {
  while (true) {
    std::string candidate = prefix + std::to_string(++counter);
    if (!cat.contains(candidate)) return candidate;
  }
}

}  // namespace

MappingSet wrap(const MappingSet &m) {
  validate(m);
  MappingSet out;
  out.views = m.views;
  std::size_t counter = 0;

  for (const Signature &sig : signatures(m)) {
    std::vector<const MappingAssertion *> members;
    for (const MappingAssertion &a : m.assertions)
      if (signature_of(a) == sig) members.push_back(&a);

    // Canonical target over fresh variables; one flattened column per
    // functional argument or bare variable position.
    Atom target{sig.predicate, {}};
    std::vector<std::string> cols;
    std::size_t next_var = 0;
    auto fresh_var = [&]() { return "v" + std::to_string(next_var++); };
    const Atom &sample = members.front()->target;
    for (const Term &t : sample.args) {
      switch (t.kind) {
        case Term::Kind::Functional: {
          std::vector<Term> args;
          for (std::size_t i = 0; i < t.args.size(); ++i) {
            std::string v = fresh_var();
            cols.push_back(v);
            args.push_back(Term::var(v));
          }
          target.args.push_back(Term::fn(t.name, std::move(args)));
          break;
        }
        case Term::Kind::Variable: {
          std::string v = fresh_var();
          cols.push_back(v);
          target.args.push_back(Term::var(v));
          break;
        }
        case Term::Kind::Constant:
          target.args.push_back(t);
          break;
      }
    }

    ViewDef def;
    def.name = fresh_name(out.views, "W_", counter);
    def.attrs = cols;
    for (const MappingAssertion *member : members) {
      ViewRule rule;
      for (const Term &t : member->target.args) {
        if (t.is_fn()) {
          for (const Term &arg : t.args) rule.head.push_back(arg);
        } else if (t.is_var()) {
          rule.head.push_back(t);
        }
        // Constant positions carry no column.
      }
      rule.body.push_back(member->source_atom());
      def.rules.push_back(std::move(rule));
    }

    MappingAssertion wrapped;
    wrapped.target = std::move(target);
    wrapped.source_view = def.name;
    wrapped.source_vars = cols;
    out.views.add(std::move(def));
    out.assertions.push_back(std::move(wrapped));
  }
  return out;
}

namespace {

bool split_applies(const MappingSet &m, const MappingAssertion &a) {
  for (const Term &t : a.target.args)
    if (!t.is_var()) return false;
  if (!m.views.contains(a.source_view)) return false;
  for (const ViewRule &r : m.views.at(a.source_view).rules)
    for (const Term &h : r.head)
      if (!h.is_var()) return true;
  return false;
}

}  // namespace

MappingSet split(const MappingSet &m) {
  validate(m);
  MappingSet out;
  out.views = m.views;
  std::size_t counter = 0;

  for (const MappingAssertion &a : m.assertions) {
    if (!split_applies(m, a)) {
      out.assertions.push_back(a);
      continue;
    }
    const ViewDef &def = m.views.at(a.source_view);
    for (const ViewRule &r : def.rules) {
      // Column index of each source variable.
      auto col_of = [&](const std::string &v) -> std::size_t {
        for (std::size_t i = 0; i < a.source_vars.size(); ++i)
          if (a.source_vars[i] == v) return i;
        throw SchemaError("unbound target variable in split");
      };
      MappingAssertion part;
      part.target.predicate = a.target.predicate;
      for (const Term &t : a.target.args)
        part.target.args.push_back(r.head[col_of(t.name)]);

      std::vector<std::string> vars;
      collect_vars(part.target, vars);

      // Reuse the branch body directly when it is a bare view atom over
      // exactly the target variables; otherwise introduce a fresh view.
      bool bare = r.body.size() == 1 && r.filters.empty();
      if (bare) {
        const Atom &b = r.body.front();
        if (b.args.size() != vars.size()) {
          bare = false;
        } else {
          for (std::size_t i = 0; i < vars.size() && bare; ++i)
            bare = b.args[i].is_var() && b.args[i].name == vars[i];
        }
      }
      if (bare) {
        part.source_view = r.body.front().predicate;
        part.source_vars = vars;
      } else {
        ViewDef branch;
        branch.name = fresh_name(out.views, "S_", counter);
        branch.attrs = vars;
        ViewRule rule;
        for (const std::string &v : vars) rule.head.push_back(Term::var(v));
        rule.body = r.body;
        rule.filters = r.filters;
        branch.rules.push_back(std::move(rule));
        part.source_view = branch.name;
        part.source_vars = vars;
        out.views.add(std::move(branch));
      }
      out.assertions.push_back(std::move(part));
    }
  }
  return out;
}

TBox parse_tbox(const std::string &text) {
  TBox t;
  detail::Scanner sc(text);
  sc.consume_newlines();
  while (!sc.eof()) {
    TBox::Axiom ax;
    ax.sub = sc.ident();
    if (sc.consume("subClassOf")) {
      ax.arity = 1;
    } else if (sc.consume("subPropertyOf")) {
      ax.arity = 2;
    } else {
      sc.fail("expected 'subClassOf' or 'subPropertyOf'");
    }
    ax.sup = sc.ident();
    if (!sc.at_newline()) sc.fail("trailing input after axiom");
    t.axioms.push_back(std::move(ax));
    sc.consume_newlines();
  }
  return t;
}

namespace {

std::string assertion_key(const MappingAssertion &a) {
  CQ as_rule;
  as_rule.head = a.target.args;
  as_rule.body.push_back(a.source_atom());
  // alpha_key ignores the head name, so carry the predicate explicitly.
  return a.target.predicate + "|" + alpha_key(as_rule);
}

}  // namespace

MappingSet saturate(const MappingSet &m, const TBox &t) {
  validate(m);
  auto arities = m.predicate_arities();
  for (const TBox::Axiom &ax : t.axioms) {
    auto check = [&](const std::string &p) {
      auto it = arities.find(p);
      if (it != arities.end() && it->second != ax.arity)
        throw SchemaError("axiom arity mismatch for predicate '" + p + "'");
    };
    check(ax.sub);
    check(ax.sup);
  }

  MappingSet out = m;
  std::set<std::string> seen;
  for (const MappingAssertion &a : out.assertions)
    seen.insert(assertion_key(a));

  for (std::size_t i = 0; i < out.assertions.size(); ++i) {
    for (const TBox::Axiom &ax : t.axioms) {
      if (out.assertions[i].target.predicate != ax.sub) continue;
      if (out.assertions[i].target.args.size() != ax.arity)
        throw SchemaError("axiom arity mismatch for predicate '" + ax.sub +
                          "'");
      MappingAssertion derived = out.assertions[i];
      derived.target.predicate = ax.sup;
      if (seen.insert(assertion_key(derived)).second)
        out.assertions.push_back(std::move(derived));
    }
  }
  return out;
}

MappingSet parse_mappings(const std::string &text) {
  detail::Scanner sc(text);
  MappingSet out;
  sc.consume_newlines();
  while (!sc.eof()) {
    // Shared head shape: Name(term,...) then '<-' or ':='.
    Atom head;
    head.predicate = sc.ident();
    sc.expect('(');
    if (!sc.consume(')')) {
      do {
        head.args.push_back(sc.term());
      } while (sc.consume(','));
      sc.expect(')');
    }
    if (sc.consume("<-")) {
      MappingAssertion a;
      a.target = std::move(head);
      Atom src;
      src.predicate = sc.ident();
      sc.expect('(');
      if (!sc.consume(')')) {
        do {
          Term t = sc.term();
          if (!t.is_var()) sc.fail("source arguments must be variables");
          src.args.push_back(std::move(t));
        } while (sc.consume(','));
        sc.expect(')');
      }
      a.source_view = src.predicate;
      for (const Term &t : src.args) a.source_vars.push_back(t.name);
      out.assertions.push_back(std::move(a));
    } else if (sc.consume(":=")) {
      ViewRule rule;
      rule.head = head.args;
      do {
        // Either an atom Name(...) or a filter var OP const.
        std::string name = sc.ident();
        if (sc.consume('(')) {
          Atom a;
          a.predicate = name;
          if (!sc.consume(')')) {
            do {
              a.args.push_back(sc.scalar_term());
            } while (sc.consume(','));
            sc.expect(')');
          }
          rule.body.push_back(std::move(a));
        } else {
          FilterCond f;
          f.var = name;
          if (sc.consume("<=")) f.op = CmpOp::Le;
          else if (sc.consume(">=")) f.op = CmpOp::Ge;
          else if (sc.consume("!=")) f.op = CmpOp::Ne;
          else if (sc.consume('<')) f.op = CmpOp::Lt;
          else if (sc.consume('>')) f.op = CmpOp::Gt;
          else if (sc.consume('=')) f.op = CmpOp::Eq;
          else sc.fail("expected comparison operator");
          Term rhs = sc.scalar_term();
          if (!rhs.is_const()) sc.fail("filter right-hand side must be a constant");
          f.rhs = rhs.value;
          rule.filters.push_back(std::move(f));
        }
      } while (sc.consume('&'));
      if (rule.body.empty()) sc.fail("view rule needs at least one atom");

      ViewDef def;
      def.name = head.predicate;
      std::vector<std::string> attrs;
      for (const Term &t : rule.head) collect_vars(t, attrs);
      // Attribute names: head variable list for plain heads, positional
      // otherwise.
      bool plain = true;
      for (const Term &t : rule.head) plain = plain && t.is_var();
      if (plain) {
        def.attrs.clear();
        for (const Term &t : rule.head) def.attrs.push_back(t.name);
      } else {
        for (std::size_t i = 0; i < rule.head.size(); ++i)
          def.attrs.push_back("c" + std::to_string(i));
      }
      def.rules.push_back(std::move(rule));
      out.views.add(std::move(def));
    } else {
      sc.fail("expected '<-' or ':='");
    }
    if (!sc.at_newline()) sc.fail("trailing input after statement");
    sc.consume_newlines();
  }
  validate(out);
  return out;
}

}  // namespace obda
