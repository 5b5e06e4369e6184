#include "obda/planner.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "json.hpp"
#include "obda/parse.hpp"

namespace obda {

double PlanChoice::rank_cost() const {
  if (!estimable) return std::numeric_limits<double>::infinity();
  return cost.total();
}

namespace {

using i64 = std::int64_t;

i64 group_value(const Estimate &est, const std::vector<std::string> &row) {
  for (const auto &[r, v] : est.per_group)
    if (r == row) return v;
  return 0;
}

/// Branches of a grouped view as flat rules over source views: wrapper
/// views introduced by splitting are inlined one level.
std::vector<CQ> expand_branches(const std::string &view,
                                const ViewCatalog &views) {
  std::vector<CQ> out;
  for (const ViewRule &r : views.at(view).rules) {
    CQ cq;
    cq.name = view;
    cq.head = r.head;
    bool inlined = false;
    if (r.body.size() == 1 && r.filters.empty() &&
        views.contains(r.body.front().predicate)) {
      const Atom &atom = r.body.front();
      const ViewDef &inner = views.at(atom.predicate);
      if (inner.rules.size() == 1 && inner.rules.front().filters.empty()) {
        const ViewRule &ir = inner.rules.front();
        bool aligned = atom.args.size() == inner.attrs.size();
        for (std::size_t i = 0; aligned && i < atom.args.size(); ++i)
          aligned = atom.args[i].is_var() &&
                    atom.args[i].name == inner.attrs[i] &&
                    ir.head[i].is_var() && ir.head[i].name == inner.attrs[i];
        if (aligned) {
          cq.body = ir.body;
          inlined = true;
        }
      }
    }
    if (!inlined) cq.body = r.body;
    out.push_back(std::move(cq));
  }
  return out;
}

std::size_t branch_count(const UnfoldedQuery &u, const ViewCatalog &views) {
  std::set<std::string> seen;
  std::size_t n = 0;
  for (const CQ &rule : u.rules)
    for (const Atom &a : rule.body)
      if (views.contains(a.predicate) && seen.insert(a.predicate).second)
        n += views.at(a.predicate).rules.size();
  return n;
}

std::vector<Cover> candidate_covers(const CQ &q, const MappingSet &m_w,
                                    const StatsCatalog &stats,
                                    const TemplateGroups &groups,
                                    std::size_t max_fragments) {
  const std::size_t n = q.body.size();
  if (n <= 5) return enumerate_covers(n, max_fragments);

  // Greedy fallback: merge the fragment pair whose merged unfolding
  // estimate drops the most, starting from singletons.
  auto frag_estimate = [&](const std::vector<std::size_t> &block,
                           const Cover &cover,
                           std::size_t index) -> i64 {
    (void)block;
    try {
      CQ frag = make_fragment_query(q, index, cover);
      EstimationContext ctx(stats, groups);
      return estimate_unfolding(unfold_ucq(frag, m_w), m_w.views, ctx).value;
    } catch (const Error &) {
      return std::numeric_limits<i64>::max() / 8;
    }
  };

  std::vector<Cover> out = enumerate_covers(n, 1);  // the one-block cover
  Cover current;
  for (std::size_t i = 0; i < n; ++i) current.fragments.push_back({i});
  while (current.fragments.size() > 1) {
    if (current.fragments.size() <= max_fragments) out.push_back(current);
    std::size_t best_i = 0, best_j = 1;
    i64 best_delta = std::numeric_limits<i64>::max();
    for (std::size_t i = 0; i < current.fragments.size(); ++i) {
      for (std::size_t j = i + 1; j < current.fragments.size(); ++j) {
        Cover merged;
        for (std::size_t k = 0; k < current.fragments.size(); ++k)
          if (k != i && k != j) merged.fragments.push_back(current.fragments[k]);
        std::vector<std::size_t> blk = current.fragments[i];
        blk.insert(blk.end(), current.fragments[j].begin(),
                   current.fragments[j].end());
        std::sort(blk.begin(), blk.end());
        merged.fragments.insert(merged.fragments.begin(), blk);
        i64 merged_est = frag_estimate(blk, merged, 0);
        i64 old_i = frag_estimate(current.fragments[i], current, i);
        i64 old_j = frag_estimate(current.fragments[j], current, j);
        i64 delta = merged_est - old_i - old_j;
        if (delta < best_delta) {
          best_delta = delta;
          best_i = i;
          best_j = j;
        }
      }
    }
    std::vector<std::size_t> blk = current.fragments[best_i];
    blk.insert(blk.end(), current.fragments[best_j].begin(),
               current.fragments[best_j].end());
    std::sort(blk.begin(), blk.end());
    Cover next;
    next.fragments.push_back(blk);
    for (std::size_t k = 0; k < current.fragments.size(); ++k)
      if (k != best_i && k != best_j)
        next.fragments.push_back(current.fragments[k]);
    std::sort(next.fragments.begin(), next.fragments.end());
    current = std::move(next);
  }
  return out;
}

}  // namespace

std::vector<PlanChoice> plan(const CQ &q, const MappingSet &m, const TBox &t,
                             const StatsCatalog &stats,
                             const CostConstants &consts,
                             std::size_t max_fragments,
                             const std::string &dialect) {
  MappingSet m_sat = saturate(m, t);
  MappingSet m_w = wrap(m_sat);

  UnfoldedQuery flat = unfold_ucq(q, m_sat);
  UnfoldedQuery wrapped = unfold_ucq(q, m_w);

  // Template column groups of both levels (view names are disjoint).
  TemplateGroups groups = template_groups(m_sat);
  {
    TemplateGroups wg = template_groups(m_w);
    groups.insert(wg.begin(), wg.end());
  }

  EstimationContext full_ctx(stats, groups);
  Estimate full_est;
  bool full_ok = true;
  try {
    full_est = estimate_unfolding(wrapped, m_w.views, full_ctx);
  } catch (const Error &e) {
    full_ok = false;
    full_ctx.flag(std::string("estimate-error: ") + e.what());
  }

  std::vector<PlanChoice> out;
  for (const Cover &cover :
       candidate_covers(q, m_w, stats, groups, max_fragments)) {
    PlanChoice pc;
    pc.cover = cover;
    pc.cardinality = full_ok ? full_est.value : 0;
    EstimationContext ctx(stats, groups);

    try {
      if (cover.is_singleton()) {
        pc.kind = PlanChoice::Kind::UCQ;
        pc.translation = flat;
        pc.views = m_sat.views;
        pc.cq_count = flat.rules.size();
        pc.zero_answers = flat.empty();
        if (!full_ok) throw EstimateError("whole-query estimate unavailable");
        pc.cost = cost_ucq(flat.rules, full_est.value, m_sat.views, consts,
                           ctx);
      } else {
        Type2Translation t2 = unfold_jucq_type2(q, cover, m_sat);
        pc.kind = PlanChoice::Kind::UJUCQ;
        pc.translation = t2.query;
        pc.views = t2.views;
        pc.cq_count = branch_count(t2.query, t2.views);
        pc.zero_answers = t2.empty();
        if (!full_ok) throw EstimateError("whole-query estimate unavailable");

        // Per-fragment estimates over the wrapped level.
        std::vector<Estimate> frag_est(cover.fragments.size());
        for (std::size_t f = 0; f < cover.fragments.size(); ++f) {
          CQ frag = make_fragment_query(q, f, cover);
          frag_est[f] = estimate_unfolding(unfold_ucq(frag, m_w), m_w.views,
                                           ctx);
        }

        AnswerTemplateMatrix rows = atm(t2.query);
        bool disjoint = rows.distinct_rows();
        std::vector<CostEstimate> jucq_costs;
        for (std::size_t r = 0; r < t2.query.rules.size(); ++r) {
          const CQ &rule = t2.query.rules[r];
          if (!rule.existential_vars().empty()) disjoint = false;
          std::vector<JucqFragment> fragments;
          for (const Atom &a : rule.body) {
            JucqFragment jf;
            jf.branches = expand_branches(a.predicate, t2.views);
            auto fit = t2.fragment_of_view.find(a.predicate);
            auto rit = t2.row_of_view.find(a.predicate);
            if (fit == t2.fragment_of_view.end() ||
                rit == t2.row_of_view.end())
              throw PlanError("grouped view lost its fragment: " +
                              a.predicate);
            jf.card = group_value(frag_est[fit->second], rit->second);
            fragments.push_back(std::move(jf));
          }
          jucq_costs.push_back(cost_jucq(fragments,
                                         group_value(full_est, rows.rows[r]),
                                         t2.views, consts, ctx));
        }
        pc.cost = cost_ujucq(jucq_costs, disjoint, full_est.value, consts);
      }
    } catch (const Error &e) {
      pc.estimable = false;
      ctx.flag(std::string("estimate-error: ") + e.what());
    }

    if (pc.zero_answers) {
      pc.cost = CostEstimate{};
      pc.flags.push_back("zero-answers");
    }
    for (const std::string &f : ctx.flags) pc.flags.push_back(f);
    pc.sql = emit_sql(pc.translation, pc.views, stats.attrs, dialect);
    out.push_back(std::move(pc));
  }

  std::stable_sort(out.begin(), out.end(),
                   [](const PlanChoice &a, const PlanChoice &b) {
                     if (a.rank_cost() != b.rank_cost())
                       return a.rank_cost() < b.rank_cost();
                     if (a.cq_count != b.cq_count)
                       return a.cq_count < b.cq_count;
                     return a.cover.key() < b.cover.key();
                   });
  return out;
}

AnswerSet eval_plan(const PlanChoice &pc, const DataInstance &d,
                    OpCounters &counters) {
  if (pc.kind == PlanChoice::Kind::UCQ)
    return eval_ucq_translation(pc.translation, pc.views, d, counters);
  Type2Translation t2;
  t2.query = pc.translation;
  t2.views = pc.views;
  return eval_type2(t2, d, counters);
}

// ---------------------------------------------------------------------------
// Plan serialization
// ---------------------------------------------------------------------------

std::string plan_report_json(const CQ &q,
                             const std::vector<PlanChoice> &choices,
                             const CostConstants &consts) {
  nlohmann::ordered_json j;
  j["query"] = print_query(q);
  j["constants"] = nlohmann::json::parse(consts.to_json());
  nlohmann::ordered_json arr = nlohmann::json::array();
  for (const PlanChoice &pc : choices) {
    nlohmann::ordered_json c;
    c["cover"] = pc.cover.key();
    c["kind"] = pc.kind == PlanChoice::Kind::UCQ ? "UCQ" : "UJUCQ";
    c["cq_count"] = pc.cq_count;
    c["cardinality"] = pc.cardinality;
    c["cost"] = {{"scan", pc.cost.scan},
                 {"hash_join", pc.cost.hash_join},
                 {"dedup", pc.cost.dedup},
                 {"materialize", pc.cost.materialize},
                 {"merge_join", pc.cost.merge_join},
                 {"total", pc.cost.total()}};
    c["estimable"] = pc.estimable;
    c["flags"] = pc.flags;
    std::vector<std::string> rules;
    for (const CQ &r : pc.translation.rules) rules.push_back(print_query(r));
    c["rules"] = rules;
    MappingSet views_only;
    views_only.views = pc.views;
    c["views"] = print_mappings(views_only);
    c["sql"] = pc.sql;
    arr.push_back(std::move(c));
  }
  j["candidates"] = arr;
  j["chosen"] = 0;
  return j.dump(2);
}

LoadedPlan plan_from_json(const std::string &text) {
  nlohmann::json j = nlohmann::json::parse(text);
  LoadedPlan out;
  out.consts = CostConstants::from_json(j.at("constants").dump());
  for (const auto &c : j.at("candidates")) {
    PlanChoice pc;
    pc.cover = parse_cover(c.at("cover").get<std::string>());
    pc.kind = c.at("kind").get<std::string>() == "UCQ"
                  ? PlanChoice::Kind::UCQ
                  : PlanChoice::Kind::UJUCQ;
    pc.cq_count = c.at("cq_count").get<std::size_t>();
    pc.cardinality = c.at("cardinality").get<std::int64_t>();
    pc.estimable = c.at("estimable").get<bool>();
    std::string views_text = c.at("views").get<std::string>();
    if (!views_text.empty())
      pc.views = parse_mappings(views_text).views;
    bool first = true;
    for (const auto &r : c.at("rules")) {
      UCQ rule = parse_query(r.get<std::string>());
      for (CQ &cq : rule.disjuncts) {
        if (first) {
          pc.translation.name = cq.name;
          pc.translation.arity = cq.head.size();
          first = false;
        }
        pc.translation.rules.push_back(std::move(cq));
      }
    }
    pc.sql = c.at("sql").get<std::string>();
    out.choices.push_back(std::move(pc));
  }
  return out;
}

}  // namespace obda
