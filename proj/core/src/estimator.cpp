#include "obda/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace obda {

namespace {

using i64 = std::int64_t;
using i128 = __int128;

i64 ceil_ratio(i128 num, i128 den) {
  if (den == 0) {
    if (num == 0) return 0;
    throw EstimateError("zero denominator with nonzero numerator");
  }
  i128 r = (num + den - 1) / den;
  return static_cast<i64>(r);
}

/// The recursive estimators of one chain, memoized per prefix.
class ChainEstimator {
 public:
  ChainEstimator(const BasicChain &e, EstimationContext &ctx)
      : e_(e), ctx_(ctx), card_memo_(e.aliases.size(), -1),
        fv_memo_(e.aliases.size(), -1) {}

  const BasicChain &chain() const { return e_; }

  i64 base_card(const std::string &view) const {
    return ctx_.stats->lookup_view_card(view);
  }
  i64 base_dist(std::size_t alias, const std::vector<std::size_t> &cols) const {
    return ctx_.stats->lookup_dist(e_.view_of(alias), cols);
  }

  /// Equivalence class of q under the join conditions with both aliases in
  /// the prefix of m joins (canonical column comparison).
  std::vector<QAttr> jc(const QAttr &q, std::size_t m) const {
    auto canon = [](const QAttr &a) {
      return QAttr{a.alias, canonical_cols(a.cols)};
    };
    std::vector<QAttr> cls{canon(q)};
    auto member = [&](const QAttr &a) {
      QAttr c = canon(a);
      return std::find(cls.begin(), cls.end(), c) != cls.end();
    };
    auto consider = [&](const AttrEq &cond) -> bool {
      if (cond.left.alias > m || cond.right.alias > m) return false;
      bool grew = false;
      if (member(cond.left) && !member(cond.right)) {
        cls.push_back(canon(cond.right));
        grew = true;
      }
      if (member(cond.right) && !member(cond.left)) {
        cls.push_back(canon(cond.left));
        grew = true;
      }
      return grew;
    };
    bool grew = true;
    while (grew) {
      grew = false;
      for (const AttrEq &c : e_.tree) grew = consider(c) || grew;
      for (const AttrEq &c : e_.extra) grew = consider(c) || grew;
    }
    return cls;
  }

  /// Longest prefix (at least one join) whose final join's right side is
  /// equivalent to q within the given expression prefix.
  std::optional<std::size_t> jp(const QAttr &q, std::size_t m) const {
    std::vector<QAttr> cls = jc(q, m);
    auto member = [&](const QAttr &a) {
      QAttr c{a.alias, canonical_cols(a.cols)};
      return std::find(cls.begin(), cls.end(), c) != cls.end();
    };
    for (std::size_t k = std::min(m, e_.tree.size()); k >= 1; --k) {
      if (member(e_.tree[k - 1].right)) return k;
    }
    return std::nullopt;
  }

  /// fv of the join that creates prefix m. The left side's value set equals
  /// every attribute in its equivalence class, so each class member with a
  /// facing statistic yields an estimate of the same quantity; the best-
  /// informed (largest) one wins. Members without a statistic are skipped.
  i64 fv(std::size_t m) {
    if (fv_memo_[m] >= 0) return fv_memo_[m];
    const AttrEq &cond = e_.tree[m - 1];

    auto estimate_via = [&](const QAttr &left) -> std::optional<i64> {
      i64 raw;
      try {
        raw = ctx_.stats->lookup_facing(
            e_.view_of(left.alias), left.cols,
            e_.view_of(cond.right.alias), cond.right.cols);
      } catch (const MissingStatError &) {
        return std::nullopt;
      }
      if (m == 1) return raw;
      i64 d = dist(left, m - 1);
      i64 b = base_dist(left.alias, left.cols);
      return (d == 0) ? 0 : ceil_ratio(i128(raw) * d, b);
    };

    std::optional<i64> out = estimate_via(cond.left);
    if (cond.left.cols.size() == 1 && cond.right.cols.size() == 1) {
      for (const QAttr &member : jc(cond.left, m - 1)) {
        if (member == cond.left || member.cols.size() != 1) continue;
        auto via = estimate_via(member);
        if (via && (!out || *via > *out)) out = via;
      }
    }
    if (!out)
      // Surface the original key, not a class member's.
      ctx_.stats->lookup_facing(e_.view_of(cond.left.alias), cond.left.cols,
                                e_.view_of(cond.right.alias),
                                cond.right.cols);
    fv_memo_[m] = *out;
    return *out;
  }

  /// dist of q's projection over prefix m.
  i64 dist(const QAttr &q, std::size_t m) {
    auto key = std::make_pair(m, QAttr{q.alias, canonical_cols(q.cols)});
    auto it = dist_memo_.find(key);
    if (it != dist_memo_.end()) return it->second;
    i64 out;
    const i64 base = base_dist(q.alias, q.cols);
    if (m == 0) {
      out = base;
    } else if (auto k = jp(q, m)) {
      i64 f = fv(*k);
      i64 ck = card(*k);
      i64 cm = card(m);
      // Empty prefix: empty result.
      i64 scaled = (ck == 0) ? 0 : ceil_ratio(i128(f) * cm, ck);
      out = std::min({scaled, f, base});
    } else {
      i64 cm = card(m);
      i64 cv = base_card(e_.view_of(q.alias));
      i64 scaled = (cv == 0) ? 0 : ceil_ratio(i128(base) * cm, cv);
      out = std::min(scaled, base);
    }
    dist_memo_[key] = out;
    return out;
  }

  /// card of prefix m over the spanning-tree conditions.
  i64 card(std::size_t m) {
    if (card_memo_[m] >= 0) return card_memo_[m];
    i64 out;
    if (m == 0) {
      out = base_card(e_.view_of(0));
    } else {
      const AttrEq &cond = e_.tree[m - 1];
      i64 f = fv(m);
      i64 right_card = base_card(e_.view_of(cond.right.alias));
      i64 right_dist = base_dist(cond.right.alias, cond.right.cols);
      if (m == 1) {
        i64 left_card = base_card(e_.view_of(cond.left.alias));
        i64 left_dist = base_dist(cond.left.alias, cond.left.cols);
        out = (f == 0 || left_card == 0 || right_card == 0)
                  ? 0
                  : ceil_ratio(i128(f) * left_card * right_card,
                               i128(left_dist) * right_dist);
      } else {
        i64 prev = card(m - 1);
        i64 left_dist = dist(cond.left, m - 1);
        out = (f == 0 || prev == 0 || right_card == 0)
                  ? 0
                  : ceil_ratio(i128(f) * prev * right_card,
                               i128(left_dist) * right_dist);
      }
    }
    card_memo_[m] = out;
    return out;
  }

  i64 full_card() { return card(e_.tree.size()); }

  /// Extra equality conditions fold in as selection probabilities
  /// fv(pairwise)/dist(left side).
  double extra_factor() {
    double factor = 1.0;
    for (const AttrEq &c : e_.extra) {
      i64 raw = ctx_.stats->lookup_facing(
          e_.view_of(c.left.alias), c.left.cols, e_.view_of(c.right.alias),
          c.right.cols);
      i64 d = base_dist(c.left.alias, c.left.cols);
      if (raw == 0) return 0.0;
      factor *= static_cast<double>(raw) / static_cast<double>(d);
    }
    return factor;
  }

  i64 extended_card() {
    i64 base = full_card();
    if (e_.extra.empty()) return base;
    double scaled = static_cast<double>(base) * extra_factor();
    return static_cast<i64>(std::ceil(scaled - 1e-9));
  }

  i64 projection(const std::vector<QAttr> &attrs, i64 card_value) {
    i128 product = 1;
    const std::size_t m = e_.tree.size();
    for (const QAttr &q : attrs) {
      if (q.cols.empty()) continue;  // constant export
      product *= dist(q, m);
      if (product >= i128(card_value)) return card_value;
    }
    return static_cast<i64>(product);
  }

  i64 standard_card() {
    // Same recursion with a4-style facing and base distincts.
    i64 acc = base_card(e_.view_of(0));
    for (std::size_t m = 1; m <= e_.tree.size(); ++m) {
      const AttrEq &cond = e_.tree[m - 1];
      i64 left_dist = base_dist(cond.left.alias, cond.left.cols);
      i64 right_dist = base_dist(cond.right.alias, cond.right.cols);
      i64 f = std::min(left_dist, right_dist);
      i64 right_card = base_card(e_.view_of(cond.right.alias));
      acc = (f == 0 || acc == 0 || right_card == 0)
                ? 0
                : ceil_ratio(i128(f) * acc * right_card,
                             i128(left_dist) * right_dist);
    }
    if (!e_.extra.empty()) {
      double factor = 1.0;
      for (const AttrEq &c : e_.extra) {
        i64 l = base_dist(c.left.alias, c.left.cols);
        i64 r = base_dist(c.right.alias, c.right.cols);
        if (l == 0) return 0;
        factor *= static_cast<double>(std::min(l, r)) / static_cast<double>(l);
      }
      acc = static_cast<i64>(
          std::ceil(static_cast<double>(acc) * factor - 1e-9));
    }
    return acc;
  }

 private:
  const BasicChain &e_;
  EstimationContext &ctx_;
  std::vector<i64> card_memo_;
  std::vector<i64> fv_memo_;
  std::map<std::pair<std::size_t, QAttr>, i64> dist_memo_;
};

BasicChain chain_of(const CQ &rule, const ViewCatalog &views,
                    EstimationContext &ctx) {
  ExprPtr expr = build_rule_expr(rule, views, ctx.groups);
  auto chain = to_basic_chain(expr);
  if (!chain)
    throw EstimateError(
        "rule is not estimable: disconnected join graph or non-basic "
        "shape in " + print_query(rule));
  if (!chain->filters.empty()) ctx.flag("constant-filter-ignored");
  return *chain;
}

std::vector<QAttr> export_tuples(const BasicChain &chain,
                                 EstimationContext &ctx) {
  std::vector<QAttr> out;
  for (const ProjItem &item : chain.exports) {
    if (item.tuples.size() > 1) ctx.flag("split-template-export");
    for (const QAttr &t : item.tuples) out.push_back(t);
  }
  return out;
}

}  // namespace

std::vector<QAttr> equivalent_attrs(const BasicChain &e, const QAttr &q) {
  auto canon = [](const QAttr &a) {
    return QAttr{a.alias, canonical_cols(a.cols)};
  };
  std::vector<QAttr> cls{canon(q)};
  auto member = [&](const QAttr &a) {
    QAttr c = canon(a);
    return std::find(cls.begin(), cls.end(), c) != cls.end();
  };
  bool grew = true;
  while (grew) {
    grew = false;
    auto consider = [&](const AttrEq &cond) {
      if (member(cond.left) && !member(cond.right)) {
        cls.push_back(canon(cond.right));
        grew = true;
      }
      if (member(cond.right) && !member(cond.left)) {
        cls.push_back(canon(cond.left));
        grew = true;
      }
    };
    for (const AttrEq &c : e.tree) consider(c);
    for (const AttrEq &c : e.extra) consider(c);
  }
  return cls;
}

std::optional<std::size_t> join_prefix(const BasicChain &e, const QAttr &q) {
  std::vector<QAttr> cls = equivalent_attrs(e, q);
  auto member = [&](const QAttr &a) {
    QAttr c{a.alias, canonical_cols(a.cols)};
    return std::find(cls.begin(), cls.end(), c) != cls.end();
  };
  for (std::size_t k = e.tree.size(); k >= 1; --k)
    if (member(e.tree[k - 1].right)) return k;
  return std::nullopt;
}

std::int64_t distinct_estimate(const BasicChain &e, const QAttr &q,
                               EstimationContext &ctx) {
  ChainEstimator est(e, ctx);
  return est.dist(q, e.tree.size());
}

std::int64_t facing_estimate(const BasicChain &e, std::size_t m,
                             EstimationContext &ctx) {
  if (m < 1 || m > e.tree.size())
    throw EstimateError("facing estimate needs a valid join position");
  ChainEstimator est(e, ctx);
  return est.fv(m);
}

std::int64_t cardinality(const BasicChain &e, EstimationContext &ctx) {
  ChainEstimator est(e, ctx);
  return est.full_card();
}

std::int64_t extended_cardinality(const BasicChain &e,
                                  EstimationContext &ctx) {
  ChainEstimator est(e, ctx);
  return est.extended_card();
}

std::int64_t projection_estimate(const BasicChain &e,
                                 const std::vector<QAttr> &attrs,
                                 EstimationContext &ctx) {
  ChainEstimator est(e, ctx);
  return est.projection(attrs, est.extended_card());
}

std::int64_t standard_estimate(const BasicChain &e, EstimationContext &ctx) {
  ChainEstimator est(e, ctx);
  return est.standard_card();
}

std::int64_t union_lower_bound(
    const std::vector<std::int64_t> &branches,
    const std::vector<std::vector<std::int64_t>> &pairwise,
    EstimationContext &ctx) {
  const std::size_t n = branches.size();
  if (n == 0) return 0;
  i64 max_branch = *std::max_element(branches.begin(), branches.end());
  i64 sum = 0;
  for (i64 b : branches) sum += b;
  if (n == 1) return branches[0];
  if (n > ctx.union_branch_limit) {
    ctx.flag("union-fallback-max");
    return max_branch;
  }

  auto pair_value = [&](std::size_t i, std::size_t j) {
    return pairwise[std::min(i, j)][std::max(i, j)];
  };

  double total = 0;
  for (std::size_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) members.push_back(i);
    i64 inter;
    if (members.size() == 1) {
      inter = branches[members[0]];
    } else if (members.size() == 2) {
      inter = pair_value(members[0], members[1]);
    } else {
      inter = std::numeric_limits<i64>::max();
      for (std::size_t a = 0; a < members.size(); ++a)
        for (std::size_t b = a + 1; b < members.size(); ++b)
          inter = std::min(inter, pair_value(members[a], members[b]));
    }
    total += (members.size() % 2 == 1) ? static_cast<double>(inter)
                                       : -static_cast<double>(inter);
  }
  i64 rounded = static_cast<i64>(std::llround(total));
  return std::clamp(rounded, max_branch, sum);
}

std::int64_t estimate_rule(const CQ &rule, const ViewCatalog &views,
                           EstimationContext &ctx) {
  BasicChain chain = chain_of(rule, views, ctx);
  ChainEstimator est(chain, ctx);
  i64 value = est.extended_card();
  if (chain.has_project && !chain.exports_cover_all) {
    std::vector<QAttr> tuples = export_tuples(chain, ctx);
    value = est.projection(tuples, value);
  }
  return value;
}

std::int64_t estimate_rule_std(const CQ &rule, const ViewCatalog &views,
                               EstimationContext &ctx) {
  BasicChain chain = chain_of(rule, views, ctx);
  ChainEstimator est(chain, ctx);
  i64 value = est.standard_card();
  if (chain.has_project && !chain.exports_cover_all) {
    // Baseline projection: product of base distincts, capped.
    i128 product = 1;
    for (const QAttr &q : export_tuples(chain, ctx)) {
      if (q.cols.empty()) continue;
      product *= ctx.stats->lookup_dist(chain.view_of(q.alias),
                                        canonical_cols(q.cols));
      if (product >= i128(value)) return value;
    }
    value = static_cast<i64>(product);
  }
  return value;
}

namespace {

/// Qualified shape of one export tuple inside a rule: the backing view and
/// canonical columns (alias identity dropped; groups compare across rules).
struct ExportShape {
  std::string view;
  std::vector<std::size_t> cols;
  std::size_t atom = 0;
  bool operator==(const ExportShape &o) const {
    return view == o.view && cols == o.cols && atom == o.atom;
  }
  bool operator<(const ExportShape &o) const {
    if (view != o.view) return view < o.view;
    if (cols != o.cols) return cols < o.cols;
    return atom < o.atom;
  }
};

}  // namespace

Estimate estimate_unfolding(const UnfoldedQuery &u, const ViewCatalog &views,
                            EstimationContext &ctx) {
  Estimate out;
  if (u.rules.empty()) return out;

  std::vector<i64> per_rule;
  std::vector<BasicChain> chains;
  for (const CQ &rule : u.rules) {
    chains.push_back(chain_of(rule, views, ctx));
    per_rule.push_back(estimate_rule(rule, views, ctx));
  }
  out.per_rule = per_rule;

  AnswerTemplateMatrix matrix = atm(u);
  i64 total = 0;
  auto emit_group = [&](const std::vector<std::size_t> &group, i64 value) {
    total += value;
    out.per_group.emplace_back(matrix.rows[group.front()], value);
  };
  for (const std::vector<std::size_t> &group : matrix.groups()) {
    if (group.size() == 1) {
      emit_group(group, per_rule[group.front()]);
      continue;
    }

    // Shared-view precondition from the equal-rows structure: some atom
    // position must carry one view across the whole group.
    const std::size_t atom_count = u.rules[group.front()].body.size();
    bool shared_atom = false;
    for (std::size_t p = 0; p < atom_count && !shared_atom; ++p) {
      bool same = true;
      for (std::size_t gi : group) {
        if (u.rules[gi].body.size() != atom_count ||
            u.rules[gi].body[p].predicate !=
                u.rules[group.front()].body[p].predicate) {
          same = false;
          break;
        }
      }
      shared_atom = same;
    }
    if (!shared_atom) {
      ctx.flag("atm-sum-upper-bound");
      i64 sum = 0;
      for (std::size_t gi : group) sum += per_rule[gi];
      emit_group(group, sum);
      continue;
    }

    // Export shapes per rule; positions whose backing view varies drive the
    // duplicate ratio.
    std::vector<std::vector<ExportShape>> shapes(group.size());
    bool shapes_ok = true;
    for (std::size_t g = 0; g < group.size() && shapes_ok; ++g) {
      const BasicChain &chain = chains[group[g]];
      for (const ProjItem &item : chain.exports) {
        if (item.tuples.size() > 1) {
          shapes_ok = false;
          break;
        }
        if (item.tuples.empty()) {  // constant export
          shapes[g].push_back(ExportShape{});
          continue;
        }
        const QAttr &t = item.tuples.front();
        shapes[g].push_back(ExportShape{chain.view_of(t.alias),
                                        canonical_cols(t.cols), t.alias});
      }
    }
    if (!shapes_ok) {
      ctx.flag("atm-sum-upper-bound");
      i64 sum = 0;
      for (std::size_t gi : group) sum += per_rule[gi];
      emit_group(group, sum);
      continue;
    }

    std::vector<std::size_t> varying;
    for (std::size_t pos = 0; pos < shapes.front().size(); ++pos) {
      for (std::size_t g = 1; g < group.size(); ++g)
        if (!(shapes[g][pos] == shapes[0][pos])) {
          varying.push_back(pos);
          break;
        }
    }

    i64 group_sum = 0;
    for (std::size_t gi : group) group_sum += per_rule[gi];

    if (varying.empty()) {
      // Identical export combinations across branches: union of identical
      // sets.
      ctx.flag("atm-group-dedup-max");
      i64 mx = 0;
      for (std::size_t gi : group) mx = std::max(mx, per_rule[gi]);
      emit_group(group, mx);
      continue;
    }

    ctx.flag("atm-group-ratio");
    // Distinct exported values per branch over the varying positions, then
    // branch dedup by identical view combinations (max first).
    std::map<std::vector<ExportShape>, i64> combos;
    std::vector<i64> branch_dist(group.size(), 1);
    for (std::size_t g = 0; g < group.size(); ++g) {
      ChainEstimator est(chains[group[g]], ctx);
      i128 d = 1;
      for (std::size_t pos : varying) {
        const QAttr &t = chains[group[g]].exports[pos].tuples.front();
        d *= est.dist(t, chains[group[g]].tree.size());
      }
      branch_dist[g] = static_cast<i64>(d);
      std::vector<ExportShape> key;
      for (std::size_t pos : varying) key.push_back(shapes[g][pos]);
      auto [it, inserted] = combos.emplace(key, branch_dist[g]);
      if (!inserted) it->second = std::max(it->second, branch_dist[g]);
    }

    std::vector<std::vector<ExportShape>> combo_keys;
    std::vector<i64> combo_dist;
    for (const auto &[key, d] : combos) {
      combo_keys.push_back(key);
      combo_dist.push_back(d);
    }

    std::vector<std::vector<i64>> pairwise(
        combo_dist.size(), std::vector<i64>(combo_dist.size(), 0));
    for (std::size_t i = 0; i < combo_keys.size(); ++i) {
      for (std::size_t j = i + 1; j < combo_keys.size(); ++j) {
        i128 p = 1;
        for (std::size_t v = 0; v < varying.size(); ++v) {
          const ExportShape &a = combo_keys[i][v];
          const ExportShape &b = combo_keys[j][v];
          p *= ctx.stats->lookup_facing(a.view, a.cols, b.view, b.cols);
        }
        i64 clamped = static_cast<i64>(
            std::min<i128>(p, std::min(combo_dist[i], combo_dist[j])));
        pairwise[i][j] = pairwise[j][i] = clamped;
      }
    }

    i64 united = union_lower_bound(combo_dist, pairwise, ctx);
    i64 denom = 0;
    for (i64 d : combo_dist) denom += d;
    double ratio = denom == 0
                       ? 1.0
                       : std::min(1.0, static_cast<double>(united) /
                                           static_cast<double>(denom));
    emit_group(group, static_cast<i64>(std::ceil(
                          static_cast<double>(group_sum) * ratio - 1e-9)));
  }

  out.value = total;
  out.flags.assign(ctx.flags.begin(), ctx.flags.end());
  return out;
}

Estimate estimate_unfolding_std(const UnfoldedQuery &u,
                                const ViewCatalog &views,
                                EstimationContext &ctx) {
  Estimate out;
  for (const CQ &rule : u.rules) {
    i64 v = estimate_rule_std(rule, views, ctx);
    out.per_rule.push_back(v);
    out.value += v;
  }
  out.flags.assign(ctx.flags.begin(), ctx.flags.end());
  return out;
}

}  // namespace obda
