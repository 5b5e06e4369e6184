#include "obda/stats.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"
#include "obda/oracle.hpp"

namespace obda {

std::vector<std::size_t> canonical_cols(std::vector<std::size_t> cols) {
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  return cols;
}

FacingKey canonical_facing_key(const std::string &view_a,
                               const std::vector<std::size_t> &cols_a,
                               const std::string &view_b,
                               const std::vector<std::size_t> &cols_b) {
  if (cols_a.size() != cols_b.size())
    throw SchemaError("facing key requires aligned column tuples");
  auto orient = [](const std::string &lv,
                   const std::vector<std::size_t> &lc, const std::string &rv,
                   const std::vector<std::size_t> &rc) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < lc.size(); ++i)
      pairs.emplace_back(lc[i], rc[i]);
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    FacingKey key;
    key.first.view = lv;
    key.second.view = rv;
    for (const auto &[l, r] : pairs) {
      key.first.cols.push_back(l);
      key.second.cols.push_back(r);
    }
    return key;
  };
  FacingKey ab = orient(view_a, cols_a, view_b, cols_b);
  FacingKey ba = orient(view_b, cols_b, view_a, cols_a);
  return std::min(ab, ba);
}

namespace {

std::string render_stat_key(const StatKey &k,
                            const std::map<std::string,
                                           std::vector<std::string>> &attrs) {
  auto it = attrs.find(k.view);
  std::string s = k.view + "[";
  for (std::size_t i = 0; i < k.cols.size(); ++i) {
    if (i) s += ",";
    if (it != attrs.end() && k.cols[i] < it->second.size())
      s += it->second[k.cols[i]];
    else
      s += "$" + std::to_string(k.cols[i]);
  }
  return s + "]";
}

}  // namespace

std::int64_t StatsCatalog::lookup_view_card(const std::string &view) const {
  auto it = view_card.find(view);
  if (it == view_card.end()) throw MissingStatError("card(" + view + ")");
  return it->second;
}

std::int64_t StatsCatalog::lookup_dist(
    const std::string &view, const std::vector<std::size_t> &cols) const {
  StatKey key{view, canonical_cols(cols)};
  auto it = dist_proj.find(key);
  if (it == dist_proj.end())
    throw MissingStatError("dist(" + render_stat_key(key, attrs) + ")");
  return it->second;
}

std::int64_t StatsCatalog::lookup_facing(
    const std::string &view_a, const std::vector<std::size_t> &cols_a,
    const std::string &view_b, const std::vector<std::size_t> &cols_b) const {
  // Identical projections intersect with themselves.
  if (view_a == view_b) {
    bool identity = cols_a.size() == cols_b.size();
    for (std::size_t i = 0; identity && i < cols_a.size(); ++i)
      identity = cols_a[i] == cols_b[i];
    if (identity) return lookup_dist(view_a, cols_a);
  }
  FacingKey key = canonical_facing_key(view_a, cols_a, view_b, cols_b);
  auto it = facing.find(key);
  if (it == facing.end())
    throw MissingStatError("facing(" + render_stat_key(key.first, attrs) +
                           "|" + render_stat_key(key.second, attrs) + ")");
  return it->second;
}

void StatsCatalog::check_consistent() const {
  for (const auto &[key, v] : dist_proj) {
    auto it = view_card.find(key.view);
    if (it != view_card.end() && v > it->second)
      throw SchemaError("dist exceeds cardinality for " +
                        render_stat_key(key, attrs));
  }
  for (const auto &[key, v] : facing) {
    auto a = dist_proj.find(key.first);
    auto b = dist_proj.find(key.second);
    if (a != dist_proj.end() && v > a->second)
      throw SchemaError("facing exceeds dist for " +
                        render_stat_key(key.first, attrs));
    if (b != dist_proj.end() && v > b->second)
      throw SchemaError("facing exceeds dist for " +
                        render_stat_key(key.second, attrs));
  }
}

std::string StatsCatalog::to_json() const {
  nlohmann::ordered_json j;
  nlohmann::ordered_json jattrs;
  for (const auto &[view, names] : attrs) jattrs[view] = names;
  nlohmann::ordered_json jcard;
  for (const auto &[view, v] : view_card) jcard[view] = v;
  nlohmann::ordered_json jdist;
  for (const auto &[key, v] : dist_proj)
    jdist[render_stat_key(key, attrs)] = v;
  nlohmann::ordered_json jfacing;
  for (const auto &[key, v] : facing)
    jfacing[render_stat_key(key.first, attrs) + "|" +
            render_stat_key(key.second, attrs)] = v;
  j["view_card"] = jcard;
  j["dist_proj"] = jdist;
  j["facing"] = jfacing;
  j["attrs"] = jattrs;
  return j.dump(2);
}

namespace {

StatKey parse_stat_key(const std::string &text,
                       const std::map<std::string,
                                      std::vector<std::string>> &attrs) {
  auto open = text.find('[');
  if (open == std::string::npos || text.back() != ']')
    throw SchemaError("bad statistic key: " + text);
  StatKey key;
  key.view = text.substr(0, open);
  auto it = attrs.find(key.view);
  if (it == attrs.end()) throw SchemaError("unknown view in key: " + text);
  std::string inner = text.substr(open + 1, text.size() - open - 2);
  std::string name;
  auto flush = [&]() {
    if (name.empty()) return;
    auto pos = std::find(it->second.begin(), it->second.end(), name);
    if (pos == it->second.end())
      throw SchemaError("unknown attribute '" + name + "' in key " + text);
    key.cols.push_back(
        static_cast<std::size_t>(pos - it->second.begin()));
    name.clear();
  };
  for (char c : inner) {
    if (c == ',') flush();
    else name += c;
  }
  flush();
  return key;
}

}  // namespace

StatsCatalog StatsCatalog::from_json(const std::string &text) {
  nlohmann::json j = nlohmann::json::parse(text);
  StatsCatalog cat;
  for (const auto &[view, names] : j.at("attrs").items())
    cat.attrs[view] = names.get<std::vector<std::string>>();
  for (const auto &[view, v] : j.at("view_card").items())
    cat.view_card[view] = v.get<std::int64_t>();
  for (const auto &[key, v] : j.at("dist_proj").items())
    cat.dist_proj[parse_stat_key(key, cat.attrs)] = v.get<std::int64_t>();
  for (const auto &[key, v] : j.at("facing").items()) {
    auto bar = key.find('|');
    if (bar == std::string::npos)
      throw SchemaError("bad facing key: " + key);
    FacingKey fk{parse_stat_key(key.substr(0, bar), cat.attrs),
                 parse_stat_key(key.substr(bar + 1), cat.attrs)};
    cat.facing[fk] = v.get<std::int64_t>();
  }
  cat.check_consistent();
  return cat;
}

std::string CostConstants::to_json() const {
  nlohmann::ordered_json j;
  j["c_t"] = c_t;
  j["c_j"] = c_j;
  j["c_m"] = c_m;
  j["c_u"] = c_u;
  return j.dump(2);
}

CostConstants CostConstants::from_json(const std::string &text) {
  nlohmann::json j = nlohmann::json::parse(text);
  CostConstants k;
  k.c_t = j.at("c_t").get<double>();
  k.c_j = j.at("c_j").get<double>();
  k.c_m = j.at("c_m").get<double>();
  k.c_u = j.at("c_u").get<double>();
  if (k.c_t < 0 || k.c_j < 0 || k.c_m < 0 || k.c_u < 0)
    throw SchemaError("cost constants must be nonnegative");
  return k;
}

MappingSet prepare_stats_mappings(const MappingSet &m, const TBox &t) {
  MappingSet sat = saturate(m, t);
  MappingSet wrapped = wrap(sat);
  MappingSet merged;
  merged.views = wrapped.views;  // superset of sat's catalog
  merged.assertions = sat.assertions;
  for (const MappingAssertion &a : wrapped.assertions)
    merged.assertions.push_back(a);
  return merged;
}

namespace {

/// Template occurrences drive the S2/S3 key enumeration: one record per
/// functional target argument whose arguments are all variables.
struct TemplateOcc {
  std::string view;
  std::string symbol;
  std::vector<std::size_t> cols;  // template-argument order
};

std::vector<std::size_t> template_cols(const MappingAssertion &a,
                                       const Term &t, bool &all_vars) {
  std::vector<std::size_t> cols;
  all_vars = true;
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
  return cols;
}

}  // namespace

StatsCatalog collect(const MappingSet &m, const TBox &t,
                     const DataInstance &d) {
  const MappingSet prepared = prepare_stats_mappings(m, t);
  StatsCatalog cat;
  OpCounters scratch;

  // Evaluate each referenced source view once; base tables come along for
  // the cost model's scan terms.
  std::map<std::string, std::vector<std::vector<Value>>> rels;
  for (const MappingAssertion &a : prepared.assertions) {
    if (rels.count(a.source_view)) continue;
    rels[a.source_view] =
        eval_view(a.source_view, prepared.views, d, scratch);
    cat.view_card[a.source_view] =
        static_cast<std::int64_t>(rels[a.source_view].size());
    if (prepared.views.contains(a.source_view))
      cat.attrs[a.source_view] = prepared.views.at(a.source_view).attrs;
  }
  for (const auto &[name, def] : d.schema) {
    cat.view_card[name] = static_cast<std::int64_t>(d.rows_of(name).size());
    std::vector<std::string> names;
    for (const ColumnDef &c : def.columns) names.push_back(c.name);
    auto [it, inserted] = cat.attrs.emplace(name, std::move(names));
    (void)it;
    if (!inserted && prepared.views.contains(name))
      throw SchemaError("view '" + name + "' shadows a base table");
  }

  // Sorted distinct projections, memoized: distinct counts read the size,
  // facing counts intersect two of them with a linear walk.
  std::map<StatKey, std::vector<std::vector<Value>>> projections;
  auto project_sorted =
      [&](const std::string &view, const std::vector<std::size_t> &cols)
      -> const std::vector<std::vector<Value>> & {
    StatKey key{view, cols};
    auto it = projections.find(key);
    if (it != projections.end()) return it->second;
    auto rit = rels.find(view);
    const auto &rows = rit != rels.end() ? rit->second : d.rows_of(view);
    std::vector<std::vector<Value>> proj;
    proj.reserve(rows.size());
    for (const auto &row : rows) {
      std::vector<Value> p;
      p.reserve(cols.size());
      for (std::size_t c : cols) p.push_back(row[c]);
      proj.push_back(std::move(p));
    }
    std::sort(proj.begin(), proj.end());
    proj.erase(std::unique(proj.begin(), proj.end()), proj.end());
    return projections.emplace(std::move(key), std::move(proj))
        .first->second;
  };
  auto project_distinct = [&](const std::string &view,
                              const std::vector<std::size_t> &cols) {
    return static_cast<std::int64_t>(project_sorted(view, cols).size());
  };

  std::vector<TemplateOcc> occs;
  for (const MappingAssertion &a : prepared.assertions) {
    for (const Term &arg : a.target.args) {
      if (!arg.is_fn()) continue;
      bool all_vars = false;
      std::vector<std::size_t> cols = template_cols(a, arg, all_vars);
      if (!cols.empty()) {
        StatKey key{a.source_view, canonical_cols(cols)};
        if (!cat.dist_proj.count(key))
          cat.dist_proj[key] = project_distinct(key.view, key.cols);
      }
      if (all_vars && !cols.empty())
        occs.push_back(TemplateOcc{a.source_view, arg.name, cols});
    }
  }

  for (std::size_t i = 0; i < occs.size(); ++i) {
    for (std::size_t k = i + 1; k < occs.size(); ++k) {
      const TemplateOcc &a = occs[i], &b = occs[k];
      if (a.symbol != b.symbol || a.cols.size() != b.cols.size()) continue;
      FacingKey key = canonical_facing_key(a.view, a.cols, b.view, b.cols);
      if (key.first == key.second) continue;
      if (cat.facing.count(key)) continue;

      const auto &left = project_sorted(key.first.view, key.first.cols);
      const auto &right = project_sorted(key.second.view, key.second.cols);
      std::int64_t common = 0;
      std::size_t li = 0, ri = 0;
      while (li < left.size() && ri < right.size()) {
        if (left[li] < right[ri]) ++li;
        else if (right[ri] < left[li]) ++ri;
        else {
          ++common;
          ++li;
          ++ri;
        }
      }
      cat.facing[key] = common;
    }
  }

  cat.check_consistent();
  return cat;
}

}  // namespace obda
