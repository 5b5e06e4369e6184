#include "obda/bench.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"
#include "obda/planner.hpp"

namespace obda {

namespace {

/// Small deterministic PRNG (xorshift*), stable across platforms.
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed ? seed : 0x9e3779b97f4a7c15ull) {}
  std::uint64_t next() {
    state ^= state >> 12;
    state ^= state << 25;
    state ^= state >> 27;
    return state * 0x2545f4914f6cdd1dull;
  }
  std::uint64_t below(std::uint64_t n) { return next() % n; }
};

std::vector<std::int64_t> permutation(std::int64_t n, Rng &rng) {
  std::vector<std::int64_t> p(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
  for (std::size_t i = p.size(); i-- > 1;)
    std::swap(p[i], p[rng.below(i + 1)]);
  return p;
}

std::string encode(std::int64_t v) { return "u" + std::to_string(v); }

}  // namespace

DataInstance gen_wisconsin(std::int64_t rows, std::size_t tables,
                           std::uint64_t seed) {
  if (rows < 100)
    throw SchemaError("wisconsin generator needs at least 100 rows");
  DataInstance d;
  for (std::size_t t = 0; t < tables; ++t) {
    Rng rng1(seed * 1000003 + t * 2 + 1);
    Rng rng2(seed * 1000033 + t * 2 + 2);
    auto u1 = permutation(rows, rng1);
    auto u2 = permutation(rows, rng2);

    TableDef def;
    def.name = "t" + std::to_string(t);
    def.columns = {{"unique1", ColumnDef::Type::Int},
                   {"unique2", ColumnDef::Type::Int},
                   {"onepercent", ColumnDef::Type::Int},
                   {"evenOnePercent", ColumnDef::Type::Int},
                   {"stringu1", ColumnDef::Type::Str},
                   {"stringu2", ColumnDef::Type::Str}};
    std::vector<std::vector<Value>> data;
    for (std::int64_t i = 0; i < rows; ++i) {
      auto idx = static_cast<std::size_t>(i);
      data.push_back({u1[idx], u2[idx], u1[idx] % 100, 2 * (u1[idx] % 50),
                      encode(u1[idx]), encode(u2[idx])});
    }
    d.add_table(std::move(def), std::move(data));
  }
  return d;
}

namespace {

void add_property(MappingSet &m, const std::string &prop, int offset,
                  int mappings, int redundant) {
  const int distinct = mappings - redundant;
  for (int k = 0; k < mappings; ++k) {
    // Redundant assertions reuse the first assertion's table and window
    // under a fresh view name, so they add no individuals.
    const int copy = k < distinct ? k : 0;
    ViewDef def;
    def.name = "V_" + prop + "_" + std::to_string(k);
    def.attrs = {"u2", "eop", "s1", "s2"};
    ViewRule rule;
    rule.head = {Term::var("u2"), Term::var("eop"), Term::var("s1"),
                 Term::var("s2")};
    rule.body.push_back(Atom{
        "t" + std::to_string(copy),
        {Term::var("u1"), Term::var("u2"), Term::var("op"), Term::var("eop"),
         Term::var("s1"), Term::var("s2")}});
    rule.filters.push_back(
        {"op", CmpOp::Ge, Value(static_cast<std::int64_t>(offset))});
    rule.filters.push_back(
        {"op", CmpOp::Lt, Value(static_cast<std::int64_t>(offset + 20))});
    def.rules.push_back(std::move(rule));

    MappingAssertion a;
    a.target.predicate = prop;
    a.target.args = {
        Term::fn("num", {Term::var("u2")}),
        Term::fn("nm", {Term::var("eop"), Term::var("s1"), Term::var("s2")})};
    a.source_view = def.name;
    a.source_vars = def.attrs;
    m.views.add(std::move(def));
    m.assertions.push_back(std::move(a));
  }
}

}  // namespace

GridCell gen_grid(const GridPoint &p) {
  if (p.m < 1 || p.r < 0 || p.r >= p.m || (p.atoms != 3 && p.atoms != 4) ||
      (p.j != 5 && p.j != 10 && p.j != 15 && p.j != 20))
    throw SchemaError("invalid grid point");

  GridCell cell;
  cell.query_id = "J" + std::to_string(p.j) + "M" + std::to_string(p.m) +
                  "R" + std::to_string(p.r) + "A" + std::to_string(p.atoms);
  const std::string mr = "M" + std::to_string(p.m) + "R" + std::to_string(p.r);
  const std::string jmr = "J" + std::to_string(p.j) + mr;
  const int joined_offset = 20 - p.j;

  std::vector<std::string> props;
  props.push_back(mr + "Prop1");
  for (int i = 2; i <= p.atoms; ++i)
    props.push_back(jmr + "Prop" + std::to_string(i));

  add_property(cell.mappings, props[0], 0, p.m, p.r);
  for (std::size_t i = 1; i < props.size(); ++i)
    add_property(cell.mappings, props[i], joined_offset, p.m, p.r);

  cell.query.name = "q";
  cell.query.head.push_back(Term::var("x"));
  for (int i = 1; i <= p.atoms; ++i)
    cell.query.head.push_back(Term::var("y" + std::to_string(i)));
  for (int i = 0; i < p.atoms; ++i)
    cell.query.body.push_back(
        Atom{props[static_cast<std::size_t>(i)],
             {Term::var("x"), Term::var("y" + std::to_string(i + 1))}});

  if (p.atoms == 3) {
    cell.jucq_cover.fragments = {{0, 1}, {2}};
  } else {
    cell.jucq_cover.fragments = {{0, 1}, {2}, {3}};
  }
  return cell;
}

Surrogate gen_npd_surrogate(std::size_t properties, std::size_t per_property) {
  Surrogate s;
  for (std::size_t i = 1; i <= properties; ++i) {
    const std::string prop = "Q" + std::to_string(i);
    for (std::size_t k = 0; k < per_property; ++k) {
      ViewDef def;
      def.name = "N_" + prop + "_" + std::to_string(k);
      def.attrs = {"a", "b"};
      ViewRule rule;
      rule.head = {Term::var("a"), Term::var("b")};
      rule.body.push_back(
          Atom{"npd0", {Term::var("a"), Term::var("b"), Term::var("c")}});
      rule.filters.push_back(
          {"c", CmpOp::Eq, Value(static_cast<std::int64_t>(k))});
      def.rules.push_back(std::move(rule));

      MappingAssertion a;
      a.target.predicate = prop;
      a.target.args = {
          Term::fn("sub", {Term::var("a")}),
          Term::fn("obj" + std::to_string(i) + "_" + std::to_string(k),
                   {Term::var("b")})};
      a.source_view = def.name;
      a.source_vars = def.attrs;
      s.mappings.views.add(std::move(def));
      s.mappings.assertions.push_back(std::move(a));
    }
  }
  s.query.name = "q";
  s.query.head.push_back(Term::var("x"));
  for (std::size_t i = 1; i <= properties; ++i)
    s.query.head.push_back(Term::var("y" + std::to_string(i)));
  for (std::size_t i = 1; i <= properties; ++i)
    s.query.body.push_back(Atom{
        "Q" + std::to_string(i),
        {Term::var("x"), Term::var("y" + std::to_string(i))}});
  std::vector<std::size_t> first, second;
  for (std::size_t i = 0; i < properties; ++i)
    (i < (properties + 1) / 2 ? first : second).push_back(i);
  s.cover.fragments = {first, second};
  return s;
}

BenchConfig BenchConfig::from_json(const std::string &text) {
  nlohmann::json j = nlohmann::json::parse(text);
  BenchConfig cfg;
  cfg.rows = j.value("rows", cfg.rows);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.count("js")) cfg.js = j.at("js").get<std::vector<int>>();
  if (j.count("ms")) cfg.ms = j.at("ms").get<std::vector<int>>();
  if (j.count("atoms")) cfg.atoms = j.at("atoms").get<std::vector<int>>();
  cfg.max_fragments = j.value("max_fragments", cfg.max_fragments);
  if (j.count("constants"))
    cfg.consts = CostConstants::from_json(j.at("constants").dump());
  return cfg;
}

std::string BenchReport::to_csv() const {
  auto quoted = [](const std::string &s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  };
  std::ostringstream out;
  out << "j,m,r,atoms,query_id,candidate,est_card,true_card,est_cost,"
         "oracle_cost,chosen,g\n";
  for (const BenchRow &r : rows) {
    out << r.point.j << "," << r.point.m << "," << r.point.r << ","
        << r.point.atoms << "," << r.query_id << ",";
    out << quoted(r.error.empty() ? r.candidate : "error:" + r.error) << ",";
    out << r.est_card << "," << r.true_card << "," << r.est_cost << ","
        << r.oracle_cost << "," << (r.chosen ? 1 : 0) << "," << r.gain
        << "\n";
  }
  return out.str();
}

BenchReport run_suite(const BenchConfig &cfg) {
  BenchReport report;
  int max_m = 1;
  for (int m : cfg.ms) max_m = std::max(max_m, m);
  DataInstance data =
      gen_wisconsin(cfg.rows, static_cast<std::size_t>(max_m), cfg.seed);
  const TBox empty_tbox;

  for (int atoms : cfg.atoms) {
    for (int j : cfg.js) {
      for (int m : cfg.ms) {
        for (int r = 0; r < m; ++r) {
          GridPoint point{j, m, r, atoms};
          GridCell cell = gen_grid(point);
          try {
            StatsCatalog stats = collect(cell.mappings, empty_tbox, data);
            auto plans = plan(cell.query, cell.mappings, empty_tbox, stats,
                              cfg.consts, cfg.max_fragments);
            std::int64_t truth = static_cast<std::int64_t>(
                certain_answers(UCQ{{cell.query}}, empty_tbox, cell.mappings,
                                data)
                    .size());

            double ucq_cost = 0, jucq_cost = 0;
            std::vector<double> ocosts(plans.size(), 0);
            for (std::size_t i = 0; i < plans.size(); ++i) {
              OpCounters counters;
              eval_plan(plans[i], data, counters);
              ocosts[i] = oracle_cost(counters, cfg.consts);
              if (plans[i].cover.is_singleton()) ucq_cost = ocosts[i];
              if (plans[i].cover.key() == cell.jucq_cover.key())
                jucq_cost = ocosts[i];
            }
            double gain = ucq_cost > 0 ? 1.0 - jucq_cost / ucq_cost : 0.0;

            for (std::size_t i = 0; i < plans.size(); ++i) {
              BenchRow row;
              row.point = point;
              row.query_id = cell.query_id;
              row.candidate =
                  plans[i].cover.key() + ":" +
                  (plans[i].kind == PlanChoice::Kind::UCQ ? "UCQ" : "UJUCQ");
              row.est_card = plans[i].cardinality;
              row.true_card = truth;
              row.est_cost = plans[i].cost.total();
              row.oracle_cost = ocosts[i];
              row.chosen = i == 0;
              row.gain = gain;
              report.rows.push_back(std::move(row));
            }
          } catch (const Error &e) {
            BenchRow row;
            row.point = point;
            row.query_id = cell.query_id;
            row.error = e.what();
            report.rows.push_back(std::move(row));
          }
        }
      }
    }
  }
  return report;
}

}  // namespace obda
