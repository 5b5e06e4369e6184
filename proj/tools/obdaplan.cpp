// Command-line front end: statistics collection, cardinality estimation,
// cost-based translation planning, exact evaluation, calibration, and the
// synthetic benchmark suite.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "obda/bench.hpp"
#include "obda/cost.hpp"
#include "obda/estimator.hpp"
#include "obda/oracle.hpp"
#include "obda/parse.hpp"
#include "obda/planner.hpp"
#include "obda/stats.hpp"

namespace {

std::string slurp(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw obda::Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string &path, const std::string &content) {
  std::ofstream out(path);
  if (!out) throw obda::Error("cannot write " + path);
  out << content;
}

obda::TBox load_tbox(const std::string &path) {
  if (path.empty()) return {};
  return obda::parse_tbox(slurp(path));
}

obda::CostConstants load_consts(const std::string &path) {
  if (path.empty()) return {};
  return obda::CostConstants::from_json(slurp(path));
}

int run_collect(const std::string &mappings, const std::string &tbox,
                const std::string &data, const std::string &out) {
  obda::MappingSet m = obda::parse_mappings(slurp(mappings));
  obda::DataInstance d = obda::load_instance(data);
  obda::StatsCatalog stats = obda::collect(m, load_tbox(tbox), d);
  std::string json = stats.to_json();
  if (out.empty()) std::cout << json << "\n";
  else spit(out, json + "\n");
  return 0;
}

int run_estimate(const std::string &query, const std::string &mappings,
                 const std::string &tbox, const std::string &stats_path,
                 const std::string &cover_text, bool baseline,
                 const std::string &out) {
  obda::UCQ q = obda::parse_query(slurp(query));
  obda::MappingSet m = obda::parse_mappings(slurp(mappings));
  obda::StatsCatalog stats = obda::StatsCatalog::from_json(slurp(stats_path));
  obda::MappingSet m_w = obda::wrap(obda::saturate(m, load_tbox(tbox)));

  nlohmann::ordered_json report;
  report["query"] = obda::print_query(q);
  obda::TemplateGroups groups = obda::template_groups(m_w);

  auto describe = [&](const obda::UnfoldedQuery &u) {
    obda::EstimationContext ctx(stats, groups);
    obda::Estimate est = obda::estimate_unfolding(u, m_w.views, ctx);
    nlohmann::ordered_json j;
    nlohmann::ordered_json rules = nlohmann::json::array();
    for (std::size_t i = 0; i < u.rules.size(); ++i)
      rules.push_back({{"rule", obda::print_query(u.rules[i])},
                       {"estimate", est.per_rule[i]}});
    j["rules"] = rules;
    j["total"] = est.value;
    j["flags"] = est.flags;
    if (baseline) {
      obda::EstimationContext bctx(stats);
      j["baseline_total"] =
          obda::estimate_unfolding_std(u, m_w.views, bctx).value;
    }
    return j;
  };

  report["unfolding"] = describe(obda::unfold_ucq(q, m_w));

  if (!cover_text.empty()) {
    if (q.disjuncts.size() != 1)
      throw obda::PlanError("covers apply to a single conjunctive query");
    obda::Cover cover = obda::parse_cover(cover_text);
    nlohmann::ordered_json frags = nlohmann::json::array();
    for (std::size_t f = 0; f < cover.fragments.size(); ++f) {
      obda::CQ frag = obda::make_fragment_query(q.cq(), f, cover);
      nlohmann::ordered_json jf = describe(obda::unfold_ucq(frag, m_w));
      jf["fragment"] = obda::print_query(frag);
      frags.push_back(std::move(jf));
    }
    report["cover"] = cover_text;
    report["fragments"] = frags;
  }

  std::string text = report.dump(2);
  if (out.empty()) std::cout << text << "\n";
  else spit(out, text + "\n");
  return 0;
}

int run_plan(const std::string &query, const std::string &mappings,
             const std::string &tbox, const std::string &stats_path,
             const std::string &consts_path, std::size_t max_fragments,
             const std::string &dialect, const std::string &emit_dir,
             const std::string &report_path) {
  obda::UCQ q = obda::parse_query(slurp(query));
  if (q.disjuncts.size() != 1)
    throw obda::PlanError("plan expects a single conjunctive query");
  obda::MappingSet m = obda::parse_mappings(slurp(mappings));
  obda::StatsCatalog stats = obda::StatsCatalog::from_json(slurp(stats_path));
  obda::CostConstants consts = load_consts(consts_path);

  auto choices = obda::plan(q.cq(), m, load_tbox(tbox), stats, consts,
                            max_fragments, dialect);

  if (!emit_dir.empty()) {
    std::filesystem::create_directories(emit_dir);
    for (std::size_t i = 0; i < choices.size(); ++i) {
      std::string name = "candidate_" + std::to_string(i) + "_" +
                         (choices[i].kind == obda::PlanChoice::Kind::UCQ
                              ? "ucq"
                              : "ujucq") +
                         ".sql";
      spit((std::filesystem::path(emit_dir) / name).string(),
           choices[i].sql);
    }
  }

  std::string report = obda::plan_report_json(q.cq(), choices, consts);
  if (report_path.empty()) std::cout << report << "\n";
  else spit(report_path, report + "\n");

  std::cerr << "plan: " << choices.size() << " candidates; best cover "
            << (choices.empty() ? "-" : choices.front().cover.key())
            << "\n";
  return 0;
}

int run_calibrate(const std::string &samples_path, const std::string &out) {
  std::ifstream in(samples_path);
  if (!in) throw obda::Error("cannot open " + samples_path);
  std::vector<obda::CalibrationSample> samples;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    obda::CalibrationSample s;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &s.scanned,
                    &s.probes, &s.materialized, &s.dedup, &s.observed) != 5)
      throw obda::Error("bad sample line: " + line);
    samples.push_back(s);
  }
  obda::CalibrationResult result = obda::calibrate(samples);
  if (result.used_defaults)
    std::cerr << "calibrate: " << result.note << "\n";
  std::string json = result.constants.to_json();
  if (out.empty()) std::cout << json << "\n";
  else spit(out, json + "\n");
  return 0;
}

int run_eval(const std::string &plan_path, const std::string &data,
             std::size_t candidate) {
  obda::LoadedPlan loaded = obda::plan_from_json(slurp(plan_path));
  if (candidate >= loaded.choices.size())
    throw obda::PlanError("candidate index out of range");
  obda::DataInstance d = obda::load_instance(data);
  obda::OpCounters counters;
  obda::AnswerSet answers =
      obda::eval_plan(loaded.choices[candidate], d, counters);

  nlohmann::ordered_json j;
  j["candidate"] = candidate;
  j["answers"] = answers.size();
  j["counters"] = {{"tuples_scanned", counters.tuples_scanned},
                   {"join_probes", counters.join_probes},
                   {"tuples_materialized", counters.tuples_materialized},
                   {"dedup_comparisons", counters.dedup_comparisons}};
  j["oracle_cost"] = obda::oracle_cost(counters, loaded.consts);
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Cost-based translation planner over mapped relational data"};
  app.require_subcommand(1);

  std::string mappings, tbox, data, out, query, stats_path, consts_path;
  std::string cover_text, dialect = "ansi", emit_dir, report_path;
  std::string plan_path, samples_path, config_path;
  std::size_t max_fragments = 3, candidate = 0;
  bool baseline = false;
  std::int64_t rows = 10000;
  std::uint64_t seed = 42;
  std::size_t tables = 6;

  auto *collect_cmd =
      app.add_subcommand("collect-stats", "Measure the statistic tables");
  collect_cmd->add_option("--mappings", mappings)->required();
  collect_cmd->add_option("--tbox", tbox);
  collect_cmd->add_option("--data", data)->required();
  collect_cmd->add_option("--out", out);

  auto *estimate_cmd =
      app.add_subcommand("estimate", "Estimate unfolding cardinalities");
  estimate_cmd->add_option("--query", query)->required();
  estimate_cmd->add_option("--mappings", mappings)->required();
  estimate_cmd->add_option("--tbox", tbox);
  estimate_cmd->add_option("--stats", stats_path)->required();
  estimate_cmd->add_option("--cover", cover_text);
  estimate_cmd->add_flag("--baseline", baseline);
  estimate_cmd->add_option("--out", out);

  auto *plan_cmd = app.add_subcommand("plan", "Rank candidate translations");
  plan_cmd->add_option("--query", query)->required();
  plan_cmd->add_option("--mappings", mappings)->required();
  plan_cmd->add_option("--tbox", tbox);
  plan_cmd->add_option("--stats", stats_path)->required();
  plan_cmd->add_option("--consts", consts_path);
  plan_cmd->add_option("--max-fragments", max_fragments);
  plan_cmd->add_option("--dialect", dialect);
  plan_cmd->add_option("--emit-sql", emit_dir);
  plan_cmd->add_option("--report", report_path);

  auto *calibrate_cmd =
      app.add_subcommand("calibrate", "Fit cost constants to samples");
  calibrate_cmd->add_option("--samples", samples_path)->required();
  calibrate_cmd->add_option("--out", out);

  auto *eval_cmd =
      app.add_subcommand("eval", "Evaluate a planned translation exactly");
  eval_cmd->add_option("--plan", plan_path)->required();
  eval_cmd->add_option("--data", data)->required();
  eval_cmd->add_option("--candidate", candidate);

  auto *bench_cmd = app.add_subcommand("bench", "Synthetic benchmark suite");
  bench_cmd->require_subcommand(1);
  auto *bench_gen = bench_cmd->add_subcommand("gen", "Generate tables");
  bench_gen->add_option("--rows", rows);
  bench_gen->add_option("--seed", seed);
  bench_gen->add_option("--tables", tables);
  bench_gen->add_option("--out", out)->required();
  auto *bench_run = bench_cmd->add_subcommand("run", "Run the grid");
  bench_run->add_option("--config", config_path);
  bench_run->add_option("--out", out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (collect_cmd->parsed())
      return run_collect(mappings, tbox, data, out);
    if (estimate_cmd->parsed())
      return run_estimate(query, mappings, tbox, stats_path, cover_text,
                          baseline, out);
    if (plan_cmd->parsed())
      return run_plan(query, mappings, tbox, stats_path, consts_path,
                      max_fragments, dialect, emit_dir, report_path);
    if (calibrate_cmd->parsed()) return run_calibrate(samples_path, out);
    if (eval_cmd->parsed()) return run_eval(plan_path, data, candidate);
    if (bench_cmd->parsed()) {
      if (bench_gen->parsed()) {
        obda::save_instance(obda::gen_wisconsin(rows, tables, seed), out);
        std::cerr << "bench gen: wrote " << tables << " tables to " << out
                  << "\n";
        return 0;
      }
      obda::BenchConfig cfg;
      if (!config_path.empty())
        cfg = obda::BenchConfig::from_json(slurp(config_path));
      obda::BenchReport report = obda::run_suite(cfg);
      spit(out, report.to_csv());
      std::cerr << "bench run: " << report.rows.size() << " rows -> " << out
                << "\n";
      return 0;
    }
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
