#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "epr/epr.hpp"
#include "json.hpp"

namespace {

std::vector<int> parse_route(const std::string& text, bool allow_explore) {
  std::vector<int> route;
  std::stringstream stream(text);
  std::string token;
  while (std::getline(stream, token, ',')) {
    if (allow_explore && (token == "X" || token == "x")) {
      route.push_back(epr::kExplore);
      continue;
    }
    std::size_t consumed = 0;
    int value = 0;
    try {
      value = std::stoi(token, &consumed);
    } catch (const std::exception&) {
      consumed = 0;
    }
    if (consumed != token.size() || token.empty()) {
      throw epr::usage_error("unrecognized route token '" + token + "'");
    }
    route.push_back(value);
  }
  if (route.empty()) throw epr::usage_error("route must list at least one frame");
  return route;
}

void require_probability(double p, const char* flag) {
  if (!(p > 0.0 && p < 1.0)) {
    throw epr::usage_error(std::string(flag) + " must lie strictly between 0 and 1");
  }
}

struct SynthArgs {
  int places = 0;
  int dim = 0;
  std::string db_route;
  std::string query_route;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string out_prefix;
};

void cmd_synth(const SynthArgs& args) {
  epr::SyntheticSpec spec;
  spec.num_places = args.places;
  spec.dim = args.dim;
  spec.db_route = parse_route(args.db_route, false);
  spec.query_route = parse_route(args.query_route, true);
  spec.condition_noise_sigma = args.noise;
  spec.rng_seed = args.seed;

  const epr::SyntheticDataset data = epr::generate_synthetic(spec);
  epr::save_descriptors(data.db, args.out_prefix + "_db.eprd");
  epr::save_descriptors(data.query, args.out_prefix + "_q.eprd");
  epr::save_ground_truth(data.gt, args.out_prefix + "_gt.csv");
  std::printf("wrote %s_db.eprd (%d x %d), %s_q.eprd (%d x %d), %s_gt.csv\n",
              args.out_prefix.c_str(), data.db.count, data.db.dim, args.out_prefix.c_str(),
              data.query.count, data.query.dim, args.out_prefix.c_str());
}

struct RunArgs {
  std::string db_path;
  std::string query_path;
  std::string strategy;
  epr::EprConfig config;
  bool no_standardize = false;
  std::string out_path;
};

void cmd_run(RunArgs& args) {
  args.config.strategy = epr::parse_strategy(args.strategy);
  args.config.standardize_db = !args.no_standardize;
  require_probability(args.config.p_db, "--p-db");
  require_probability(args.config.p_reloc, "--p-reloc");
  epr::validate(args.config);

  const epr::DescriptorSet db =
      epr::load_descriptors(args.db_path, epr::DescriptorRole::database);
  const epr::DescriptorSet query =
      epr::load_descriptors(args.query_path, epr::DescriptorRole::query);
  const auto [matrix, report] = epr::run(db, query, args.config);
  epr::save_sparse_csv(matrix, args.out_path);

  nlohmann::ordered_json manifest;
  manifest["manifest_version"] = 1;
  manifest["command"] = "run";
  manifest["inputs"] = {{"db", args.db_path}, {"query", args.query_path}};
  manifest["outputs"] = {{"similarity", args.out_path}};
  manifest["config"] = {{"strategy", epr::strategy_name(args.config.strategy)},
                        {"k", args.config.k},
                        {"v", args.config.v},
                        {"t_reloc", args.config.t_reloc},
                        {"p_db", args.config.p_db},
                        {"p_reloc", args.config.p_reloc},
                        {"standardize_db", args.config.standardize_db}};
  manifest["thresholds"] = {{"theta_db", report.theta_db},
                            {"theta_reloc", report.theta_reloc}};
  manifest["timing_seconds"] = {{"init", report.init_seconds},
                                {"sdb", report.sdb_seconds},
                                {"query_loop", report.query_loop_seconds},
                                {"total", report.total_seconds}};
  manifest["reloc_events"] = report.reloc_events;
  manifest["density_percentage"] = report.density_percentage;
  manifest["evaluated_pairs"] = report.evaluated_pairs;

  const std::string manifest_path = args.out_path + ".manifest.json";
  std::ofstream out(manifest_path);
  if (!out) throw epr::io_error("cannot open " + manifest_path + " for writing");
  out << manifest.dump(2) << "\n";
  if (!out.good()) throw epr::io_error("failed writing " + manifest_path);

  std::printf("strategy=%s evaluated_pairs=%lld density=%.9g%% total_seconds=%.3f\n",
              epr::strategy_name(args.config.strategy),
              static_cast<long long>(report.evaluated_pairs), report.density_percentage,
              report.total_seconds);
}

struct AutotuneArgs {
  std::string db_path;
  double p = epr::kDefaultPDb;
  bool no_standardize = false;
};

void cmd_autotune(const AutotuneArgs& args) {
  require_probability(args.p, "--p");
  const epr::DescriptorSet db =
      epr::load_descriptors(args.db_path, epr::DescriptorRole::database);
  const epr::IntraDbSimilarities sdb = epr::intra_db_matrix(db, !args.no_standardize);
  const epr::ThresholdModel model = epr::autotune(epr::upper_triangle(sdb), args.p);
  std::printf("mu=%.9g sigma=%.9g theta=%.9g\n", model.mu, model.sigma, model.theta);
}

struct EvalArgs {
  std::string sim_path;
  std::string gt_path;
  int db_count = 0;
  int q_count = 0;
  std::string mode;
  std::string out_path;
};

void cmd_eval(const EvalArgs& args) {
  const epr::EvalMode mode = epr::parse_mode(args.mode);
  const epr::SparseSimilarityMatrix matrix =
      epr::load_sparse_csv(args.sim_path, args.db_count, args.q_count);
  const epr::GroundTruth gt =
      epr::load_ground_truth(args.gt_path, args.db_count, args.q_count);
  const epr::EvalReport report = epr::evaluate(matrix, gt, mode);

  std::ofstream out(args.out_path);
  if (!out) throw epr::io_error("cannot open " + args.out_path + " for writing");
  char row[256];
  std::snprintf(row, sizeof(row), "%s,%.9g,%.9g,%.9g,%.9g", epr::mode_name(report.mode),
                report.auc, report.evaluated_pair_percentage, report.gt_min_percentage,
                report.gt_max_percentage);
  out << "mode,auc,evaluated_pct,gt_min_pct,gt_max_pct\n" << row << "\n";
  if (!out.good()) throw epr::io_error("failed writing " + args.out_path);

  std::printf("mode=%s auc=%.3f density=%.9g%%\n", epr::mode_name(report.mode), report.auc,
              report.evaluated_pair_percentage);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Place-recognition engine: synthetic data, sparse matching, evaluation"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--places", synth_args.places, "Number of distinct places")->required();
  synth->add_option("--dim", synth_args.dim, "Descriptor dimensionality")->required();
  synth->add_option("--db-route", synth_args.db_route, "Comma-separated database place ids")
      ->required();
  synth
      ->add_option("--query-route", synth_args.query_route,
                   "Comma-separated query place ids; X marks an exploration frame")
      ->required();
  synth->add_option("--noise", synth_args.noise, "Condition noise sigma");
  synth->add_option("--seed", synth_args.seed, "RNG seed");
  synth->add_option("--out-prefix", synth_args.out_prefix, "Output file prefix")->required();
  synth->callback([&synth_args] { cmd_synth(synth_args); });

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "Match a query sequence against a database");
  run->add_option("--db", run_args.db_path, "Database descriptor file")->required();
  run->add_option("--query", run_args.query_path, "Query descriptor file")->required();
  run->add_option("--strategy", run_args.strategy, "One of pr, er, full, pr-no-sdb")
      ->required();
  run->add_option("--k", run_args.config.k, "Top-k candidates per step");
  run->add_option("--v", run_args.config.v, "Sequence lookahead length");
  run->add_option("--t-reloc", run_args.config.t_reloc, "Periodic relocalization interval");
  run->add_option("--p-db", run_args.config.p_db, "Intra-database threshold probability");
  run->add_option("--p-reloc", run_args.config.p_reloc, "Relocalization threshold probability");
  run->add_flag("--no-standardize", run_args.no_standardize,
                "Skip descriptor standardization for the intra-database matrix");
  run->add_option("--out", run_args.out_path, "Output sparse similarity CSV")->required();
  run->callback([&run_args] { cmd_run(run_args); });

  AutotuneArgs autotune_args;
  CLI::App* autotune = app.add_subcommand("autotune", "Fit a similarity threshold to a database");
  autotune->add_option("--db", autotune_args.db_path, "Database descriptor file")->required();
  autotune->add_option("--p", autotune_args.p, "Threshold probability");
  autotune->add_flag("--no-standardize", autotune_args.no_standardize,
                     "Skip descriptor standardization");
  autotune->callback([&autotune_args] { cmd_autotune(autotune_args); });

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "Score a similarity matrix against ground truth");
  eval->add_option("--sim", eval_args.sim_path, "Sparse similarity CSV")->required();
  eval->add_option("--gt", eval_args.gt_path, "Ground-truth CSV")->required();
  eval->add_option("--db-count", eval_args.db_count, "Database size")->required();
  eval->add_option("--q-count", eval_args.q_count, "Query count")->required();
  eval->add_option("--mode", eval_args.mode, "single or multi")->required();
  eval->add_option("--out", eval_args.out_path, "Output report CSV")->required();
  eval->callback([&eval_args] { cmd_eval(eval_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const epr::usage_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const epr::error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 4;
  }
  return 0;
}
