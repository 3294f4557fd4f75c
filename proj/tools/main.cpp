// Command-line driver for the blind-spot discovery pipeline.
//
// Verbs: train, collect, aggregate, fit, evaluate, sweep, report. Every verb
// reads a key=value config file; --seed and --out override the config's
// experiment.seed / experiment.out_dir.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "blindspot/csv.hpp"
#include "blindspot/error.hpp"
#include "blindspot/experiment.hpp"
#include "blindspot/version.hpp"

namespace bs = blindspot;

namespace {

struct CommonArgs {
  std::string config_path;
  long long seed = -1;       // -1 = keep config value
  std::string out_dir;       // empty = keep config value
};

bs::ExperimentConfig load_config(const CommonArgs& args) {
  bs::KVConfig raw = bs::KVConfig::parse_file(args.config_path);
  if (args.seed >= 0) raw.set("experiment.seed", std::to_string(args.seed));
  if (!args.out_dir.empty()) raw.set("experiment.out_dir", args.out_dir);
  return bs::ExperimentConfig::from_config(raw);
}

void add_common(CLI::App* cmd, CommonArgs& args, bool need_config = true) {
  auto* opt = cmd->add_option("--config", args.config_path, "key=value config file");
  if (need_config) opt->required();
  cmd->add_option("--seed", args.seed, "master seed (overrides experiment.seed)");
  cmd->add_option("--out", args.out_dir, "output directory (overrides experiment.out_dir)");
}

int cmd_train(const CommonArgs& args) {
  const bs::ExperimentConfig cfg = load_config(args);
  const bs::DomainSetup setup = bs::prepare_domain(cfg);
  const auto& env = *setup.oracle_env;
  bs::ensure_dir(cfg.out_dir);
  bs::export_enumeration_csv(env, cfg.out_dir + "/enumeration.csv");

  std::vector<bs::StateVec> sim_states, real_states;
  for (const auto& s : setup.sim_index->states()) sim_states.push_back(s.v);
  for (const auto& s : setup.real_index->states()) real_states.push_back(s.v);
  bs::save_qtable_csv(setup.q_sim, env.sim_fields(), sim_states, env.action_names(),
                      cfg.out_dir + "/q_sim.csv");
  bs::save_qtable_csv(setup.q_real, env.real_fields(), real_states, env.action_names(),
                      cfg.out_dir + "/q_real.csv");
  bs::export_truth_csv(setup.truth, env, *setup.sim_index, cfg.out_dir + "/truth.csv");
  std::printf("trained %s: |S_real|=%d |S_obs|=%d blind=%lld -> %s\n", cfg.domain.c_str(),
              setup.real_index->size(), setup.sim_index->size(),
              static_cast<long long>(setup.truth.n_blind()), cfg.out_dir.c_str());
  return 0;
}

int cmd_collect(const CommonArgs& args, const std::string& protocol, long long budget) {
  const bs::ExperimentConfig cfg = load_config(args);
  const bs::DomainSetup setup = bs::prepare_domain(cfg);
  bs::EnvPair envs = bs::make_env_pair(cfg.domain, cfg.raw, cfg.master_seed);
  const bs::FeedbackDataset ds = bs::collect_feedback(
      *envs.target, *setup.oracle, bs::parse_protocol(protocol), budget, cfg.master_seed);
  const std::string path = cfg.out_dir + "/feedback.csv";
  bs::export_feedback_csv(ds, *setup.oracle_env, *setup.real_index, *setup.sim_index, path);
  std::printf("collected %lld labels (%s) -> %s\n",
              static_cast<long long>(ds.total_labels()), protocol.c_str(), path.c_str());
  return 0;
}

int cmd_aggregate(const CommonArgs& args, const std::string& in_path, const std::string& method,
                  const std::string& protocol) {
  const bs::ExperimentConfig cfg = load_config(args);
  const bs::DomainSetup setup = bs::prepare_domain(cfg);
  const bs::FeedbackDataset ds = bs::import_feedback_csv(in_path, protocol, cfg.master_seed);
  const bs::AggregatedDataset agg =
      bs::aggregate(ds, method, bs::DsParams::from_config(cfg.raw));
  const std::string path = cfg.out_dir + "/aggregated.csv";
  bs::export_aggregated_csv(agg, *setup.oracle_env, *setup.sim_index, path);
  std::printf("aggregated %zu labeled states (%s, %d EM iterations) -> %s\n", agg.states.size(),
              agg.method.c_str(), agg.em_iterations, path.c_str());
  return 0;
}

int cmd_fit(const CommonArgs& args, const std::string& in_path, const std::string& method,
            const std::string& protocol) {
  const bs::ExperimentConfig cfg = load_config(args);
  const bs::DomainSetup setup = bs::prepare_domain(cfg);
  const bs::FeedbackDataset ds = bs::import_feedback_csv(in_path, protocol, cfg.master_seed);
  const bs::AggregatedDataset agg =
      bs::aggregate(ds, method, bs::DsParams::from_config(cfg.raw));
  const bs::TrainingSet ts = bs::build_training_set(agg, *setup.oracle_env, *setup.sim_index);
  const bs::BlindSpotModel model =
      bs::train_model(ts, bs::ModelTrainConfig::from_config(cfg.raw),
                      bs::derive_seed(cfg.master_seed, "model", method), agg.noise);
  const std::string path = cfg.out_dir + "/model.json";
  bs::save_model(model, path);
  std::printf("fit model: threshold=%.6f prior=%.4f predicted=%.4f cv_f1=%.4f -> %s\n",
              model.threshold, model.report.target_prior, model.report.predicted_fraction,
              model.report.cv_f1, path.c_str());
  return 0;
}

int cmd_evaluate(const CommonArgs& args, const std::string& model_path,
                 const std::string& feedback_path, const std::string& protocol) {
  const bs::ExperimentConfig cfg = load_config(args);
  const bs::DomainSetup setup = bs::prepare_domain(cfg);
  const bs::BlindSpotModel model = bs::load_model(model_path);
  const bs::FeedbackDataset ds =
      bs::import_feedback_csv(feedback_path, protocol, cfg.master_seed);
  const bs::EvalSplit split = bs::make_split(setup.sim_index->size(), ds);

  const double seen =
      bs::weighted_f1(model, setup.truth, *setup.sim_index, split.seen, setup.weights);
  const double unseen =
      bs::weighted_f1(model, setup.truth, *setup.sim_index, split.unseen, setup.weights);

  bs::CsvWriter w({"metric", "value"});
  w.add_row({"seen_f1", bs::format_double(seen)});
  w.add_row({"unseen_f1", bs::format_double(unseen)});
  if (cfg.oil_episodes > 0) {
    bs::EnvPair envs = bs::make_env_pair(cfg.domain, cfg.raw, bs::derive_seed(cfg.master_seed, "oil-env"));
    const bs::OILResult oil =
        bs::oil_run(*envs.target, *setup.oracle, &model, bs::OILCondition::kModel,
                    cfg.oil_episodes, bs::derive_seed(cfg.master_seed, "oil"));
    w.add_row({"oil_reward", bs::format_double(oil.mean_reward)});
    w.add_row({"oil_reward_std", bs::format_double(oil.std_reward)});
    w.add_row({"oil_query_rate", bs::format_double(oil.query_rate)});
  }
  const std::string path = cfg.out_dir + "/eval.csv";
  w.write(path);
  std::printf("evaluated: seen_f1=%.4f unseen_f1=%.4f -> %s\n", seen, unseen, path.c_str());
  return 0;
}

int cmd_sweep(const CommonArgs& args) {
  const bs::ExperimentConfig cfg = load_config(args);
  const bs::ExperimentResult res = bs::run_experiment(cfg);
  int failures = 0;
  for (const auto& row : res.rows)
    if (row.status != "ok") ++failures;
  std::printf("sweep complete: %zu rows (%d failed) in %.1fs -> %s\n", res.rows.size(), failures,
              res.wall_seconds, res.report_path.c_str());
  return failures == 0 ? 0 : 1;
}

int cmd_report(const std::string& in_path, const std::string& out_path) {
  bs::compare_conditions(in_path, out_path);
  std::printf("summary -> %s\n", out_path.c_str());
  return 0;
}

int cmd_heatmap(const CommonArgs& args, const std::string& feedback_path,
                const std::string& protocol, const std::string& field_a,
                const std::string& field_b) {
  const bs::ExperimentConfig cfg = load_config(args);
  const bs::DomainSetup setup = bs::prepare_domain(cfg);
  const bs::FeedbackDataset ds =
      bs::import_feedback_csv(feedback_path, protocol, cfg.master_seed);
  const std::string path = cfg.out_dir + "/heatmap.csv";
  bs::export_bias_heatmap_csv(ds, *setup.oracle_env, *setup.sim_index, field_a, field_b, path);
  std::printf("heatmap (%s x %s) -> %s\n", field_a.c_str(), field_b.c_str(), path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blind-spot discovery for sim-to-real reinforcement learning"};
  app.set_version_flag("--version", bs::kLibraryVersion);
  app.require_subcommand(1);

  CommonArgs args;
  std::string protocol = "R-A", method = "ds", in_path, model_path, feedback_path, out_path;
  std::string field_a, field_b;
  long long budget = 1000;

  auto* train = app.add_subcommand("train", "Train the agent and solve the oracle's values");
  add_common(train, args);

  auto* collect = app.add_subcommand("collect", "Collect oracle feedback with one protocol");
  add_common(collect, args);
  collect->add_option("--protocol", protocol, "R-A | R-AM | D-A | D-AM | C")->required();
  collect->add_option("--budget", budget, "number of labels")->required();

  auto* aggregate = app.add_subcommand("aggregate", "Aggregate labels per observed state");
  add_common(aggregate, args);
  aggregate->add_option("--in", in_path, "feedback.csv")->required();
  aggregate->add_option("--method", method, "ds | ds-constrained | ds-unconstrained | mv | al");
  aggregate->add_option("--protocol", protocol, "protocol that produced the labels")->required();

  auto* fit = app.add_subcommand("fit", "Fit the blind-spot classifier from feedback");
  add_common(fit, args);
  fit->add_option("--in", in_path, "feedback.csv")->required();
  fit->add_option("--method", method, "aggregator");
  fit->add_option("--protocol", protocol, "protocol that produced the labels")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a saved model");
  add_common(evaluate, args);
  evaluate->add_option("--model", model_path, "model.json")->required();
  evaluate->add_option("--feedback", feedback_path, "feedback.csv for the seen/unseen split")
      ->required();
  evaluate->add_option("--protocol", protocol, "protocol that produced the labels");

  auto* sweep = app.add_subcommand("sweep", "Run the full experiment grid");
  add_common(sweep, args);

  auto* report = app.add_subcommand("report", "Summarize a sweep report");
  report->add_option("--in", in_path, "report.csv")->required();
  report->add_option("--out", out_path, "summary csv path")->required();

  auto* heatmap = app.add_subcommand("heatmap", "Feedback label counts over two state fields");
  add_common(heatmap, args);
  heatmap->add_option("--feedback", feedback_path, "feedback.csv")->required();
  heatmap->add_option("--protocol", protocol, "protocol that produced the labels");
  heatmap->add_option("--fields", field_a, "first observed-state field")->required();
  heatmap->add_option("--by", field_b, "second observed-state field")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(args);
    if (collect->parsed()) return cmd_collect(args, protocol, budget);
    if (aggregate->parsed()) return cmd_aggregate(args, in_path, method, protocol);
    if (fit->parsed()) return cmd_fit(args, in_path, method, protocol);
    if (evaluate->parsed()) return cmd_evaluate(args, model_path, feedback_path, protocol);
    if (sweep->parsed()) return cmd_sweep(args);
    if (report->parsed()) return cmd_report(in_path, out_path);
    if (heatmap->parsed()) return cmd_heatmap(args, feedback_path, protocol, field_a, field_b);
  } catch (const bs::ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
