#include "blindspot/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <map>
#include <thread>

#include <nlohmann/json.hpp>

#include "blindspot/csv.hpp"
#include "blindspot/error.hpp"
#include "blindspot/rng.hpp"
#include "blindspot/version.hpp"

namespace blindspot {

using ordered_json = nlohmann::ordered_json;

namespace {

std::vector<std::string> split_list(const std::string& raw, const std::string& key) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : raw) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

double domain_default_percentile(const std::string& domain) {
  return domain == "catcher" ? 0.95 : 0.7;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_config(const KVConfig& cfg) {
  ExperimentConfig e;
  e.raw = cfg;
  e.domain = cfg.get_enum("experiment.domain", {"catcher", "flappybird"}, "");
  if (cfg.has("experiment.protocols"))
    e.protocols = split_list(cfg.get_string("experiment.protocols"), "experiment.protocols");
  e.budgets = cfg.get_int_list("experiment.budgets", e.budgets);
  e.replicates = static_cast<int>(cfg.get_int("experiment.replicates", e.replicates));
  e.master_seed = static_cast<std::uint64_t>(cfg.get_int("experiment.seed", 0));
  if (cfg.has("experiment.aggregators"))
    e.aggregators = split_list(cfg.get_string("experiment.aggregators"), "experiment.aggregators");
  e.visit_episodes = cfg.get_int("experiment.visit_episodes", e.visit_episodes);
  e.oil_episodes = cfg.get_int("experiment.oil_episodes", e.oil_episodes);
  e.workers = static_cast<int>(cfg.get_int("experiment.workers", e.workers));
  e.out_dir = cfg.get_string("experiment.out_dir", e.out_dir);
  e.validate();
  return e;
}

void ExperimentConfig::validate() const {
  if (domain != "catcher" && domain != "flappybird")
    throw ConfigError("experiment.domain must be catcher or flappybird");
  if (protocols.empty()) throw ConfigError("experiment.protocols must be non-empty");
  for (const auto& p : protocols) parse_protocol(p);  // throws on bad name
  if (budgets.empty()) throw ConfigError("experiment.budgets must be non-empty");
  for (long long b : budgets)
    if (b < 1) throw ConfigError("experiment.budgets entries must be >= 1");
  if (replicates < 1) throw ConfigError("experiment.replicates must be >= 1");
  if (aggregators.empty()) throw ConfigError("experiment.aggregators must be non-empty");
  for (const auto& a : aggregators)
    if (a != "ds" && a != "ds-constrained" && a != "ds-unconstrained" && a != "mv" && a != "al")
      throw ConfigError("unknown aggregator '" + a + "'");
  if (visit_episodes < 1) throw ConfigError("experiment.visit_episodes must be >= 1");
  if (oil_episodes < 0) throw ConfigError("experiment.oil_episodes must be >= 0");
  if (workers < 0) throw ConfigError("experiment.workers must be >= 0");
}

std::string ExperimentConfig::config_hash() const {
  // Semantic keys only: outputs and worker counts don't change results.
  std::string text;
  for (const auto& [k, v] : raw.entries()) {
    if (k == "experiment.out_dir" || k == "experiment.workers") continue;
    text += k + "=" + v + "\n";
  }
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

DomainSetup prepare_domain(const ExperimentConfig& cfg) {
  DomainSetup setup;
  EnvPair envs = make_env_pair(cfg.domain, cfg.raw, derive_seed(cfg.master_seed, "prep"));

  // The observed space must be shared exactly between source and target.
  const auto sim_src = envs.source->enumerate_sim();
  const auto sim_tgt = envs.target->enumerate_sim();
  if (sim_src != sim_tgt)
    throw DomainError("source and target observed-state enumerations differ");

  setup.sim_index = std::make_shared<SimIndex>(sim_tgt);
  setup.real_index = std::make_shared<RealIndex>(envs.target->enumerate_real());

  const QLearnParams rl = QLearnParams::from_config(cfg.raw);
  setup.q_sim = train_q(*envs.source, Space::kSim, rl, derive_seed(cfg.master_seed, "train-sim"));
  setup.pi_sim = greedy_policy(setup.q_sim);

  const std::string q_source = cfg.raw.get_enum("oracle.q_source", {"vi", "train"}, "vi");
  if (q_source == "vi") {
    setup.q_real = value_iteration(*envs.target, Space::kReal, rl.gamma);
  } else {
    setup.q_real =
        train_q(*envs.target, Space::kReal, rl, derive_seed(cfg.master_seed, "train-real"));
  }

  setup.oracle_params =
      OracleParams::from_config(cfg.raw, domain_default_percentile(cfg.domain));
  setup.oracle = std::make_unique<Oracle>(*envs.target, setup.real_index, setup.sim_index,
                                          setup.q_real, setup.pi_sim, setup.oracle_params);
  setup.truth = ground_truth_blind_spots(*envs.target, *setup.sim_index, *setup.real_index,
                                         setup.pi_sim, setup.oracle->acceptable_fn());
  setup.weights = visitation_weights(*envs.target, *setup.sim_index, setup.pi_sim,
                                     cfg.visit_episodes, derive_seed(cfg.master_seed, "weights"));

  // Keep the oracle's target env alive for the whole run.
  setup.oracle_env = std::move(envs.target);
  return setup;
}

namespace {

struct CellSpec {
  std::string protocol;
  long long budget = 0;
  int replicate = 0;
};

// One collected dataset fans out into one row per aggregator.
std::vector<ReportRow> run_cell(const ExperimentConfig& cfg, const DomainSetup& setup,
                                const CellSpec& cell) {
  std::vector<ReportRow> rows;
  const std::uint64_t cell_seed = derive_seed(cfg.master_seed, cfg.domain, cell.protocol,
                                              static_cast<std::uint64_t>(cell.budget),
                                              static_cast<std::uint64_t>(cell.replicate));

  FeedbackDataset feedback;
  EvalSplit split;
  bool collected = false;
  std::string collect_error;
  try {
    EnvPair envs = make_env_pair(cfg.domain, cfg.raw, cell_seed);
    feedback = collect_feedback(*envs.target, *setup.oracle, parse_protocol(cell.protocol),
                                cell.budget, cell_seed);
    split = make_split(setup.sim_index->size(), feedback);
    collected = true;
  } catch (const std::exception& e) {
    collect_error = e.what();
  }

  const DsParams ds_params = DsParams::from_config(cfg.raw);
  const ModelTrainConfig model_cfg = ModelTrainConfig::from_config(cfg.raw);

  for (const auto& aggregator : cfg.aggregators) {
    ReportRow row;
    row.protocol = cell.protocol;
    row.aggregator = aggregator;
    row.budget = cell.budget;
    row.replicate = cell.replicate;
    row.condition = "model";
    if (!collected) {
      row.status = "failed: " + collect_error;
      rows.push_back(std::move(row));
      continue;
    }
    try {
      const AggregatedDataset agg = aggregate(feedback, aggregator, ds_params);
      const TrainingSet ts =
          build_training_set(agg, *setup.oracle_env, *setup.sim_index);
      const NoiseModel noise = agg.noise;
      const BlindSpotModel model =
          train_model(ts, model_cfg, derive_seed(cell_seed, "model", aggregator), noise);
      row.train = model.report;
      row.has_train = true;

      row.seen_f1 = weighted_f1(model, setup.truth, *setup.sim_index, split.seen, setup.weights);
      row.unseen_f1 =
          weighted_f1(model, setup.truth, *setup.sim_index, split.unseen, setup.weights);
      row.has_f1 = true;

      if (cfg.oil_episodes > 0) {
        EnvPair oil_envs = make_env_pair(cfg.domain, cfg.raw, derive_seed(cell_seed, "oil-env"));
        row.oil = oil_run(*oil_envs.target, *setup.oracle, &model, OILCondition::kModel,
                          cfg.oil_episodes, derive_seed(cell_seed, "oil", aggregator));
        row.has_oil = true;
      }
    } catch (const std::exception& e) {
      row.status = std::string("failed: ") + e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string iso_utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started_at = iso_utc_now();

  const DomainSetup setup = prepare_domain(cfg);

  std::vector<CellSpec> cells;
  for (const auto& protocol : cfg.protocols)
    for (long long budget : cfg.budgets)
      for (int r = 0; r < cfg.replicates; ++r) cells.push_back({protocol, budget, r});

  std::vector<std::vector<ReportRow>> cell_rows(cells.size());
  unsigned n_workers = cfg.workers > 0 ? static_cast<unsigned>(cfg.workers)
                                       : std::max(1u, std::thread::hardware_concurrency());
  n_workers = std::min<unsigned>(n_workers, static_cast<unsigned>(cells.size()));

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        cell_rows[i] = run_cell(cfg, setup, cells[i]);
      } catch (const std::exception& e) {
        // run_cell handles its own failures; this is a last-resort guard.
        ReportRow row;
        row.protocol = cells[i].protocol;
        row.budget = cells[i].budget;
        row.replicate = cells[i].replicate;
        row.condition = "model";
        row.status = std::string("failed: ") + e.what();
        cell_rows[i] = {row};
      }
    }
  };
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ExperimentResult result;
  for (auto& rows : cell_rows)
    for (auto& row : rows) result.rows.push_back(std::move(row));

  // Query-free baselines, one pair per replicate.
  if (cfg.oil_episodes > 0) {
    for (const char* condition : {"never-query", "always-query"}) {
      for (int r = 0; r < cfg.replicates; ++r) {
        ReportRow row;
        row.replicate = r;
        row.condition = condition;
        try {
          EnvPair envs = make_env_pair(
              cfg.domain, cfg.raw, derive_seed(cfg.master_seed, "oil-baseline-env", condition,
                                               static_cast<std::uint64_t>(r)));
          const OILCondition c = std::string(condition) == "never-query"
                                     ? OILCondition::kNeverQuery
                                     : OILCondition::kAlwaysQuery;
          row.oil = oil_run(*envs.target, *setup.oracle, nullptr, c, cfg.oil_episodes,
                            derive_seed(cfg.master_seed, "oil-baseline", condition,
                                        static_cast<std::uint64_t>(r)));
          row.has_oil = true;
        } catch (const std::exception& e) {
          row.status = std::string("failed: ") + e.what();
        }
        result.rows.push_back(std::move(row));
      }
    }
  }

  const auto t1 = std::chrono::steady_clock::now();
  result.wall_seconds = std::chrono::duration<double>(t1 - t0).count();

  if (!cfg.out_dir.empty()) {
    const std::string oracle_name =
        setup.oracle_params.mode == OracleMode::kStrict ? "strict" : "lenient";
    CsvWriter w(kReportHeader);
    for (const auto& row : result.rows) {
      w.add_row({cfg.domain, oracle_name, row.protocol, row.aggregator,
                 row.budget > 0 ? std::to_string(row.budget) : "",
                 std::to_string(row.replicate), row.condition,
                 row.has_f1 ? format_double(row.seen_f1) : "",
                 row.has_f1 ? format_double(row.unseen_f1) : "",
                 row.has_oil ? format_double(row.oil.mean_reward) : "",
                 row.has_oil ? format_double(row.oil.std_reward) : "",
                 row.has_oil ? format_double(row.oil.query_rate) : "", row.status});
    }
    result.report_path = cfg.out_dir + "/report.csv";
    w.write(result.report_path);

    export_truth_csv(setup.truth, *setup.oracle_env, *setup.sim_index,
                     cfg.out_dir + "/truth.csv");

    ordered_json manifest;
    manifest["config_hash"] = cfg.config_hash();
    manifest["library_version"] = kLibraryVersion;
    manifest["report_schema_version"] = kReportSchemaVersion;
    manifest["model_format_version"] = kModelFormatVersion;
    manifest["domain"] = cfg.domain;
    manifest["oracle"] = oracle_name;
    manifest["started_at"] = started_at;
    manifest["wall_seconds"] = result.wall_seconds;
    manifest["n_rows"] = result.rows.size();
    ordered_json cell_status = ordered_json::array();
    for (const auto& row : result.rows) {
      if (row.status == "ok") continue;
      cell_status.push_back({{"protocol", row.protocol},
                             {"aggregator", row.aggregator},
                             {"budget", row.budget},
                             {"replicate", row.replicate},
                             {"status", row.status}});
    }
    manifest["failures"] = std::move(cell_status);
    result.manifest_path = cfg.out_dir + "/manifest.json";
    write_text_file(result.manifest_path, manifest.dump(2) + "\n");
  }
  return result;
}

void compare_conditions(const std::string& report_csv_path, const std::string& out_csv_path) {
  const CsvTable t = read_csv(report_csv_path);
  const int c_domain = t.col("domain"), c_oracle = t.col("oracle"), c_protocol = t.col("protocol"),
            c_agg = t.col("aggregator"), c_budget = t.col("budget"),
            c_condition = t.col("condition"), c_seen = t.col("seen_f1"),
            c_unseen = t.col("unseen_f1"), c_reward = t.col("oil_reward"),
            c_rate = t.col("oil_query_rate"), c_status = t.col("status");

  struct Acc {
    std::vector<double> seen, unseen, reward, rate;
  };
  std::map<std::vector<std::string>, Acc> groups;
  for (const auto& row : t.rows) {
    if (row[static_cast<std::size_t>(c_status)] != "ok") continue;
    std::vector<std::string> key = {
        row[static_cast<std::size_t>(c_domain)], row[static_cast<std::size_t>(c_oracle)],
        row[static_cast<std::size_t>(c_protocol)], row[static_cast<std::size_t>(c_agg)],
        row[static_cast<std::size_t>(c_budget)], row[static_cast<std::size_t>(c_condition)]};
    Acc& acc = groups[key];
    auto push = [&row](std::vector<double>& v, int col) {
      const std::string& s = row[static_cast<std::size_t>(col)];
      if (!s.empty()) v.push_back(std::strtod(s.c_str(), nullptr));
    };
    push(acc.seen, c_seen);
    push(acc.unseen, c_unseen);
    push(acc.reward, c_reward);
    push(acc.rate, c_rate);
  }

  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  auto stdev = [&mean](const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
  };
  auto cell = [](const std::vector<double>& v, double value) {
    return v.empty() ? std::string() : format_double(value);
  };

  CsvWriter w({"domain", "oracle", "protocol", "aggregator", "budget", "condition", "n",
               "seen_f1_mean", "seen_f1_std", "unseen_f1_mean", "unseen_f1_std",
               "oil_reward_mean", "oil_reward_sd", "query_rate_mean"});
  for (const auto& [key, acc] : groups) {
    const std::size_t n = std::max({acc.seen.size(), acc.reward.size(), acc.rate.size()});
    w.add_row({key[0], key[1], key[2], key[3], key[4], key[5], std::to_string(n),
               cell(acc.seen, mean(acc.seen)), cell(acc.seen, stdev(acc.seen)),
               cell(acc.unseen, mean(acc.unseen)), cell(acc.unseen, stdev(acc.unseen)),
               cell(acc.reward, mean(acc.reward)), cell(acc.reward, stdev(acc.reward)),
               cell(acc.rate, mean(acc.rate))});
  }
  w.write(out_csv_path);
}

}  // namespace blindspot
