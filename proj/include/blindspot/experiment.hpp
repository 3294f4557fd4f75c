#pragma once

// Config-driven experiment orchestration.
//
// A sweep runs every (protocol x budget x replicate) cell: collect feedback,
// aggregate it each requested way, train a blind-spot model, evaluate
// weighted F1 on seen/unseen states, and (optionally) run the model
// oracle-in-the-loop, with never-query/always-query baselines per replicate.
// Cells execute on a worker pool; all randomness derives from per-cell seeds
// and results are written in canonical cell order, so the report is
// byte-identical across reruns regardless of scheduling.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blindspot/aggregate.hpp"
#include "blindspot/evaluate.hpp"
#include "blindspot/model.hpp"
#include "blindspot/oracle.hpp"
#include "blindspot/qlearn.hpp"

namespace blindspot {

struct ExperimentConfig {
  std::string domain;  // catcher | flappybird
  std::vector<std::string> protocols = {"R-A", "R-AM", "D-A", "D-AM", "C"};
  std::vector<long long> budgets = {1000, 2000, 4000, 8000};
  int replicates = 5;
  std::uint64_t master_seed = 0;
  std::vector<std::string> aggregators = {"ds"};
  long long visit_episodes = 1000;
  long long oil_episodes = 100;  // 0 disables oracle-in-the-loop
  int workers = 0;               // 0 = hardware concurrency
  std::string out_dir = "out";
  KVConfig raw;  // env.*, rl.*, oracle.*, aggregate.*, model.* keys

  static ExperimentConfig from_config(const KVConfig& cfg);
  void validate() const;

  // Hash of the semantic configuration (raw keys minus output/worker keys),
  // hex-encoded; identical configs hash identically across runs.
  std::string config_hash() const;
};

// Everything derived once per run and shared (read-only) by all cells.
struct DomainSetup {
  std::shared_ptr<const RealIndex> real_index;  // target real space
  std::shared_ptr<const SimIndex> sim_index;    // shared observed space
  QTable q_sim;     // agent table (observed keys, trained on source)
  Policy pi_sim;
  QTable q_real;    // oracle table (target real keys)
  OracleParams oracle_params;
  std::unique_ptr<Environment> oracle_env;  // target env the oracle indexes
  std::unique_ptr<Oracle> oracle;
  BlindSpotTruth truth;
  std::vector<double> weights;  // visitation weights, shared across cells
};

// Builds envs, trains the agent, solves the oracle's action values
// (oracle.q_source = vi | train), and precomputes truth + weights.
DomainSetup prepare_domain(const ExperimentConfig& cfg);

struct ReportRow {
  std::string protocol;    // empty for baseline rows
  std::string aggregator;  // empty for baseline rows
  long long budget = 0;    // 0 for baseline rows
  int replicate = 0;
  std::string condition;   // model | never-query | always-query
  bool has_f1 = false;
  double seen_f1 = 0.0;
  double unseen_f1 = 0.0;
  bool has_oil = false;
  OILResult oil;
  bool has_train = false;
  TrainReport train;          // calibration details of the fitted model
  std::string status = "ok";  // or "failed: <reason>"
};

struct ExperimentResult {
  std::vector<ReportRow> rows;   // canonical order
  std::string report_path;       // empty when out_dir is empty
  std::string manifest_path;
  double wall_seconds = 0.0;
};

// Runs the full sweep. When cfg.out_dir is non-empty, writes report.csv,
// truth.csv, and manifest.json there. Individual cell failures are recorded
// in their rows' status and do not abort the sweep.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Pivots a report written by run_experiment into per-(protocol, aggregator,
// budget, condition) means/standard deviations across replicates.
void compare_conditions(const std::string& report_csv_path, const std::string& out_csv_path);

inline const std::vector<std::string> kReportHeader = {
    "domain",   "oracle",  "protocol",   "aggregator",     "budget",
    "replicate", "condition", "seen_f1", "unseen_f1",      "oil_reward",
    "oil_reward_std", "oil_query_rate", "status"};

}  // namespace blindspot
