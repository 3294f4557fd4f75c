#pragma once

// Evaluation: weighted F1 on seen/unseen observed states, oracle-in-the-loop
// execution, and feedback-bias summaries.
//
// States are "seen" when at least one feedback label attached to them.
// F1 terms are weighted by how often the agent's policy encounters each
// observed state in the target environment (rollout visit counts plus
// add-one smoothing), so rarely-visited states can't dominate the score.

#include <cstdint>
#include <string>
#include <vector>

#include "blindspot/feedback.hpp"
#include "blindspot/model.hpp"
#include "blindspot/oracle.hpp"

namespace blindspot {

struct EvalSplit {
  std::vector<std::int32_t> seen;    // ascending sim ids
  std::vector<std::int32_t> unseen;  // complement, ascending
};

// Splits the observed space by the dataset's labeled states. Throws
// DomainError if either part would be empty.
EvalSplit make_split(std::int32_t n_sim_states, const FeedbackDataset& ds);

// Visit counts of pi_sim rolled out on the target for `episodes` episodes
// (decision points only), plus add-one smoothing on every state.
std::vector<double> visitation_weights(Environment& target, const SimIndex& sim_index,
                                       const Policy& pi_sim, long long episodes,
                                       std::uint64_t seed);

// Weighted positive-class F1 of the model's blind predictions against truth
// over the given sim ids. Zero-division (no weighted true or predicted
// positives) yields 0.
double weighted_f1(const BlindSpotModel& model, const BlindSpotTruth& truth,
                   const SimIndex& sim_index, const std::vector<std::int32_t>& ids,
                   const std::vector<double>& weights);

// --- Oracle-in-the-loop execution ---

enum class OILCondition { kModel, kNeverQuery, kAlwaysQuery };

struct OILResult {
  double mean_reward = 0.0;
  double std_reward = 0.0;  // population standard deviation over episodes
  double query_rate = 0.0;  // queries / decision steps
  long long episodes = 0;
  long long steps = 0;
  long long queries = 0;
};

// Runs `episodes` episodes on the target. At each decision point the agent
// queries the oracle iff the condition says so (kModel: the model predicts
// the current observed state is a blind spot); a query executes the oracle's
// action, otherwise the agent's own. `model` may be null except for kModel.
OILResult oil_run(Environment& target, const Oracle& oracle, const BlindSpotModel* model,
                  OILCondition condition, long long episodes, std::uint64_t seed);

// Label-count heatmap over two observed-state fields: one row per observed
// (value_a, value_b) combination with labeled visits, with safe/blind counts.
// Written as CSV: field_a, field_b, n_safe, n_blind.
void export_bias_heatmap_csv(const FeedbackDataset& ds, const Environment& env,
                             const SimIndex& sim_index, const std::string& field_a,
                             const std::string& field_b, const std::string& path);

}  // namespace blindspot
