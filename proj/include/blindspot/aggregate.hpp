#pragma once

// Label aggregation: turning repeated noisy per-state labels into one label,
// confidence, and posterior per state.
//
// The main aggregator is a two-class Dawid-Skene EM with a single shared
// confusion matrix (all labels come from one oracle/protocol pairing) and a
// class prior. A constrained variant pins the safe-state row of the
// confusion matrix to [1, 0]: safe states never emit blind labels, which
// encodes that observing even one blind label certifies a blind spot while
// many safe labels still don't certify safety (state aliasing can hide the
// unsafe twin). Baselines: per-state majority vote, and no aggregation at
// all (every raw label becomes a weight-1 training instance).

#include <cstdint>
#include <string>
#include <vector>

#include "blindspot/config.hpp"
#include "blindspot/feedback.hpp"

namespace blindspot {

struct NoiseModel {
  double prior = 0.5;           // P(state is a blind spot)
  double confusion[2][2] = {{1, 0}, {0, 1}};  // [true class][observed label]
};

struct AggregatedState {
  std::int32_t sim_id = 0;
  int n0 = 0;                   // observed safe labels
  int n1 = 0;                   // observed blind labels
  double posterior_blind = 0;   // P(blind | labels)
  int label = 0;                // MAP label; posterior 0.5 resolves to 1
  double confidence = 0.5;      // max(posterior, 1 - posterior)
};

struct AggregatedDataset {
  std::string method;                    // ds | ds-constrained | mv | al
  std::vector<AggregatedState> states;   // ascending sim_id (lexicographic
                                         // state order); empty for al
  std::vector<LabelEvent> instances;     // al only: raw labeled visits
  NoiseModel noise;                      // ds variants only
  int em_iterations = 0;
  std::vector<double> loglik_trace;      // per-iteration EM objective:
                                         // observed-data log-likelihood plus
                                         // the smoothing penalty (exactly
                                         // non-decreasing)
};

struct DsParams {
  double tol = 1e-6;        // convergence: max posterior change
  int max_iters = 500;
  double pseudocount = 0.01;  // M-step smoothing (not applied to pinned row)
  double prior_min = 0.01;    // prior clamp
  double prior_max = 0.99;

  static DsParams from_config(const KVConfig& cfg);
  void validate() const;
};

// EM aggregation. Posteriors initialize to each state's mean label; each
// iteration re-estimates {prior, confusion} from the expected counts, then
// recomputes posteriors; stops when the largest posterior change falls below
// tol. The recorded objective trace is non-decreasing every iteration.
// Throws NumericError on an empty dataset.
AggregatedDataset dawid_skene(const FeedbackDataset& ds, bool constrained,
                              const DsParams& params = {});

AggregatedDataset majority_vote(const FeedbackDataset& ds);
AggregatedDataset all_labels(const FeedbackDataset& ds);

// Resolves an aggregator request for a protocol: "ds" selects the
// constrained variant for acceptability-grounded protocols (R-A, D-A, C)
// whose blind labels are never spurious, and the unconstrained variant for
// mismatch-based ones (R-AM, D-AM); "ds-constrained", "mv", "al" are literal.
AggregatedDataset aggregate(const FeedbackDataset& ds, const std::string& method,
                            const DsParams& params = {});

// Aggregated CSV: sim_id, sim fields, n0, n1, posterior_blind, label,
// confidence (al datasets export per-event rows with posterior = label).
void export_aggregated_csv(const AggregatedDataset& agg, const Environment& env,
                           const SimIndex& sim_index, const std::string& path);

}  // namespace blindspot
