#pragma once

// Simulated oracle: acceptability judgments and the reference policy on the
// target environment, derived from target-optimal action values.
//
// For each non-terminal real state, delta(s, a) = max_a' Q(s, a') - Q(s, a).
// Strict mode accepts exactly the argmax tie set (delta within a tiny
// epsilon). Lenient mode pools deltas across all non-terminal (s, a) pairs,
// takes the delta at a configured percentile of the ascending pool, and
// accepts a pair iff its delta is strictly below that threshold (a pair
// sitting exactly at the threshold is unacceptable).
//
// The oracle's action at s prefers the agent's own action whenever it is in
// the argmax tie set, and otherwise plays the lowest-index optimal action.
// This makes "oracle disagrees with the agent" coincide exactly with "the
// agent's action is strictly suboptimal", so under the strict oracle,
// mismatch-based and acceptability-based feedback agree label-for-label.

#include <cstdint>
#include <memory>
#include <vector>

#include "blindspot/config.hpp"
#include "blindspot/env.hpp"
#include "blindspot/qtable.hpp"

namespace blindspot {

enum class OracleMode { kStrict, kLenient };

struct OracleParams {
  OracleMode mode = OracleMode::kStrict;
  double percentile = 0.95;        // lenient only; must be in (0, 1)
  bool include_zero_deltas = true; // lenient pool: keep tie-equivalent zeros
  double tie_eps = 1e-9;           // relative tolerance for argmax ties

  static OracleParams from_config(const KVConfig& cfg, double default_percentile);
  void validate() const;
};

// Threshold of the ascending sorted pool at fraction p in (0, 1):
// with h = p*n, an integer h = k in [1, n-1] yields the midpoint
// (x[k-1] + x[k]) / 2; otherwise x[floor(h)]; h >= n clamps to x[n-1].
double percentile_threshold(const std::vector<double>& sorted_pool, double p);

// Acceptability of every (real state, action) pair of one environment.
class AcceptableFunction {
 public:
  // q_real must be keyed by `index` ids. Terminal states have no actions and
  // are recorded as all-acceptable with delta 0.
  static AcceptableFunction build(const Environment& env, const RealIndex& index,
                                  const QTable& q_real, const OracleParams& params);

  bool is_acceptable(std::int32_t real_id, Action a) const {
    return acceptable_[static_cast<std::size_t>(real_id) * static_cast<std::size_t>(n_actions_) +
                       static_cast<std::size_t>(a)] != 0;
  }
  double delta(std::int32_t real_id, Action a) const {
    return deltas_[static_cast<std::size_t>(real_id) * static_cast<std::size_t>(n_actions_) +
                   static_cast<std::size_t>(a)];
  }
  // Lenient delta threshold; 0 in strict mode.
  double threshold() const { return threshold_; }
  OracleMode mode() const { return mode_; }
  std::int64_t acceptable_count() const;

 private:
  int n_actions_ = 0;
  OracleMode mode_ = OracleMode::kStrict;
  double threshold_ = 0.0;
  std::vector<char> acceptable_;
  std::vector<double> deltas_;
};

// Ground-truth blind spots of the observed space: sim state s is blind iff
// some non-terminal real preimage makes the agent's action there
// unacceptable. `witness` records the first such preimage id (enumeration
// order) or -1.
struct BlindSpotTruth {
  std::vector<char> blind;            // indexed by sim id
  std::vector<std::int32_t> witness;  // real id or -1

  std::int64_t n_blind() const {
    std::int64_t c = 0;
    for (char b : blind) c += b;
    return c;
  }
};

BlindSpotTruth ground_truth_blind_spots(const Environment& target, const SimIndex& sim_index,
                                        const RealIndex& real_index, const Policy& pi_sim,
                                        const AcceptableFunction& acc);

// Bundles everything feedback collection and evaluation need from the oracle.
class Oracle {
 public:
  Oracle(const Environment& target, std::shared_ptr<const RealIndex> real_index,
         std::shared_ptr<const SimIndex> sim_index, QTable q_real, Policy pi_sim,
         const OracleParams& params);

  bool acceptable(const RealState& s, Action a) const {
    return acc_.is_acceptable(real_index_->id_of(s), a);
  }
  // Optimal action at s; prefers the agent's action when it is argmax-tied.
  Action policy_action(const RealState& s) const;
  // Whether `a` is in the argmax tie set of Q_real(s, .).
  bool in_optimal_set(std::int32_t real_id, Action a) const;

  const AcceptableFunction& acceptable_fn() const { return acc_; }
  const QTable& q_real() const { return q_real_; }
  const Policy& pi_sim() const { return pi_sim_; }
  const RealIndex& real_index() const { return *real_index_; }
  const SimIndex& sim_index() const { return *sim_index_; }
  const Environment& target() const { return *target_; }

 private:
  const Environment* target_;
  std::shared_ptr<const RealIndex> real_index_;
  std::shared_ptr<const SimIndex> sim_index_;
  QTable q_real_;
  Policy pi_sim_;
  double tie_eps_;
  AcceptableFunction acc_;
};

// Truth CSV: sim_id, one column per sim field, blind, witness_real_id.
void export_truth_csv(const BlindSpotTruth& truth, const Environment& env,
                      const SimIndex& sim_index, const std::string& path);

}  // namespace blindspot
