#pragma once

// Weighted random forest on small-integer feature vectors.
//
// Trees are grown on bootstrap resamples with per-node random feature
// subsets; splits minimize weighted Gini impurity of the children. Feature
// values are small integers, so candidate thresholds are scanned through
// per-value class-weight histograms (exact, and linear in node size). A node
// inspects features in random order until mtry non-constant ones have been
// scanned and a valid split exists (constant features don't count), so a
// node only leafs out when no feature can split it. Leaves store the
// weighted positive-class frequency; the forest probability is the
// unweighted mean over trees. Everything is a pure function of (training
// set, params, seed).
//
// Determinism contract: per-tree seeds derive from the forest seed and tree
// number; feature subsets are sampled by partial Fisher-Yates; split ties
// (equal scores) keep the first candidate in (feature try order, ascending
// threshold) order.

#include <cstdint>
#include <string>
#include <vector>

#include "blindspot/config.hpp"
#include "blindspot/state.hpp"

namespace blindspot {

struct TrainingInstance {
  StateVec x;
  int label = 0;       // 0 safe, 1 blind
  double weight = 1.0; // aggregation confidence; must be > 0
  std::int32_t origin_id = -1;  // provenance: sim id or raw-event index
};

struct TrainingSet {
  std::vector<std::string> feature_names;
  std::vector<TrainingInstance> items;

  int n_features() const { return static_cast<int>(feature_names.size()); }
  // Fraction of label-1 instances (count-based). Throws NumericError if empty.
  double blind_fraction() const;
  bool single_class() const;
};

struct ForestParams {
  int n_trees = 100;
  int max_depth = -1;  // -1 = unbounded
  int min_leaf = 1;    // minimum bootstrap instances per child
  int mtry = 0;        // features tried per node; 0 = all features

  void validate(int n_features) const;
};

struct TreeNode {
  std::int16_t feature = -1;  // -1 marks a leaf
  std::int16_t threshold = 0; // go left iff x[feature] <= threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  double p1 = 0.0;            // leaf: weighted P(label = 1)
};

struct Tree {
  std::vector<TreeNode> nodes;  // root at 0
  double predict(const StateVec& x) const;
};

struct ForestClassifier {
  ForestParams params;
  std::uint64_t seed = 0;
  int n_features = 0;
  std::vector<Tree> trees;

  double predict_proba(const StateVec& x) const;
};

// Duplicates uniformly drawn minority-class instances (with replacement)
// until class counts are equal. A single-class set is returned unchanged
// with `degenerate` set.
struct OversampleResult {
  TrainingSet set;
  bool degenerate = false;
};
OversampleResult oversample(const TrainingSet& ts, std::uint64_t seed);

ForestClassifier train_forest(const TrainingSet& ts, const ForestParams& params,
                              std::uint64_t seed);

// Randomized hyperparameter search with stratified 3-fold cross-validation.
// Fold train parts are oversampled (validation parts never); configurations
// score by mean positive-class F1 at probability threshold 0.5 (zero-division
// yields 0); the best score wins, ties keep the earlier trial.
struct SearchSpace {
  std::vector<int> n_trees = {25, 50, 100};
  std::vector<int> max_depth = {4, 8, 16, -1};
  std::vector<int> min_leaf = {1, 2, 5};
  std::vector<int> mtry = {};  // empty = 1..n_features, resolved at run time
  int n_trials = 20;

  static SearchSpace from_config(const KVConfig& cfg);
  void validate() const;
};

struct TrialResult {
  ForestParams params;
  double mean_f1 = 0.0;
};

struct SearchResult {
  ForestParams best;
  double best_f1 = 0.0;
  std::vector<TrialResult> trials;
};

SearchResult hyperparameter_search(const TrainingSet& ts, const SearchSpace& space,
                                   std::uint64_t seed);

// Count-based F1 of the positive class for label pairs (truth, predicted).
double f1_score(const std::vector<int>& truth, const std::vector<int>& predicted);

}  // namespace blindspot
