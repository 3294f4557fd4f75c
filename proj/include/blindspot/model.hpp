#pragma once

// End-to-end blind-spot classifier training and the serialized model format.
//
// Pipeline: stratified 70/30 train/calibration split -> randomized
// hyperparameter search with 3-fold CV on the train part -> final forest on
// the oversampled train part (instance weights = aggregation confidences) ->
// probability threshold calibrated on the untouched 30% so the predicted
// blind-spot fraction matches the train part's pre-oversampling blind
// fraction. Oversampled duplicates never cross into calibration, and
// calibration instances never reach any fit.

#include <cstdint>
#include <string>
#include <vector>

#include "blindspot/aggregate.hpp"
#include "blindspot/forest.hpp"

namespace blindspot {

struct ModelTrainConfig {
  SearchSpace space;
  double calib_fraction = 0.30;

  static ModelTrainConfig from_config(const KVConfig& cfg);
  void validate() const;
};

struct TrainReport {
  int n_train = 0;              // before oversampling
  int n_calib = 0;
  double target_prior = 0.0;    // blind fraction of the train part
  double predicted_fraction = 0.0;  // on calibration at the chosen threshold
  double cv_f1 = 0.0;
  bool degenerate = false;      // single-class input: constant classifier
  int threshold_candidates = 0;
};

struct BlindSpotPrediction {
  double prob = 0.0;
  bool blind = false;
};

struct BlindSpotModel {
  std::vector<std::string> feature_names;
  ForestClassifier forest;
  double threshold = 0.5;  // predict blind iff prob >= threshold
  NoiseModel noise;        // aggregation noise estimate (identity for mv/al)
  TrainReport report;

  BlindSpotPrediction predict(const StateVec& x) const {
    const double p = forest.predict_proba(x);
    return {p, p >= threshold};
  }
};

// Builds the supervised training set for an aggregation result. ds/mv yield
// one instance per labeled state (weight = confidence); al yields one
// instance per raw label (weight = 1).
TrainingSet build_training_set(const AggregatedDataset& agg, const Environment& env,
                               const SimIndex& sim_index);

// Chooses the probability threshold whose predicted-blind fraction on the
// calibration probabilities best matches target_prior. Candidates are the
// sorted distinct probabilities plus {0, 1}; ties prefer the larger
// threshold (fewer predicted blind spots). `candidates_out`, if non-null,
// receives the candidate count.
double calibrate_threshold(const std::vector<double>& calib_probs, double target_prior,
                           int* candidates_out = nullptr);

BlindSpotModel train_model(const TrainingSet& ts, const ModelTrainConfig& cfg,
                           std::uint64_t seed, const NoiseModel& noise = {});

// Self-describing JSON (format tag + version + all parameters). Re-saving a
// loaded model reproduces the file byte-for-byte.
void save_model(const BlindSpotModel& m, const std::string& path);
BlindSpotModel load_model(const std::string& path);

inline constexpr int kModelFormatVersion = 1;

}  // namespace blindspot
