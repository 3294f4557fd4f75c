#include "blindspot/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "blindspot/csv.hpp"
#include "blindspot/env.hpp"
#include "blindspot/error.hpp"
#include "blindspot/rng.hpp"

namespace blindspot {

using ordered_json = nlohmann::ordered_json;

ModelTrainConfig ModelTrainConfig::from_config(const KVConfig& cfg) {
  ModelTrainConfig c;
  c.space = SearchSpace::from_config(cfg);
  c.calib_fraction = cfg.get_double("model.calib_fraction", c.calib_fraction);
  c.validate();
  return c;
}

void ModelTrainConfig::validate() const {
  space.validate();
  if (calib_fraction <= 0.0 || calib_fraction >= 1.0)
    throw ConfigError("model.calib_fraction must be in (0, 1)");
}

TrainingSet build_training_set(const AggregatedDataset& agg, const Environment& env,
                               const SimIndex& sim_index) {
  TrainingSet ts;
  ts.feature_names = env.sim_fields();
  if (agg.method == "al") {
    for (std::size_t i = 0; i < agg.instances.size(); ++i) {
      const auto& e = agg.instances[i];
      ts.items.push_back(TrainingInstance{sim_index.state(e.sim_id).v, e.label, 1.0,
                                          static_cast<std::int32_t>(i)});
    }
  } else {
    for (const auto& st : agg.states)
      ts.items.push_back(
          TrainingInstance{sim_index.state(st.sim_id).v, st.label, st.confidence, st.sim_id});
  }
  if (ts.items.empty()) throw NumericError("aggregation produced no training instances");
  return ts;
}

double calibrate_threshold(const std::vector<double>& calib_probs, double target_prior,
                           int* candidates_out) {
  if (calib_probs.empty()) throw NumericError("calibration: no probabilities");
  if (target_prior < 0.0 || target_prior > 1.0)
    throw NumericError("calibration: target prior out of [0, 1]");

  std::vector<double> candidates = calib_probs;
  candidates.push_back(0.0);
  candidates.push_back(1.0);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  if (candidates_out) *candidates_out = static_cast<int>(candidates.size());

  const auto n = static_cast<double>(calib_probs.size());
  double best_t = 1.0;
  double best_gap = std::numeric_limits<double>::infinity();
  for (const double t : candidates) {
    std::int64_t predicted = 0;
    for (const double p : calib_probs)
      if (p >= t) ++predicted;
    const double gap = std::fabs(static_cast<double>(predicted) / n - target_prior);
    // Ties prefer the larger threshold; candidates ascend, so >= keeps later.
    if (gap <= best_gap) {
      best_gap = gap;
      best_t = t;
    }
  }
  return best_t;
}

namespace {

// Stratified split: per class, shuffle indices, then round(calib_fraction *
// class size) of them go to calibration (at least one stays in train
// whenever the class is non-empty).
void stratified_split(const TrainingSet& ts, double calib_fraction, std::uint64_t seed,
                      TrainingSet& train, TrainingSet& calib) {
  train.feature_names = ts.feature_names;
  calib.feature_names = ts.feature_names;
  Rng rng(derive_seed(seed, "split"));
  for (int cls = 0; cls <= 1; ++cls) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < ts.items.size(); ++i)
      if (ts.items[i].label == cls) idx.push_back(i);
    if (idx.empty()) continue;
    rng.shuffle(idx);
    auto n_calib = static_cast<std::size_t>(
        std::llround(calib_fraction * static_cast<double>(idx.size())));
    if (n_calib >= idx.size()) n_calib = idx.size() - 1;  // keep >= 1 in train
    for (std::size_t j = 0; j < idx.size(); ++j)
      (j < n_calib ? calib : train).items.push_back(ts.items[idx[j]]);
  }
}

}  // namespace

BlindSpotModel train_model(const TrainingSet& ts, const ModelTrainConfig& cfg, std::uint64_t seed,
                           const NoiseModel& noise) {
  cfg.validate();
  if (ts.items.empty()) throw NumericError("train_model: empty training set");

  BlindSpotModel m;
  m.feature_names = ts.feature_names;
  m.noise = noise;

  if (ts.single_class()) {
    // Degenerate input: a constant classifier at the observed class.
    ForestParams p;
    p.n_trees = 1;
    m.forest = train_forest(ts, p, derive_seed(seed, "degenerate"));
    m.threshold = 0.5;
    m.report.degenerate = true;
    m.report.n_train = static_cast<int>(ts.items.size());
    m.report.n_calib = 0;
    m.report.target_prior = ts.blind_fraction();
    m.report.predicted_fraction = m.report.target_prior;
    return m;
  }

  TrainingSet train, calib;
  stratified_split(ts, cfg.calib_fraction, seed, train, calib);
  m.report.n_train = static_cast<int>(train.items.size());
  m.report.n_calib = static_cast<int>(calib.items.size());
  m.report.target_prior = train.blind_fraction();

  const SearchResult search = hyperparameter_search(train, cfg.space, derive_seed(seed, "search"));
  m.report.cv_f1 = search.best_f1;

  const OversampleResult os = oversample(train, derive_seed(seed, "final-oversample"));
  m.forest = train_forest(os.set, search.best, derive_seed(seed, "final-fit"));

  if (calib.items.empty()) {
    m.threshold = 0.5;
  } else {
    std::vector<double> probs;
    probs.reserve(calib.items.size());
    for (const auto& it : calib.items) probs.push_back(m.forest.predict_proba(it.x));
    m.threshold =
        calibrate_threshold(probs, m.report.target_prior, &m.report.threshold_candidates);
    std::int64_t predicted = 0;
    for (const double p : probs)
      if (p >= m.threshold) ++predicted;
    m.report.predicted_fraction =
        static_cast<double>(predicted) / static_cast<double>(probs.size());
  }
  return m;
}

// --- Serialization ---

namespace {

ordered_json forest_to_json(const ForestClassifier& fc) {
  ordered_json j;
  j["n_trees"] = fc.params.n_trees;
  j["max_depth"] = fc.params.max_depth;
  j["min_leaf"] = fc.params.min_leaf;
  j["mtry"] = fc.params.mtry;
  j["seed"] = fc.seed;
  j["n_features"] = fc.n_features;
  ordered_json trees = ordered_json::array();
  for (const auto& t : fc.trees) {
    ordered_json nodes = ordered_json::array();
    for (const auto& nd : t.nodes)
      nodes.push_back(ordered_json::array(
          {nd.feature, nd.threshold, nd.left, nd.right, nd.p1}));
    trees.push_back(std::move(nodes));
  }
  j["trees"] = std::move(trees);
  return j;
}

ForestClassifier forest_from_json(const ordered_json& j) {
  ForestClassifier fc;
  fc.params.n_trees = j.at("n_trees").get<int>();
  fc.params.max_depth = j.at("max_depth").get<int>();
  fc.params.min_leaf = j.at("min_leaf").get<int>();
  fc.params.mtry = j.at("mtry").get<int>();
  fc.seed = j.at("seed").get<std::uint64_t>();
  fc.n_features = j.at("n_features").get<int>();
  for (const auto& tj : j.at("trees")) {
    Tree t;
    for (const auto& nj : tj) {
      TreeNode nd;
      nd.feature = nj.at(0).get<std::int16_t>();
      nd.threshold = nj.at(1).get<std::int16_t>();
      nd.left = nj.at(2).get<std::int32_t>();
      nd.right = nj.at(3).get<std::int32_t>();
      nd.p1 = nj.at(4).get<double>();
      t.nodes.push_back(nd);
    }
    fc.trees.push_back(std::move(t));
  }
  return fc;
}

}  // namespace

void save_model(const BlindSpotModel& m, const std::string& path) {
  ordered_json j;
  j["format"] = "blindspot-model";
  j["version"] = kModelFormatVersion;
  j["feature_names"] = m.feature_names;
  j["threshold"] = m.threshold;
  j["noise"] = {{"prior", m.noise.prior},
                {"confusion", {{m.noise.confusion[0][0], m.noise.confusion[0][1]},
                               {m.noise.confusion[1][0], m.noise.confusion[1][1]}}}};
  j["report"] = {{"n_train", m.report.n_train},
                 {"n_calib", m.report.n_calib},
                 {"target_prior", m.report.target_prior},
                 {"predicted_fraction", m.report.predicted_fraction},
                 {"cv_f1", m.report.cv_f1},
                 {"degenerate", m.report.degenerate},
                 {"threshold_candidates", m.report.threshold_candidates}};
  j["forest"] = forest_to_json(m.forest);
  write_text_file(path, j.dump(2) + "\n");
}

BlindSpotModel load_model(const std::string& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("model file " + path + " is not valid JSON: " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "blindspot-model")
      throw IoError("model file " + path + ": unexpected format tag");
    if (j.at("version").get<int>() != kModelFormatVersion)
      throw IoError("model file " + path + ": unsupported version " +
                    std::to_string(j.at("version").get<int>()));
    BlindSpotModel m;
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.threshold = j.at("threshold").get<double>();
    const auto& nj = j.at("noise");
    m.noise.prior = nj.at("prior").get<double>();
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c)
        m.noise.confusion[r][c] = nj.at("confusion").at(r).at(c).get<double>();
    const auto& rj = j.at("report");
    m.report.n_train = rj.at("n_train").get<int>();
    m.report.n_calib = rj.at("n_calib").get<int>();
    m.report.target_prior = rj.at("target_prior").get<double>();
    m.report.predicted_fraction = rj.at("predicted_fraction").get<double>();
    m.report.cv_f1 = rj.at("cv_f1").get<double>();
    m.report.degenerate = rj.at("degenerate").get<bool>();
    m.report.threshold_candidates = rj.at("threshold_candidates").get<int>();
    m.forest = forest_from_json(j.at("forest"));
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("model file " + path + " is malformed: " + e.what());
  }
}

}  // namespace blindspot
