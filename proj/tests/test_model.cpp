#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <blindspot/catcher.hpp>
#include <blindspot/csv.hpp>
#include <blindspot/error.hpp>
#include <blindspot/model.hpp>
#include <cmath>

using namespace blindspot;

namespace {

// 14 safe and 6 blind instances, cleanly separated by the second feature.
TrainingSet split_fixture() {
  TrainingSet ts;
  ts.feature_names = {"f", "g"};
  std::int32_t id = 0;
  for (int i = 0; i < 14; ++i) ts.items.push_back({StateVec{i, 0}, 0, 1.0, id++});
  for (int i = 0; i < 6; ++i) ts.items.push_back({StateVec{i, 9}, 1, 1.0, id++});
  return ts;
}

ModelTrainConfig quick_cfg() {
  ModelTrainConfig cfg;
  cfg.space.n_trees = {10};
  cfg.space.max_depth = {4};
  cfg.space.min_leaf = {1};
  cfg.space.n_trials = 2;
  return cfg;
}

}  // namespace

TEST_CASE("training sets derive from aggregation results") {
  CatcherConfig ccfg;
  ccfg.width = 2;
  ccfg.height = 2;
  ccfg.right_region_start = 1;
  CatcherEnv target(ccfg, true, 1);
  SimIndex sim_index(target.enumerate_sim());

  AggregatedDataset agg;
  agg.method = "ds";
  agg.states.push_back({3, 2, 1, 0.9, 1, 0.9});
  agg.states.push_back({5, 4, 0, 0.2, 0, 0.8});

  const TrainingSet ts = build_training_set(agg, target, sim_index);
  CHECK(ts.feature_names == target.sim_fields());
  REQUIRE(ts.items.size() == 2);
  CHECK(ts.items[0].x == sim_index.state(3).v);
  CHECK(ts.items[0].label == 1);
  CHECK(ts.items[0].weight == doctest::Approx(0.9));
  CHECK(ts.items[0].origin_id == 3);
  CHECK(ts.items[1].weight == doctest::Approx(0.8));
  CHECK(ts.items[1].origin_id == 5);

  AggregatedDataset al;
  al.method = "al";
  al.instances.push_back({0, 0, 1, 3, 1});
  al.instances.push_back({1, 0, 2, 3, 0});
  al.instances.push_back({2, 0, 4, 6, 1});
  const TrainingSet raw = build_training_set(al, target, sim_index);
  REQUIRE(raw.items.size() == 3);
  for (std::size_t i = 0; i < raw.items.size(); ++i) {
    CHECK(raw.items[i].weight == 1.0);  // every raw label counts once
    CHECK(raw.items[i].origin_id == static_cast<std::int32_t>(i));
    CHECK(raw.items[i].x == sim_index.state(al.instances[i].sim_id).v);
    CHECK(raw.items[i].label == al.instances[i].label);
  }

  AggregatedDataset empty;
  empty.method = "ds";
  CHECK_THROWS_AS(build_training_set(empty, target, sim_index), NumericError);
}

TEST_CASE("threshold calibration matches the target prior") {
  int candidates = 0;
  const double t = calibrate_threshold({0.1, 0.2, 0.8, 0.9}, 0.5, &candidates);
  CHECK(t == doctest::Approx(0.8));  // predicts exactly half the states blind
  CHECK(candidates == 6);            // four distinct probabilities plus {0, 1}

  // all candidates tie at gap 0.5: the largest threshold wins
  CHECK(calibrate_threshold({0.5, 0.5}, 0.5) == doctest::Approx(1.0));

  // extreme targets
  CHECK(calibrate_threshold({0.1, 0.2}, 0.0) == doctest::Approx(1.0));
  CHECK(calibrate_threshold({0.1, 0.2}, 1.0) == doctest::Approx(0.1));

  CHECK_THROWS_AS(calibrate_threshold({}, 0.5), NumericError);
  CHECK_THROWS_AS(calibrate_threshold({0.5}, -0.1), NumericError);
  CHECK_THROWS_AS(calibrate_threshold({0.5}, 1.1), NumericError);
}

TEST_CASE("training splits stratified and calibrates the threshold") {
  const TrainingSet ts = split_fixture();
  const BlindSpotModel m = train_model(ts, quick_cfg(), 42);

  // round(0.3 * 14) = 4 safe and round(0.3 * 6) = 2 blind go to calibration
  CHECK(m.report.n_train == 14);
  CHECK(m.report.n_calib == 6);
  CHECK(m.report.target_prior == doctest::Approx(4.0 / 14.0));
  CHECK_FALSE(m.report.degenerate);
  CHECK(m.report.cv_f1 > 0.0);
  CHECK(m.report.threshold_candidates >= 2);

  // the calibrated threshold reproduces the training prior as closely as the
  // calibration sample allows: within one instance
  const double gap = std::fabs(m.report.predicted_fraction - m.report.target_prior);
  CHECK(gap * m.report.n_calib <= 1.0 + 1e-9);

  // separable data stays separable through the pipeline
  CHECK(m.predict(StateVec{3, 9}).blind);
  CHECK_FALSE(m.predict(StateVec{3, 0}).blind);
  CHECK(m.predict(StateVec{3, 9}).prob > m.predict(StateVec{3, 0}).prob);
}

TEST_CASE("training is deterministic in the seed") {
  const TrainingSet ts = split_fixture();
  const BlindSpotModel a = train_model(ts, quick_cfg(), 9);
  const BlindSpotModel b = train_model(ts, quick_cfg(), 9);
  CHECK(a.threshold == b.threshold);
  for (int i = 0; i < 14; ++i)
    for (int g : {0, 9})
      CHECK(a.predict(StateVec{i, g}).prob == b.predict(StateVec{i, g}).prob);
}

TEST_CASE("tiny classes never lose their last training instance") {
  TrainingSet ts;
  ts.feature_names = {"f"};
  ts.items.push_back({StateVec{0}, 0, 1.0, 0});
  ts.items.push_back({StateVec{9}, 1, 1.0, 1});
  ModelTrainConfig cfg = quick_cfg();
  cfg.calib_fraction = 0.9;  // would round both singletons into calibration

  const BlindSpotModel m = train_model(ts, cfg, 3);
  CHECK(m.report.n_train == 2);
  CHECK(m.report.n_calib == 0);
  CHECK(m.threshold == 0.5);  // nothing to calibrate on
}

TEST_CASE("single-class input degenerates to a constant classifier") {
  TrainingSet safe;
  safe.feature_names = {"f"};
  for (int i = 0; i < 5; ++i) safe.items.push_back({StateVec{i}, 0, 1.0, i});
  const BlindSpotModel m = train_model(safe, quick_cfg(), 1);
  CHECK(m.report.degenerate);
  CHECK(m.threshold == 0.5);
  CHECK(m.report.target_prior == doctest::Approx(0.0));
  for (int i = 0; i < 8; ++i) {
    CHECK(m.predict(StateVec{i}).prob == doctest::Approx(0.0));
    CHECK_FALSE(m.predict(StateVec{i}).blind);
  }

  TrainingSet blind;
  blind.feature_names = {"f"};
  for (int i = 0; i < 5; ++i) blind.items.push_back({StateVec{i}, 1, 1.0, i});
  const BlindSpotModel mb = train_model(blind, quick_cfg(), 1);
  CHECK(mb.report.degenerate);
  CHECK(mb.predict(StateVec{2}).prob == doctest::Approx(1.0));
  CHECK(mb.predict(StateVec{2}).blind);

  TrainingSet empty;
  empty.feature_names = {"f"};
  CHECK_THROWS_AS(train_model(empty, quick_cfg(), 1), NumericError);
}

TEST_CASE("models round trip through json byte for byte") {
  NoiseModel noise;
  noise.prior = 0.37;
  noise.confusion[0][0] = 0.95;
  noise.confusion[0][1] = 0.05;
  noise.confusion[1][0] = 0.2;
  noise.confusion[1][1] = 0.8;
  const BlindSpotModel m = train_model(split_fixture(), quick_cfg(), 21, noise);

  const std::string path = "/tmp/bs_test_model.json";
  save_model(m, path);
  const BlindSpotModel loaded = load_model(path);

  CHECK(loaded.feature_names == m.feature_names);
  CHECK(loaded.threshold == m.threshold);
  CHECK(loaded.noise.prior == m.noise.prior);
  CHECK(loaded.noise.confusion[1][1] == m.noise.confusion[1][1]);
  CHECK(loaded.report.n_train == m.report.n_train);
  CHECK(loaded.report.target_prior == m.report.target_prior);
  REQUIRE(loaded.forest.trees.size() == m.forest.trees.size());
  for (int i = 0; i < 14; ++i)
    for (int g : {0, 9})
      CHECK(loaded.predict(StateVec{i, g}).prob == m.predict(StateVec{i, g}).prob);

  const std::string again = "/tmp/bs_test_model2.json";
  save_model(loaded, again);
  CHECK(read_text_file(again) == read_text_file(path));
}

TEST_CASE("model loading rejects corrupt files") {
  CHECK_THROWS_AS(load_model("/tmp/bs_missing_model.json"), IoError);

  write_text_file("/tmp/bs_bad_model.json", "{ not json");
  CHECK_THROWS_AS(load_model("/tmp/bs_bad_model.json"), IoError);

  write_text_file("/tmp/bs_tag_model.json", R"({"format": "something-else", "version": 1})");
  CHECK_THROWS_AS(load_model("/tmp/bs_tag_model.json"), IoError);

  // valid JSON with the right tag but missing fields
  write_text_file("/tmp/bs_trunc_model.json",
                  R"({"format": "blindspot-model", "version": 1})");
  CHECK_THROWS_AS(load_model("/tmp/bs_trunc_model.json"), IoError);
}

TEST_CASE("model training configuration validates") {
  ModelTrainConfig cfg = quick_cfg();
  cfg.calib_fraction = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.calib_fraction = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  const KVConfig kv = KVConfig::parse_text("model.calib_fraction = 0.25\n", "m.cfg");
  const ModelTrainConfig parsed = ModelTrainConfig::from_config(kv);
  CHECK(parsed.calib_fraction == 0.25);
  CHECK(parsed.space.n_trials == 20);
}
