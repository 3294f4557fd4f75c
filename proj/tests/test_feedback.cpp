#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <blindspot/catcher.hpp>
#include <blindspot/csv.hpp>
#include <blindspot/error.hpp>
#include <blindspot/feedback.hpp>
#include <blindspot/qlearn.hpp>
#include <memory>
#include <set>

using namespace blindspot;

namespace {

struct Fixture {
  CatcherConfig cfg;
  std::unique_ptr<CatcherEnv> source;
  std::unique_ptr<CatcherEnv> target;
  std::shared_ptr<RealIndex> real_index;
  std::shared_ptr<SimIndex> sim_index;
  Policy pi;
  std::unique_ptr<Oracle> oracle;
  BlindSpotTruth truth;

  explicit Fixture(OracleParams params = OracleParams{}, int width = 5, int height = 4) {
    cfg.width = width;
    cfg.height = height;
    cfg.right_region_start = (width + 1) / 2;
    source = std::make_unique<CatcherEnv>(cfg, false, 1);
    target = std::make_unique<CatcherEnv>(cfg, true, 1);
    real_index = std::make_shared<RealIndex>(target->enumerate_real());
    sim_index = std::make_shared<SimIndex>(target->enumerate_sim());
    const QTable q_real = value_iteration(*target, Space::kReal, 0.95);
    pi = greedy_policy(value_iteration(*source, Space::kSim, 0.95));
    oracle = std::make_unique<Oracle>(*target, real_index, sim_index, q_real, pi, params);
    truth = ground_truth_blind_spots(*target, *sim_index, *real_index, pi,
                                     oracle->acceptable_fn());
  }
};

}  // namespace

TEST_CASE("protocol names parse and print") {
  for (const char* name : {"R-A", "R-AM", "D-A", "D-AM", "C"})
    CHECK(protocol_name(parse_protocol(name)) == name);
  CHECK(parse_protocol("C") == ProtocolKind::kCorrections);
  CHECK_THROWS_AS(parse_protocol("ra"), ConfigError);
  CHECK_THROWS_AS(parse_protocol(""), ConfigError);
}

TEST_CASE("every protocol consumes exactly the budget") {
  Fixture f;
  for (const char* name : {"R-A", "R-AM", "D-A", "D-AM", "C"}) {
    const auto ds = collect_feedback(*f.target, *f.oracle, parse_protocol(name), 137, 99);
    CHECK(ds.total_labels() == 137);
    CHECK(ds.protocol == name);
    CHECK(ds.budget == 137);
    for (const auto& e : ds.events) {
      CHECK(e.real_id >= 0);
      CHECK(e.real_id < f.real_index->size());
      CHECK_FALSE(f.target->is_terminal(f.real_index->state(e.real_id)));
      // the recorded observed state is the projection of the visited state
      CHECK(e.sim_id ==
            f.sim_index->id_of(f.target->sim_observe(f.real_index->state(e.real_id))));
      CHECK((e.label == 0 || e.label == 1));
    }
  }
  CHECK_THROWS_AS(collect_feedback(*f.target, *f.oracle, ProtocolKind::kCorrections, 0, 99),
                  ConfigError);
}

TEST_CASE("random protocols sample one state per event") {
  Fixture f;
  const auto ds = collect_feedback(*f.target, *f.oracle, ProtocolKind::kRandomAcceptable, 64, 7);
  for (std::size_t i = 0; i < ds.events.size(); ++i) {
    CHECK(ds.events[i].episode == static_cast<std::int32_t>(i));
    CHECK(ds.events[i].step == 0);
  }
  // labels are the oracle's acceptability judgment of the agent's action
  for (const auto& e : ds.events) {
    const RealState& s = f.real_index->state(e.real_id);
    const Action agent = f.pi.at(e.sim_id);
    CHECK(e.label == (f.oracle->acceptable(s, agent) ? 0 : 1));
  }
}

TEST_CASE("episode protocols walk trajectories and truncate on budget") {
  Fixture f;  // height 4: every episode visits exactly 3 non-terminal states
  for (const char* name : {"D-A", "D-AM", "C"}) {
    const auto ds = collect_feedback(*f.target, *f.oracle, parse_protocol(name), 7, 5);
    REQUIRE(ds.total_labels() == 7);
    // episodes 0 and 1 complete (3 steps each), episode 2 is cut after 1
    for (std::size_t i = 0; i < 7; ++i) {
      CHECK(ds.events[i].episode == static_cast<std::int32_t>(i / 3));
      CHECK(ds.events[i].step == static_cast<std::int32_t>(i % 3));
    }
    // within an episode the fruit column never changes
    CHECK(f.real_index->state(ds.events[0].real_id).v[1] ==
          f.real_index->state(ds.events[2].real_id).v[1]);
  }
}

TEST_CASE("demonstrations follow the oracle while corrections follow the agent") {
  Fixture f;
  // demo trajectories visit states along the oracle's play, so the paddle
  // position at step k+1 is the oracle action applied at step k
  const auto demo = collect_feedback(*f.target, *f.oracle, ProtocolKind::kDemoAcceptable, 30, 11);
  for (std::size_t i = 0; i + 1 < demo.events.size(); ++i) {
    if (demo.events[i + 1].episode != demo.events[i].episode) continue;
    const RealState& s = f.real_index->state(demo.events[i].real_id);
    const Action a = f.oracle->policy_action(s);
    CHECK(f.target->outcomes(s, a).front().next ==
          f.real_index->state(demo.events[i + 1].real_id));
  }

  // corrections execute the agent's action exactly on label-0 steps and the
  // oracle's override on label-1 steps
  const auto corr = collect_feedback(*f.target, *f.oracle, ProtocolKind::kCorrections, 30, 11);
  for (std::size_t i = 0; i + 1 < corr.events.size(); ++i) {
    if (corr.events[i + 1].episode != corr.events[i].episode) continue;
    const RealState& s = f.real_index->state(corr.events[i].real_id);
    const Action agent = f.pi.at(corr.events[i].sim_id);
    const Action exec = corr.events[i].label == 0 ? agent : f.oracle->policy_action(s);
    CHECK(f.target->outcomes(s, exec).front().next ==
          f.real_index->state(corr.events[i + 1].real_id));
  }
}

TEST_CASE("strict oracle makes mismatch and acceptability labels identical") {
  Fixture f;
  for (auto [am, a] : {std::pair{"R-AM", "R-A"}, std::pair{"D-AM", "D-A"}}) {
    const auto ds_am = collect_feedback(*f.target, *f.oracle, parse_protocol(am), 300, 21);
    const auto ds_a = collect_feedback(*f.target, *f.oracle, parse_protocol(a), 300, 21);
    REQUIRE(ds_am.events.size() == ds_a.events.size());
    for (std::size_t i = 0; i < ds_a.events.size(); ++i) {
      CHECK(ds_am.events[i].real_id == ds_a.events[i].real_id);
      CHECK(ds_am.events[i].label == ds_a.events[i].label);
    }
  }
}

TEST_CASE("acceptability labels never implicate a truth-safe observed state") {
  Fixture f;
  for (const char* name : {"R-A", "D-A", "C"}) {
    const auto ds = collect_feedback(*f.target, *f.oracle, parse_protocol(name), 500, 3);
    for (const auto& e : ds.events)
      if (e.label == 1) CHECK(f.truth.blind[static_cast<std::size_t>(e.sim_id)] == 1);
  }
}

TEST_CASE("lenient mismatch labels carry noise that acceptability labels do not") {
  OracleParams params;
  params.mode = OracleMode::kLenient;
  params.percentile = 0.95;
  Fixture f(params, 11, 11);  // full-size task: plenty of acceptable mismatches

  const auto am = collect_feedback(*f.target, *f.oracle, ProtocolKind::kRandomMismatch, 2000, 13);
  long long false_pos = 0;
  for (const auto& e : am.events)
    if (e.label == 1 && !f.truth.blind[static_cast<std::size_t>(e.sim_id)]) ++false_pos;
  CHECK(false_pos > 0);

  const auto ra = collect_feedback(*f.target, *f.oracle, ProtocolKind::kRandomAcceptable, 2000, 13);
  for (const auto& e : ra.events)
    if (e.label == 1) CHECK(f.truth.blind[static_cast<std::size_t>(e.sim_id)] == 1);
}

TEST_CASE("collection is deterministic in the seed") {
  Fixture f;
  for (const char* name : {"R-A", "C"}) {
    const auto a = collect_feedback(*f.target, *f.oracle, parse_protocol(name), 100, 42);
    const auto b = collect_feedback(*f.target, *f.oracle, parse_protocol(name), 100, 42);
    const auto c = collect_feedback(*f.target, *f.oracle, parse_protocol(name), 100, 43);
    REQUIRE(a.events.size() == b.events.size());
    bool same = true;
    for (std::size_t i = 0; i < a.events.size(); ++i) {
      CHECK(a.events[i].real_id == b.events[i].real_id);
      CHECK(a.events[i].label == b.events[i].label);
    }
    std::size_t diff = 0;
    for (std::size_t i = 0; i < std::min(a.events.size(), c.events.size()); ++i)
      if (a.events[i].real_id != c.events[i].real_id) ++diff;
    CHECK(diff > 0);
    (void)same;
  }
}

TEST_CASE("seen sim ids are distinct and ascending") {
  Fixture f;
  const auto ds = collect_feedback(*f.target, *f.oracle, ProtocolKind::kRandomAcceptable, 400, 9);
  const auto ids = ds.seen_sim_ids();
  std::set<std::int32_t> expect;
  for (const auto& e : ds.events) expect.insert(e.sim_id);
  REQUIRE(ids.size() == expect.size());
  std::size_t i = 0;
  for (std::int32_t id : expect) CHECK(ids[i++] == id);
}

TEST_CASE("feedback csv round trips") {
  Fixture f;
  const auto ds = collect_feedback(*f.target, *f.oracle, ProtocolKind::kDemoMismatch, 50, 77);
  const std::string path = "/tmp/bs_test_feedback.csv";
  export_feedback_csv(ds, *f.target, *f.real_index, *f.sim_index, path);

  const CsvTable t = read_csv(path);
  REQUIRE(t.rows.size() == 50);
  CHECK(t.header[0] == "episode");
  CHECK(t.col("real_x_p") == 3);
  CHECK(t.col("sim_id") == 7);
  CHECK(t.col("label") == 11);

  const auto back = import_feedback_csv(path, ds.protocol, ds.seed);
  REQUIRE(back.events.size() == ds.events.size());
  CHECK(back.protocol == ds.protocol);
  CHECK(back.seed == ds.seed);
  CHECK(back.budget == ds.budget);
  for (std::size_t i = 0; i < ds.events.size(); ++i) {
    CHECK(back.events[i].episode == ds.events[i].episode);
    CHECK(back.events[i].step == ds.events[i].step);
    CHECK(back.events[i].real_id == ds.events[i].real_id);
    CHECK(back.events[i].sim_id == ds.events[i].sim_id);
    CHECK(back.events[i].label == ds.events[i].label);
  }

  CHECK_THROWS_AS(import_feedback_csv("/tmp/bs_missing_feedback.csv", "R-A", 1), IoError);
}

TEST_CASE("collection rejects a mismatched environment") {
  Fixture f;
  CatcherEnv other(f.cfg, false, 1);  // source env, not the oracle's target
  CHECK_THROWS_AS(collect_feedback(other, *f.oracle, ProtocolKind::kRandomAcceptable, 10, 1),
                  DomainError);
}
