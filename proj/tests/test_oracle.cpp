#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <blindspot/catcher.hpp>
#include <blindspot/csv.hpp>
#include <blindspot/error.hpp>
#include <blindspot/oracle.hpp>
#include <blindspot/qlearn.hpp>
#include <memory>

using namespace blindspot;

namespace {

CatcherConfig tiny_cfg() {
  CatcherConfig c;
  c.width = 2;
  c.height = 2;
  c.right_region_start = 1;
  return c;
}

// Q table where every non-terminal row is {0, 1, 3}: deltas {3, 2, 0}.
QTable uniform_rows(std::int32_t n_states) {
  QTable q(n_states, 3);
  for (std::int32_t s = 0; s < n_states; ++s) {
    q.set(s, 0, 0.0);
    q.set(s, 1, 1.0);
    q.set(s, 2, 3.0);
  }
  return q;
}

}  // namespace

TEST_CASE("percentile threshold of an ascending pool") {
  const std::vector<double> pool{0, 0, 1, 2, 3, 4, 6, 8, 9, 10};

  CHECK(percentile_threshold(pool, 0.5) == doctest::Approx(3.5));    // h=5: midpoint of x[4], x[5]
  CHECK(percentile_threshold(pool, 0.9) == doctest::Approx(9.5));    // h=9: midpoint of x[8], x[9]
  CHECK(percentile_threshold(pool, 0.2) == doctest::Approx(0.5));    // h=2: midpoint of x[1], x[2]
  CHECK(percentile_threshold(pool, 0.95) == doctest::Approx(10.0));  // h=9.5: x[9]
  CHECK(percentile_threshold(pool, 0.05) == doctest::Approx(0.0));   // h=0.5: x[0]
  CHECK(percentile_threshold(pool, 0.99) == doctest::Approx(10.0));

  double prev = -1.0;
  for (double p = 0.05; p < 1.0; p += 0.05) {
    const double t = percentile_threshold(pool, p);
    CHECK(t >= prev);
    prev = t;
  }

  CHECK_THROWS_AS(percentile_threshold({}, 0.5), NumericError);
  CHECK_THROWS_AS(percentile_threshold(pool, 0.0), ConfigError);
  CHECK_THROWS_AS(percentile_threshold(pool, 1.0), ConfigError);

  const std::vector<double> single{7.0};
  CHECK(percentile_threshold(single, 0.5) == doctest::Approx(7.0));
}

TEST_CASE("strict acceptability is the argmax tie set") {
  CatcherConfig cfg;
  cfg.width = 3;
  cfg.height = 3;
  cfg.right_region_start = 2;
  CatcherEnv target(cfg, true, 1);
  RealIndex index(target.enumerate_real());
  const QTable q = value_iteration(target, Space::kReal, 0.95);

  OracleParams params;  // strict by default
  const AcceptableFunction acc = AcceptableFunction::build(target, index, q, params);
  CHECK(acc.mode() == OracleMode::kStrict);
  CHECK(acc.threshold() == 0.0);

  // good fruit directly above the paddle in the corner: left clamps in place,
  // so left and stay tie for the perfect catch and right gives it up
  const std::int32_t s = index.id_of(RealState{0, 0, 1, 0});
  CHECK(acc.is_acceptable(s, 0));
  CHECK(acc.is_acceptable(s, 1));
  CHECK_FALSE(acc.is_acceptable(s, 2));
  CHECK(acc.delta(s, 0) == doctest::Approx(0.0));
  CHECK(acc.delta(s, 2) == doctest::Approx(1.0));

  // bad fruit right above the paddle: only stepping away is acceptable
  const std::int32_t b = index.id_of(RealState{2, 2, 1, 1});
  CHECK(acc.is_acceptable(b, 0));
  CHECK_FALSE(acc.is_acceptable(b, 1));
  CHECK_FALSE(acc.is_acceptable(b, 2));

  // terminal states carry no judgment: all actions acceptable, delta 0
  const std::int32_t t = index.id_of(RealState{1, 1, 2, 0});
  for (Action a = 0; a < 3; ++a) {
    CHECK(acc.is_acceptable(t, a));
    CHECK(acc.delta(t, a) == 0.0);
  }
}

TEST_CASE("lenient acceptability thresholds the pooled deltas") {
  CatcherEnv target(tiny_cfg(), true, 1);
  RealIndex index(target.enumerate_real());
  REQUIRE(index.size() == 12);  // 6 non-terminal, 6 terminal
  const QTable q = uniform_rows(index.size());

  OracleParams params;
  params.mode = OracleMode::kLenient;
  params.percentile = 0.5;

  SUBCASE("zeros kept in the pool") {
    // pool = six copies each of {0, 2, 3}; median = 2; acceptable iff delta < 2
    const AcceptableFunction acc = AcceptableFunction::build(target, index, q, params);
    CHECK(acc.threshold() == doctest::Approx(2.0));
    for (std::int32_t s = 0; s < index.size(); ++s) {
      if (target.is_terminal(index.state(s))) continue;
      CHECK_FALSE(acc.is_acceptable(s, 0));
      CHECK_FALSE(acc.is_acceptable(s, 1));  // delta 2 sits exactly at the threshold
      CHECK(acc.is_acceptable(s, 2));
    }
    CHECK(acc.acceptable_count() == 6 * 3 + 6 * 1);
  }
  SUBCASE("zeros excluded from the pool") {
    // pool = six copies each of {2, 3}; median = 2.5; delta 2 becomes acceptable
    params.include_zero_deltas = false;
    const AcceptableFunction acc = AcceptableFunction::build(target, index, q, params);
    CHECK(acc.threshold() == doctest::Approx(2.5));
    for (std::int32_t s = 0; s < index.size(); ++s) {
      if (target.is_terminal(index.state(s))) continue;
      CHECK_FALSE(acc.is_acceptable(s, 0));
      CHECK(acc.is_acceptable(s, 1));
      CHECK(acc.is_acceptable(s, 2));
    }
  }
  SUBCASE("excluding zeros from an all-tie table leaves nothing to pool") {
    QTable flat(index.size(), 3);  // all zeros: every action ties
    params.include_zero_deltas = false;
    CHECK_THROWS_AS(AcceptableFunction::build(target, index, flat, params), NumericError);
  }
  SUBCASE("q table must match the enumeration") {
    const QTable wrong(index.size() - 1, 3);
    CHECK_THROWS_AS(AcceptableFunction::build(target, index, wrong, params), DomainError);
  }
}

TEST_CASE("oracle params parse and validate") {
  OracleParams p;
  p.mode = OracleMode::kLenient;
  p.percentile = 1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.percentile = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.percentile = 0.5;
  CHECK_NOTHROW(p.validate());
  p.tie_eps = -1e-9;
  CHECK_THROWS_AS(p.validate(), ConfigError);

  // strict mode ignores the percentile entirely
  OracleParams s;
  s.percentile = 5.0;
  CHECK_NOTHROW(s.validate());

  const KVConfig cfg = KVConfig::parse_text(
      "oracle.mode = lenient\noracle.include_zero_deltas = false\n", "oracle.cfg");
  const OracleParams parsed = OracleParams::from_config(cfg, 0.7);
  CHECK(parsed.mode == OracleMode::kLenient);
  CHECK(parsed.percentile == 0.7);  // falls back to the domain default
  CHECK_FALSE(parsed.include_zero_deltas);
  CHECK_THROWS_AS(
      OracleParams::from_config(KVConfig::parse_text("oracle.mode = fuzzy\n", "o.cfg"), 0.7),
      ConfigError);
}

TEST_CASE("oracle prefers the agent's action within the optimal set") {
  CatcherEnv target(tiny_cfg(), true, 1);
  auto real_index = std::make_shared<RealIndex>(target.enumerate_real());
  auto sim_index = std::make_shared<SimIndex>(target.enumerate_sim());
  const QTable q_real = value_iteration(target, Space::kReal, 0.95);

  // at (0,0,0,good) both left (clamped) and stay catch perfectly: tie {0,1}
  const RealState s{0, 0, 0, 0};
  const std::int32_t rid = real_index->id_of(s);
  const std::int32_t sid = sim_index->id_of(target.sim_observe(s));

  Policy pi;
  pi.actions.assign(static_cast<std::size_t>(sim_index->size()), 0);

  OracleParams params;
  {
    pi.actions[static_cast<std::size_t>(sid)] = 1;  // agent picks the tied alternative
    Oracle oracle(target, real_index, sim_index, q_real, pi, params);
    CHECK(oracle.in_optimal_set(rid, 0));
    CHECK(oracle.in_optimal_set(rid, 1));
    CHECK_FALSE(oracle.in_optimal_set(rid, 2));
    CHECK(oracle.policy_action(s) == 1);  // tie resolved toward the agent
  }
  {
    pi.actions[static_cast<std::size_t>(sid)] = 2;  // agent picks a suboptimal action
    Oracle oracle(target, real_index, sim_index, q_real, pi, params);
    CHECK(oracle.policy_action(s) == 0);  // lowest-index optimal instead
    CHECK_FALSE(oracle.acceptable(s, 2));
    CHECK(oracle.acceptable(s, 0));
  }
}

TEST_CASE("mismatch equals strict unacceptability under agent-preferring ties") {
  CatcherConfig cfg;
  cfg.width = 4;
  cfg.height = 3;
  cfg.right_region_start = 2;
  CatcherEnv source(cfg, false, 1);
  CatcherEnv target(cfg, true, 1);
  auto real_index = std::make_shared<RealIndex>(target.enumerate_real());
  auto sim_index = std::make_shared<SimIndex>(target.enumerate_sim());
  const QTable q_real = value_iteration(target, Space::kReal, 0.95);
  const Policy pi = greedy_policy(value_iteration(source, Space::kSim, 0.95));

  Oracle oracle(target, real_index, sim_index, q_real, pi, OracleParams{});
  for (const auto& s : real_index->states()) {
    if (target.is_terminal(s)) continue;
    const Action agent = pi.at(sim_index->id_of(target.sim_observe(s)));
    const bool mismatch = oracle.policy_action(s) != agent;
    CHECK(mismatch == !oracle.acceptable(s, agent));
  }
}

TEST_CASE("ground truth marks a sim state blind iff a preimage condemns the agent") {
  CatcherConfig cfg;
  cfg.width = 5;
  cfg.height = 4;
  cfg.right_region_start = 3;
  CatcherEnv source(cfg, false, 1);
  CatcherEnv target(cfg, true, 1);
  RealIndex real_index(target.enumerate_real());
  SimIndex sim_index(target.enumerate_sim());
  const QTable q_real = value_iteration(target, Space::kReal, 0.95);
  const Policy pi = greedy_policy(value_iteration(source, Space::kSim, 0.95));

  OracleParams params;
  const AcceptableFunction acc = AcceptableFunction::build(target, real_index, q_real, params);
  const BlindSpotTruth truth = ground_truth_blind_spots(target, sim_index, real_index, pi, acc);
  REQUIRE(static_cast<std::int32_t>(truth.blind.size()) == sim_index.size());
  REQUIRE(truth.witness.size() == truth.blind.size());

  // brute force re-derivation
  for (std::int32_t sid = 0; sid < sim_index.size(); ++sid) {
    bool blind = false;
    std::int32_t witness = -1;
    for (std::int32_t rid = 0; rid < real_index.size(); ++rid) {
      const RealState& r = real_index.state(rid);
      if (target.is_terminal(r)) continue;
      if (sim_index.id_of(target.sim_observe(r)) != sid) continue;
      if (!acc.is_acceptable(rid, pi.at(sid))) {
        blind = true;
        witness = rid;
        break;
      }
    }
    CHECK(static_cast<bool>(truth.blind[static_cast<std::size_t>(sid)]) == blind);
    CHECK(truth.witness[static_cast<std::size_t>(sid)] == witness);
  }

  // the aliased bad fruit makes at least one observed state blind, and
  // states on the terminal row never are
  CHECK(truth.n_blind() > 0);
  for (std::int32_t sid = 0; sid < sim_index.size(); ++sid)
    if (sim_index.state(sid).v[2] == cfg.height - 1)
      CHECK_FALSE(static_cast<bool>(truth.blind[static_cast<std::size_t>(sid)]));
}

TEST_CASE("truth export lists one row per observed state") {
  CatcherEnv target(tiny_cfg(), true, 1);
  RealIndex real_index(target.enumerate_real());
  SimIndex sim_index(target.enumerate_sim());
  const QTable q_real = value_iteration(target, Space::kReal, 0.95);
  Policy pi;
  pi.actions.assign(static_cast<std::size_t>(sim_index.size()), 2);  // always push right

  const AcceptableFunction acc =
      AcceptableFunction::build(target, real_index, q_real, OracleParams{});
  const BlindSpotTruth truth = ground_truth_blind_spots(target, sim_index, real_index, pi, acc);

  const std::string path = "/tmp/bs_test_truth.csv";
  export_truth_csv(truth, target, sim_index, path);
  const CsvTable t = read_csv(path);
  REQUIRE(static_cast<std::int32_t>(t.rows.size()) == sim_index.size());
  const int sid_c = t.col("sim_id"), blind_c = t.col("blind"), wit_c = t.col("witness_real_id");
  for (const auto& row : t.rows) {
    const auto sid = static_cast<std::size_t>(std::stol(row[static_cast<std::size_t>(sid_c)]));
    CHECK(row[static_cast<std::size_t>(blind_c)] == (truth.blind[sid] ? "1" : "0"));
    CHECK(std::stol(row[static_cast<std::size_t>(wit_c)]) == truth.witness[sid]);
  }
}
